"""Random game generation, batch solving and the dataset CSV format."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .game import CardDistribution, GameSpec, build_game
from .metrics import call_probabilities, range_advantage_batch
from .solver import SolverConfig, solve_batch

CHUNK_SIZE = 250
OFF_PATH_BET_MASS = 1e-4
SIG_DIGITS = 12


def sample_simplex(n: int, rng: np.random.Generator) -> CardDistribution:
    """Uniform draw from the (n-1)-simplex: normalized unit exponentials."""
    if n < 2:
        raise ValueError("n must be at least 2")
    x = rng.standard_exponential(n)
    return CardDistribution(x / x.sum())


def game_rng(master_seed: int, bet_index: int, game_index: int) -> np.random.Generator:
    """Per-game generator keyed by ``(master_seed, bet_index, game_index)``.

    Uses numpy's SeedSequence hashing, so a game's draws do not depend on
    which other games were generated or in what order.
    """
    return np.random.default_rng(np.random.SeedSequence([master_seed, bet_index, game_index]))


def _round(x: float) -> float:
    return float(f"{x:.{SIG_DIGITS}g}")


@dataclass(frozen=True)
class DatasetRow:
    """One solved game.  Float fields are stored at 12 significant digits."""

    game_id: int
    bet_size: float
    mdf: float
    ra: float
    odf: float
    exploitability: float
    p1_bet_mass: float
    p_weights: tuple[float, ...]
    q_weights: tuple[float, ...]

    @property
    def off_path(self) -> bool:
        """Player 1 (almost) never bets, so the call frequencies are unpinned."""
        return self.p1_bet_mass < OFF_PATH_BET_MASS


@dataclass(frozen=True)
class GenConfig:
    games_per_bet_size: int = 5000
    bet_sizes: tuple[float, ...] = (0.5, 0.75, 1.0)
    n: int = 10
    pot: float = 1.0
    stack: float = 1.0
    master_seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)
    shared_distributions: bool = False

    def __post_init__(self):
        if self.games_per_bet_size < 1:
            raise ValueError("games_per_bet_size must be positive")
        if not self.bet_sizes:
            raise ValueError("bet_sizes must be non-empty")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.pot <= 0 or self.stack <= 0:
            raise ValueError("pot and stack must be positive")
        for b in self.bet_sizes:
            if not 0 < b * self.pot <= self.stack:
                raise ValueError(f"bet size {b!r} x pot must lie in (0, stack]")
        object.__setattr__(self, "bet_sizes", tuple(float(b) for b in self.bet_sizes))

    @property
    def total_games(self) -> int:
        return self.games_per_bet_size * len(self.bet_sizes)


def _chunk_tasks(config: GenConfig) -> list[tuple[GenConfig, int, int, int]]:
    tasks = []
    for bi in range(len(config.bet_sizes)):
        for start in range(0, config.games_per_bet_size, CHUNK_SIZE):
            stop = min(start + CHUNK_SIZE, config.games_per_bet_size)
            tasks.append((config, bi, start, stop))
    return tasks


def _solve_chunk(task) -> list[DatasetRow]:
    config, bi, start, stop = task
    bet = config.bet_sizes[bi] * config.pot
    trees, pq = [], []
    for gi in range(start, stop):
        rng = game_rng(config.master_seed, 0 if config.shared_distributions else bi, gi)
        p = sample_simplex(config.n, rng)
        q = sample_simplex(config.n, rng)
        trees.append(build_game(GameSpec(config.n, p, q, config.pot, config.stack, (bet,), (bet,))))
        pq.append((p.as_array(), q.as_array()))
    reports = solve_batch(trees, config.solver)
    P = np.array([a for a, _ in pq])
    Q = np.array([b for _, b in pq])
    ras = range_advantage_batch(P, Q)
    mdf = config.pot / (bet + config.pot)
    rows = []
    for k, (gi, rep) in enumerate(zip(range(start, stop), reports)):
        s1, s2 = rep.profile
        bet_probs = s1.probs[0][:, trees[k].nodes[0].actions.index(f"bet {bet:g}")]
        calls = call_probabilities(s2)
        rows.append(DatasetRow(
            game_id=bi * config.games_per_bet_size + gi,
            bet_size=_round(config.bet_sizes[bi]),
            mdf=_round(mdf),
            ra=_round(min(max(float(ras[k]), 0.0), 1.0)),
            odf=_round(min(max(float(np.dot(Q[k], calls)), 0.0), 1.0)),
            exploitability=_round(rep.exploitability),
            p1_bet_mass=_round(min(max(float(np.dot(P[k], bet_probs)), 0.0), 1.0)),
            p_weights=tuple(_round(x) for x in P[k]),
            q_weights=tuple(_round(x) for x in Q[k]),
        ))
    return rows


def generate_dataset(config: GenConfig, workers: int = 1,
                     progress: Callable[[int, int], None] | None = None) -> list[DatasetRow]:
    """Sample, solve and measure ``games_per_bet_size`` games per bet size.

    Games are solved in fixed chunks; rows come back ordered by ``game_id``
    and are identical for any ``workers`` count.
    """
    tasks = _chunk_tasks(config)
    rows: list[DatasetRow] = []
    done = 0
    if workers <= 1:
        results = map(_solve_chunk, tasks)
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        results = pool.map(_solve_chunk, tasks)
    try:
        for chunk in results:
            rows.extend(chunk)
            done += len(chunk)
            if progress is not None:
                progress(done, config.total_games)
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    rows.sort(key=lambda r: r.game_id)
    return rows


class DatasetFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def csv_header(n: int) -> list[str]:
    return (["game_id", "bet_size", "mdf", "ra", "odf", "exploitability", "p1_bet_mass"]
            + [f"p_{i}" for i in range(1, n + 1)] + [f"q_{i}" for i in range(1, n + 1)])


def _fmt(x: float) -> str:
    return f"{x:.{SIG_DIGITS}g}"


def write_csv(rows: Sequence[DatasetRow], path) -> None:
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to write")
    n = len(rows[0].p_weights)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(csv_header(n))
        for r in rows:
            if len(r.p_weights) != n or len(r.q_weights) != n:
                raise ValueError(f"game {r.game_id}: deck size differs from first row")
            writer.writerow(
                [str(r.game_id)]
                + [_fmt(v) for v in (r.bet_size, r.mdf, r.ra, r.odf, r.exploitability, r.p1_bet_mass)]
                + [_fmt(v) for v in r.p_weights] + [_fmt(v) for v in r.q_weights])


def _parse_row(fields: list[str], n: int, line: int) -> DatasetRow:
    try:
        game_id = int(fields[0])
        vals = [float(x) for x in fields[1:]]
    except ValueError as exc:
        raise DatasetFormatError(line, f"bad number ({exc})") from None
    if any(not math.isfinite(v) for v in vals):
        raise DatasetFormatError(line, "non-finite value")
    bet, mdf_v, ra, odf_v, expl, mass = vals[:6]
    p, q = tuple(vals[6:6 + n]), tuple(vals[6 + n:])
    for name, w in (("p", p), ("q", q)):
        total = math.fsum(w)
        if any(x < 0 for x in w) or abs(total - 1) > 1e-9:
            raise DatasetFormatError(line, f"game {game_id}: {name} weights sum to {total:.6g}, not 1")
    for name, v in (("ra", ra), ("odf", odf_v), ("p1_bet_mass", mass), ("mdf", mdf_v)):
        if not 0 <= v <= 1:
            raise DatasetFormatError(line, f"game {game_id}: {name}={v!r} outside [0, 1]")
    if bet <= 0:
        raise DatasetFormatError(line, f"game {game_id}: bet_size must be positive")
    if abs(mdf_v - 1 / (1 + bet)) > 1e-11:
        raise DatasetFormatError(line, f"game {game_id}: mdf {mdf_v!r} inconsistent with bet_size {bet!r}")
    return DatasetRow(game_id, bet, mdf_v, ra, odf_v, expl, mass, p, q)


def read_csv(path) -> list[DatasetRow]:
    """Parse a dataset CSV, validating the header and every row."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError(1, "empty file") from None
        n = (len(header) - 7) // 2
        if n < 2 or header != csv_header(n):
            raise DatasetFormatError(1, "header does not match the dataset schema")
        rows = []
        for fields in reader:
            line = reader.line_num
            if not fields:
                continue
            if len(fields) != len(header):
                raise DatasetFormatError(line, f"expected {len(header)} fields, got {len(fields)}")
            rows.append(_parse_row(fields, n, line))
    return rows


def filter_rows(rows: Iterable[DatasetRow], bet_size: float | None = None,
                on_path_only: bool = False) -> list[DatasetRow]:
    out = []
    for r in rows:
        if bet_size is not None and not math.isclose(r.bet_size, bet_size):
            continue
        if on_path_only and r.off_path:
            continue
        out.append(r)
    return out
