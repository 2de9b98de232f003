"""Command-line entry point: ``pokerrule {solve,gen,fit,rule,plot}``.

Exit codes: 0 success, 1 I/O error, 2 invalid input.  Results go to standard
output; progress and diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import datagen, plot, regress
from .game import GameSpec, build_game
from .metrics import mdf as compute_mdf
from .solver import SolverConfig, solve

EXIT_IO = 1
EXIT_INVALID = 2


class UsageError(Exception):
    pass


def _err(msg: str) -> None:
    print(f"pokerrule: {msg}", file=sys.stderr)


def _fmt_prob(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".") if x < 1 else "1"


def format_listing(report) -> str:
    """Strategy listing in the style ``Card 9: Bet 1 pr. 1``."""
    lines = []
    for strategy in report.profile:
        tree = strategy.tree
        for nd in tree.decision_nodes:
            if nd.player != strategy.player:
                continue
            lines.append(f"Player {nd.player}, {nd.name}:")
            deal = tree.spec.p if strategy.player == 1 else tree.spec.q
            for card in range(1, tree.n + 1):
                if deal.weights[card - 1] == 0:
                    continue
                row = strategy.at(nd.index, card)
                parts = [f"{a.capitalize()} pr. {_fmt_prob(pr)}"
                         for a, pr in zip(nd.actions, row) if round(pr, 3) > 0]
                lines.append(f"Card {card}: " + ", ".join(parts))
    lines.append(f"exploitability: {report.exploitability:.6g}")
    lines.append(f"game_value: {report.game_value:.6g}")
    lines.append(f"iterations: {report.iterations}")
    lines.append(f"converged: {'yes' if report.converged else 'no'}")
    return "\n".join(lines) + "\n"


def _solver_config(args) -> SolverConfig:
    return SolverConfig(max_iterations=args.max_iterations, target_exploitability=args.target)


def cmd_solve(args) -> int:
    try:
        text = Path(args.spec).read_text(encoding="utf-8")
    except OSError as exc:
        _err(f"cannot read {args.spec}: {exc.strerror}")
        return EXIT_IO
    try:
        spec = GameSpec.from_json(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.spec}: not valid JSON ({exc})") from None
    report = solve(build_game(spec), _solver_config(args))
    sys.stdout.write(format_listing(report))
    if args.out:
        try:
            Path(args.out).write_text(report.to_json() + "\n", encoding="utf-8")
        except OSError as exc:
            _err(f"cannot write {args.out}: {exc.strerror}")
            return EXIT_IO
    return 0


def _parse_sizes(text: str) -> tuple[float, ...]:
    try:
        sizes = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"--bet-sizes: cannot parse {text!r}") from None
    if not sizes:
        raise UsageError("--bet-sizes: empty")
    return sizes


def cmd_gen(args) -> int:
    if args.games < 1:
        raise UsageError("--games must be positive")
    if args.workers is not None and args.workers < 1:
        raise UsageError("--workers must be positive")
    config = datagen.GenConfig(
        games_per_bet_size=args.games,
        bet_sizes=_parse_sizes(args.bet_sizes),
        n=args.n,
        pot=args.pot,
        stack=args.stack,
        master_seed=args.seed,
        solver=_solver_config(args),
        shared_distributions=args.shared_distributions,
    )
    out = Path(args.out)
    if not out.parent.exists():
        _err(f"directory {out.parent} does not exist")
        return EXIT_IO
    workers = args.workers or os.cpu_count() or 1

    def progress(done, total):
        print(f"solved {done}/{total}", file=sys.stderr)

    start = time.perf_counter()
    tmp = out.with_name(out.name + ".partial")
    try:
        rows = datagen.generate_dataset(config, workers=workers, progress=progress)
        datagen.write_csv(rows, tmp)
        os.replace(tmp, out)
    except OSError as exc:
        _err(f"cannot write {out}: {exc.strerror}")
        return EXIT_IO
    finally:
        if tmp.exists():
            tmp.unlink()
    elapsed = time.perf_counter() - start
    mean_expl = sum(r.exploitability for r in rows) / len(rows)
    print(f"rows={len(rows)} mean_exploitability={mean_expl:.6g} wall_time={elapsed:.2f}s")
    return 0


def _load_rows(path) -> list:
    try:
        return datagen.read_csv(path)
    except datagen.DatasetFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_fit(args) -> int:
    rows = _load_rows(args.data)
    if not rows:
        raise UsageError("no rows")
    sizes = {r.bet_size for r in rows}
    if args.table == 1 and len(sizes) != 1:
        raise UsageError(f"table 1 needs data with a single bet size; found {len(sizes)} sizes "
                         f"({', '.join(f'{s:g}' for s in sorted(sizes))}); use --table 2")
    if len(rows) < args.folds:
        raise UsageError(f"need at least {args.folds} rows for {args.folds}-fold CV")
    report = regress.run_model_zoo(rows, table=args.table, k=args.folds, seed=args.seed)
    sys.stdout.write(report.to_text())
    if args.out:
        try:
            Path(args.out).write_text(report.to_csv(), encoding="utf-8")
        except OSError as exc:
            _err(f"cannot write {args.out}: {exc.strerror}")
            return EXIT_IO
    return 0


def cmd_rule(args) -> int:
    has_mdf = args.mdf is not None
    has_pot_bet = args.pot is not None or args.bet is not None
    if has_mdf == has_pot_bet:
        raise UsageError("give exactly one of --mdf or --pot with --bet")
    if has_pot_bet:
        if args.pot is None or args.bet is None:
            raise UsageError("--pot and --bet must be given together")
        mdf = compute_mdf(args.pot, args.bet)
    else:
        mdf = args.mdf
    rule = regress.rule_signed if args.signed else regress.rule_100_50_25
    print(f"{rule(mdf, args.ra):.12g}")
    return 0


def cmd_plot(args) -> int:
    rows = _load_rows(args.data)
    if not rows:
        raise UsageError("no rows")
    text = plot.scatter_svg(rows) if args.format == "svg" else plot.scatter_csv(rows)
    try:
        Path(args.out).write_text(text, encoding="utf-8")
    except OSError as exc:
        _err(f"cannot write {args.out}: {exc.strerror}")
        return EXIT_IO
    return 0


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-iterations", type=int, default=10_000)
    p.add_argument("--target", type=float, default=None,
                   help="target exploitability in chips (default 1e-3 x pot)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pokerrule", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one game given as a JSON spec")
    p.add_argument("spec")
    p.add_argument("--out", help="write the full report as JSON")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", help="generate a solved-game dataset CSV")
    p.add_argument("--games", type=int, default=5000, help="games per bet size")
    p.add_argument("--bet-sizes", default="0.5,0.75,1.0", help="comma-separated fractions of pot")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=10, help="deck size")
    p.add_argument("--pot", type=float, default=1.0)
    p.add_argument("--stack", type=float, default=1.0)
    p.add_argument("--workers", type=int, default=None, help="processes (default: all cores)")
    p.add_argument("--shared-distributions", action="store_true",
                   help="reuse the same (p, q) draws for every bet size")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fit", help="fit the model zoo to a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--table", type=int, choices=(1, 2), default=None)
    p.add_argument("--out", help="also write the report as CSV")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="fold shuffling seed")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("rule", help="evaluate the 100-50-25 MIN rule")
    p.add_argument("--mdf", type=float)
    p.add_argument("--pot", type=float)
    p.add_argument("--bet", type=float)
    p.add_argument("--ra", type=float, required=True)
    p.add_argument("--signed", action="store_true", help="RA is on the [-1, 1] scale")
    p.set_defaults(func=cmd_rule)

    p = sub.add_parser("plot", help="RA vs ODF scatter")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("svg", "csv"), default="svg")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        _err(str(exc))
        return EXIT_INVALID
    except FileNotFoundError as exc:
        _err(f"{exc.filename}: no such file")
        return EXIT_IO
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
