"""Regret-matching self-play (CFR) with exact best-response certification.

The tree is tiny, so every iteration is a full traversal of the public
betting tree with one array entry per private card.  All arrays carry a
leading batch axis so that many games sharing the same betting structure can
be solved together; each game's arithmetic is elementwise along that axis,
so a game gives bit-identical results alone or in any batch.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .game import GameSpec, GameTree, build_game

REGRET_MODES = ("vanilla", "plus")
AVERAGING_MODES = ("uniform", "linear")


@dataclass(frozen=True)
class SolverConfig:
    """Solver budget and variant.

    The default is CFR+: regrets floored at zero, players updated in turn,
    iteration-weighted strategy averages.  ``regrets="vanilla"`` with
    ``alternating=False`` gives plain simultaneous regret matching.
    ``target_exploitability`` is in chips; None means ``1e-3 * pot``.
    Exploitability of the average strategy is checked every ``check_every``
    iterations and the solve stops at the first check below target.
    """

    max_iterations: int = 10_000
    target_exploitability: float | None = None
    averaging: str = "linear"
    regrets: str = "plus"
    check_every: int = 10
    alternating: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.target_exploitability is not None and not self.target_exploitability > 0:
            raise ValueError("target_exploitability must be positive")
        if self.averaging not in AVERAGING_MODES:
            raise ValueError(f"averaging must be one of {AVERAGING_MODES}")
        if self.regrets not in REGRET_MODES:
            raise ValueError(f"regrets must be one of {REGRET_MODES}")
        if self.check_every < 1:
            raise ValueError("check_every must be >= 1")

    def target_for(self, pot: float) -> float:
        if self.target_exploitability is None:
            return 1e-3 * pot
        return self.target_exploitability


class BehavioralStrategy:
    """Action probabilities at every information set of one player.

    Stored per decision node as an ``(n, num_actions)`` array whose row
    ``card - 1`` is the distribution at that card's information set.
    """

    def __init__(self, tree: GameTree, player: int, probs: dict[int, np.ndarray]):
        if player not in (1, 2):
            raise ValueError("player must be 1 or 2")
        self.tree = tree
        self.player = player
        self.probs = {}
        own = [nd for nd in tree.decision_nodes if nd.player == player]
        if set(probs) != {nd.index for nd in own}:
            raise ValueError(f"strategy does not cover player {player}'s decision nodes")
        for nd in own:
            arr = np.array(probs[nd.index], dtype=float)
            if arr.shape != (tree.n, len(nd.actions)):
                raise ValueError(f"node {nd.name}: expected shape {(tree.n, len(nd.actions))}, got {arr.shape}")
            if (arr < 0).any() or np.abs(arr.sum(axis=1) - 1).max() > 1e-9:
                raise ValueError(f"node {nd.name}: rows must be probability distributions")
            arr.setflags(write=False)
            self.probs[nd.index] = arr

    @classmethod
    def uniform(cls, tree: GameTree, player: int) -> BehavioralStrategy:
        return cls(tree, player, {
            nd.index: np.full((tree.n, len(nd.actions)), 1.0 / len(nd.actions))
            for nd in tree.decision_nodes if nd.player == player
        })

    @classmethod
    def from_rules(cls, tree: GameTree, player: int, rules: dict, default=None) -> BehavioralStrategy:
        """Build a strategy from ``{(node_name, card): {action: prob}}``.

        Unlisted information sets get ``default`` (an ``{action: prob}``
        dict, or a callable ``(node, card) -> dict``), else uniform.
        """
        probs = {}
        for nd in tree.decision_nodes:
            if nd.player != player:
                continue
            arr = np.full((tree.n, len(nd.actions)), 1.0 / len(nd.actions))
            for card in range(1, tree.n + 1):
                rule = rules.get((nd.name, card))
                if rule is None and default is not None:
                    rule = default(nd, card) if callable(default) else default
                if rule is not None:
                    row = np.zeros(len(nd.actions))
                    for action, pr in rule.items():
                        row[nd.actions.index(action)] = pr
                    arr[card - 1] = row
            probs[nd.index] = arr
        return cls(tree, player, probs)

    def at(self, node: int | str, card: int) -> np.ndarray:
        if isinstance(node, str):
            node = self.tree.node_by_name(node).index
        return self.probs[node][card - 1]

    def prob(self, node: int | str, card: int, action: str) -> float:
        nd = self.tree.node_by_name(node) if isinstance(node, str) else self.tree.nodes[node]
        return float(self.at(nd.index, card)[nd.actions.index(action)])

    def __getitem__(self, infoset_id: int) -> np.ndarray:
        player, node, card = self.tree.infosets[infoset_id]
        if player != self.player:
            raise KeyError(f"infoset {infoset_id} belongs to player {player}")
        return self.probs[node][card - 1]

    def to_dict(self) -> dict[str, dict[str, float]]:
        out = {}
        for i, (player, node, card) in enumerate(self.tree.infosets):
            if player == self.player:
                nd = self.tree.nodes[node]
                row = self.probs[node][card - 1]
                out[self.tree.infoset_name(i)] = {a: float(x) for a, x in zip(nd.actions, row)}
        return out


@dataclass
class SolveReport:
    """Average-strategy profile returned by :func:`solve` plus certification."""

    profile: tuple[BehavioralStrategy, BehavioralStrategy]
    exploitability: float
    iterations: int
    game_value: float
    converged: bool
    target: float
    trace: list[tuple[int, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "spec": self.profile[0].tree.spec.to_dict(),
            "exploitability": self.exploitability,
            "iterations": self.iterations,
            "game_value": self.game_value,
            "converged": self.converged,
            "target_exploitability": self.target,
            "strategies": {**self.profile[0].to_dict(), **self.profile[1].to_dict()},
            "trace": [[t, e] for t, e in self.trace],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _check_same_structure(trees: Sequence[GameTree]) -> None:
    first = trees[0]
    key = (first.n, first.spec.pot, first.spec.stack, first.spec.p1_bets,
           first.spec.p2_bets, first.payoff_shift)
    for t in trees[1:]:
        if (t.n, t.spec.pot, t.spec.stack, t.spec.p1_bets, t.spec.p2_bets, t.payoff_shift) != key:
            raise ValueError("batched games must share deck size, pot, stack and bet menus")


class _Batch:
    """Tree layout plus per-game chance weights, shape ``(games, n)``."""

    def __init__(self, tree: GameTree, p: np.ndarray, q: np.ndarray):
        self.tree = tree
        self.p = p
        self.q = q
        self.u1 = {nd.index: tree.terminal_payoffs(nd, 1) for nd in tree.terminal_nodes}
        self.u2 = {nd.index: tree.terminal_payoffs(nd, 2) for nd in tree.terminal_nodes}
        self.decisions = tree.decision_nodes

    def subset(self, keep: np.ndarray) -> _Batch:
        return _Batch(self.tree, self.p[keep], self.q[keep])

    def reaches(self, strategies: dict[int, np.ndarray]):
        """Own-play reach of each player at each node, excluding chance."""
        g, n = self.p.shape
        ones = np.ones((g, n))
        r1 = {0: ones}
        r2 = {0: ones}
        for nd in self.decisions:
            sigma = strategies[nd.index]
            for a, child in enumerate(nd.children):
                if nd.player == 1:
                    r1[child] = r1[nd.index] * sigma[:, :, a]
                    r2[child] = r2[nd.index]
                else:
                    r1[child] = r1[nd.index]
                    r2[child] = r2[nd.index] * sigma[:, :, a]
        return r1, r2

    def terminal_values(self, r1, r2):
        """Counterfactual terminal values: player 1 per own card, player 2 per own card."""
        v1, v2 = {}, {}
        opp2 = self.q * 1.0
        opp1 = self.p * 1.0
        for idx in self.u1:
            w2 = opp2 * r2[idx]
            w1 = opp1 * r1[idx]
            v1[idx] = (self.u1[idx][None, :, :] * w2[:, None, :]).sum(axis=2)
            v2[idx] = (self.u2[idx][None, :, :] * w1[:, :, None]).sum(axis=1)
        return v1, v2

    def evaluate(self, strategies: dict[int, np.ndarray], best_response: bool = False,
                 with_reach: bool = False):
        """Backward pass; returns per-node values for both players.

        With ``best_response`` each player maximizes at its own nodes against
        the other's fixed strategy instead of following ``strategies``.
        """
        r1, r2 = self.reaches(strategies)
        v1, v2 = self.terminal_values(r1, r2)
        for nd in reversed(self.decisions):
            c1 = np.stack([v1[c] for c in nd.children], axis=2)
            c2 = np.stack([v2[c] for c in nd.children], axis=2)
            if nd.player == 1:
                if best_response:
                    v1[nd.index] = c1.max(axis=2)
                else:
                    v1[nd.index] = (c1 * strategies[nd.index]).sum(axis=2)
                v2[nd.index] = c2.sum(axis=2)
            else:
                if best_response:
                    v2[nd.index] = c2.max(axis=2)
                else:
                    v2[nd.index] = (c2 * strategies[nd.index]).sum(axis=2)
                v1[nd.index] = c1.sum(axis=2)
        if with_reach:
            return r1, r2, v1, v2
        return v1, v2


def _regret_match(regrets: np.ndarray) -> np.ndarray:
    pos = np.maximum(regrets, 0.0)
    total = pos.sum(axis=2, keepdims=True)
    uniform = np.full_like(regrets, 1.0 / regrets.shape[2])
    return np.where(total > 0, pos / np.where(total > 0, total, 1.0), uniform)


def _normalize(sums: np.ndarray) -> np.ndarray:
    total = sums.sum(axis=2, keepdims=True)
    uniform = np.full_like(sums, 1.0 / sums.shape[2])
    return np.where(total > 0, sums / np.where(total > 0, total, 1.0), uniform)


def _certify(batch: _Batch, strategies: dict[int, np.ndarray]):
    """Exploitability and player 1 value of each game in the batch."""
    v1, v2 = batch.evaluate(strategies)
    b1, b2 = batch.evaluate(strategies, best_response=True)
    value = (batch.p * v1[0]).sum(axis=1)
    br1 = (batch.p * b1[0]).sum(axis=1)
    br2 = (batch.q * b2[0]).sum(axis=1)
    expl = (br1 + br2 - 2 * batch.tree.payoff_shift) / 2
    return expl, value


def solve_batch(trees: Sequence[GameTree], config: SolverConfig | None = None) -> list[SolveReport]:
    """Solve several games that share one betting structure.

    Each game stops independently at the first exploitability check below
    target; its report is identical to solving it alone with :func:`solve`.
    """
    config = config or SolverConfig()
    trees = list(trees)
    if not trees:
        return []
    _check_same_structure(trees)
    tree0 = trees[0]
    target = config.target_for(tree0.spec.pot)
    p = np.array([t.spec.p.weights for t in trees])
    q = np.array([t.spec.q.weights for t in trees])
    batch = _Batch(tree0, p, q)
    g, n = p.shape

    regrets = {nd.index: np.zeros((g, n, len(nd.actions))) for nd in batch.decisions}
    sums = {nd.index: np.zeros((g, n, len(nd.actions))) for nd in batch.decisions}
    ids = np.arange(g)
    done: dict[int, tuple] = {}
    traces: list[list] = [[] for _ in range(g)]

    for t in range(1, config.max_iterations + 1):
        weight = float(t) if config.averaging == "linear" else 1.0
        for players in ((1,), (2,)) if config.alternating else ((1, 2),):
            sigma = {k: _regret_match(r) for k, r in regrets.items()}
            r1, r2, v1, v2 = batch.evaluate(sigma, with_reach=True)
            for nd in batch.decisions:
                if nd.player not in players:
                    continue
                own_v = v1 if nd.player == 1 else v2
                own_r = r1 if nd.player == 1 else r2
                child_v = np.stack([own_v[c] for c in nd.children], axis=2)
                regrets[nd.index] += child_v - own_v[nd.index][:, :, None]
                if config.regrets == "plus":
                    np.maximum(regrets[nd.index], 0.0, out=regrets[nd.index])
                sums[nd.index] += weight * own_r[nd.index][:, :, None] * sigma[nd.index]

        last = t == config.max_iterations
        if t % config.check_every == 0 or last:
            avg = {k: _normalize(s) for k, s in sums.items()}
            expl, value = _certify(batch, avg)
            for row, gid in enumerate(ids):
                traces[gid].append((t, float(expl[row])))
            finished = (expl <= target) | last
            if finished.any():
                for row in np.flatnonzero(finished):
                    gid = int(ids[row])
                    strat = {k: a[row] for k, a in avg.items()}
                    done[gid] = (strat, float(expl[row]), t, float(value[row]), bool(expl[row] <= target))
                keep = ~finished
                ids = ids[keep]
                if ids.size == 0:
                    break
                batch = batch.subset(keep)
                regrets = {k: r[keep] for k, r in regrets.items()}
                sums = {k: s[keep] for k, s in sums.items()}

    reports = []
    for gid, tree in enumerate(trees):
        strat, expl, iters, value, ok = done[gid]
        s1 = BehavioralStrategy(tree, 1, {nd.index: strat[nd.index] for nd in tree.decision_nodes if nd.player == 1})
        s2 = BehavioralStrategy(tree, 2, {nd.index: strat[nd.index] for nd in tree.decision_nodes if nd.player == 2})
        reports.append(SolveReport((s1, s2), expl, iters, value, ok, target, traces[gid]))
    return reports


def solve(tree: GameTree | GameSpec, config: SolverConfig | None = None) -> SolveReport:
    """Approximate a Nash equilibrium of one game by CFR self-play."""
    if isinstance(tree, GameSpec):
        tree = build_game(tree)
    return solve_batch([tree], config)[0]


def _profile_arrays(tree: GameTree, *strategies: BehavioralStrategy) -> dict[int, np.ndarray]:
    arrays = {}
    for s in strategies:
        if s.tree.spec != tree.spec or len(s.tree.nodes) != len(tree.nodes):
            raise ValueError("strategy belongs to a different game tree")
        for k, a in s.probs.items():
            arrays[k] = a[None]
    return arrays


def _single_batch(tree: GameTree) -> _Batch:
    return _Batch(tree, tree.spec.p.as_array()[None], tree.spec.q.as_array()[None])


def best_response(tree: GameTree, opponent: BehavioralStrategy, player: int):
    """Pure best response of ``player`` to ``opponent`` and its value.

    Ties go to the lowest-indexed action.  Returns ``(value, strategy)``.
    """
    if opponent.player == player:
        raise ValueError("opponent strategy must belong to the other player")
    batch = _single_batch(tree)
    filler = BehavioralStrategy.uniform(tree, player)
    arrays = _profile_arrays(tree, opponent, filler)
    b1, b2 = batch.evaluate(arrays, best_response=True)
    vals = b1 if player == 1 else b2
    probs = {}
    for nd in tree.decision_nodes:
        if nd.player != player:
            continue
        child = np.stack([vals[c][0] for c in nd.children], axis=1)
        choice = child.argmax(axis=1)
        probs[nd.index] = np.eye(len(nd.actions))[choice]
    chance = batch.p[0] if player == 1 else batch.q[0]
    value = float((chance * vals[0][0]).sum())
    return value, BehavioralStrategy(tree, player, probs)


def best_response_value(tree: GameTree, opponent: BehavioralStrategy, player: int) -> float:
    """Exact expected payoff of ``player``'s best response to ``opponent``."""
    return best_response(tree, opponent, player)[0]


def expected_values(tree: GameTree, s1: BehavioralStrategy, s2: BehavioralStrategy) -> tuple[float, float]:
    """Expected payoffs of both players when ``s1`` meets ``s2``."""
    batch = _single_batch(tree)
    v1, v2 = batch.evaluate(_profile_arrays(tree, s1, s2))
    return float((batch.p[0] * v1[0][0]).sum()), float((batch.q[0] * v2[0][0]).sum())


def exploitability(tree: GameTree, profile: Sequence[BehavioralStrategy]) -> float:
    """Mean best-response gain ``(BR1 + BR2) / 2``; zero exactly at equilibrium."""
    s1, s2 = profile
    if s1.player != 1 or s2.player != 2:
        raise ValueError("profile must be (player 1 strategy, player 2 strategy)")
    br1 = best_response_value(tree, s2, 1)
    br2 = best_response_value(tree, s1, 2)
    return (br1 + br2 - 2 * tree.payoff_shift) / 2
