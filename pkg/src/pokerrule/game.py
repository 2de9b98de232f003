"""One-street poker game: specs, distributions and the explicit game tree.

Player 1 is dealt a card from ``p`` and player 2 from ``q`` (independently,
ties allowed).  Player 1 checks or bets; facing a bet player 2 calls or folds;
facing a check player 2 checks or bets, after which player 1 calls or folds.
Higher card wins at showdown, equal cards split.

Payoffs use the half-pot baseline: each player is treated as having put
``pot / 2`` into the pot, which makes every terminal exactly zero-sum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

WEIGHT_TOL = 1e-9

CHECK = "check"
CALL = "call"
FOLD = "fold"


class GameSpecError(ValueError):
    """Invalid game specification; ``field`` names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def bet_label(size: float) -> str:
    return f"bet {size:g}"


@dataclass(frozen=True)
class CardDistribution:
    """Probability weights over card ranks 1..n (``weights[0]`` is rank 1)."""

    weights: tuple[float, ...]

    def __init__(self, weights: Sequence[float], name: str = "weights"):
        w = tuple(float(x) for x in weights)
        if len(w) < 2:
            raise GameSpecError(name, f"need at least 2 cards, got {len(w)}")
        if any(not math.isfinite(x) for x in w):
            raise GameSpecError(name, "weights must be finite")
        if any(x < 0 for x in w):
            raise GameSpecError(name, "weights must be non-negative")
        total = math.fsum(w)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise GameSpecError(name, f"weights sum to {total!r}, expected 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int) -> CardDistribution:
        return cls([1.0 / n] * n)

    @classmethod
    def point(cls, n: int, card: int) -> CardDistribution:
        """All mass on ``card`` (1-based rank)."""
        w = [0.0] * n
        w[card - 1] = 1.0
        return cls(w)

    @classmethod
    def from_masses(cls, n: int, masses: dict[int, float]) -> CardDistribution:
        w = [0.0] * n
        for card, m in masses.items():
            w[card - 1] = m
        return cls(w)

    def __len__(self) -> int:
        return len(self.weights)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)


def _bets(values: Sequence[float], name: str, stack: float) -> tuple[float, ...]:
    bets = tuple(float(b) for b in values)
    for b in bets:
        if not math.isfinite(b) or b <= 0:
            raise GameSpecError(name, f"bet size {b!r} must be positive")
        if b > stack:
            raise GameSpecError(name, f"bet size {b!r} exceeds stack {stack!r}")
    if any(b2 <= b1 for b1, b2 in zip(bets, bets[1:])):
        raise GameSpecError(name, "bet sizes must be strictly increasing")
    return bets


@dataclass(frozen=True)
class GameSpec:
    """Deck size, deal distributions, pot, stack and the allowed bet sizes.

    An empty bet menu means that player may not bet.
    """

    n: int
    p: CardDistribution
    q: CardDistribution
    pot: float = 1.0
    stack: float = 1.0
    p1_bets: tuple[float, ...] = (1.0,)
    p2_bets: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise GameSpecError("n", f"deck size must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        for name in ("p", "q"):
            dist = getattr(self, name)
            if not isinstance(dist, CardDistribution):
                dist = CardDistribution(dist, name=name)
                object.__setattr__(self, name, dist)
            if len(dist) != self.n:
                raise GameSpecError(name, f"has {len(dist)} weights, deck size is {self.n}")
        for name in ("pot", "stack"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                raise GameSpecError(name, f"must be a positive number, got {v!r}")
            object.__setattr__(self, name, float(v))
        object.__setattr__(self, "p1_bets", _bets(self.p1_bets, "p1_bets", self.stack))
        object.__setattr__(self, "p2_bets", _bets(self.p2_bets, "p2_bets", self.stack))

    @classmethod
    def single_bet(cls, p, q, bet: float = 1.0, pot: float = 1.0, stack: float = 1.0) -> GameSpec:
        """Both players may bet the same single size (the experimental setting)."""
        p = p if isinstance(p, CardDistribution) else CardDistribution(p, name="p")
        q = q if isinstance(q, CardDistribution) else CardDistribution(q, name="q")
        return cls(len(p), p, q, pot, stack, (bet,), (bet,))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": list(self.p.weights),
            "q": list(self.q.weights),
            "pot": self.pot,
            "stack": self.stack,
            "p1_bets": list(self.p1_bets),
            "p2_bets": list(self.p2_bets),
        }

    @classmethod
    def from_dict(cls, d: dict) -> GameSpec:
        if not isinstance(d, dict):
            raise GameSpecError("<root>", "expected a JSON object")
        missing = [k for k in ("n", "p", "q", "pot", "stack", "p1_bets", "p2_bets") if k not in d]
        if missing:
            raise GameSpecError(missing[0], "missing field")
        for name in ("p", "q", "p1_bets", "p2_bets"):
            if not isinstance(d[name], list):
                raise GameSpecError(name, "expected an array of numbers")
        return cls(
            n=d["n"],
            p=CardDistribution(d["p"], name="p"),
            q=CardDistribution(d["q"], name="q"),
            pot=d["pot"],
            stack=d["stack"],
            p1_bets=tuple(d["p1_bets"]),
            p2_bets=tuple(d["p2_bets"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> GameSpec:
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> GameSpec:
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class Node:
    """A public betting state.

    Decision nodes have ``player`` in {1, 2}; terminal nodes have ``player``
    None and ``kind`` one of ``showdown``, ``fold1`` (player 1 folded) or
    ``fold2``.  ``stake`` is the bet that was called for showdowns.
    """

    index: int
    name: str
    history: tuple[str, ...]
    player: int | None
    actions: tuple[str, ...] = ()
    children: tuple[int, ...] = ()
    kind: str = "decision"
    stake: float = 0.0

    @property
    def is_terminal(self) -> bool:
        return self.player is None


@dataclass(frozen=True)
class GameTree:
    """Explicit tree for a :class:`GameSpec` with enumerated information sets.

    Information set ids run densely over ``(player, decision node, card)``,
    grouped by decision node in tree order and by card within a node.
    """

    spec: GameSpec
    nodes: tuple[Node, ...]
    infosets: tuple[tuple[int, int, int], ...]
    payoff_shift: float = 0.0
    _infoset_index: dict = field(default=None, repr=False, compare=False)
    _history_index: dict = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def decision_nodes(self) -> list[Node]:
        return [nd for nd in self.nodes if not nd.is_terminal]

    @property
    def terminal_nodes(self) -> list[Node]:
        return [nd for nd in self.nodes if nd.is_terminal]

    @property
    def num_infosets(self) -> int:
        return len(self.infosets)

    def infoset_id(self, player: int, node: int | str, card: int) -> int:
        if isinstance(node, str):
            node = self.node_by_name(node).index
        return self._infoset_index[(player, node, card)]

    def infoset_name(self, infoset_id: int) -> str:
        player, node, card = self.infosets[infoset_id]
        return f"P{player}/{self.nodes[node].name}/card{card}"

    def node_by_name(self, name: str) -> Node:
        for nd in self.nodes:
            if nd.name == name:
                return nd
        raise KeyError(name)

    def node_at(self, history: Sequence[str]) -> Node:
        try:
            return self.nodes[self._history_index[tuple(history)]]
        except KeyError:
            raise ValueError(f"no such action sequence: {tuple(history)!r}") from None

    def terminal_payoffs(self, node: Node, player: int = 1) -> np.ndarray:
        """Payoff matrix of ``player`` at a terminal, indexed ``[card1 - 1, card2 - 1]``."""
        n, half = self.n, self.spec.pot / 2
        if node.kind == "showdown":
            ranks = np.arange(n)
            sign = np.sign(ranks[:, None] - ranks[None, :]).astype(float)
            out = (half + node.stake) * sign
        elif node.kind == "fold2":
            out = np.full((n, n), half)
        elif node.kind == "fold1":
            out = np.full((n, n), -half)
        else:
            raise ValueError(f"node {node.name} is not terminal")
        if player == 2:
            out = -out
        return out + self.payoff_shift


def build_game(spec: GameSpec, payoff_shift: float = 0.0) -> GameTree:
    """Enumerate the betting tree and information sets of ``spec``.

    ``payoff_shift`` adds a constant to every terminal payoff of *both*
    players (constant-sum games); equilibria do not depend on it.
    """
    if not isinstance(spec, GameSpec):
        raise TypeError("spec must be a GameSpec")
    nodes: list[dict] = []

    def add(**kw) -> int:
        kw["index"] = len(nodes)
        nodes.append(kw)
        return kw["index"]

    root = add(name="root", history=(), player=1)
    root_actions, root_children = [CHECK], []

    check = add(name="facing-check", history=(CHECK,), player=2)
    root_children.append(check)
    check_actions = [CHECK]
    check_children = [add(name="check-check", history=(CHECK, CHECK), player=None,
                          kind="showdown", stake=0.0)]
    for b in spec.p2_bets:
        label = bet_label(b)
        h = (CHECK, label)
        nd = add(name=f"facing-check-bet-{b:g}", history=h, player=1)
        call = add(name=f"check-bet-{b:g}-call", history=h + (CALL,), player=None,
                   kind="showdown", stake=b)
        fold = add(name=f"check-bet-{b:g}-fold", history=h + (FOLD,), player=None, kind="fold1")
        nodes[nd].update(actions=(CALL, FOLD), children=(call, fold))
        check_actions.append(label)
        check_children.append(nd)
    nodes[check].update(actions=tuple(check_actions), children=tuple(check_children))

    for b in spec.p1_bets:
        label = bet_label(b)
        h = (label,)
        nd = add(name=f"facing-bet-{b:g}", history=h, player=2)
        call = add(name=f"bet-{b:g}-call", history=h + (CALL,), player=None,
                   kind="showdown", stake=b)
        fold = add(name=f"bet-{b:g}-fold", history=h + (FOLD,), player=None, kind="fold2")
        nodes[nd].update(actions=(CALL, FOLD), children=(call, fold))
        root_actions.append(label)
        root_children.append(nd)
    nodes[root].update(actions=tuple(root_actions), children=tuple(root_children))

    frozen = tuple(Node(**kw) for kw in nodes)
    infosets = tuple(
        (nd.player, nd.index, card)
        for nd in frozen
        if not nd.is_terminal
        for card in range(1, spec.n + 1)
    )
    tree = GameTree(spec, frozen, infosets, float(payoff_shift))
    object.__setattr__(tree, "_infoset_index", {key: i for i, key in enumerate(infosets)})
    object.__setattr__(tree, "_history_index", {nd.history: nd.index for nd in frozen})
    return tree


def payoff(spec: GameSpec, action_sequence: Sequence[str], card1: int, card2: int) -> float:
    """Player 1's payoff for a terminal action sequence and deal."""
    tree = spec if isinstance(spec, GameTree) else build_game(spec)
    node = tree.node_at(action_sequence)
    if not node.is_terminal:
        raise ValueError(f"action sequence {tuple(action_sequence)!r} is not terminal")
    n = tree.n
    if not (1 <= card1 <= n and 1 <= card2 <= n):
        raise ValueError(f"cards must lie in 1..{n}")
    return float(tree.terminal_payoffs(node)[card1 - 1, card2 - 1])


def pot_odds_threshold(pot: float, call_cost: float) -> float:
    """Equity at which calling a bet of ``call_cost`` into ``pot`` breaks even.

    ``pot`` is the pot before the bet: a $10 bet into $30 wins $40 or loses
    $10, so the threshold is 10 / 50 = 0.2.
    """
    if pot <= 0 or call_cost <= 0:
        raise ValueError("pot and call_cost must be positive")
    return call_cost / (pot + 2 * call_cost)
