"""Minimum defense frequency, range advantage and optimal defense frequency."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import CardDistribution


@dataclass(frozen=True)
class GameMetrics:
    mdf: float
    range_advantage: float
    odf: float

    def __post_init__(self):
        for name in ("mdf", "range_advantage", "odf"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v!r} outside [0, 1]")


def mdf(pot: float, bet: float) -> float:
    """Minimum defense frequency ``pot / (bet + pot)``.

    Calling this often makes a zero-equity bluff break even.
    """
    if pot <= 0 or bet <= 0:
        raise ValueError("pot and bet must be positive")
    return pot / (bet + pot)


def _weights(d, name: str) -> np.ndarray:
    if isinstance(d, CardDistribution):
        return d.as_array()
    return CardDistribution(d, name=name).as_array()


def range_advantage(p, q) -> float:
    """Player 1's showdown equity when cards are dealt from ``p`` and ``q``.

    Probability that player 1 holds the higher card plus half the
    probability of a tie.
    """
    pw, qw = _weights(p, "p"), _weights(q, "q")
    if pw.shape != qw.shape:
        raise ValueError(f"p has {pw.size} cards but q has {qw.size}")
    below = np.cumsum(qw) - qw
    return float(np.dot(pw, below) + 0.5 * np.dot(pw, qw))


def range_advantage_batch(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise :func:`range_advantage` for ``(games, n)`` weight arrays."""
    below = np.cumsum(q, axis=1) - q
    return (p * below).sum(axis=1) + 0.5 * (p * q).sum(axis=1)


def odf(q, p2_strategy, bet_index: int = 0) -> float:
    """Optimal defense frequency: ``q``-weighted call probability facing a bet.

    ``p2_strategy`` is player 2's :class:`~pokerrule.solver.BehavioralStrategy`;
    ``bet_index`` picks the bet size from player 1's menu.
    """
    qw = _weights(q, "q")
    tree = p2_strategy.tree
    if p2_strategy.player != 2:
        raise ValueError("odf needs player 2's strategy")
    bets = tree.spec.p1_bets
    if not 0 <= bet_index < len(bets):
        raise ValueError(f"bet_index {bet_index} outside player 1's {len(bets)} bet sizes")
    if qw.size != tree.n:
        raise ValueError("q does not match the strategy's deck size")
    node = tree.node_by_name(f"facing-bet-{bets[bet_index]:g}")
    calls = p2_strategy.probs[node.index][:, node.actions.index("call")]
    return float(np.clip(np.dot(qw, calls), 0.0, 1.0))


def call_probabilities(p2_strategy, bet_index: int = 0) -> np.ndarray:
    """``c(i)`` for every card facing the given bet."""
    tree = p2_strategy.tree
    node = tree.node_by_name(f"facing-bet-{tree.spec.p1_bets[bet_index]:g}")
    return p2_strategy.probs[node.index][:, node.actions.index("call")].copy()
