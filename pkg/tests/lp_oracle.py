"""Sequence-form linear program for the one-street game.

Independent of the CFR solver: it enumerates sequences and leaves directly
from the game rules and hands the zero-sum LP to HiGHS.  Used as an oracle
for game values and for checking solver output on small games.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog


def _showdown(c1, c2, half, stake):
    if c1 > c2:
        return half + stake
    if c1 < c2:
        return -(half + stake)
    return 0.0


def sequence_form(spec):
    n, half = spec.n, spec.pot / 2
    p, q = spec.p.weights, spec.q.weights
    xs = {"": 0}
    ys = {"": 0}

    def seq(table, key):
        if key not in table:
            table[key] = len(table)
        return table[key]

    for i in range(1, n + 1):
        seq(xs, (i, "check"))
        for b in spec.p1_bets:
            seq(xs, (i, "bet", b))
        for b in spec.p2_bets:
            seq(xs, (i, "check", b, "call"))
            seq(xs, (i, "check", b, "fold"))
    for j in range(1, n + 1):
        for b in spec.p1_bets:
            seq(ys, (j, b, "call"))
            seq(ys, (j, b, "fold"))
        seq(ys, (j, "check"))
        for b in spec.p2_bets:
            seq(ys, (j, "bet", b))

    A = np.zeros((len(xs), len(ys)))
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            w = p[i - 1] * q[j - 1]
            for b in spec.p1_bets:
                A[xs[(i, "bet", b)], ys[(j, b, "call")]] += w * _showdown(i, j, half, b)
                A[xs[(i, "bet", b)], ys[(j, b, "fold")]] += w * half
            A[xs[(i, "check")], ys[(j, "check")]] += w * _showdown(i, j, half, 0.0)
            for b in spec.p2_bets:
                A[xs[(i, "check", b, "call")], ys[(j, "bet", b)]] += w * _showdown(i, j, half, b)
                A[xs[(i, "check", b, "fold")], ys[(j, "bet", b)]] += -w * half

    E = [np.eye(len(xs))[0]]
    for i in range(1, n + 1):
        row = np.zeros(len(xs))
        row[0] = -1
        row[xs[(i, "check")]] = 1
        for b in spec.p1_bets:
            row[xs[(i, "bet", b)]] = 1
        E.append(row)
        for b in spec.p2_bets:
            row = np.zeros(len(xs))
            row[xs[(i, "check")]] = -1
            row[xs[(i, "check", b, "call")]] = 1
            row[xs[(i, "check", b, "fold")]] = 1
            E.append(row)
    F = [np.eye(len(ys))[0]]
    for j in range(1, n + 1):
        for b in spec.p1_bets:
            row = np.zeros(len(ys))
            row[0] = -1
            row[ys[(j, b, "call")]] = 1
            row[ys[(j, b, "fold")]] = 1
            F.append(row)
        row = np.zeros(len(ys))
        row[0] = -1
        row[ys[(j, "check")]] = 1
        for b in spec.p2_bets:
            row[ys[(j, "bet", b)]] = 1
        F.append(row)
    return xs, ys, A, np.array(E), np.array(F)


def _maximin(A, E, F, fixed=()):
    """max_x min_y x^T A y over sequence-form polytopes; returns (value, x)."""
    nx, ny = A.shape
    nz = F.shape[0]
    f = np.zeros(nz)
    f[0] = 1.0
    e = np.zeros(E.shape[0])
    e[0] = 1.0
    # variables [x, z]; maximize f.z  ->  minimize -f.z
    c = np.concatenate([np.zeros(nx), -f])
    A_ub = np.hstack([-A.T, F.T])
    b_ub = np.zeros(ny)
    A_eq = np.hstack([E, np.zeros((E.shape[0], nz))])
    b_eq = e
    if fixed:
        extra_a, extra_b = [], []
        for idx, val in fixed:
            row = np.zeros(nx + nz)
            row[idx] = 1
            extra_a.append(row)
            extra_b.append(val)
        A_eq = np.vstack([A_eq, extra_a])
        b_eq = np.concatenate([b_eq, extra_b])
    bounds = [(0, None)] * nx + [(None, None)] * nz
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(res.message)
    return -res.fun, res.x[:nx]


def game_value(spec, p1_root=None):
    """Player 1's equilibrium value; ``p1_root`` optionally pins player 1's
    opening behaviour as ``{card: {"check": pr, bet_size: pr}}`` (sequence
    weights equal the behavioural probabilities at the root)."""
    xs, ys, A, E, F = sequence_form(spec)
    fixed = []
    for card, rule in (p1_root or {}).items():
        for action, pr in rule.items():
            key = (card, "check") if action == "check" else (card, "bet", action)
            fixed.append((xs[key], pr))
    value, _ = _maximin(A, E, F, fixed)
    return value


def solve_lp(spec):
    """Equilibrium value, player 1 sequence weights and player 2 sequence weights."""
    xs, ys, A, E, F = sequence_form(spec)
    v1, x = _maximin(A, E, F)
    v2, y = _maximin(-A.T, F, E)
    return v1, -v2, (xs, x), (ys, y)


def odf_lp(spec, bet=None):
    """Optimal defence frequency of the LP's player 2 solution."""
    bet = spec.p1_bets[0] if bet is None else bet
    _, _, _, (ys, y) = solve_lp(spec)
    return sum(spec.q.weights[j - 1] * y[ys[(j, bet, "call")]] for j in range(1, spec.n + 1))
