"""Ordered rule list for the hit class by IREP-style sequential covering.

Each round splits the uncovered rows into grow and prune sets, grows one
conjunction of ``feature >= t`` / ``feature <= t`` conditions greedily by
FOIL gain, prunes trailing conditions on the prune set and keeps the rule
if its prune-set precision is above one half. Rows the rule covers are
then removed. The default rule predicts non-hit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hitpredict.learners.base import TrainedModel

GE, LE = ">=", "<="


def foil_gain(p, n, P, N) -> np.ndarray:
    """``p * (log2(p / (p + n)) - log2(P / (P + N)))``; zero where ``p == 0``."""
    p, n = np.asarray(p, dtype=np.float64), np.asarray(n, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = p * (np.log2(p / (p + n)) - np.log2(P / (P + N)))
    return np.where(p > 0, g, 0.0)


def covers(rule, X: np.ndarray) -> np.ndarray:
    mask = np.ones(len(X), dtype=bool)
    for j, op, t in rule:
        mask &= X[:, j] >= t if op == GE else X[:, j] <= t
    return mask


def _best_condition(X: np.ndarray, y: np.ndarray):
    """Best single condition on the rows given, as ``((j, op, t), gain)`` or None."""
    n, d = X.shape
    P = float(y.sum())
    N = n - P
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    ys = y[order].astype(np.float64)
    pos_prefix = np.vstack([np.zeros((1, d)), np.cumsum(ys, axis=0)])
    # first / last index of each run of equal values down a column
    starts = np.vstack([np.ones((1, d), dtype=bool), xs[1:] != xs[:-1]])
    ends = np.vstack([xs[1:] != xs[:-1], np.ones((1, d), dtype=bool)])
    idx = np.arange(n)[:, None]

    # x >= xs[k] covers rows k..n-1 when k starts a run
    ge_p = P - pos_prefix[:-1]
    ge_n = (n - idx) - ge_p
    ge_gain = np.where(starts, foil_gain(ge_p, ge_n, P, N), -np.inf)
    # x <= xs[k] covers rows 0..k when k ends a run
    le_p = pos_prefix[1:]
    le_n = (idx + 1) - le_p
    le_gain = np.where(ends, foil_gain(le_p, le_n, P, N), -np.inf)

    best = None
    for gains, op in ((ge_gain, GE), (le_gain, LE)):
        top = gains.max()
        if not top > 0:
            continue
        k, j = np.argwhere((gains == top).T)[0][::-1]
        cand = ((int(j), op, float(xs[k, j])), float(top))
        if best is None or cand[1] > best[1] or (cand[1] == best[1] and cand[0][0] < best[0][0]):
            best = cand
    return best


def grow_rule(X: np.ndarray, y: np.ndarray) -> list:
    rule = []
    mask = np.ones(len(y), dtype=bool)
    while mask.any() and (y[mask] == 0).any() and (y[mask] == 1).any():
        found = _best_condition(X[mask], y[mask])
        if found is None:
            break
        cond, _ = found
        rule.append(cond)
        mask &= covers([cond], X)
    return rule


def _counts(rule, X, y):
    m = covers(rule, X)
    p = int(y[m].sum())
    return p, int(m.sum()) - p


def prune_rule(rule: list, X: np.ndarray, y: np.ndarray) -> list:
    """Drop trailing conditions while ``(p - n) / (p + n)`` on the prune set does not decrease."""
    p, n = _counts(rule, X, y)
    if p + n == 0:
        return rule
    value = (p - n) / (p + n)
    while len(rule) > 1:
        p, n = _counts(rule[:-1], X, y)
        shorter = (p - n) / (p + n)
        if shorter < value:
            break
        rule, value = rule[:-1], shorter
    return rule


def _split(rows: np.ndarray, y: np.ndarray, grow_fraction: float, rng: np.random.Generator):
    grow, prune = [], []
    for cls in (1, 0):
        members = rng.permutation(rows[y[rows] == cls])
        cut = int(round(grow_fraction * len(members)))
        if len(members) and cut == 0:
            cut = 1
        grow.append(members[:cut])
        prune.append(members[cut:])
    return np.sort(np.concatenate(grow)), np.sort(np.concatenate(prune))


def fit_rule_list(X: np.ndarray, y: np.ndarray, grow_fraction: float = 2 / 3, seed: int = 0, max_rules: int = 1000):
    y = np.asarray(y, dtype=np.int64)
    rng = np.random.default_rng(seed)
    remaining = np.arange(len(y))
    rules = []
    while len(rules) < max_rules and (y[remaining] == 1).any():
        grow, prune = _split(remaining, y, grow_fraction, rng)
        rule = grow_rule(X[grow], y[grow])
        if not rule:
            break
        rule = prune_rule(rule, X[prune], y[prune])
        p, n = _counts(rule, X[prune], y[prune])
        if p + n == 0:
            p, n = _counts(rule, X[grow], y[grow])
        if p + n == 0 or p / (p + n) <= 0.5:
            break
        rules.append(rule)
        remaining = remaining[~covers(rule, X[remaining])]

    # Laplace counts per rule over the training rows that reach it.
    stats = []
    left = np.ones(len(y), dtype=bool)
    for rule in rules:
        hit = left & covers(rule, X)
        stats.append((int(y[hit].sum()), int(hit.sum())))
        left &= ~hit
    default = (int(y[left].sum()), int(left.sum()))
    return rules, stats, default


@dataclass(frozen=True, eq=False)
class RuleListModel(TrainedModel):
    algorithm = "rule_list"

    rules: tuple = ()
    stats: tuple = ()
    default: tuple = (0, 0)

    def first_match(self, Z: np.ndarray) -> np.ndarray:
        """Index of the first matching rule per row; ``len(rules)`` means the default rule."""
        out = np.full(len(Z), len(self.rules), dtype=np.int64)
        for i in reversed(range(len(self.rules))):
            out[covers(self.rules[i], Z)] = i
        return out

    def _score(self, Z):
        table = np.array([(p + 1.0) / (n + 2.0) for p, n in (*self.stats, self.default)])
        return table[self.first_match(Z)]

    def params(self):
        return {
            "rules": [[list(c) for c in r] for r in self.rules],
            "stats": [list(s) for s in self.stats],
            "default": list(self.default),
        }
