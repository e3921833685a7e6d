"""Binary decision tree on numeric features using the C4.5 gain ratio.

Candidate thresholds are midpoints between consecutive distinct values; rows
with ``x <= threshold`` go left. No post-pruning: ``max_depth`` and
``min_leaf`` bound capacity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hitpredict.learners.base import TrainedModel

LEAF = -1


def entropy(n_pos, n) -> np.ndarray:
    """Binary entropy in bits of a node with ``n_pos`` positives out of ``n``."""
    n_pos = np.asarray(n_pos, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(n > 0, n_pos / n, 0.0)
        terms = [np.where(q > 0, -q * np.log2(q), 0.0) for q in (p, 1.0 - p)]
    return terms[0] + terms[1]


def gain_ratio(n_pos, n, left_pos, left_n) -> np.ndarray:
    """Information gain over split information for a binary split, both in bits."""
    n_pos, n, left_pos, left_n = (np.asarray(a, dtype=np.float64) for a in (n_pos, n, left_pos, left_n))
    right_n = n - left_n
    gain = entropy(n_pos, n) - (left_n / n) * entropy(left_pos, left_n) - (right_n / n) * entropy(n_pos - left_pos, right_n)
    split_info = entropy(left_n, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(split_info > 0, gain / split_info, 0.0)


def best_split(X: np.ndarray, y: np.ndarray, min_leaf: int):
    """Highest positive gain ratio split as ``(feature, threshold, ratio)``, or None.

    Ties go to the lower feature index, then the lower threshold.
    """
    n, d = X.shape
    if n < 2 * min_leaf:
        return None
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    left_pos = np.cumsum(y[order], axis=0)[:-1]
    left_n = np.arange(1, n, dtype=np.float64)[:, None]
    valid = xs[1:] > xs[:-1]
    valid &= (left_n >= min_leaf) & (n - left_n >= min_leaf)
    if not valid.any():
        return None
    ratio = gain_ratio(y.sum(), n, left_pos, np.broadcast_to(left_n, left_pos.shape))
    ratio = np.where(valid, ratio, -np.inf)
    top = ratio.max()
    if not top > 0:
        return None
    # Column-major scan: first feature, then first (lowest) threshold within it.
    k, j = np.argwhere((ratio == top).T)[0][::-1]
    return int(j), float((xs[k, j] + xs[k + 1, j]) / 2.0), float(top)


def fit_tree(X: np.ndarray, y: np.ndarray, max_depth: int = 20, min_leaf: int = 2) -> dict[str, np.ndarray]:
    y = np.asarray(y, dtype=np.int64)
    feature, threshold, left, right, n_pos, n_rows = [], [], [], [], [], []

    def new_node(idx):
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        n_pos.append(int(y[idx].sum()))
        n_rows.append(len(idx))
        return len(feature) - 1

    root = new_node(np.arange(len(y)))
    stack = [(root, np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        if depth >= max_depth or n_pos[node] in (0, n_rows[node]):
            continue
        split = best_split(X[idx], y[idx], min_leaf)
        if split is None:
            continue
        j, t, _ = split
        go_left = X[idx, j] <= t
        li, ri = idx[go_left], idx[~go_left]
        feature[node], threshold[node] = j, t
        left[node], right[node] = new_node(li), new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))

    return {
        "feature": np.array(feature, dtype=np.int64),
        "threshold": np.array(threshold, dtype=np.float64),
        "left": np.array(left, dtype=np.int64),
        "right": np.array(right, dtype=np.int64),
        "n_pos": np.array(n_pos, dtype=np.int64),
        "n": np.array(n_rows, dtype=np.int64),
    }


@dataclass(frozen=True, eq=False)
class TreeModel(TrainedModel):
    algorithm = "decision_tree"

    nodes: dict = None

    def apply(self, Z: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        f, t = self.nodes["feature"], self.nodes["threshold"]
        lft, rgt = self.nodes["left"], self.nodes["right"]
        at = np.zeros(len(Z), dtype=np.int64)
        rows = np.arange(len(Z))
        while True:
            inner = f[at] != LEAF
            if not inner.any():
                return at
            r = rows[inner]
            node = at[r]
            go_left = Z[r, f[node]] <= t[node]
            at[r] = np.where(go_left, lft[node], rgt[node])

    def _score(self, Z):
        leaf = self.apply(Z)
        return (self.nodes["n_pos"][leaf] + 1.0) / (self.nodes["n"][leaf] + 2.0)

    @property
    def depth(self) -> int:
        depth = np.zeros(len(self.nodes["feature"]), dtype=np.int64)
        for i, f in enumerate(self.nodes["feature"]):
            if f != LEAF:
                depth[self.nodes["left"][i]] = depth[self.nodes["right"][i]] = depth[i] + 1
        return int(depth.max())

    def params(self):
        return {k: v.tolist() for k, v in self.nodes.items()}
