"""Shallow regression trees and least-squares gradient boosting.

Internal engine for rule generation: depth-limited trees fit on
one-vs-rest residuals, with seeded row subsampling.  Splits minimize total
squared error; candidate thresholds are midpoints between consecutive
distinct finite values.  A NaN feature value fails every "<=" test and is
routed to the right branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def _best_split(X: np.ndarray, residual: np.ndarray, rows: np.ndarray) -> tuple[int, float] | None:
    best_score = np.inf
    best: tuple[int, float] | None = None
    target = residual[rows]
    total_sum = float(target.sum())
    total_sq = float((target**2).sum())
    count = rows.size
    base = total_sq - total_sum**2 / count
    for feature in range(X.shape[1]):
        column = X[rows, feature]
        finite = np.isfinite(column)
        n_finite = int(np.count_nonzero(finite))
        if n_finite < 2:
            continue
        order = np.argsort(column[finite], kind="stable")
        values = column[finite][order]
        y = target[finite][order]
        prefix_sum = np.cumsum(y)
        prefix_sq = np.cumsum(y**2)
        distinct = np.nonzero(np.diff(values))[0]
        for idx in distinct:
            threshold = float((values[idx] + values[idx + 1]) / 2.0)
            # Midpoints of near-equal floats can round onto the upper value,
            # which would route every row left; skip such degenerate cuts.
            if not (values[idx] <= threshold < values[idx + 1]):
                continue
            left_n = idx + 1
            left_sum = prefix_sum[idx]
            left_sq = prefix_sq[idx]
            right_n = count - left_n
            right_sum = total_sum - left_sum
            right_sq = total_sq - left_sq
            sse = (left_sq - left_sum**2 / left_n) + (right_sq - right_sum**2 / right_n)
            if sse < best_score - 1e-12:
                best_score = sse
                best = (feature, threshold)
    if best is None or best_score >= base - 1e-12:
        return None
    return best


def _route_left(column: np.ndarray, threshold: float) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        mask = column <= threshold
    return mask & np.isfinite(column)


def fit_tree(X: np.ndarray, residual: np.ndarray, rows: np.ndarray, max_depth: int) -> TreeNode:
    node = TreeNode(value=float(residual[rows].mean()))
    if max_depth < 1 or rows.size < 2:
        return node
    split = _best_split(X, residual, rows)
    if split is None:
        return node
    node.feature, node.threshold = split
    left_mask = _route_left(X[rows, node.feature], node.threshold)
    if not left_mask.any() or left_mask.all():
        node.feature = -1
        return node
    node.left = fit_tree(X, residual, rows[left_mask], max_depth - 1)
    node.right = fit_tree(X, residual, rows[~left_mask], max_depth - 1)
    return node


def predict_tree(node: TreeNode, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0])
    stack = [(node, np.arange(X.shape[0]))]
    while stack:
        current, rows = stack.pop()
        if rows.size == 0:
            continue
        if current.is_leaf:
            out[rows] = current.value
            continue
        left_mask = _route_left(X[rows, current.feature], current.threshold)
        stack.append((current.left, rows[left_mask]))
        stack.append((current.right, rows[~left_mask]))
    return out


def boost_trees(
    X: np.ndarray,
    y: np.ndarray,
    n_trees: int,
    max_depth: int,
    learning_rate: float,
    subsample: float,
    rng: np.random.Generator,
) -> list[TreeNode]:
    """Least-squares boosting; returns the fitted trees (init term excluded)."""
    n = X.shape[0]
    prediction = np.full(n, float(y.mean()))
    trees: list[TreeNode] = []
    sample_size = max(2, int(round(subsample * n)))
    for _ in range(n_trees):
        residual = y - prediction
        rows = np.sort(rng.choice(n, size=min(sample_size, n), replace=False))
        tree = fit_tree(X, residual, rows, max_depth)
        trees.append(tree)
        prediction += learning_rate * predict_tree(tree, X)
    return trees


def iter_paths(root: TreeNode):
    """Yield the conjunct list of every depth >= 1 node (internal and leaf)."""
    stack: list[tuple[TreeNode, list[tuple[int, str, float]]]] = [(root, [])]
    while stack:
        node, path = stack.pop()
        if path:
            yield path
        if node.is_leaf:
            continue
        condition_left = (node.feature, "<=", node.threshold)
        condition_right = (node.feature, ">", node.threshold)
        stack.append((node.left, path + [condition_left]))
        stack.append((node.right, path + [condition_right]))
