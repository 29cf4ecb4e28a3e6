"""Bagged CART forest with Gini splits and per-sample weights.

Implemented directly on numpy so every source of randomness is owned by
this module: each tree draws its bootstrap and its per-split feature
subsets from a generator seeded by ``SeedSequence(seed).spawn(i)``, which
makes results independent of any training schedule and reproducible from
the single master seed.

Trees grow greedily: at each node, ``ceil(sqrt(F))`` candidate features
are drawn without replacement and the weighted-Gini-minimizing threshold
over them is taken; children smaller than ``min_leaf`` samples are never
created.  Leaves store weighted class distributions.  A tree votes the
argmax class of the reached leaf; the forest's vote fractions are the
per-class shares of tree votes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ClassificationError

__all__ = ["ForestParams", "DecisionTree", "RandomForest", "train_forest"]


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_leaf: int = 1
    bootstrap: bool = True
    seed: int = 1

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ClassificationError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ClassificationError("max_depth must be >= 1 or None")
        if self.min_leaf < 1:
            raise ClassificationError("min_leaf must be >= 1")


class DecisionTree:
    """A single CART tree stored as flat node arrays."""

    def __init__(self, n_classes: int, max_depth: int | None, min_leaf: int):
        self.n_classes = n_classes
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self._feature: list[int] = []
        self._threshold: list[float] = []
        self._left: list[int] = []
        self._right: list[int] = []
        self._dist: list[np.ndarray] = []

    def fit(self, X: np.ndarray, y: np.ndarray, w: np.ndarray, rng: np.random.Generator) -> "DecisionTree":
        self._mtry = max(1, math.ceil(math.sqrt(X.shape[1])))
        self._build(X, y, w, np.arange(X.shape[0]), depth=0, rng=rng)
        self.feature = np.asarray(self._feature, dtype=np.int64)
        self.threshold = np.asarray(self._threshold)
        self.left = np.asarray(self._left, dtype=np.int64)
        self.right = np.asarray(self._right, dtype=np.int64)
        self.dist = np.stack(self._dist)
        del self._feature, self._threshold, self._left, self._right, self._dist
        return self

    def _new_node(self) -> int:
        self._feature.append(-1)
        self._threshold.append(0.0)
        self._left.append(-1)
        self._right.append(-1)
        self._dist.append(np.zeros(self.n_classes))
        return len(self._feature) - 1

    def _leaf_dist(self, y: np.ndarray, w: np.ndarray) -> np.ndarray:
        counts = np.bincount(y, weights=w, minlength=self.n_classes)
        total = counts.sum()
        return counts / total if total > 0 else np.full(self.n_classes, 1.0 / self.n_classes)

    def _build(
        self,
        X: np.ndarray,
        y: np.ndarray,
        w: np.ndarray,
        idx: np.ndarray,
        depth: int,
        rng: np.random.Generator,
    ) -> int:
        node = self._new_node()
        y_node, w_node = y[idx], w[idx]
        self._dist[node] = self._leaf_dist(y_node, w_node)

        n = len(idx)
        if (
            n < 2 * self.min_leaf
            or (self.max_depth is not None and depth >= self.max_depth)
            or len(np.unique(y_node)) == 1
        ):
            return node

        split = self._best_split(X, y_node, w_node, idx, rng)
        if split is None:
            return node
        feat, thr = split
        go_left = X[idx, feat] <= thr
        self._feature[node] = feat
        self._threshold[node] = thr
        left = self._build(X, y, w, idx[go_left], depth + 1, rng)
        right = self._build(X, y, w, idx[~go_left], depth + 1, rng)
        self._left[node] = left
        self._right[node] = right
        return node

    def _best_split(
        self,
        X: np.ndarray,
        y_node: np.ndarray,
        w_node: np.ndarray,
        idx: np.ndarray,
        rng: np.random.Generator,
    ) -> tuple[int, float] | None:
        n = len(idx)
        total_w = w_node.sum()
        if total_w <= 0:
            return None
        feats = rng.choice(X.shape[1], size=min(self._mtry, X.shape[1]), replace=False)

        best_cost = np.inf
        best: tuple[int, float] | None = None
        onehot = np.zeros((n, self.n_classes))
        onehot[np.arange(n), y_node] = w_node

        for feat in feats:
            values = X[idx, feat]
            order = np.argsort(values, kind="stable")
            vs = values[order]
            # Split after position i (0-based): left = vs[:i+1].
            cum_cls = np.cumsum(onehot[order], axis=0)
            cum_w = np.cumsum(w_node[order])

            pos = np.arange(n - 1)
            valid = (vs[:-1] < vs[1:]) & (pos + 1 >= self.min_leaf) & (n - pos - 1 >= self.min_leaf)
            if not valid.any():
                continue
            lw = cum_w[:-1]
            rw = total_w - lw
            ok = valid & (lw > 0) & (rw > 0)
            if not ok.any():
                continue
            lcls = cum_cls[:-1]
            rcls = cum_cls[-1] - lcls
            with np.errstate(divide="ignore", invalid="ignore"):
                gini_l = 1.0 - np.sum((lcls / lw[:, None]) ** 2, axis=1)
                gini_r = 1.0 - np.sum((rcls / rw[:, None]) ** 2, axis=1)
            cost = np.where(ok, (lw * gini_l + rw * gini_r) / total_w, np.inf)
            i = int(np.argmin(cost))
            if cost[i] < best_cost:
                best_cost = float(cost[i])
                best = (int(feat), float((vs[i] + vs[i + 1]) / 2.0))
        return best

    def leaf_distributions(self, X: np.ndarray) -> np.ndarray:
        """Class distribution of the leaf each row lands in; shape (n, K)."""
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            internal = self.feature[node] >= 0
            if not internal.any():
                break
            rows = np.nonzero(internal)[0]
            feats = self.feature[node[rows]]
            thr = self.threshold[node[rows]]
            go_left = X[rows, feats] <= thr
            node[rows] = np.where(go_left, self.left[node[rows]], self.right[node[rows]])
        return self.dist[node]

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Per-row voted class: argmax of the leaf distribution (ties: lowest index)."""
        return np.argmax(self.leaf_distributions(X), axis=1)


class RandomForest:
    """Bagged trees; exposes per-class tree-vote fractions for ensembling."""

    def __init__(self, params: ForestParams, n_classes: int):
        self.params = params
        self.n_classes = n_classes
        self.trees: list[DecisionTree] = []

    def fit(self, X: np.ndarray, y: np.ndarray, sample_weight: np.ndarray | None = None) -> "RandomForest":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        n = len(X)
        w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)
        if len(w) != n or len(y) != n:
            raise ClassificationError("X, y, and sample_weight lengths differ")

        seeds = np.random.SeedSequence(self.params.seed).spawn(self.params.n_trees)
        self.trees = []
        for seq in seeds:
            rng = np.random.Generator(np.random.PCG64(seq))
            if self.params.bootstrap:
                boot = rng.integers(0, n, size=n)
            else:
                boot = np.arange(n)
            tree = DecisionTree(self.n_classes, self.params.max_depth, self.params.min_leaf)
            tree.fit(X[boot], y[boot], w[boot], rng)
            self.trees.append(tree)
        return self

    def vote_fractions(self, X: np.ndarray) -> np.ndarray:
        """Share of trees voting each class, per row; shape (n, K)."""
        X = np.asarray(X, dtype=np.float64)
        votes = np.zeros((len(X), self.n_classes))
        for tree in self.trees:
            votes[np.arange(len(X)), tree.predict(X)] += 1.0
        return votes / len(self.trees)

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Forest vote per row: argmax of vote fractions (ties: lowest index)."""
        return np.argmax(self.vote_fractions(X), axis=1)


def train_forest(
    X: np.ndarray,
    y: np.ndarray,
    params: ForestParams | None = None,
    sample_weight: np.ndarray | None = None,
    n_classes: int | None = None,
) -> RandomForest:
    """Fit a forest on integer class labels ``0..K-1``.

    Requires at least two distinct classes and a NaN-free feature matrix.
    """
    params = params or ForestParams()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2:
        raise ClassificationError("X must be a 2-d feature matrix")
    if np.isnan(X).any():
        raise ClassificationError("feature matrix contains NaN")
    present = np.unique(y)
    if len(present) < 2:
        raise ClassificationError("training labels contain a single class")
    if y.min() < 0:
        raise ClassificationError("labels must be non-negative integers")
    k = n_classes if n_classes is not None else int(y.max()) + 1
    if y.max() >= k:
        raise ClassificationError(f"label {int(y.max())} out of range for {k} classes")
    return RandomForest(params, k).fit(X, y, sample_weight)
