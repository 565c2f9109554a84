"""CART regression tree (squared-error splits) with root-to-leaf path listing."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from .errors import InputError

LE = "<="
GT = ">"


@dataclass(frozen=True)
class Predicate:
    var: int  # 0-based variable index
    op: str
    value: float

    def holds(self, x) -> bool:
        return x[self.var] <= self.value if self.op == LE else x[self.var] > self.value

    def __str__(self) -> str:
        return f"tr_{self.var + 1} {self.op} {self.value:g}"


@dataclass
class Node:
    mean: float
    count: int
    var: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["Node"] = None
    right: Optional["Node"] = None
    id: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass
class Path:
    predicates: list
    mean: float
    node_ids: tuple
    # the inner node behind each predicate, aligned with ``predicates``
    parents: list = field(default_factory=list, repr=False)


class RegressionTree:
    def __init__(self, root: Node, n_features: int):
        self.root = root
        self.n_features = n_features
        self._number()

    def _number(self) -> None:
        for i, node in enumerate(self.bfs(), start=1):
            node.id = i

    def bfs(self) -> Iterator[Node]:
        queue = deque([self.root])
        while queue:
            node = queue.popleft()
            yield node
            if not node.is_leaf:
                queue.append(node.left)
                queue.append(node.right)

    def leaves(self) -> list[Node]:
        return [n for n in self.bfs() if n.is_leaf]

    def node(self, node_id: int) -> Node:
        for n in self.bfs():
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def leaf_for(self, x) -> Node:
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.var] <= node.threshold else node.right
        return node

    def predict(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n_features:
            raise InputError("input dimension does not match the tree")
        return self.leaf_for(x).mean

    def to_dict(self) -> dict:
        nodes = []
        for n in self.bfs():
            d = {"id": n.id, "mean": float(n.mean), "count": int(n.count)}
            if not n.is_leaf:
                d.update(variable=n.var + 1, threshold=float(n.threshold),
                         left=n.left.id, right=n.right.id)
            nodes.append(d)
        return {"n_features": self.n_features, "nodes": nodes}

    @classmethod
    def from_dict(cls, d: dict) -> "RegressionTree":
        by_id = {}
        for nd in d["nodes"]:
            var = nd.get("variable")
            by_id[nd["id"]] = Node(mean=nd["mean"], count=nd["count"],
                                   var=None if var is None else var - 1,
                                   threshold=nd.get("threshold"))
        for nd in d["nodes"]:
            if "left" in nd:
                by_id[nd["id"]].left = by_id[nd["left"]]
                by_id[nd["id"]].right = by_id[nd["right"]]
        return cls(by_id[d["nodes"][0]["id"]], d["n_features"])


def _mean(y: np.ndarray) -> float:
    # correctly rounded, so independent of row order
    return math.fsum(y) / len(y)


def _best_split(X: np.ndarray, y: np.ndarray, node_size: int):
    """Return (sse, var, threshold) of the best split, or None.

    Candidates within a relative 1e-12 of the minimum SSE count as ties and
    go to the lowest variable index, then the smallest split value.
    """
    n = len(y)
    yc = y - _mean(y)
    total = float((yc ** 2).sum())
    left_n = np.arange(node_size, n - node_size + 1)  # admissible left sizes
    if len(left_n) == 0:
        return None
    idx = left_n - 1
    cands = []
    for var in range(X.shape[1]):
        # secondary key on y makes the summation order data-determined
        order = np.lexsort((yc, X[:, var]))
        xs, ys = X[order, var], yc[order]
        s1 = np.cumsum(ys)
        s2 = np.cumsum(ys ** 2)
        ok = xs[idx] < xs[idx + 1]
        if not ok.any():
            continue
        i = idx[ok]
        nl = i + 1.0
        nr = n - nl
        sl = s1[i]
        sr = s1[-1] - sl
        sse = (s2[i] - sl * sl / nl) + ((s2[-1] - s2[i]) - sr * sr / nr)
        mid = 0.5 * (xs[i] + xs[i + 1])
        bad = ~((xs[i] <= mid) & (mid < xs[i + 1]))
        mid[bad] = xs[i][bad]
        cands.append((var, sse, mid))
    if not cands:
        return None
    best = min(float(c[1].min()) for c in cands)
    tol = 1e-12 * max(total, 1.0)
    for var, sse, mid in cands:
        hit = np.flatnonzero(sse <= best + tol)
        if len(hit):
            j = hit[0]
            return float(sse[j]), var, float(mid[j])
    return None


def _grow(X: np.ndarray, y: np.ndarray, node_size: int) -> Node:
    node = Node(mean=_mean(y), count=len(y))
    if len(y) < 2 * node_size or np.ptp(y) == 0:
        return node
    split = _best_split(X, y, node_size)
    if split is None:
        return node
    _, var, thr = split
    mask = X[:, var] <= thr
    node.var, node.threshold = var, thr
    node.left = _grow(X[mask], y[mask], node_size)
    node.right = _grow(X[~mask], y[~mask], node_size)
    return node


def build_tree(X, y, node_size: int = 1) -> RegressionTree:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise InputError("build_tree needs a non-empty 2-D dataset")
    if len(y) != len(X):
        raise InputError("row count of inputs and scores differ")
    if node_size < 1:
        raise InputError("node_size must be >= 1")
    return RegressionTree(_grow(X, y, node_size), X.shape[1])


def enumerate_paths(tree: RegressionTree) -> list[Path]:
    """Root-to-leaf paths, depth-first with the <= branch first."""
    out = []

    def walk(node, preds, ids, parents):
        ids = ids + (node.id,)
        if node.is_leaf:
            out.append(Path(list(preds), node.mean, ids, list(parents)))
            return
        walk(node.left, preds + [Predicate(node.var, LE, node.threshold)],
             ids, parents + [node])
        walk(node.right, preds + [Predicate(node.var, GT, node.threshold)],
             ids, parents + [node])

    walk(tree.root, [], (), [])
    return out
