"""Turn a regression tree into epsilon-parameterized non-robustness ranges."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InputError
from .regtree import GT, LE, Path, Predicate, RegressionTree, enumerate_paths

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundPair:
    lower: Optional[float] = None  # tr_i > lower
    upper: Optional[float] = None  # tr_i <= upper

    def anchor(self) -> float:
        if self.lower is not None and self.upper is not None:
            return 0.5 * (self.lower + self.upper)
        return self.lower if self.lower is not None else self.upper


@dataclass
class RangeSet:
    """Per-variable anchors; ranges are materialized for a given epsilon.

    ``epsilon_fraction`` scales each variable's default range [0, bwR_i].
    """

    anchors: list
    bw_ranges: tuple
    epsilon_fraction: float = 0.05

    @classmethod
    def empty(cls, bw_ranges: Sequence[float], epsilon_fraction: float = 0.05):
        return cls([None] * len(bw_ranges), tuple(float(b) for b in bw_ranges),
                   epsilon_fraction)

    @property
    def constrained(self) -> list[int]:
        return [i for i, a in enumerate(self.anchors) if a is not None]

    def is_empty(self) -> bool:
        return not self.constrained

    def bounds(self, epsilon_fraction: Optional[float] = None):
        """List of (lo, hi) per variable, None where unconstrained."""
        eps = self.epsilon_fraction if epsilon_fraction is None else epsilon_fraction
        out = []
        for v, bw in zip(self.anchors, self.bw_ranges):
            if v is None:
                out.append(None)
            else:
                e = eps * bw
                out.append((max(v - e, 0.0), min(v + e, bw)))
        return out

    def to_list(self, epsilon_fraction: Optional[float] = None) -> list[dict]:
        eps = self.epsilon_fraction if epsilon_fraction is None else epsilon_fraction
        rows = []
        for i, b in enumerate(self.bounds(eps)):
            if b is not None:
                rows.append({"variable": i + 1, "anchor": float(self.anchors[i]),
                             "lo": float(b[0]), "hi": float(b[1]),
                             "epsilon_fraction": eps})
        return rows

    def to_dict(self) -> dict:
        return {"bw_ranges": list(self.bw_ranges),
                "epsilon_fraction": self.epsilon_fraction,
                "ranges": self.to_list()}

    @classmethod
    def from_dict(cls, d: dict) -> "RangeSet":
        rs = cls.empty(d["bw_ranges"], d.get("epsilon_fraction", 0.05))
        for row in d["ranges"]:
            rs.anchors[row["variable"] - 1] = float(row["anchor"])
        return rs


def _side(mean: float, rb_threshold: float) -> bool:
    return mean >= rb_threshold


def select_boundary_paths(tree: RegressionTree, rb_threshold: float) -> list[Path]:
    """The two leaves closest to the threshold, one on each side if possible."""
    paths = sorted(enumerate_paths(tree),
                   key=lambda p: (abs(p.mean - rb_threshold), p.node_ids))
    if len(paths) == 1:
        return paths
    first = paths[0]
    for p in paths[1:]:
        if _side(p.mean, rb_threshold) != _side(first.mean, rb_threshold):
            return [first, p]
    return [first, paths[1]]


def filter_predicates(tree: RegressionTree, path: Path,
                      rb_threshold: float) -> list[Predicate]:
    """Keep predicates whose split separates an above- from a below-threshold child."""
    kept = []
    for pred, parent in zip(path.predicates, path.parents):
        if _side(parent.left.mean, rb_threshold) != _side(parent.right.mean, rb_threshold):
            kept.append(pred)
    return kept


def simplify(predicates: Sequence[Predicate]) -> tuple[dict, list[str]]:
    """Collapse predicates to the tightest lower/upper bound per variable.

    A variable whose lower bound exceeds its upper bound is dropped and a
    warning recorded. Equal bounds are kept: the two paths meet at that value.
    """
    lower: dict = {}
    upper: dict = {}
    for p in predicates:
        if p.op == LE:
            upper[p.var] = min(upper.get(p.var, np.inf), p.value)
        elif p.op == GT:
            lower[p.var] = max(lower.get(p.var, -np.inf), p.value)
        else:
            raise InputError(f"unknown operator {p.op!r}")
    bounds, warnings = {}, []
    for var in sorted(set(lower) | set(upper)):
        lo, hi = lower.get(var), upper.get(var)
        if lo is not None and hi is not None and lo > hi:
            msg = f"contradictory bounds on tr_{var + 1}: > {lo:g} and <= {hi:g}"
            log.debug(msg)
            warnings.append(msg)
            continue
        bounds[var] = BoundPair(lo, hi)
    return bounds, warnings


def bounds_to_predicates(bounds: dict) -> list[Predicate]:
    preds = []
    for var in sorted(bounds):
        b = bounds[var]
        if b.lower is not None:
            preds.append(Predicate(var, GT, b.lower))
        if b.upper is not None:
            preds.append(Predicate(var, LE, b.upper))
    return preds


def to_ranges(bounds: dict, epsilon_fraction: float, bw_ranges) -> RangeSet:
    if not 0 < epsilon_fraction < 1:
        raise InputError("epsilon_fraction must lie in (0, 1)")
    rs = RangeSet.empty(bw_ranges, epsilon_fraction)
    for var, b in bounds.items():
        rs.anchors[var] = float(b.anchor())
    return rs


def merge_ranges(previous: RangeSet, new: RangeSet) -> RangeSet:
    """New anchors replace old ones; variables the new set misses keep theirs."""
    if len(previous.anchors) != len(new.anchors):
        raise InputError("range sets differ in dimension")
    anchors = [n if n is not None else p
               for p, n in zip(previous.anchors, new.anchors)]
    return RangeSet(anchors, new.bw_ranges, new.epsilon_fraction)


def reduce_tree(tree: RegressionTree, rb_threshold: float,
                epsilon_fraction: float, bw_ranges) -> RangeSet:
    preds = []
    for path in select_boundary_paths(tree, rb_threshold):
        preds.extend(filter_predicates(tree, path, rb_threshold))
    bounds, _ = simplify(preds)
    return to_ranges(bounds, epsilon_fraction, bw_ranges)
