"""Labelled test sets, range-based prediction and run-combination metrics."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InputError
from .quality import DEFAULT_CONSTANTS, QualityConstants
from .reduce import RangeSet
from .robustness import (DEFAULT_PARAMS, Label, RobustnessParams,
                         label_by_perturbation)
from .shaper import ShaperConfig


@dataclass
class LabelledTestSet:
    tests: np.ndarray
    labels: list  # of Label
    seed: Optional[int] = None

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def non_robust(self) -> np.ndarray:
        return np.array([l == Label.NON_ROBUST for l in self.labels], dtype=bool)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            self.dump(fh)

    def dump(self, fh) -> None:
        n = self.tests.shape[1]
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"tr_{i + 1}" for i in range(n)] + ["label"])
        for t, l in zip(self.tests, self.labels):
            w.writerow([repr(float(v)) for v in t] + [l.value])

    @classmethod
    def read_csv(cls, path, seed: Optional[int] = None) -> "LabelledTestSet":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise InputError(f"{path}: empty test set")
        cols = [c for c in rows[0] if c.startswith("tr_")]
        tests = np.array([[float(r[c]) for c in cols] for r in rows])
        return cls(tests, [Label(r["label"]) for r in rows], seed)


def build_labelled_testset(config: ShaperConfig,
                           constants: QualityConstants = DEFAULT_CONSTANTS,
                           params: RobustnessParams = DEFAULT_PARAMS,
                           size: int = 200, seed: int = 0,
                           tests: Optional[np.ndarray] = None) -> LabelledTestSet:
    """Uniform tests over [0, bwR_i] labelled by the perturbation oracle.

    ``tests`` overrides sampling (used for hand-picked fixtures).
    """
    rng = np.random.default_rng(seed)
    if tests is None:
        if size < 1:
            raise InputError("size must be >= 1")
        tests = rng.random((size, config.n)) * config.bw_ranges
    tests = np.asarray(tests, dtype=float).reshape(-1, config.n)
    labels = []
    for i, t in enumerate(tests):
        noise_seed = None
        if config.noise_amplitude > 0:
            noise_seed = int(np.random.SeedSequence([seed, i]).generate_state(1)[0])
        labels.append(label_by_perturbation(config, t, constants, params, noise_seed))
    return LabelledTestSet(tests, labels, seed)


def _in_ranges(rs: RangeSet, tests: np.ndarray, epsilon_fraction) -> np.ndarray:
    """Boolean vector: does one run flag each test as non-robust?"""
    if tests.shape[1] != len(rs.anchors):
        raise InputError("test dimension does not match the range set")
    bounds = rs.bounds(epsilon_fraction)
    if all(b is None for b in bounds):
        return np.zeros(len(tests), dtype=bool)
    hit = np.ones(len(tests), dtype=bool)
    for i, b in enumerate(bounds):
        if b is not None:
            hit &= (tests[:, i] >= b[0]) & (tests[:, i] <= b[1])
    return hit


def classify_with_ranges(rangesets: Sequence[RangeSet], test,
                         epsilon_fraction: Optional[float] = None) -> Label:
    """NonRobust iff at least one run's ranges all contain the test."""
    if not rangesets:
        raise InputError("need at least one range set")
    t = np.asarray(test, dtype=float).reshape(1, -1)
    hit = any(_in_ranges(rs, t, epsilon_fraction)[0] for rs in rangesets)
    return Label.NON_ROBUST if hit else Label.ROBUST


def predict_matrix(rangesets: Sequence[RangeSet], tests: np.ndarray,
                   epsilon_fraction: Optional[float] = None) -> np.ndarray:
    """Per-run predictions, shape (runs, tests); True = non-robust."""
    tests = np.asarray(tests, dtype=float)
    return np.array([_in_ranges(rs, tests, epsilon_fraction) for rs in rangesets],
                    dtype=bool).reshape(len(rangesets), len(tests))


@dataclass(frozen=True)
class MetricsReport:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total

    # An empty denominator yields 0.
    @staticmethod
    def _ratio(a, b) -> float:
        return a / b if b else 0.0

    @property
    def precision_nr(self) -> float:
        return self._ratio(self.tp, self.tp + self.fp)

    @property
    def recall_nr(self) -> float:
        return self._ratio(self.tp, self.tp + self.fn)

    @property
    def precision_r(self) -> float:
        return self._ratio(self.tn, self.tn + self.fn)

    @property
    def recall_r(self) -> float:
        return self._ratio(self.tn, self.tn + self.fp)

    def as_row(self) -> dict:
        return {"accuracy": self.accuracy,
                "precision_nr": self.precision_nr, "recall_nr": self.recall_nr,
                "precision_r": self.precision_r, "recall_r": self.recall_r}


def _as_bool(labels) -> np.ndarray:
    out = []
    for l in labels:
        if isinstance(l, (bool, np.bool_)):
            out.append(bool(l))
        else:
            out.append(Label(l) == Label.NON_ROBUST)
    return np.asarray(out, dtype=bool)


def metrics(predicted, actual) -> MetricsReport:
    """Confusion counts with non-robust as the positive class."""
    p, a = _as_bool(predicted), _as_bool(actual)
    if len(p) != len(a):
        raise InputError("predicted and actual differ in length")
    if len(p) == 0:
        raise InputError("metrics of an empty set")
    return MetricsReport(tp=int(np.sum(p & a)), fp=int(np.sum(p & ~a)),
                         tn=int(np.sum(~p & ~a)), fn=int(np.sum(~p & a)))


def combinations_for(n_runs: int, size: int, samples: int,
                     rng: np.random.Generator) -> list[tuple]:
    """All C(runs, size) subsets when there are at most ``samples`` of them,
    else ``samples`` distinct random subsets."""
    if not 1 <= size <= n_runs:
        raise InputError(f"combination size {size} outside 1..{n_runs}")
    if math.comb(n_runs, size) <= samples:
        return list(itertools.combinations(range(n_runs), size))
    seen, out = set(), []
    while len(out) < samples:
        c = tuple(sorted(rng.choice(n_runs, size, replace=False).tolist()))
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


@dataclass
class ComboResult:
    n_runs: int
    combo_id: int
    runs: tuple
    report: MetricsReport


def run_combinations(rangesets: Sequence[RangeSet], size: int, samples: int,
                     testset: LabelledTestSet, epsilon_fraction: float,
                     rng: np.random.Generator,
                     _pred: Optional[np.ndarray] = None) -> list[ComboResult]:
    pred = _pred if _pred is not None else predict_matrix(
        rangesets, testset.tests, epsilon_fraction)
    actual = testset.non_robust
    out = []
    for cid, combo in enumerate(combinations_for(len(rangesets), size, samples, rng)):
        p = pred[list(combo)].any(axis=0)
        out.append(ComboResult(size, cid, combo, metrics(p, actual)))
    return out


def summarize(results: Sequence[ComboResult]) -> dict:
    """Mean and quartiles of each metric over combinations."""
    rows = [r.report.as_row() for r in results]
    out = {}
    for key in rows[0]:
        v = np.array([r[key] for r in rows])
        q1, med, q3 = np.percentile(v, [25, 50, 75])
        out[key] = {"mean": float(v.mean()), "q1": float(q1),
                    "median": float(med), "q3": float(q3)}
    return out


def sweep(rangesets: Sequence[RangeSet], testset: LabelledTestSet,
          epsilon_fraction: float, samples: int = 20, seed: int = 0,
          sizes: Optional[Sequence[int]] = None) -> dict:
    """run_combinations for every combination size; returns {size: results}."""
    rng = np.random.default_rng(seed)
    pred = predict_matrix(rangesets, testset.tests, epsilon_fraction)
    sizes = sizes or range(1, len(rangesets) + 1)
    return {k: run_combinations(rangesets, k, samples, testset, epsilon_fraction,
                                rng, _pred=pred) for k in sizes}


def exact_mean_recall(rangesets: Sequence[RangeSet], testset: LabelledTestSet,
                      epsilon_fraction: float) -> dict:
    """Average non-robust recall over every subset of each size, in closed form.

    A positive test flagged by c of R runs is missed by a random k-subset with
    probability C(R - c, k) / C(R, k), so no subsets are enumerated.
    """
    pred = predict_matrix(rangesets, testset.tests, epsilon_fraction)
    actual = testset.non_robust
    r = len(rangesets)
    hits = pred[:, actual].sum(axis=0)
    out = {}
    for k in range(1, r + 1):
        if not actual.any():
            out[k] = 0.0
            continue
        total = math.comb(r, k)
        caught = [1.0 - math.comb(r - int(c), k) / total for c in hits]
        out[k] = float(math.fsum(caught) / len(caught))
    return out


COMBO_COLUMNS = ["method", "epsilon", "n_runs", "combo_id", "accuracy",
                 "precision_nr", "recall_nr", "precision_r", "recall_r"]


def write_combinations_csv(path, rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=COMBO_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v)
                        for k, v in row.items()})


def read_combinations_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for k in ("n_runs", "combo_id"):
            r[k] = int(r[k])
        for k in ("epsilon", "accuracy", "precision_nr", "recall_nr",
                  "precision_r", "recall_r"):
            r[k] = float(r[k])
    return rows


def _swing_term(x: float, a: float, threshold: float) -> float:
    denom = max(abs(0 - x), abs(x - threshold))
    if denom == 0:
        # only when x == 0 == threshold; identical edges do not swing
        return 0.0 if a == x else float("inf")
    return abs(x - a) / denom


def range_swing(earlier: Sequence, later: Sequence, threshold: float):
    """Convergence of one variable's ranges between two iterations.

    ``earlier`` is (R_1, R_2) and ``later`` is (R'_1, R'_2); each range is a
    (lo, hi) pair or None. Terms compare range lower edges, normalized by the
    larger distance from the edge to 0 or to ``threshold``. Returns None when
    the comparison is undefined.
    """
    r1, r2 = (tuple(earlier) + (None, None))[:2]
    q1, q2 = (tuple(later) + (None, None))[:2]
    if r1 is None or q1 is None:
        return None
    x, a = r1[0], q1[0]
    if r2 is None and q2 is None:
        return _swing_term(x, a, threshold)
    if q2 is None:
        h = r2[0]
        return min(_swing_term(x, a, threshold), _swing_term(h, a, threshold))
    c = q2[0]
    if r2 is None:
        return min(_swing_term(x, a, threshold), _swing_term(x, c, threshold))
    h = r2[0]
    return (min(_swing_term(x, a, threshold), _swing_term(h, a, threshold))
            + min(_swing_term(x, c, threshold), _swing_term(h, c, threshold))) / 2


def weighted_sum_key(test) -> float:
    """Sort key sum_i i * tr_i (1-based weights)."""
    t = np.asarray(test, dtype=float)
    return float(np.dot(np.arange(1, len(t) + 1), t))
