"""The iterative ENRICH loop and the single-pass BASELINE."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .art import SearchBox, gen_tests
from .errors import InputError
from .quality import DEFAULT_CONSTANTS, QualityConstants
from .reduce import RangeSet, merge_ranges, reduce_tree
from .regtree import build_tree
from .robustness import RobustnessParams, score_input
from .shaper import ShaperConfig

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunParams:
    initial_suite: int = 100
    suite_size: int = 20
    iterations: int = 10
    node_size: int = 1
    rb_threshold: float = 3.6
    total_bw: Optional[float] = None  # None: take it from the shaper config
    epsilon_fraction: float = 0.05
    seed: int = 0
    pool_size: int = 10
    focus_fraction: float = 0.05  # focus half-width as a fraction of TB

    @property
    def budget(self) -> int:
        return self.initial_suite + self.iterations * self.suite_size

    def validate(self, config: ShaperConfig) -> None:
        if self.initial_suite < 0 or self.suite_size < 0 or self.iterations < 0:
            raise InputError("test counts must be non-negative")
        if self.node_size < 1 or self.pool_size < 1:
            raise InputError("node_size and pool_size must be >= 1")
        if not 0 < self.epsilon_fraction < 1:
            raise InputError("epsilon_fraction must lie in (0, 1)")
        if self.total_bw is not None and self.total_bw != config.total_bw:
            raise InputError("run total_bw disagrees with the shaper config")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunParams":
        return cls(**d)


@dataclass
class Snapshot:
    iteration: int
    tests: np.ndarray
    scores: np.ndarray
    tree: Optional[dict]
    ranges: RangeSet
    focus: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"iteration": self.iteration,
                "tests": [[float(v) for v in t] for t in self.tests],
                "scores": [float(s) for s in self.scores],
                "focus": [None if f is None else float(f) for f in self.focus],
                "tree": self.tree,
                "ranges": self.ranges.to_dict()}

    @classmethod
    def from_dict(cls, d: dict, n: int) -> "Snapshot":
        return cls(iteration=d["iteration"],
                   tests=np.asarray(d["tests"], dtype=float).reshape(-1, n),
                   scores=np.asarray(d["scores"], dtype=float),
                   tree=d["tree"], ranges=RangeSet.from_dict(d["ranges"]),
                   focus=d.get("focus", []))


@dataclass
class RunRecord:
    method: str
    config: ShaperConfig
    params: RunParams
    snapshots: list
    final_ranges: RangeSet
    simulator_calls: int = 0

    @property
    def seed(self) -> int:
        return self.params.seed

    def all_tests(self) -> tuple[np.ndarray, np.ndarray]:
        X = np.vstack([s.tests for s in self.snapshots]) if self.snapshots else \
            np.zeros((0, self.config.n))
        y = np.concatenate([s.scores for s in self.snapshots]) if self.snapshots else \
            np.zeros(0)
        return X, y

    def to_dict(self) -> dict:
        return {"method": self.method,
                "seed": self.seed,
                "config": self.config.to_dict(),
                "params": self.params.to_dict(),
                "simulator_calls": self.simulator_calls,
                "iterations": [s.to_dict() for s in self.snapshots],
                "final_ranges": self.final_ranges.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        config = ShaperConfig.from_dict(d["config"])
        return cls(method=d["method"], config=config,
                   params=RunParams.from_dict(d["params"]),
                   snapshots=[Snapshot.from_dict(s, config.n) for s in d["iterations"]],
                   final_ranges=RangeSet.from_dict(d["final_ranges"]),
                   simulator_calls=d["simulator_calls"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "RunRecord":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def write_tests_csv(self, path, labels: Optional[dict] = None) -> None:
        """One row per executed test; ``labels`` maps row index to a label."""
        n = self.config.n
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration"] + [f"tr_{i + 1}" for i in range(n)]
                       + ["score", "label"])
            row = 0
            for snap in self.snapshots:
                for t, s in zip(snap.tests, snap.scores):
                    label = "" if labels is None else labels.get(row, "")
                    w.writerow([snap.iteration] + [repr(float(v)) for v in t]
                               + [repr(float(s)), label])
                    row += 1


class _Scorer:
    """Counts simulator calls; derives per-test noise seeds from the run seed."""

    def __init__(self, config, constants, robustness, seed):
        self.config = config
        self.constants = constants
        self.robustness = robustness
        self.seed = seed
        self.calls = 0

    def __call__(self, tests) -> np.ndarray:
        out = []
        for t in tests:
            noise_seed = None
            if self.config.noise_amplitude > 0:
                noise_seed = int(np.random.SeedSequence(
                    [self.seed, self.calls]).generate_state(1)[0])
            out.append(score_input(self.config, t, self.constants,
                                   self.robustness, noise_seed))
            self.calls += 1
        return np.asarray(out, dtype=float)


def _robustness(params: RunParams, robustness: Optional[RobustnessParams]):
    if robustness is None:
        return RobustnessParams(rb_threshold=params.rb_threshold)
    if robustness.rb_threshold != params.rb_threshold:
        raise InputError("rb_threshold differs between run and robustness params")
    return robustness


def run_enrich(config: ShaperConfig,
               constants: QualityConstants = DEFAULT_CONSTANTS,
               params: RunParams = RunParams(),
               robustness: Optional[RobustnessParams] = None) -> RunRecord:
    """Explore with ART, then alternate tree-building, Reduce and focused ART.

    Iteration 0 spreads ``initial_suite`` tests over the full box; each of the
    following ``iterations`` rounds adds ``suite_size`` tests sampled within
    +-focus_fraction*TB of the current anchors. Every round rebuilds the tree
    on all tests so far and merges the reduced ranges into the previous ones.
    """
    params.validate(config)
    robustness = _robustness(params, robustness)
    rng = np.random.default_rng(params.seed)
    score = _Scorer(config, constants, robustness, params.seed)
    full = SearchBox.full(config.thresholds)
    half_width = params.focus_fraction * config.total_bw

    ranges = RangeSet.empty(config.thresholds, params.epsilon_fraction)
    X = np.zeros((0, config.n))
    y = np.zeros(0)
    snapshots = []
    for it in range(params.iterations + 1):
        k = params.initial_suite if it == 0 else params.suite_size
        focus = list(ranges.anchors)
        box = full.with_focus(focus, half_width)
        tests = np.asarray(gen_tests(box, k, X, params.pool_size, rng)).reshape(-1, config.n)
        scores = score(tests)
        X = np.vstack([X, tests])
        y = np.concatenate([y, scores])
        tree = None
        if len(y):
            rt = build_tree(X, y, params.node_size)
            tree = rt.to_dict()
            new = reduce_tree(rt, params.rb_threshold, params.epsilon_fraction,
                              config.thresholds)
            ranges = merge_ranges(ranges, new)
        snapshots.append(Snapshot(it, tests, scores, tree, ranges, focus))
        log.debug("enrich seed=%d iter=%d anchored=%s", params.seed, it,
                  ranges.constrained)
    return RunRecord("enrich", config, params, snapshots, ranges, score.calls)


def run_baseline(config: ShaperConfig,
                 constants: QualityConstants = DEFAULT_CONSTANTS,
                 params: RunParams = RunParams(),
                 robustness: Optional[RobustnessParams] = None) -> RunRecord:
    """One explorative ART round with the whole budget, one tree, one Reduce."""
    params.validate(config)
    robustness = _robustness(params, robustness)
    rng = np.random.default_rng(params.seed)
    score = _Scorer(config, constants, robustness, params.seed)
    box = SearchBox.full(config.thresholds)
    tests = np.asarray(gen_tests(box, params.budget, (), params.pool_size, rng)
                       ).reshape(-1, config.n)
    scores = score(tests)
    ranges = RangeSet.empty(config.thresholds, params.epsilon_fraction)
    tree = None
    if len(scores):
        rt = build_tree(tests, scores, params.node_size)
        tree = rt.to_dict()
        ranges = reduce_tree(rt, params.rb_threshold, params.epsilon_fraction,
                             config.thresholds)
    snap = Snapshot(0, tests, scores, tree, ranges, [None] * config.n)
    return RunRecord("baseline", config, params, [snap], ranges, score.calls)
