"""Priority-preserving robustness measure over per-class MOS values."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InputError
from .quality import DEFAULT_CONSTANTS, QualityConstants, class_mos
from .shaper import ShaperConfig, check_input, simulate


class Label(str, enum.Enum):
    ROBUST = "robust"
    NON_ROBUST = "non-robust"


@dataclass(frozen=True)
class RobustnessParams:
    mos_thresholds: tuple = ()
    rb_threshold: float = 3.6
    perturbation: float = 0.02

    def thresholds_for(self, n: int) -> np.ndarray:
        if not self.mos_thresholds:
            return np.full(n, 4.0)
        if len(self.mos_thresholds) != n:
            raise InputError(
                f"expected {n} MOS thresholds, got {len(self.mos_thresholds)}")
        return np.asarray(self.mos_thresholds, dtype=float)

    def validate(self, n: int) -> None:
        th = self.thresholds_for(n)
        if np.any(th <= 1.0) or np.any(th >= 5.0):
            raise InputError("MOS thresholds must lie in (1, 5)")
        if not 0.5 < self.rb_threshold < n:
            raise InputError("rb_threshold must lie in (0.5, n)")
        if not 0 < self.perturbation <= 0.1:
            raise InputError("perturbation must lie in (0, 0.1]")

    def to_dict(self) -> dict:
        return {"mos_thresholds": list(self.mos_thresholds),
                "rb_threshold": self.rb_threshold,
                "perturbation": self.perturbation}

    @classmethod
    def from_dict(cls, d: dict) -> "RobustnessParams":
        d = dict(d)
        d["mos_thresholds"] = tuple(d.get("mos_thresholds") or ())
        return cls(**d)


DEFAULT_PARAMS = RobustnessParams()


def normalize(x: float) -> float:
    if x < 0:
        raise InputError("normalize expects a non-negative value")
    return x / (x + 1.0)


def robustness_measure(mos: Sequence[float],
                       params: RobustnessParams = DEFAULT_PARAMS) -> float:
    """Score a MOS vector (index 0 = lowest priority) on [0.5, n].

    With k the number of top-priority classes that all meet their threshold,
    the score is n when every class passes and otherwise k plus the
    normalized MOS of the highest-priority failing class.
    """
    mos = np.asarray(mos, dtype=float)
    n = mos.shape[0]
    th = params.thresholds_for(n)
    if np.any(mos < 1.0) or np.any(mos > 5.0):
        raise InputError("MOS values must lie in [1, 5]")
    norm = mos / (mos + 1.0)
    norm_th = th / (th + 1.0)
    k = 0
    for i in range(n - 1, -1, -1):
        # equality counts as passing
        if norm[i] < norm_th[i]:
            break
        k += 1
    if k == n:
        return float(n)
    return k + float(norm[n - 1 - k])


@dataclass(frozen=True)
class Interpretation:
    good_class_count: int
    acceptable: bool


def interpret(score: float, n: int, rb_threshold: float) -> Interpretation:
    good = n if score >= n else int(math.floor(score))
    return Interpretation(good_class_count=good, acceptable=score >= rb_threshold)


def score_input(config: ShaperConfig, tr: Sequence[float],
                constants: QualityConstants = DEFAULT_CONSTANTS,
                params: RobustnessParams = DEFAULT_PARAMS,
                seed: Optional[int] = None) -> float:
    metrics = simulate(config, tr, seed=seed)
    return robustness_measure(class_mos(metrics, constants), params)


def perturb(config: ShaperConfig, tr: Sequence[float], params: RobustnessParams,
            score: float) -> np.ndarray:
    """Shift every tr_i by the perturbation, toward the threshold side.

    Below the threshold traffic is removed (clamped at 0); otherwise it is
    added (clamped at bwR_i).
    """
    tr = check_input(config, tr)
    delta = params.perturbation * config.total_bw
    if score < params.rb_threshold:
        return np.maximum(tr - delta, 0.0)
    return np.minimum(tr + delta, config.bw_ranges)


def label_by_perturbation(config: ShaperConfig, tr: Sequence[float],
                          constants: QualityConstants = DEFAULT_CONSTANTS,
                          params: RobustnessParams = DEFAULT_PARAMS,
                          seed: Optional[int] = None) -> Label:
    before = score_input(config, tr, constants, params, seed)
    moved = perturb(config, tr, params, before)
    after = score_input(config, moved, constants, params, seed)
    flipped = (before >= params.rb_threshold) != (after >= params.rb_threshold)
    return Label.NON_ROBUST if flipped else Label.ROBUST
