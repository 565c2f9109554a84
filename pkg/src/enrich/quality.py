"""Effective latency -> R-factor -> MOS chain for per-class voice quality."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InputError
from .shaper import ClassMetrics


@dataclass(frozen=True)
class QualityConstants:
    latency_impact: float = 2.0
    comp_time_ms: float = 10.0
    default_r: float = 93.0
    degraded_r: float = 10.0
    loss_penalty: float = 2.5
    # above this effective latency the base R drops to ``degraded_r``
    degraded_after_ms: float = 500.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value <= 0:
                raise InputError(f"{name} must be positive")
        if self.degraded_r >= self.default_r:
            raise InputError("degraded_r must be below default_r")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "QualityConstants":
        return cls(**d)


DEFAULT_CONSTANTS = QualityConstants()


def effective_latency(latency_ms: float, jitter_ms: float,
                      constants: QualityConstants = DEFAULT_CONSTANTS) -> float:
    if latency_ms < 0 or jitter_ms < 0:
        raise InputError("latency and jitter must be non-negative")
    return latency_ms + jitter_ms * constants.latency_impact + constants.comp_time_ms


def r_factor(eff_latency_ms: float, loss_pct: float,
             constants: QualityConstants = DEFAULT_CONSTANTS) -> float:
    if eff_latency_ms < 0:
        raise InputError("effective latency must be non-negative")
    if not 0 <= loss_pct <= 100:
        raise InputError("loss_pct must lie in [0, 100]")
    if eff_latency_ms > constants.degraded_after_ms:
        base = constants.degraded_r
    else:
        base = constants.default_r
    if eff_latency_ms < 160:
        r = base - eff_latency_ms / 40.0
    else:
        r = base - (eff_latency_ms - 120.0) / 40.0
    r -= loss_pct * constants.loss_penalty
    return min(max(r, 0.0), 100.0)


def mos_from_r(r: float) -> float:
    """ITU-T G.107 mapping from transmission rating R to MOS."""
    if not 0 <= r <= 100:
        raise InputError(f"R must lie in [0, 100], got {r}")
    if r <= 0:
        return 1.0
    if r >= 100:
        return 4.5
    mos = 1.0 + 0.035 * r + 7e-6 * r * (r - 60.0) * (100.0 - r)
    # the cubic dips below 1 for 0 < R < ~6.5
    return max(mos, 1.0)


def class_mos(metrics: ClassMetrics,
              constants: QualityConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    out = []
    for lat, jit, loss in zip(metrics.latency_ms, metrics.jitter_ms,
                              metrics.loss_pct):
        eff = effective_latency(float(lat), float(jit), constants)
        out.append(mos_from_r(r_factor(eff, float(loss), constants)))
    return np.asarray(out)
