"""Analytic model of an n-class priority traffic shaper.

Classes are indexed 0..n-1 in code (class c_1 is index 0); priority grows
with the index, so the last class is served first.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import InputError

POLE_GUARD = 1e-6


def default_thresholds(n: int, total_bw: float) -> list[float]:
    """Per-class maximum bandwidths from 100% of TB (c_1) down to 25% (c_n)."""
    if n < 2:
        raise InputError("need at least two classes")
    return [total_bw * (1.0 - 0.75 * i / (n - 1)) for i in range(n)]


@dataclass(frozen=True)
class ShaperConfig:
    n: int = 8
    total_bw: float = 400.0
    thresholds: tuple = ()
    base_latency_ms: float = 10.0
    queue_gain_ms: float = 40.0
    overload_latency_ms: float = 5000.0
    latency_cap_ms: float = 6000.0
    priority_penalty: float = 1.0
    jitter_fraction: float = 0.1
    noise_amplitude: float = 0.0

    def __post_init__(self):
        if not self.thresholds:
            object.__setattr__(self, "thresholds",
                               tuple(default_thresholds(self.n, self.total_bw)))
        else:
            object.__setattr__(self, "thresholds",
                               tuple(float(t) for t in self.thresholds))
        self.validate()

    def validate(self) -> None:
        if int(self.n) != self.n or self.n < 2:
            raise InputError(f"n must be an integer >= 2, got {self.n}")
        if self.total_bw <= 0:
            raise InputError("total_bw must be positive")
        if len(self.thresholds) != self.n:
            raise InputError(
                f"expected {self.n} thresholds, got {len(self.thresholds)}")
        for t in self.thresholds:
            if not 0 < t <= self.total_bw:
                raise InputError(f"threshold {t} outside (0, total_bw]")
        if any(b > a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise InputError("thresholds must be non-increasing in priority")
        for name in ("base_latency_ms", "queue_gain_ms", "overload_latency_ms",
                     "latency_cap_ms", "priority_penalty"):
            if getattr(self, name) <= 0:
                raise InputError(f"{name} must be positive")
        if not 0 <= self.jitter_fraction < 1:
            raise InputError("jitter_fraction must lie in [0, 1)")
        if not 0 <= self.noise_amplitude < 1:
            raise InputError("noise_amplitude must lie in [0, 1)")

    @property
    def bw_ranges(self) -> np.ndarray:
        return np.asarray(self.thresholds, dtype=float)

    def priority_factor(self) -> np.ndarray:
        """p_i = 1 + kappa * (n - i) / n with 1-based i."""
        i = np.arange(1, self.n + 1)
        return 1.0 + self.priority_penalty * (self.n - i) / self.n

    def to_dict(self) -> dict:
        d = asdict(self)
        d["thresholds"] = list(self.thresholds)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ShaperConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise InputError(f"unknown config fields: {sorted(unknown)}")
        d = dict(d)
        if "thresholds" in d and d["thresholds"] is not None:
            d["thresholds"] = tuple(d["thresholds"])
        else:
            d.pop("thresholds", None)
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ShaperConfig":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "ShaperConfig":
        return cls.from_json(Path(path).read_text())


@dataclass(frozen=True)
class ClassMetrics:
    alloc: np.ndarray
    latency_ms: np.ndarray
    jitter_ms: np.ndarray
    loss_pct: np.ndarray

    def to_dict(self) -> dict:
        return {k: [float(x) for x in getattr(self, k)]
                for k in ("alloc", "latency_ms", "jitter_ms", "loss_pct")}


def check_input(config: ShaperConfig, tr: Sequence[float]) -> np.ndarray:
    tr = np.asarray(tr, dtype=float)
    if tr.ndim != 1 or tr.shape[0] != config.n:
        raise InputError(
            f"input has shape {tr.shape}, expected ({config.n},)")
    if not np.all(np.isfinite(tr)):
        raise InputError("input contains non-finite values")
    # small slack for values produced by floating-point range arithmetic
    tol = 1e-9 * config.total_bw
    if np.any(tr < -tol) or np.any(tr > config.bw_ranges + tol):
        raise InputError("each tr_i must lie in [0, bwR_i]")
    return np.clip(tr, 0.0, config.bw_ranges)


def allocate_bandwidth(config: ShaperConfig, tr: Sequence[float]) -> np.ndarray:
    """Greedy water-filling from the highest-priority class downwards."""
    tr = check_input(config, tr)
    alloc = np.zeros(config.n)
    remaining = float(config.total_bw)
    for i in range(config.n - 1, -1, -1):
        a = min(tr[i], config.thresholds[i], remaining)
        alloc[i] = a
        remaining -= a
    return alloc


def _queue_latency(config: ShaperConfig, rho, p):
    lat = (config.base_latency_ms
           + config.queue_gain_ms * rho / (1.0 - rho + POLE_GUARD)) * p
    return np.minimum(lat, config.latency_cap_ms)


def simulate(config: ShaperConfig, tr: Sequence[float],
             seed: Optional[int] = None) -> ClassMetrics:
    """Map a requested-bandwidth tuple to per-class allocation and quality.

    Noise is applied only when ``config.noise_amplitude > 0`` and a seed is
    given; otherwise the result is a pure function of ``(config, tr)``.
    """
    tr = check_input(config, tr)
    alloc = allocate_bandwidth(config, tr)
    bwr = config.bw_ranges
    p = config.priority_factor()
    rho = alloc / bwr

    queued = _queue_latency(config, rho, p)
    overloaded = alloc < tr
    latency = queued.copy()
    loss = np.zeros(config.n)
    if np.any(overloaded):
        t = tr[overloaded]
        excess = (t - alloc[overloaded]) / t
        over = config.overload_latency_ms * (1.0 + excess) * p[overloaded] / p[-1]
        # never below the latency the class had right at the overload edge
        over = np.maximum(over, queued[overloaded])
        latency[overloaded] = np.minimum(config.latency_cap_ms, over)
        loss[overloaded] = 100.0 * excess

    jitter = config.jitter_fraction * latency
    if config.noise_amplitude > 0 and seed is not None:
        rng = np.random.default_rng(seed)
        a = config.noise_amplitude
        latency = latency * rng.uniform(1 - a, 1 + a, config.n)
        jitter = jitter * rng.uniform(1 - a, 1 + a, config.n)
        latency = np.clip(latency, config.base_latency_ms, config.latency_cap_ms)
    return ClassMetrics(alloc=alloc, latency_ms=latency, jitter_ms=jitter,
                        loss_pct=loss)
