"""Fixed-size-candidate-set adaptive random testing over a box."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InputError


@dataclass
class SearchBox:
    """Per-variable sampling ranges, optionally narrowed around focus values.

    ``scale`` normalizes distances per dimension (normally bwR_i).
    """

    lo: np.ndarray
    hi: np.ndarray
    scale: np.ndarray
    focus: Optional[list] = None
    focus_half_width: float = 0.0

    def __post_init__(self):
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        self.scale = np.asarray(self.scale, dtype=float)
        if self.focus is None:
            self.focus = [None] * len(self.lo)
        if not (len(self.lo) == len(self.hi) == len(self.scale) == len(self.focus)):
            raise InputError("box dimensions disagree")
        if len(self.lo) == 0:
            raise InputError("empty box")
        if np.any(self.lo > self.hi):
            raise InputError("box has lo > hi")
        lo, hi = self.sampling_bounds()
        if np.any(lo > hi):
            raise InputError("focus interval does not intersect the box")

    @classmethod
    def full(cls, bw_ranges: Sequence[float]) -> "SearchBox":
        bw = np.asarray(bw_ranges, dtype=float)
        return cls(lo=np.zeros_like(bw), hi=bw.copy(), scale=bw.copy())

    def with_focus(self, focus: list, half_width: float) -> "SearchBox":
        return SearchBox(self.lo, self.hi, self.scale, list(focus), half_width)

    def sampling_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.lo.copy(), self.hi.copy()
        for i, v in enumerate(self.focus):
            if v is not None:
                lo[i] = max(lo[i], v - self.focus_half_width)
                hi[i] = min(hi[i], v + self.focus_half_width)
        return lo, hi

    def contains(self, x, tol: float = 1e-9) -> bool:
        lo, hi = self.sampling_bounds()
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= lo - tol) and np.all(x <= hi + tol))


def _min_distances(cands: np.ndarray, prior: np.ndarray) -> np.ndarray:
    diff = cands[:, None, :] - prior[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=2)).min(axis=1)


def gen_tests(box: SearchBox, k: int, existing=(), pool_size: int = 10,
              rng: Optional[np.random.Generator] = None) -> list[np.ndarray]:
    """Pick ``k`` tests, each the candidate farthest from all earlier tests.

    Every round draws ``pool_size`` uniform candidates from the box and keeps
    the one maximizing its minimum (scale-normalized) Euclidean distance to
    ``existing`` plus the tests selected so far. Ties go to the lowest
    candidate index, so with no prior tests the first candidate wins.
    """
    if k <= 0:
        return []
    if pool_size < 1:
        raise InputError("pool_size must be >= 1")
    rng = rng if rng is not None else np.random.default_rng()
    lo, hi = box.sampling_bounds()
    scale = np.where(box.scale > 0, box.scale, 1.0)
    prior = [np.asarray(e, dtype=float) / scale for e in existing]
    chosen = []
    for _ in range(k):
        cands = lo + rng.random((pool_size, len(lo))) * (hi - lo)
        if prior:
            d = _min_distances(cands / scale, np.asarray(prior))
            pick = int(np.argmax(d))  # first maximum on ties
        else:
            pick = 0
        chosen.append(cands[pick])
        prior.append(cands[pick] / scale)
    return chosen
