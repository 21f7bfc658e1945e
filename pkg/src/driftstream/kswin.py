"""Sliding-window drift detector based on the two-sample KS statistic.

The detector keeps the last n samples (with labels) in a FIFO window. At
each step, once the window is full, the r newest samples form the recent
window R and r samples drawn uniformly without replacement from the older
n-r form the reference window W. A per-dimension KS statistic between W
and R is compared against the closed-form threshold sqrt(-ln(alpha)/r);
exceeding it in any dimension signals drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DimensionMismatchError, LabeledSample, SeededRng


class WindowNotFullError(RuntimeError):
    """Raised when a detection step is requested before n samples arrived."""


@dataclass(frozen=True)
class KswinConfig:
    n: int = 300          # sliding window capacity
    r: int = 30           # recent / reference window size
    alpha: float = 0.0001  # significance level of the per-dimension test

    def __post_init__(self):
        if not 1 <= self.r <= self.n // 2:
            raise ValueError(f"need 1 <= r <= n/2, got r={self.r}, n={self.n}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")


class SlidingWindow:
    """FIFO buffer of the last ``capacity`` labeled samples.

    Features and labels are stored in preallocated ring buffers; the oldest
    element is evicted when a push exceeds capacity.
    """

    def __init__(self, capacity: int, d: int):
        if capacity < 1 or d < 1:
            raise ValueError("capacity and d must be >= 1")
        self.capacity = capacity
        self.d = d
        self._xs = np.empty((capacity, d), dtype=np.float64)
        self._ys = np.empty(capacity, dtype=np.int64)
        self._head = 0  # next write slot
        self.fill = 0

    @property
    def full(self) -> bool:
        return self.fill == self.capacity

    def push(self, s: LabeledSample):
        if s.x.shape != (self.d,):
            raise DimensionMismatchError(
                f"sample has {s.x.shape} features, window expects ({self.d},)"
            )
        self._xs[self._head] = s.x
        self._ys[self._head] = s.y
        self._head = (self._head + 1) % self.capacity
        self.fill = min(self.fill + 1, self.capacity)

    def ordered(self) -> tuple[np.ndarray, np.ndarray]:
        """Window contents oldest to newest as (features, labels) copies."""
        if self.fill < self.capacity:
            return self._xs[: self.fill].copy(), self._ys[: self.fill].copy()
        idx = np.concatenate([np.arange(self._head, self.capacity),
                              np.arange(0, self._head)])
        return self._xs[idx], self._ys[idx]

    def __len__(self):
        return self.fill


@dataclass(frozen=True)
class DriftSignal:
    detected: bool
    statistics: np.ndarray          # per-dimension KS statistic
    threshold: float
    exceeded_dims: frozenset[int]
    recent_x: np.ndarray            # the r newest feature rows, oldest first
    recent_y: np.ndarray            # their labels

    @property
    def max_statistic(self) -> float:
        return float(np.max(self.statistics))

    def recent_samples(self) -> list[LabeledSample]:
        return [LabeledSample(x, int(y)) for x, y in zip(self.recent_x, self.recent_y)]


def ecdf_eval(values, x: float) -> float:
    """Fraction of values <= x (standard ECDF convention)."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("ECDF of an empty multiset is undefined")
    return float(np.count_nonzero(values <= x)) / values.size


def ks_statistic(a, b) -> float:
    """sup_x |F_a(x) - F_b(x)| over the pooled sample points.

    Both ECDFs are constant between pooled points, so evaluating only at
    the pooled points is exact. Ties contribute jointly at their shared
    point. Result lies in [0, 1] and is symmetric in (a, b).
    """
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ValueError("KS statistic needs two non-empty multisets")
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_threshold(alpha: float, r: int) -> float:
    """Rejection threshold sqrt(-ln(alpha)/r) for two equal windows of size r."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    return math.sqrt(-math.log(alpha) / r)


def split_windows(w: SlidingWindow, r: int, rng: SeededRng
                  ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Split a full window into (W_x, W_y, R_x, R_y).

    R is the r newest elements in window order; W is r elements sampled
    uniformly without replacement from the older n-r.
    """
    if not w.full:
        raise WindowNotFullError(f"window holds {w.fill}/{w.capacity} samples")
    xs, ys = w.ordered()
    n = w.capacity
    recent_x, recent_y = xs[n - r:], ys[n - r:]
    idx = rng.sample_without_replacement(n - r, r)
    return xs[idx], ys[idx], recent_x, recent_y


def detect(w: SlidingWindow, cfg: KswinConfig, rng: SeededRng) -> DriftSignal:
    """Run the per-dimension KS test on a full window.

    Drift is flagged iff the statistic of any dimension exceeds
    ks_threshold(alpha, r). The returned signal carries all per-dimension
    statistics and the recent window R with labels, which the adaptation
    step consumes.
    """
    wx, _, rx, ry = split_windows(w, cfg.r, rng)
    threshold = ks_threshold(cfg.alpha, cfg.r)
    stats = np.empty(w.d, dtype=np.float64)
    for i in range(w.d):
        stats[i] = ks_statistic(wx[:, i], rx[:, i])
    exceeded = frozenset(int(i) for i in np.nonzero(stats > threshold)[0])
    return DriftSignal(
        detected=bool(exceeded),
        statistics=stats,
        threshold=threshold,
        exceeded_dims=exceeded,
        recent_x=rx,
        recent_y=ry,
    )


class KswinDetector:
    """Stateful per-sample wrapper: push, then test once the window is full.

    The window is never reset after a detection; consecutive detections are
    possible and left to the caller's adaptation policy.
    """

    def __init__(self, d: int, cfg: KswinConfig = KswinConfig(), rng: SeededRng | None = None,
                 seed: int = 0):
        self.cfg = cfg
        self.rng = rng if rng is not None else SeededRng(seed)
        self.window = SlidingWindow(cfg.n, d)

    def update(self, s: LabeledSample) -> DriftSignal | None:
        """Feed one sample; returns a DriftSignal once history suffices."""
        self.window.push(s)
        if not self.window.full:
            return None
        return detect(self.window, self.cfg, self.rng)
