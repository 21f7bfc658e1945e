"""Reactive prototype classifier: RSLVQ + KSWIN + prototype replacement.

Per sample: predict first (prequential order), push into the detector
window, run the per-dimension KS test once the window is full, and on
detection replace every prototype by the mean of the recent window R and
retrain once on R's labeled samples. The regular learning step always runs
afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LabeledSample, SeededRng, StreamMeta
from .kswin import DriftSignal, KswinConfig, SlidingWindow, detect
from .rslvq import RslvqConfig, RslvqModel


@dataclass(frozen=True)
class AdaptationReport:
    """Audit record of one adaptation event."""

    t: int
    exceeded_dims: frozenset[int]
    max_statistic: float
    replacement_mean: np.ndarray
    samples_retrained: int


class RrslvqModel:
    """Drift-reactive RSLVQ.

    The classifier and the detector's reference-window sampling draw from
    independent child streams of the master seed, so a detector that never
    fires leaves the learning trajectory bit-identical to a plain
    :class:`RslvqModel` under the same seed.
    """

    def __init__(self, meta: StreamMeta, cfg: RslvqConfig = RslvqConfig(),
                 kswin_cfg: KswinConfig = KswinConfig(), seed: int = 0):
        rng = SeededRng(seed)
        self.meta = meta
        self.classifier = RslvqModel(meta, cfg, rng.child(0))
        self.kswin_cfg = kswin_cfg
        self.window = SlidingWindow(kswin_cfg.n, meta.d)
        self.detector_rng = rng.child(1)
        self.adaptation_log: list[AdaptationReport] = []
        self.t = 0

    def adapt(self, recent_x: np.ndarray, recent_y: np.ndarray,
              signal: DriftSignal | None = None) -> None:
        """Replace all prototypes by mean(R), reset optimizer state, retrain on R.

        The running means are zeroed because they refer to the discarded
        prototype positions. Retraining is a single pass in window order
        (oldest to newest).
        """
        if len(recent_x) == 0:
            raise ValueError("adaptation window R is empty")
        clf = self.classifier
        mean = recent_x.mean(axis=0)
        clf.thetas[:] = mean
        clf.grad_sq_means[:] = 0.0
        clf.delta_sq_means[:] = 0.0
        for x, y in zip(recent_x, recent_y):
            clf.learn_one(LabeledSample(x, int(y)))
        self.adaptation_log.append(AdaptationReport(
            t=self.t,
            exceeded_dims=signal.exceeded_dims if signal else frozenset(),
            max_statistic=signal.max_statistic if signal else float("nan"),
            replacement_mean=mean,
            samples_retrained=len(recent_x),
        ))

    def process(self, s: LabeledSample) -> int:
        """Predict-then-learn one sample; returns the prequential prediction."""
        pred = self.predict(s.x)
        self.learn_one(s)
        return pred

    # harness protocol ----------------------------------------------------

    def predict(self, x) -> int:
        return self.classifier.predict(x)

    def learn_one(self, s: LabeledSample) -> None:
        """Window update, detection, possible adaptation, then the regular step."""
        self.meta.check(s)
        self.window.push(s)
        if self.window.full:
            signal = detect(self.window, self.kswin_cfg, self.detector_rng)
            if signal.detected:
                self.adapt(signal.recent_x, signal.recent_y, signal)
        self.classifier.learn_one(s)
        self.t += 1

    def footprint(self) -> int:
        """Stored model reals d*(m+n): prototype coordinates plus window features.

        Optimizer running means are reported separately via
        :meth:`optimizer_floats`.
        """
        return self.meta.d * (self.classifier.m + self.kswin_cfg.n)

    def optimizer_floats(self) -> int:
        return 2 * self.meta.d * self.classifier.m
