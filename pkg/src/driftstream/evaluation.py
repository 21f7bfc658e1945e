"""Prequential evaluation, kappa, detector scoring and the risk check.

The harness runs interleaved test-then-train: every sample is predicted
with the current model, scored, and only then used for learning. Snapshots
of the running statistics are emitted at a fixed cadence; the final
snapshot's accuracy is the overall mean accuracy of the run.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import LabeledSample, StreamMeta, StreamSource
from .kswin import KswinDetector

WINDOWED_SPAN = 200        # trailing predictions in the windowed accuracy
DEFAULT_CADENCE = 100      # samples between snapshots
DEFAULT_TOLERANCE = 10     # detector TP credit window, in steps
VAR_FLOOR = 1e-9

RESULT_COLUMNS = [
    "config_id", "stream", "learner", "seed", "row", "t",
    "accuracy", "kappa", "windowed_accuracy", "footprint", "wall_ms",
    "tn", "fp", "fn", "tp",
]


@dataclass
class PrequentialRecord:
    """Snapshot of running test-then-train statistics at time t."""

    t: int
    correct: int
    confusion: np.ndarray
    windowed_accuracy: float
    footprint: int
    wall_ms: float = 0.0

    @property
    def accuracy(self) -> float:
        return self.correct / self.t if self.t else 0.0

    @property
    def kappa(self) -> float:
        return kappa(self.confusion)


def kappa(confusion: np.ndarray) -> float:
    """Cohen's kappa of a C x C confusion matrix (rows truth, columns prediction)."""
    confusion = np.asarray(confusion, dtype=np.float64)
    total = confusion.sum()
    if total <= 0:
        raise ValueError("empty confusion matrix")
    p_o = np.trace(confusion) / total
    p_e = float((confusion.sum(axis=1) * confusion.sum(axis=0)).sum()) / total**2
    if p_e >= 1.0:
        return 0.0
    return float((p_o - p_e) / (1.0 - p_e))


def footprint(model) -> int:
    """Stored float count of a model; delegates to the model's accounting."""
    return model.footprint()


@dataclass
class DetectorEvalRecord:
    tn: int
    fp: int
    fn: int
    tp: int
    tolerance: int

    @property
    def total(self) -> int:
        return self.tn + self.fp + self.fn + self.tp


def detector_confusion(signals: Sequence[bool], truth: Sequence[bool],
                       tolerance: int = DEFAULT_TOLERANCE) -> DetectorEvalRecord:
    """Score detector firings against ground-truth drift steps.

    A truth drift at step t is credited (TP) if any signal fires within
    [t, t + tolerance]; each signal credits at most one drift. Uncredited
    signals count as FP, uncredited drifts as FN, all remaining steps TN.
    The four cells always partition the step count.
    """
    signals = np.asarray(signals, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if signals.shape != truth.shape:
        raise ValueError(f"length mismatch: {signals.shape} vs {truth.shape}")
    n = signals.size
    sig_steps = np.nonzero(signals)[0]
    credited_signals: set[int] = set()
    tp = fn = 0
    for t in np.nonzero(truth)[0]:
        hit = None
        for s in sig_steps:
            if s < t or s in credited_signals:
                continue
            if s > t + tolerance:
                break
            hit = int(s)
            break
        if hit is None:
            fn += 1
        else:
            credited_signals.add(hit)
            tp += 1
    fp = int(sig_steps.size) - len(credited_signals)
    tn = n - tp - fn - fp
    return DetectorEvalRecord(tn=tn, fp=fp, fn=fn, tp=tp, tolerance=tolerance)


# ---------------------------------------------------------------------------
# Incremental Gaussian Naive Bayes (carrier classifier)


class NaiveBayesModel:
    """Gaussian NB with per-class streaming mean/variance (Welford updates)."""

    def __init__(self, meta: StreamMeta):
        self.meta = meta
        self.counts = np.zeros(meta.C, dtype=np.int64)
        self.means = np.zeros((meta.C, meta.d))
        self.m2 = np.zeros((meta.C, meta.d))  # sum of squared deviations

    def learn_one(self, s: LabeledSample) -> None:
        self.meta.check(s)
        c = s.y
        self.counts[c] += 1
        delta = s.x - self.means[c]
        self.means[c] += delta / self.counts[c]
        self.m2[c] += delta * (s.x - self.means[c])

    def predict(self, x) -> int:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.meta.d,):
            raise ValueError(f"query shape {x.shape}, expected ({self.meta.d},)")
        total = self.counts.sum()
        if total == 0:
            raise RuntimeError("predict called before any training sample")
        best, best_score = 0, -np.inf
        for c in range(self.meta.C):
            if self.counts[c] == 0:
                continue
            var = np.maximum(self.m2[c] / self.counts[c], VAR_FLOOR)
            log_lik = -0.5 * np.sum(np.log(2.0 * np.pi * var) + (x - self.means[c]) ** 2 / var)
            score = np.log(self.counts[c] / total) + log_lik
            if score > best_score:
                best, best_score = c, score
        return best

    def reset(self) -> None:
        self.counts[:] = 0
        self.means[:] = 0.0
        self.m2[:] = 0.0

    def footprint(self) -> int:
        return self.meta.C * (2 * self.meta.d + 1)


def nb_learn(model: NaiveBayesModel, s: LabeledSample) -> NaiveBayesModel:
    model.learn_one(s)
    return model


def nb_predict(model: NaiveBayesModel, x) -> int:
    return model.predict(x)


# ---------------------------------------------------------------------------
# Prequential harness


def prequential_run(stream: StreamSource, learner, max_t: int,
                    cadence: int = DEFAULT_CADENCE,
                    prediction_log: Optional[list] = None) -> list[PrequentialRecord]:
    """Interleaved test-then-train over up to max_t samples.

    Emits a snapshot every ``cadence`` samples and a final one at the end
    of the stream if it does not land on the cadence. ``prediction_log``,
    when given, collects (prediction, truth) pairs for exact recomputation.
    """
    C = stream.meta.C
    confusion = np.zeros((C, C), dtype=np.int64)
    correct = 0
    recent = deque(maxlen=WINDOWED_SPAN)
    records: list[PrequentialRecord] = []
    start = time.perf_counter()
    t = 0
    while t < max_t:
        item = stream.next_sample()
        if item is None:
            break
        s, _ = item
        pred = learner.predict(s.x)
        ok = pred == s.y
        correct += ok
        confusion[s.y, pred] += 1
        recent.append(ok)
        if prediction_log is not None:
            prediction_log.append((pred, s.y))
        learner.learn_one(s)
        t += 1
        if t % cadence == 0:
            records.append(PrequentialRecord(
                t=t, correct=correct, confusion=confusion.copy(),
                windowed_accuracy=sum(recent) / len(recent),
                footprint=footprint(learner),
                wall_ms=(time.perf_counter() - start) * 1000.0,
            ))
    if t and (not records or records[-1].t != t):
        records.append(PrequentialRecord(
            t=t, correct=correct, confusion=confusion.copy(),
            windowed_accuracy=sum(recent) / len(recent),
            footprint=footprint(learner),
            wall_ms=(time.perf_counter() - start) * 1000.0,
        ))
    return records


def detector_carrier_run(stream: StreamSource, detector: Optional[KswinDetector],
                         max_t: int, batch_size: int = 10,
                         cadence: int = DEFAULT_CADENCE,
                         signal_log: Optional[list] = None,
                         truth_log: Optional[list] = None) -> list[PrequentialRecord]:
    """Naive Bayes prequential run with detector-triggered model resets.

    Samples are processed in batches; each batch is predicted, then
    learned, then fed to the detector. If the detector fires anywhere in
    the batch the NB model is discarded and retrained on the current batch
    only. ``signal_log``/``truth_log`` collect per-sample booleans for
    confusion scoring. A ``detector`` of None degenerates to a plain NB
    run.
    """
    nb = NaiveBayesModel(stream.meta)
    C = stream.meta.C
    confusion = np.zeros((C, C), dtype=np.int64)
    correct = 0
    recent = deque(maxlen=WINDOWED_SPAN)
    records: list[PrequentialRecord] = []
    start = time.perf_counter()
    t = 0
    warm = False
    done = False
    while t < max_t and not done:
        batch: list[tuple[LabeledSample, bool]] = []
        while len(batch) < min(batch_size, max_t - t):
            item = stream.next_sample()
            if item is None:
                done = True
                break
            batch.append(item)
        if not batch:
            break
        for s, _ in batch:
            pred = nb.predict(s.x) if warm else 0
            ok = pred == s.y
            correct += ok
            confusion[s.y, pred] += 1
            recent.append(ok)
        for s, _ in batch:
            nb.learn_one(s)
        warm = True
        fired = False
        for s, truth_mark in batch:
            sig = detector.update(s) if detector is not None else None
            sample_fired = bool(sig is not None and sig.detected)
            fired = fired or sample_fired
            if signal_log is not None:
                signal_log.append(sample_fired)
            if truth_log is not None:
                truth_log.append(truth_mark)
        if fired:
            nb.reset()
            for s, _ in batch:
                nb.learn_one(s)
        t += len(batch)
        if t % cadence == 0 or done or t >= max_t:
            records.append(PrequentialRecord(
                t=t, correct=correct, confusion=confusion.copy(),
                windowed_accuracy=sum(recent) / len(recent),
                footprint=nb.footprint(),
                wall_ms=(time.perf_counter() - start) * 1000.0,
            ))
    return records


# ---------------------------------------------------------------------------
# Risk check (stale vs adapted model across a concept change)


@dataclass(frozen=True)
class RiskCheckRecord:
    err_stale: float
    err_adapted: float
    random_floor: float


def risk_check(concept_a: StreamSource, concept_b: StreamSource, model, k: int) -> RiskCheckRecord:
    """Compare a stale and an adapted model's 0/1 error on a new concept.

    ``model`` must already be trained on concept A (the caller's job; pass
    k for bookkeeping symmetry). The stale error is the frozen model's
    misclassification rate on k fresh concept-B samples; the model is then
    adapted on an r-sample window drawn from concept B and re-scored on
    the same k samples.
    """
    from .core import stream_take

    eval_samples = stream_take(concept_b, k)
    stale_wrong = sum(model.predict(s.x) != s.y for s in eval_samples)
    r = model.kswin_cfg.r
    window = stream_take(concept_b, r)
    rx = np.stack([s.x for s in window])
    ry = np.array([s.y for s in window])
    model.adapt(rx, ry)
    adapted_wrong = sum(model.predict(s.x) != s.y for s in eval_samples)
    n = len(eval_samples)
    return RiskCheckRecord(
        err_stale=stale_wrong / n,
        err_adapted=adapted_wrong / n,
        random_floor=1.0 - 1.0 / concept_b.meta.C,
    )
