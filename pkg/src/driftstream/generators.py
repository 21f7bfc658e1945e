"""Seedable synthetic stream generators and drift-schedule composition.

Five generator families (SEA, MIXED, RTG, RBF, HYPER) plus a composer that
stitches two concepts of a generator together according to a declarative
drift schedule (abrupt, gradual, frequent reoccurring) and emits
ground-truth drift marks alongside the samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import LabeledSample, SeededRng, StreamMeta

SEA_THRESHOLDS = (8.0, 9.0, 7.0, 9.5)  # block 1..4 decision thresholds


# ---------------------------------------------------------------------------
# Drift schedules


@dataclass(frozen=True)
class DriftSchedule:
    """When and how a composed stream switches concepts.

    position is the sample index of the first drift; width applies to
    gradual kinds (transition span in samples); period is the gap between
    the end of one drift and the start of the next for frequent kinds.
    """

    kind: str = "none"  # none | abrupt | gradual | frequent_reoccurring_abrupt | frequent_reoccurring_gradual
    position: int = 0
    width: int = 1
    period: int = 1

    KINDS = ("none", "abrupt", "gradual",
             "frequent_reoccurring_abrupt", "frequent_reoccurring_gradual")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown drift kind {self.kind!r}")
        if "gradual" in self.kind and self.width < 1:
            raise ValueError("gradual drift needs width >= 1")
        if self.kind.startswith("frequent") and self.period < 1:
            raise ValueError("frequent drift needs period >= 1")

    @property
    def gradual(self) -> bool:
        return "gradual" in self.kind

    @property
    def frequent(self) -> bool:
        return self.kind.startswith("frequent")

    def state_at(self, t: int) -> tuple[int, float, bool]:
        """(old concept index, probability of the new concept, truth mark) at sample t.

        For abrupt kinds the probability is 0 or 1; for gradual kinds it
        follows a logistic ramp with slope 4/width centred on the drift
        position. Frequent kinds repeat, toggling concept parity, with the
        next drift starting ``period`` samples after the previous one
        finished (instantly for abrupt, after ``width`` samples for
        gradual).
        """
        if self.kind == "none" or t < self.position:
            return 0, 0.0, False
        if not self.gradual:
            if not self.frequent:
                return 0, 1.0, t == self.position
            # After k+1 completed abrupt drifts the active parity is (k+1) % 2.
            k, rem = divmod(t - self.position, self.period)
            return (k + 1) % 2, 0.0, rem == 0
        # gradual
        cycle = self.width + self.period
        if self.frequent:
            k, rem = divmod(t - self.position, cycle)
        else:
            k, rem = 0, t - self.position
        old = k % 2
        if rem <= self.width:
            p = 1.0 / (1.0 + math.exp(-4.0 * rem / self.width))
            return old, p, True
        return (old + 1) % 2, 0.0, False


# ---------------------------------------------------------------------------
# Concept generators

class _BaseGenerator:
    """Common plumbing: a meta block and single-concept emission."""

    n_concepts = 1

    def __init__(self, rng: SeededRng, meta: StreamMeta):
        self.rng = rng
        self.meta = meta

    @property
    def has_drift_truth(self) -> bool:
        return False

    def emit(self, concept: int) -> LabeledSample:
        raise NotImplementedError

    def next_sample(self):
        return self.emit(0), False


class SeaGenerator(_BaseGenerator):
    """Three uniform features on [0, 10]; class 1 iff f1 + f2 <= block threshold.

    f3 never influences the label. Labels are flipped with the configured
    noise probability. Concepts map to the block sequence given at
    construction (default blocks 1 and 2).
    """

    def __init__(self, rng: SeededRng, noise: float = 0.1, blocks: tuple[int, ...] = (1, 2),
                 name: str = "sea"):
        super().__init__(rng, StreamMeta(d=3, C=2, name=name))
        self.noise = noise
        self.blocks = blocks
        self.n_concepts = len(blocks)

    def emit(self, concept: int) -> LabeledSample:
        theta = SEA_THRESHOLDS[self.blocks[concept] - 1]
        f = self.rng.uniform(0.0, 10.0, size=3)
        y = 1 if f[0] + f[1] <= theta else 0
        if self.noise > 0 and self.rng.bernoulli(self.noise):
            y = 1 - y
        return LabeledSample(f, y)


def mixed_label(v: int, w: int, x: float, y: float) -> int:
    """Two-of-three rule on (v true, w true, y below the sine boundary)."""
    cond = int(v) + int(w) + int(y < 0.5 + 0.3 * math.sin(3.0 * math.pi * x))
    return 1 if cond >= 2 else 0


class MixedGenerator(_BaseGenerator):
    """Two Bernoulli(0.5) features encoded {0,1} and two U(0,1) features.

    Positive iff two of {v, w, y < 0.5 + 0.3 sin(3 pi x)} hold; concept 1
    reverses the classification.
    """

    n_concepts = 2

    def __init__(self, rng: SeededRng, noise: float = 0.0, name: str = "mixed"):
        super().__init__(rng, StreamMeta(d=4, C=2, name=name))
        self.noise = noise

    def emit(self, concept: int) -> LabeledSample:
        u = self.rng.gen.random(4)
        v, w = int(u[0] < 0.5), int(u[1] < 0.5)
        x, yc = u[2], u[3]
        label = mixed_label(v, w, x, yc)
        if concept == 1:
            label = 1 - label
        if self.noise > 0 and self.rng.bernoulli(self.noise):
            label = 1 - label
        return LabeledSample(np.array([v, w, x, yc]), label)


@dataclass
class _TreeNode:
    feature: int = -1          # -1 marks a leaf
    threshold: float = 0.0
    label: int = 0
    left: Optional["_TreeNode"] = None
    right: Optional["_TreeNode"] = None


class RtgGenerator(_BaseGenerator):
    """Random-tree generator: uniform attribute vectors labeled by a fixed tree.

    The tree is built once per seed: random split features and thresholds
    down to a bounded depth, random leaf labels. No drift variant exists
    for this generator.
    """

    def __init__(self, rng: SeededRng, d: int = 10, n_classes: int = 2,
                 max_depth: int = 5, name: str = "rtg"):
        super().__init__(rng, StreamMeta(d=d, C=n_classes, name=name))
        self.root = self._build(rng, depth=0, max_depth=max_depth)

    def _build(self, rng: SeededRng, depth: int, max_depth: int) -> _TreeNode:
        if depth >= max_depth:
            return _TreeNode(label=rng.randint(0, self.meta.C - 1))
        node = _TreeNode(feature=rng.randint(0, self.meta.d - 1),
                         threshold=float(rng.uniform()))
        node.left = self._build(rng, depth + 1, max_depth)
        node.right = self._build(rng, depth + 1, max_depth)
        return node

    def classify(self, x: np.ndarray) -> int:
        node = self.root
        while node.feature >= 0:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.label

    def emit(self, concept: int) -> LabeledSample:
        x = self.rng.uniform(size=self.meta.d)
        return LabeledSample(x, self.classify(x))


class RbfGenerator(_BaseGenerator):
    """Gaussian-blob generator with optional incremental centroid motion.

    Each centroid has a uniform random centre, a U(0,1) standard deviation,
    a U(0,1) selection weight, a class label and a fixed unit drift
    direction. Samples pick a centroid weight-proportionally and offset it
    along a random direction by a Gaussian-scaled magnitude; every emitted
    sample advances all centroids by ``speed`` along their directions.
    """

    def __init__(self, rng: SeededRng, d: int = 10, n_classes: int = 5,
                 n_centroids: int = 50, speed: float = 0.0, name: str = "rbf"):
        super().__init__(rng, StreamMeta(d=d, C=n_classes, name=name))
        self.speed = speed
        self.centers = rng.uniform(size=(n_centroids, d))
        self.stds = rng.uniform(size=n_centroids)
        weights = rng.uniform(size=n_centroids)
        self.weights = weights / weights.sum()
        # Round-robin then random ensures every class appears.
        labels = [i % n_classes for i in range(n_centroids)]
        self.labels = np.array(labels, dtype=np.int64)
        dirs = rng.normal(size=(n_centroids, d))
        self.directions = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)

    def emit(self, concept: int) -> LabeledSample:
        i = int(self.rng.gen.choice(len(self.weights), p=self.weights))
        direction = self.rng.normal(size=self.meta.d)
        norm = np.linalg.norm(direction)
        if norm > 0:
            direction /= norm
        magnitude = self.rng.normal(0.0, self.stds[i])
        x = self.centers[i] + magnitude * direction
        label = int(self.labels[i])
        if self.speed > 0:
            self.centers += self.speed * self.directions
        return LabeledSample(x, label)


class HyperplaneGenerator(_BaseGenerator):
    """Rotating-hyperplane stream: x ~ U(0,1)^d, class 1 iff w.x >= sum(w)/2.

    Each step every weight moves by ``magnitude`` along its own +-1
    direction; directions flip with probability 0.1 per step and weights
    are clamped to [0, 1]. Labels are flipped with the noise probability.
    Ties at the boundary resolve to class 1.
    """

    def __init__(self, rng: SeededRng, d: int = 10, magnitude: float = 0.001,
                 noise: float = 0.1, flip_prob: float = 0.1, name: str = "hyper"):
        super().__init__(rng, StreamMeta(d=d, C=2, name=name))
        self.magnitude = magnitude
        self.noise = noise
        self.flip_prob = flip_prob
        self.weights = rng.uniform(size=d)
        self.directions = np.where(rng.gen.random(d) < 0.5, -1.0, 1.0)

    def emit(self, concept: int) -> LabeledSample:
        x = self.rng.uniform(size=self.meta.d)
        y = 1 if float(self.weights @ x) >= 0.5 * float(self.weights.sum()) else 0
        if self.noise > 0 and self.rng.bernoulli(self.noise):
            y = 1 - y
        if self.magnitude > 0:
            flips = self.rng.gen.random(self.meta.d) < self.flip_prob
            self.directions[flips] *= -1.0
            self.weights = np.clip(self.weights + self.magnitude * self.directions, 0.0, 1.0)
        return LabeledSample(x, y)


# ---------------------------------------------------------------------------
# Composition


class ConceptStream:
    """Drives a multi-concept generator through a drift schedule.

    During a gradual transition each sample comes from the new concept with
    the schedule's logistic probability; the randomness of that choice is a
    dedicated child stream so the base generator's sequence for a given
    concept is unperturbed by the schedule kind.
    """

    def __init__(self, base: _BaseGenerator, schedule: DriftSchedule, rng: SeededRng):
        if base.n_concepts < 2 and schedule.kind != "none":
            raise ValueError(
                f"generator {base.meta.name!r} exposes {base.n_concepts} concept(s); "
                f"schedule {schedule.kind!r} needs at least 2"
            )
        self.base = base
        self.schedule = schedule
        self.mix_rng = rng
        self.meta = base.meta
        self.t = 0

    @property
    def has_drift_truth(self) -> bool:
        return self.schedule.kind != "none"

    def next_sample(self):
        old, p_new, mark = self.schedule.state_at(self.t)
        if p_new <= 0.0:
            concept = old
        elif p_new >= 1.0:
            concept = (old + 1) % 2
        else:
            concept = (old + 1) % 2 if self.mix_rng.bernoulli(p_new) else old
        s = self.base.emit(concept)
        self.t += 1
        return s, mark


def compose_drift(base: _BaseGenerator, schedule: DriftSchedule, rng: SeededRng) -> ConceptStream:
    return ConceptStream(base, schedule, rng)


# ---------------------------------------------------------------------------
# Construction by name (CLI / manifests)

GENERATORS = ("sea", "mixed", "rtg", "rbf", "hyper")


def make_stream(spec: dict, seed: int):
    """Build a stream source from a manifest-style dict.

    Keys: generator (sea|mixed|rtg|rbf|hyper|csv) plus generator-specific
    options, and optionally drift/position/width/period for a composed
    schedule.
    """
    from .core import CsvStream

    kind = spec.get("generator", "sea")
    name = spec.get("name", kind)
    rng = SeededRng(seed)
    if kind == "csv":
        return CsvStream(spec["path"], has_header=spec.get("has_header", True),
                         truth_column=spec.get("truth_column", False), name=name)
    if kind == "sea":
        blocks = tuple(spec.get("blocks", (1, 2)))
        base = SeaGenerator(rng.child(0), noise=spec.get("noise", 0.1), blocks=blocks, name=name)
    elif kind == "mixed":
        base = MixedGenerator(rng.child(0), noise=spec.get("noise", 0.0), name=name)
    elif kind == "rtg":
        base = RtgGenerator(rng.child(0), d=spec.get("d", 10),
                            n_classes=spec.get("n_classes", 2),
                            max_depth=spec.get("max_depth", 5), name=name)
    elif kind == "rbf":
        base = RbfGenerator(rng.child(0), d=spec.get("d", 10),
                            n_classes=spec.get("n_classes", 5),
                            n_centroids=spec.get("n_centroids", 50),
                            speed=spec.get("speed", 0.0), name=name)
    elif kind == "hyper":
        base = HyperplaneGenerator(rng.child(0), d=spec.get("d", 10),
                                   magnitude=spec.get("magnitude", 0.001),
                                   noise=spec.get("noise", 0.1), name=name)
    else:
        raise ValueError(f"unknown generator {kind!r}")

    drift = spec.get("drift", "none")
    if drift == "none":
        return base
    schedule = DriftSchedule(kind=drift, position=spec.get("position", 0),
                             width=spec.get("width", 1), period=spec.get("period", 1))
    return ConceptStream(base, schedule, rng.child(1))
