import numpy as np
import pytest

from driftstream.core import LabeledSample, SeededRng


class FixedConceptStream:
    """Adapts a multi-concept generator to the stream protocol at one concept."""

    def __init__(self, gen, concept: int = 0):
        self.gen = gen
        self.concept = concept
        self.meta = gen.meta

    @property
    def has_drift_truth(self):
        return False

    def next_sample(self):
        return self.gen.emit(self.concept), False


class ListStream:
    """Finite stream over a prebuilt list of (sample, drift) pairs."""

    def __init__(self, items, meta):
        self.items = list(items)
        self.meta = meta
        self.i = 0

    @property
    def has_drift_truth(self):
        return True

    def next_sample(self):
        if self.i >= len(self.items):
            return None
        item = self.items[self.i]
        self.i += 1
        return item


def make_samples(rng: SeededRng, n: int, d: int, n_classes: int = 2):
    return [LabeledSample(rng.normal(size=d), rng.randint(0, n_classes - 1))
            for _ in range(n)]
