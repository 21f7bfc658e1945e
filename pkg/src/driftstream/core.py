"""Shared domain types, the stream-source contract and seedable randomness.

Every stochastic component in this package draws from a :class:`SeededRng`,
a thin wrapper around numpy's PCG64 generator. Identical seeds produce
identical deviate sequences, which is the reproducibility contract the
whole benchmark harness relies on.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterator, Optional, Protocol, runtime_checkable

import numpy as np


class DimensionMismatchError(ValueError):
    """A sample's dimensionality disagrees with the consumer it is fed to."""


@dataclass(frozen=True)
class LabeledSample:
    """One stream element: a d-dimensional feature vector plus a class label."""

    x: np.ndarray
    y: int

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=np.float64))


@dataclass(frozen=True)
class StreamMeta:
    """Declared dimensionality and class count of a stream."""

    d: int
    C: int
    name: str = ""
    length_hint: Optional[int] = None

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.C < 2:
            raise ValueError(f"C must be >= 2, got {self.C}")

    def check(self, s: LabeledSample):
        if s.x.shape != (self.d,):
            raise DimensionMismatchError(
                f"sample has {s.x.shape[0] if s.x.ndim == 1 else '?'} features, "
                f"stream '{self.name}' declares d={self.d}"
            )
        if not 0 <= s.y < self.C:
            raise ValueError(f"label {s.y} outside 0..{self.C - 1}")


@runtime_checkable
class StreamSource(Protocol):
    """Single-consumer pull source of labeled samples.

    ``next_sample()`` returns ``(sample, drift_truth)`` or ``None`` at end of
    stream. ``drift_truth`` is the ground-truth drift flag for that sample
    (always False for sources without drift marks).
    """

    meta: StreamMeta

    def next_sample(self) -> Optional[tuple[LabeledSample, bool]]: ...

    @property
    def has_drift_truth(self) -> bool: ...


class SeededRng:
    """Deterministic random source backed by numpy's PCG64.

    The generator identity is fixed so that (seed, call sequence) fully
    determines every deviate drawn in this package.
    """

    def __init__(self, seed: int):
        self.seed = seed
        self._seq = np.random.SeedSequence(seed)
        self.gen = np.random.Generator(np.random.PCG64(self._seq))

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self.gen.uniform(low, high, size)

    def randint(self, low: int, high: int) -> int:
        """Uniform integer in the inclusive range [low, high]."""
        return int(self.gen.integers(low, high + 1))

    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None):
        return self.gen.normal(loc, scale, size)

    def bernoulli(self, p: float) -> bool:
        return bool(self.gen.random() < p)

    def sample_without_replacement(self, n: int, k: int) -> np.ndarray:
        """k distinct indices drawn uniformly from range(n)."""
        return self.gen.choice(n, size=k, replace=False)

    def child(self, key: int) -> "SeededRng":
        """Independent generator derived from (seed, key).

        Components sharing a master seed but consuming different amounts of
        randomness (e.g. a classifier and its drift detector) each get their
        own child stream so they cannot perturb one another.
        """
        rng = SeededRng.__new__(SeededRng)
        rng.seed = self.seed
        rng._seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(key,))
        rng.gen = np.random.Generator(np.random.PCG64(rng._seq))
        return rng


def stream_take(source: StreamSource, k: int) -> list[LabeledSample]:
    """Pull up to k samples from the source, in emission order."""
    if k < 0:
        raise ValueError("k must be >= 0")
    out = []
    for _ in range(k):
        item = source.next_sample()
        if item is None:
            break
        out.append(item[0])
    return out


def stream_take_with_truth(source: StreamSource, k: int) -> list[tuple[LabeledSample, bool]]:
    """Like :func:`stream_take` but keeps the ground-truth drift flags."""
    if k < 0:
        raise ValueError("k must be >= 0")
    out = []
    for _ in range(k):
        item = source.next_sample()
        if item is None:
            break
        out.append(item)
    return out


class CsvStream:
    """Streams a numeric CSV file as labeled samples with constant memory.

    All columns must be numeric. By default the last column is the class
    label; with ``truth_column=True`` the last column is instead a 0/1
    ground-truth drift flag and the label sits second to last (the layout
    the ``generate`` subcommand writes). Raw labels are mapped to dense
    integers 0..C-1 in first-seen order. Malformed rows abort with a
    row-numbered error.
    """

    def __init__(self, path, has_header: bool = True, truth_column: bool = False,
                 name: Optional[str] = None, n_classes: Optional[int] = None):
        self.path = path
        self.has_header = has_header
        self.truth_column = truth_column
        self._declared_classes = n_classes
        self._label_map: dict[float, int] = {}
        self._fh = open(path, "r", newline="")
        self._row_no = 0
        if has_header:
            self._fh.readline()
            self._row_no += 1
        pos = self._fh.tell()
        first = self._fh.readline()
        self._fh.seek(pos)
        self._reader = csv.reader(self._fh)
        n_cols = len(first.split(",")) if first.strip() else 2
        d = n_cols - (2 if truth_column else 1)
        if d < 1:
            raise ValueError(f"{path}: too few columns ({n_cols})")
        self.meta = StreamMeta(d=d, C=n_classes if n_classes else 2,
                               name=name or str(path))

    @property
    def has_drift_truth(self) -> bool:
        return self.truth_column

    def _map_label(self, raw: float) -> int:
        if raw not in self._label_map:
            self._label_map[raw] = len(self._label_map)
            if len(self._label_map) > self.meta.C:
                object.__setattr__(self.meta, "C", len(self._label_map))
        return self._label_map[raw]

    def next_sample(self) -> Optional[tuple[LabeledSample, bool]]:
        row = next(self._reader, None)
        self._row_no += 1
        if row is None:
            return None
        if not row:
            return self.next_sample()  # tolerate blank trailing lines
        try:
            values = [float(v) for v in row]
        except ValueError as e:
            raise ValueError(f"{self.path}: row {self._row_no}: {e}") from None
        expected = self.meta.d + (2 if self.truth_column else 1)
        if len(values) != expected:
            raise ValueError(
                f"{self.path}: row {self._row_no}: expected {expected} columns, got {len(values)}"
            )
        drift = False
        if self.truth_column:
            drift = bool(values[-1])
            values = values[:-1]
        y = self._map_label(values[-1])
        x = np.array(values[:-1], dtype=np.float64)
        return LabeledSample(x, y), drift

    def close(self):
        self._fh.close()
