"""Incremental Robust Soft LVQ with an Adadelta-style per-prototype update.

The model keeps m labeled prototypes interpreted as means of an isotropic
Gaussian mixture with shared width sigma. Each arriving sample produces a
likelihood-ratio gradient per prototype; steps are scaled by the ratio of
running means of past squared updates to past squared gradients, so no
explicit learning rate exists.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DimensionMismatchError, LabeledSample, SeededRng, StreamMeta


@dataclass(frozen=True)
class RslvqConfig:
    prototypes_per_class: int = 1
    sigma: float = 1.0    # Gaussian kernel width
    gamma: float = 0.9    # decay factor of both running means
    epsilon: float = 1e-8  # numerical stability constant

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must be in [0, 1), got {self.gamma}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.prototypes_per_class < 1:
            raise ValueError("prototypes_per_class must be >= 1")


@dataclass
class Prototype:
    """One labeled prototype with its optimizer running means."""

    theta: np.ndarray
    label: int
    grad_sq_mean: np.ndarray   # running mean of squared gradients
    delta_sq_mean: np.ndarray  # running mean of squared parameter updates


def rmsprop_step(theta: np.ndarray, g: np.ndarray, grad_sq_mean: np.ndarray,
                 delta_sq_mean: np.ndarray, cfg: RslvqConfig
                 ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One adaptive step; returns (theta, grad_sq_mean, delta_sq_mean).

    The running mean of squared updates entering the step ratio is the one
    from the previous step; it is refreshed with the new squared update
    afterwards. Works elementwise, so stacked (m, d) arrays update all
    prototypes at once.
    """
    gamma = cfg.gamma
    eg2 = gamma * grad_sq_mean + (1.0 - gamma) * g * g
    delta = np.sqrt(delta_sq_mean + cfg.epsilon) / np.sqrt(eg2 + cfg.epsilon) * g
    theta = theta - delta
    edt2 = gamma * delta_sq_mean + (1.0 - gamma) * delta * delta
    return theta, eg2, edt2


class RslvqModel:
    """m = prototypes_per_class * C prototypes covering all classes.

    Prototype state is held in stacked (m, d) arrays for speed; the
    :attr:`prototypes` property exposes per-prototype views.
    """

    def __init__(self, meta: StreamMeta, cfg: RslvqConfig, rng: SeededRng):
        self.meta = meta
        self.cfg = cfg
        m = cfg.prototypes_per_class * meta.C
        # Initial positions ~ N(0, I*sigma): per-coordinate std sqrt(sigma).
        self.thetas = rng.normal(0.0, np.sqrt(cfg.sigma), size=(m, meta.d))
        self.labels = np.tile(np.arange(meta.C), cfg.prototypes_per_class)
        self.grad_sq_means = np.zeros((m, meta.d))
        self.delta_sq_means = np.zeros((m, meta.d))

    @property
    def m(self) -> int:
        return self.thetas.shape[0]

    @property
    def prototypes(self) -> list[Prototype]:
        return [Prototype(self.thetas[j].copy(), int(self.labels[j]),
                          self.grad_sq_means[j].copy(), self.delta_sq_means[j].copy())
                for j in range(self.m)]

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.meta.d,):
            raise DimensionMismatchError(
                f"query has shape {x.shape}, model expects ({self.meta.d},)"
            )
        return x

    def sq_distances(self, x: np.ndarray) -> np.ndarray:
        diff = x - self.thetas
        return np.einsum("ij,ij->i", diff, diff)

    def posterior(self, x) -> np.ndarray:
        """P(j|x) over all m components; sums to 1.

        Uses the max-shifted exponent form so distant queries do not
        underflow to an all-zero denominator.
        """
        x = self._check(x)
        logits = -self.sq_distances(x) / (2.0 * self.cfg.sigma**2)
        logits -= logits.max()
        e = np.exp(logits)
        return e / e.sum()

    def loss_ratio(self, x, y: int) -> float:
        """Posterior mass on prototypes whose class differs from y."""
        post = self.posterior(x)
        return float(post[self.labels != y].sum())

    def gradient(self, x, y: int) -> np.ndarray:
        """(m, d) array of per-prototype gradients.

        Correct-class prototypes get -P(j|x)*ls*(x - theta); others get
        +P(j|x)*(1-ls)*(x - theta).
        """
        x = self._check(x)
        post = self.posterior(x)
        correct = self.labels == y
        ls = float(post[~correct].sum())
        diff = x - self.thetas
        coeff = np.where(correct, -post * ls, post * (1.0 - ls))
        return coeff[:, None] * diff

    def learn_one(self, s: LabeledSample) -> None:
        """One prequential training step; updates every prototype in place."""
        self.meta.check(s)
        g = self.gradient(s.x, s.y)
        self.thetas, self.grad_sq_means, self.delta_sq_means = rmsprop_step(
            self.thetas, g, self.grad_sq_means, self.delta_sq_means, self.cfg
        )

    def predict(self, x) -> int:
        """Label of the nearest prototype by squared Euclidean distance."""
        x = self._check(x)
        return int(self.labels[int(np.argmin(self.sq_distances(x)))])

    # -- snapshot serialization -------------------------------------------

    def save_snapshot(self, path) -> None:
        """One prototype per line: label then the d coordinates."""
        with open(path, "w") as fh:
            for j in range(self.m):
                coords = " ".join(repr(float(v)) for v in self.thetas[j])
                fh.write(f"{int(self.labels[j])} {coords}\n")

    def load_snapshot(self, path) -> None:
        thetas, labels = [], []
        with open(path) as fh:
            for line in fh:
                parts = line.split()
                if not parts:
                    continue
                labels.append(int(parts[0]))
                thetas.append([float(v) for v in parts[1:]])
        thetas = np.array(thetas, dtype=np.float64)
        if thetas.shape != self.thetas.shape:
            raise ValueError(
                f"snapshot shape {thetas.shape} does not match model {self.thetas.shape}"
            )
        self.thetas = thetas
        self.labels = np.array(labels, dtype=np.int64)

    def footprint(self) -> int:
        """Stored model reals: prototype coordinates only (d * m)."""
        return self.meta.d * self.m


def init_model(meta: StreamMeta, cfg: RslvqConfig, rng: SeededRng) -> RslvqModel:
    return RslvqModel(meta, cfg, rng)
