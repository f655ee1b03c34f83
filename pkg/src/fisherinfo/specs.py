"""Catalog of analytic test distributions.

Each spec knows its own pdf and enough summary statistics to pick a grid
that contains it.  Specs are plain frozen dataclasses so they can be
hashed, compared and round-tripped through config files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

_LOG_2PI = math.log(2.0 * math.pi)

#: Default half-width of a grid, in standard deviations.
SUPPORT_SIGMAS = 12.0


def _gauss_pdf(x, mean, var):
    return np.exp(-0.5 * (x - mean) ** 2 / var - 0.5 * (_LOG_2PI + math.log(var)))


@dataclass(frozen=True)
class Gaussian:
    mean: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError(f"variance must be positive, got {self.variance}")

    kind = "gaussian"
    kinks = ()

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def pdf(self, x):
        return _gauss_pdf(np.asarray(x, dtype=float), self.mean, self.variance)

    def support(self, tail_floor=1e-12):
        return self.mean - SUPPORT_SIGMAS * self.std, self.mean + SUPPORT_SIGMAS * self.std

    def to_dict(self):
        return {"kind": self.kind, "mean": self.mean, "variance": self.variance}


@dataclass(frozen=True)
class GaussianMixture:
    """Finite mixture; ``components`` is a tuple of ``(weight, mean, variance)``."""

    components: tuple

    kind = "gmm"
    kinks = ()

    def __post_init__(self):
        comps = tuple(tuple(float(v) for v in c) for c in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("mixture needs at least one component")
        for w, _, v in comps:
            if not w > 0:
                raise ValueError(f"mixture weights must be positive, got {w}")
            if not v > 0:
                raise ValueError(f"mixture variances must be positive, got {v}")
        total = sum(c[0] for c in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {total!r}, not 1")

    @property
    def mean(self) -> float:
        return sum(w * m for w, m, _ in self.components)

    @property
    def variance(self) -> float:
        mu = self.mean
        return sum(w * (v + (m - mu) ** 2) for w, m, v in self.components)

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return sum(w * _gauss_pdf(x, m, v) for w, m, v in self.components)

    def support(self, tail_floor=1e-12):
        lo = min(m - SUPPORT_SIGMAS * math.sqrt(v) for _, m, v in self.components)
        hi = max(m + SUPPORT_SIGMAS * math.sqrt(v) for _, m, v in self.components)
        mu, sd = self.mean, self.std
        return min(lo, mu - SUPPORT_SIGMAS * sd), max(hi, mu + SUPPORT_SIGMAS * sd)

    def to_dict(self):
        return {"kind": self.kind, "components": [list(c) for c in self.components]}


@dataclass(frozen=True)
class Laplace:
    """Laplace law; flagged non-smooth through its kink at ``location``."""

    location: float = 0.0
    scale: float = 1.0

    kind = "laplace"

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    @property
    def kinks(self):
        return (self.location,)

    @property
    def mean(self) -> float:
        return self.location

    @property
    def variance(self) -> float:
        return 2.0 * self.scale**2

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-np.abs(x - self.location) / self.scale) / (2.0 * self.scale)

    def support(self, tail_floor=1e-12):
        # exponential tails: 12 sigma is not enough to reach the floor
        half = self.scale * (math.log(1.0 / (2.0 * self.scale * tail_floor)) + 3.0)
        half = max(half, SUPPORT_SIGMAS * self.std)
        return self.location - half, self.location + half

    def to_dict(self):
        return {"kind": self.kind, "location": self.location, "scale": self.scale}


@dataclass(frozen=True)
class Gaussian2D:
    mean: tuple = (0.0, 0.0)
    cov: tuple = ((1.0, 0.0), (0.0, 1.0))

    kind = "gaussian2d"

    def __post_init__(self):
        mean = tuple(float(m) for m in self.mean)
        cov = tuple(tuple(float(c) for c in row) for row in self.cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        if len(mean) != 2 or len(cov) != 2 or any(len(r) != 2 for r in cov):
            raise ValueError("Gaussian2D needs a 2-vector mean and a 2x2 covariance")
        if abs(cov[0][1] - cov[1][0]) > 1e-12 * max(1.0, abs(cov[0][1])):
            raise ValueError("covariance must be symmetric")
        if not (cov[0][0] > 0 and cov[0][0] * cov[1][1] - cov[0][1] ** 2 > 0):
            raise ValueError("covariance must be positive definite")

    @property
    def cov_matrix(self):
        return np.array(self.cov)

    @property
    def stds(self):
        return math.sqrt(self.cov[0][0]), math.sqrt(self.cov[1][1])

    def pdf(self, x1, x2):
        x1 = np.asarray(x1, dtype=float) - self.mean[0]
        x2 = np.asarray(x2, dtype=float) - self.mean[1]
        (a, b), (_, d) = self.cov
        det = a * d - b * b
        q = (d * x1 * x1 - 2.0 * b * x1 * x2 + a * x2 * x2) / det
        return np.exp(-0.5 * q) / (2.0 * math.pi * math.sqrt(det))

    def support(self, tail_floor=1e-12):
        return tuple(
            (m - SUPPORT_SIGMAS * s, m + SUPPORT_SIGMAS * s) for m, s in zip(self.mean, self.stds)
        )

    def to_dict(self):
        return {"kind": self.kind, "mean": list(self.mean), "cov": [list(r) for r in self.cov]}


@dataclass(frozen=True)
class Mixture2D:
    """Mixture of bivariate Gaussians; ``components`` holds ``(weight, Gaussian2D)``."""

    components: tuple

    kind = "mixture2d"

    def __post_init__(self):
        comps = tuple((float(w), g) for w, g in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("mixture needs at least one component")
        if any(not w > 0 for w, _ in comps):
            raise ValueError("mixture weights must be positive")
        total = sum(w for w, _ in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {total!r}, not 1")

    def pdf(self, x1, x2):
        return sum(w * g.pdf(x1, x2) for w, g in self.components)

    def support(self, tail_floor=1e-12):
        boxes = [g.support(tail_floor) for _, g in self.components]
        return tuple((min(b[k][0] for b in boxes), max(b[k][1] for b in boxes)) for k in range(2))

    def to_dict(self):
        return {
            "kind": self.kind,
            "components": [{"weight": w, **g.to_dict()} for w, g in self.components],
        }


DistributionSpec = Union[Gaussian, GaussianMixture, Laplace, Gaussian2D, Mixture2D]


def spec_from_dict(d: dict) -> DistributionSpec:
    """Inverse of ``spec.to_dict()``."""
    kind = d.get("kind")
    if kind == "gaussian":
        return Gaussian(float(d.get("mean", 0.0)), float(d["variance"]))
    if kind == "gmm":
        return GaussianMixture(tuple(tuple(c) for c in d["components"]))
    if kind == "laplace":
        return Laplace(float(d.get("location", 0.0)), float(d["scale"]))
    if kind == "gaussian2d":
        return Gaussian2D(tuple(d.get("mean", (0.0, 0.0))), tuple(tuple(r) for r in d["cov"]))
    if kind == "mixture2d":
        comps = []
        for c in d["components"]:
            c = dict(c)
            w = c.pop("weight")
            comps.append((w, spec_from_dict({**c, "kind": "gaussian2d"})))
        return Mixture2D(tuple(comps))
    raise ValueError(f"unknown distribution kind {kind!r}")


def is_2d(spec) -> bool:
    return isinstance(spec, (Gaussian2D, Mixture2D))
