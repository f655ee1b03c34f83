"""Mutual information of scalar additive channels and its small-t behaviour."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .density import (
    GridDensity,
    GridSpec,
    affine_push,
    convolve,
    differential_entropy,
    materialize,
    on_step,
    refine,
)
from .errors import SolverFailed, TSweepTooShort
from .extrapolation import KINKED_POWERS, SMOOTH_POWERS, richardson_limit
from .results import CheckResult
from .specs import Gaussian, GaussianMixture

MIN_T = 1e-5
KERNEL_STEPS = 3.0
MAX_REFINE = 16
MIN_SWEEP = 4
MI_CLIP = 1e-9
MI_TOL = 1e-9
POINT_MASS_WIDTH = 1e-6


def mi_additive(fW: GridDensity, fN: GridDensity, gain: float) -> float:
    """``I(W; gain W + N)`` in nats, as ``h(gain W + N) - h(N)``.

    Given W = w the output is a translate of N, so ``h(X | W) = h(N)``.
    """
    if not gain > 0:
        raise ValueError("gain must be positive")
    if gain * fW.std() < POINT_MASS_WIDTH * fN.step:
        # I ~ (gain sd(W))^2 J(N) / 2, far below the clip; the scaled grid would underflow
        return 0.0
    scaled = on_step(affine_push(fW, gain, 0.0), fN.step)
    x = convolve(fN, scaled)
    mi = differential_entropy(x) - differential_entropy(fN)
    if -MI_CLIP < mi < 0:
        mi = 0.0
    return mi


@dataclass
class DeBruijnSweep:
    """Small-t sweep of ``I(W; gain sqrt(t) W + N)``.

    ``slope_estimates[i] = 2 I_i / (gain^2 t_i)`` tends to J(N);
    ``remainder_ratio[i] = (I_i - gain^2 t_i L / 2) / t_i`` with L the
    extrapolated limit, i.e. the o(t)/t term.
    """

    t_values: list
    mi_values: list
    slope_estimates: list
    extrapolated_limit: float
    remainder_ratio: list
    powers: tuple = SMOOTH_POWERS

    def __post_init__(self):
        t = np.asarray(self.t_values)
        if np.any(np.diff(t) >= 0):
            raise ValueError("t_values must be strictly decreasing")
        if any(m < 0 for m in self.mi_values):
            raise ValueError("mutual information must be non-negative")
        if not all(math.isfinite(s) for s in self.slope_estimates):
            raise ValueError("slope estimates must be finite")


class Resolver:
    """Power-of-two refinements of a density, cached.

    ``resolver(width)`` returns the density on a grid fine enough that a
    kernel of standard deviation ``width`` spans ``KERNEL_STEPS`` steps.
    """

    def __init__(self, f: GridDensity, max_factor: int = MAX_REFINE):
        self.f = f
        self.max_factor = max_factor
        self._cache = {1: f}

    def factor(self, width: float) -> int:
        need = KERNEL_STEPS * self.f.step / width if width > 0 else float("inf")
        k = 1
        while k < need and k < self.max_factor:
            k *= 2
        return k

    def __call__(self, width: float) -> GridDensity:
        k = self.factor(width)
        if k not in self._cache:
            self._cache[k] = refine(self.f, k)
        return self._cache[k]


def _check_t_values(t_values):
    t = [float(v) for v in t_values]
    if len(t) < MIN_SWEEP:
        raise TSweepTooShort(f"need at least {MIN_SWEEP} t values, got {len(t)}")
    if any(b >= a for a, b in zip(t, t[1:])):
        raise ValueError("t_values must be strictly decreasing")
    if t[-1] < MIN_T:
        raise ValueError(f"smallest t must be >= {MIN_T}")
    return t


def extrapolation_powers(*densities) -> tuple:
    return KINKED_POWERS if any(d.kinks for d in densities) else SMOOTH_POWERS


def de_bruijn_sweep(fW: GridDensity, fN: GridDensity, gain: float, t_values, powers=None) -> DeBruijnSweep:
    """MI at ``gain sqrt(t)`` along a decreasing t sweep, extrapolated to t = 0.

    ``powers`` are the exponents of the correction terms in ``slope(t)``;
    by default integer powers for smooth N and ``(1/2, 1)`` when N has a kink.
    """
    t = _check_t_values(t_values)
    if gain < 0:
        raise ValueError("gain must be non-negative")
    powers = extrapolation_powers(fN) if powers is None else tuple(powers)
    if gain == 0:
        zeros = [0.0] * len(t)
        return DeBruijnSweep(t, zeros, zeros, 0.0, zeros, powers)
    resolved = Resolver(fN)
    w_std = fW.std()
    mi = [mi_additive(fW, resolved(gain * math.sqrt(ti) * w_std), gain * math.sqrt(ti)) for ti in t]
    slopes = [2.0 * m / (gain * gain * ti) for m, ti in zip(mi, t)]
    limit = richardson_limit(t, slopes, powers)
    remainder = [(m - 0.5 * gain * gain * ti * limit) / ti for m, ti in zip(mi, t)]
    return DeBruijnSweep(t, mi, slopes, limit, remainder, powers)


def _mi_resolved(fW, resolver, gain):
    if gain == 0:
        return 0.0
    return mi_additive(fW, resolver(gain * fW.std()), gain)


def mi_pair_bound_check(fW: GridDensity, f1: GridDensity, f2: GridDensity, a: float, b: float, t: float,
                        tolerance: float = MI_TOL, resolvers=None) -> CheckResult:
    """``I(W; X1+X2) <= I(W; X1) + I(W; X2)`` with ``X_i = gain_i sqrt(t) W + N_i``.

    ``resolvers`` optionally supplies cached ``Resolver`` objects for
    (N1, N2, N1+N2) so that sweeps do not refine the same density repeatedly.
    """
    if a < 0 or b < 0 or not t > 0:
        raise ValueError("need a, b >= 0 and t > 0")
    if resolvers is None:
        resolvers = (Resolver(f1), Resolver(f2), Resolver(convolve(f1, f2)))
    r1, r2, rs = resolvers
    rt = math.sqrt(t)
    i_sum = _mi_resolved(fW, rs, (a + b) * rt)
    i1 = _mi_resolved(fW, r1, a * rt)
    i2 = _mi_resolved(fW, r2, b * rt)
    return CheckResult.inequality("mi-pair-bound", i_sum, i1 + i2, tolerance, t=t, a=a, b=b,
                                  mi_1=i1, mi_2=i2, step=f1.step, n_points=f1.grid.n_points)


@dataclass(frozen=True)
class MomentMatchedSpec:
    """Symmetric three-component mixture sharing the first four N(0,1) moments.

    Components: weight ``p`` at ``-mu`` and ``+mu`` with variance ``s2``,
    weight ``1 - 2p`` at 0 with variance ``s0_2``.
    """

    p: float
    mu: float
    s2: float
    s0_2: float
    l1_from_gaussian: float = field(default=float("nan"), compare=False)

    @property
    def mu2(self) -> float:
        return self.mu * self.mu

    def to_spec(self) -> GaussianMixture:
        p = self.p
        return GaussianMixture(((p, -self.mu, self.s2), (1.0 - 2.0 * p, 0.0, self.s0_2), (p, self.mu, self.s2)))

    def moment(self, order: int) -> float:
        """Closed-form raw moment (odd orders vanish by symmetry)."""
        if order % 2:
            return 0.0
        p, m, s2, s0 = self.p, self.mu2, self.s2, self.s0_2
        if order == 2:
            return 2 * p * (m + s2) + (1 - 2 * p) * s0
        if order == 4:
            return 2 * p * (m * m + 6 * m * s2 + 3 * s2 * s2) + 3 * (1 - 2 * p) * s0 * s0
        raise ValueError("closed form provided for orders up to 4")


def _centre_variance(mu2, p, s2):
    return (1.0 - 2.0 * p * (mu2 + s2)) / (1.0 - 2.0 * p)


def fourth_moment_residual(mu2: float, p: float = 0.1, s2: float = 0.5) -> float:
    """Fourth moment minus 3 once the variance equation fixes the centre variance."""
    s0 = _centre_variance(mu2, p, s2)
    return 2 * p * (mu2 * mu2 + 6 * mu2 * s2 + 3 * s2 * s2) + 3 * (1 - 2 * p) * s0 * s0 - 3.0


def moment_matched_nongaussian(p: float = 0.1, s2: float = 0.5, l1_threshold: float = 0.01) -> MomentMatchedSpec:
    """Solve the two moment equations for (mu^2, s0^2) by bisection.

    Of the two roots the one with larger mu^2 is returned; the smaller one
    lies within 0.01 in L1 of N(0, 1) for the default family and so is not
    a useful non-Gaussian test input.
    """
    upper = 1.0 / (2.0 * p) - s2  # keeps the centre variance positive
    if not upper > 0:
        raise SolverFailed("family admits no positive centre variance")
    scan = np.linspace(0.0, upper, 4001)[:-1]
    res = np.array([fourth_moment_residual(m, p, s2) for m in scan])
    flips = np.nonzero(np.sign(res[:-1]) != np.sign(res[1:]))[0]
    if flips.size == 0:
        raise SolverFailed("no sign change of the moment residual")
    roots = [bisect(fourth_moment_residual, scan[i], scan[i + 1], args=(p, s2), xtol=1e-15) for i in flips]
    for mu2 in sorted(roots, reverse=True):
        s0 = _centre_variance(mu2, p, s2)
        spec = MomentMatchedSpec(p, math.sqrt(mu2), s2, s0)
        l1 = _l1_from_standard_gaussian(spec.to_spec())
        if l1 > l1_threshold:
            out = MomentMatchedSpec(p, math.sqrt(mu2), s2, s0, l1)
            for k, target in zip(range(1, 5), (0.0, 1.0, 0.0, 3.0)):
                if abs(out.moment(k) - target) > 1e-6:
                    raise SolverFailed(f"moment {k} is {out.moment(k)!r}, expected {target}")
            return out
    raise SolverFailed("every root is within the L1 threshold of the Gaussian")


def _l1_from_standard_gaussian(spec: GaussianMixture) -> float:
    grid = GridSpec(-16.0, 16.0, 8193)
    x = grid.x
    diff = np.abs(spec.pdf(x) - Gaussian(0.0, 1.0).pdf(x))
    from .density import simpson

    return float(simpson(diff, grid.step))


def moment_matched_density(grid: GridSpec) -> GridDensity:
    return materialize(moment_matched_nongaussian().to_spec(), grid)
