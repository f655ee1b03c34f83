"""Estimation of N from X = N + W with W ~ N(0, sigma2).

Posterior moments come from Gaussian-kernel quadrature over the grid of N.
A kernel narrower than four grid steps is not resolved by the grid: the
grid is then refined (log-cubic interpolation of N's density), and if even
64x refinement is not enough the integral is taken in the kernel's own
coordinate ``n = x - sigma u``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .density import (
    GridDensity,
    GridSpec,
    convolve,
    log_interpolator,
    materialize,
    refine,
    simpson,
    simpson_weights,
)
from .errors import DegenerateDensity, InsufficientSamples
from .results import CheckResult
from .score import fisher_information, score, valid_region
from .specs import Gaussian

KERNEL_SIGMAS = 12.0
RESOLVED_STEPS = 4.0
MIN_MC_SAMPLES = 1_000_000
MC_BINS = 64
MIN_BIN_COUNT = 30
MC_CHUNK = 1 << 20

_GL_NODES = 96
MAX_REFINE = 64


@dataclass(frozen=True)
class ChannelModel:
    """Gains, time and the two Gaussian noise variances of a two-branch model.

    ``mode="bayesian"``: X_i = N_i + sqrt(gain_i t) W_i, so the noise
    variances must be ``gain_a * t`` and ``gain_b * t``.
    ``mode="communications"``: X_i = gain_i sqrt(t) W + N_i.
    """

    gain_a: float
    gain_b: float
    t: float
    noise_variance_1: float
    noise_variance_2: float
    mode: str = "bayesian"

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("t must be positive")
        if self.gain_a < 0 or self.gain_b < 0:
            raise ValueError("gains must be non-negative")
        if not (self.noise_variance_1 > 0 and self.noise_variance_2 > 0):
            raise ValueError("noise variances must be positive")
        if self.mode not in ("bayesian", "communications"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "bayesian":
            for gain, var in ((self.gain_a, self.noise_variance_1), (self.gain_b, self.noise_variance_2)):
                if not math.isclose(var, gain * self.t, rel_tol=1e-12):
                    raise ValueError("bayesian model needs noise variance gain * t")

    @classmethod
    def bayesian(cls, a: float, b: float, t: float) -> "ChannelModel":
        return cls(a, b, t, a * t, b * t, "bayesian")


@dataclass(frozen=True, eq=False)
class PosteriorField:
    """Posterior mean and variance of N given X = x on the grid of X."""

    grid: GridSpec
    mean: np.ndarray
    var: np.ndarray
    fx: GridDensity
    valid: np.ndarray
    sigma2: float


@dataclass(frozen=True)
class ConditionalMoments:
    cond_var: float


def gaussian_kernel(sigma2: float, step: float, tail_floor: float | None = None) -> GridDensity:
    """N(0, sigma2) sampled with the given step, spanning +/- 12 sd (at least 33 points)."""
    grid = GridSpec.around(0.0, KERNEL_SIGMAS * math.sqrt(sigma2), step)
    kw = {} if tail_floor is None else {"tail_floor": tail_floor}
    return materialize(Gaussian(0.0, sigma2), grid, **kw)


def observation_density(fN: GridDensity, sigma2: float) -> GridDensity:
    """Density of X = N + W."""
    return convolve(fN, gaussian_kernel(sigma2, fN.step, fN.tail_floor))


def _centered_moments(fN: GridDensity, x: np.ndarray, sigma2: float) -> np.ndarray:
    """``E_k(x) = int (n - x)^k fN(n) phi(x - n) dn`` for k = 0, 1, 2."""
    h = fN.step
    sigma = math.sqrt(sigma2)
    if sigma >= RESOLVED_STEPS * h:
        wf = np.ascontiguousarray(simpson_weights(fN.grid.n_points, h) * fN.values)
        return kernels.gauss_moments(fN.grid.x_min, h, wf, np.ascontiguousarray(x), sigma2)
    return _local_moments(fN, x, sigma)


def _local_moments(fN, x, sigma):
    # Gauss-Legendre panels in u = (x - n) / sigma, broken at every kink so
    # each panel sees a smooth integrand
    spline = log_interpolator(fN)
    gl_u, gl_w = np.polynomial.legendre.leggauss(_GL_NODES)
    out = np.empty((3, x.size))
    for start in range(0, x.size, 256):
        xs = x[start : start + 256]
        cuts = [np.full(xs.size, -KERNEL_SIGMAS)]
        cuts += [np.clip((xs - k) / sigma, -KERNEL_SIGMAS, KERNEL_SIGMAS) for k in sorted(fN.kinks, reverse=True)]
        cuts.append(np.full(xs.size, KERNEL_SIGMAS))
        acc = np.zeros((3, xs.size))
        for a, b in zip(cuts[:-1], cuts[1:]):
            half = 0.5 * (b - a)
            u = 0.5 * (a + b)[:, None] + half[:, None] * gl_u[None, :]
            w = half[:, None] * gl_w[None, :] * np.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)
            d = -sigma * u  # n - x
            fv = np.clip(spline(xs[:, None] + d), 0.0, None) * w
            acc[0] += fv.sum(axis=1)
            acc[1] += (fv * d).sum(axis=1)
            acc[2] += (fv * d * d).sum(axis=1)
        out[:, start : start + 256] = acc
    return out


def _resolve_kernel(fN: GridDensity, sigma2: float) -> GridDensity:
    """Refine the grid until the kernel spans ``RESOLVED_STEPS`` steps (at most 64x)."""
    ratio = RESOLVED_STEPS * fN.step / math.sqrt(sigma2)
    if ratio <= 1.0:
        return fN
    factor = min(int(math.ceil(ratio)), MAX_REFINE)
    return refine(fN, factor)


def posterior(fN: GridDensity, sigma2: float) -> PosteriorField:
    """``E[N | X = x]`` and ``VAR[N | X = x]`` for X = N + N(0, sigma2)."""
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    fN = _resolve_kernel(fN, sigma2)
    fx = observation_density(fN, sigma2)
    x = fx.x
    e0, e1, e2 = _centered_moments(fN, x, sigma2)
    valid = (fx.values > fx.tail_floor) & (e0 > fx.tail_floor)
    if valid.sum() < 3:
        raise DegenerateDensity("observation density has no usable support")
    shift = np.zeros_like(x)
    var = np.zeros_like(x)
    shift[valid] = e1[valid] / e0[valid]
    var[valid] = np.clip(e2[valid] / e0[valid] - shift[valid] ** 2, 0.0, None)
    mean = np.where(valid, x + shift, 0.0)
    for a in (mean, var, valid):
        a.setflags(write=False)
    return PosteriorField(fx.grid, mean, var, fx, valid, float(sigma2))


def conditional_variance(fN: GridDensity, sigma2: float) -> ConditionalMoments:
    """MMSE ``VAR[N | N + W]`` averaged over X."""
    p = posterior(fN, sigma2)
    return ConditionalMoments(float(simpson(np.where(p.valid, p.var, 0.0) * p.fx.values, p.fx.step)))


def mmse_fisher(fN: GridDensity, sigma2: float) -> float:
    """``J(N + W)`` obtained from the MMSE: ``(sigma2 - mmse) / sigma2**2``."""
    return (sigma2 - conditional_variance(fN, sigma2).cond_var) / sigma2**2


def lemma1_residual(fN: GridDensity, sigma2: float) -> float:
    """Relative mismatch between score-based J(N+W) and ``(sigma2 - mmse) / sigma2^2``."""
    j = fisher_information(observation_density(fN, sigma2))
    return abs(j - mmse_fisher(fN, sigma2)) / j


def score_mmse_identity_residual(fN: GridDensity, sigma2: float) -> float:
    """f_X-weighted L2 distance between ``rho_X(x)`` and ``(E[N|X=x] - x) / sigma2``."""
    p = posterior(fN, sigma2)
    s = score(p.fx)
    mask = p.valid & s.valid_mask
    target = (p.mean - p.fx.x) / sigma2
    d2 = np.where(mask, (s.values - target) ** 2 * p.fx.values, 0.0)
    return float(math.sqrt(simpson(d2, p.fx.step)))


def orthogonality_residual(fN: GridDensity, sigma2: float) -> float:
    """``|E[(E[N|X] - X)(N - E[N|X])]|`` by quadrature over the (n, x) plane."""
    p = posterior(fN, sigma2)
    wf = np.ascontiguousarray(simpson_weights(fN.grid.n_points, fN.step) * fN.values)
    wx = np.ascontiguousarray(np.where(p.valid, simpson_weights(p.grid.n_points, p.grid.step), 0.0))
    return abs(
        kernels.orthogonality_sum(
            fN.grid.x_min, fN.step, wf, np.ascontiguousarray(p.fx.x), wx,
            np.ascontiguousarray(p.mean), sigma2,
        )
    )


def bayesian_var_identities(fN: GridDensity, gain: float, t: float, tolerance: float = 1e-4) -> CheckResult:
    """``VAR[N|X] = g t - g^2 t^2 J(X)`` for X = N + sqrt(g t) W."""
    s2 = gain * t
    if not s2 > 0:
        raise ValueError("gain * t must be positive")
    lhs = conditional_variance(fN, s2).cond_var
    jx = fisher_information(observation_density(fN, s2))
    rhs = s2 - s2 * s2 * jx
    return CheckResult.identity(
        "bayesian-var-identity", lhs, rhs, tolerance,
        gain=gain, t=t, fisher_x=jx, step=fN.step, n_points=fN.grid.n_points,
    )


# -- Monte Carlo -------------------------------------------------------------


def _inverse_cdf(f: GridDensity):
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (f.values[1:] + f.values[:-1]) * f.step)])
    cdf /= cdf[-1]
    x0, h = f.grid.x_min, f.step

    def sample(u):
        i = np.clip(np.searchsorted(cdf, u, side="right"), 1, cdf.size - 1)
        lo, hi = cdf[i - 1], cdf[i]
        frac = np.where(hi > lo, (u - lo) / np.where(hi > lo, hi - lo, 1.0), 0.5)
        return x0 + (i - 1 + frac) * h

    return sample


def _quantile_edges(f: GridDensity, n_bins: int) -> np.ndarray:
    inv = _inverse_cdf(f)
    return inv(np.arange(1, n_bins) / n_bins)


def _chunk_samples(seed, k, size, inv1, inv2, s1, s2):
    bitgen = np.random.Philox(key=seed).jumped(k)
    rng = np.random.Generator(bitgen)
    u = rng.random((2, size))
    w = rng.standard_normal((2, size))
    n1, n2 = inv1(u[0]), inv2(u[1])
    return n1 + s1 * w[0], n2 + s2 * w[1], n1 + n2


def var_additivity_mc_check(
    f1: GridDensity,
    f2: GridDensity,
    model: ChannelModel,
    n_samples: int,
    seed: int,
    n_bins: int = MC_BINS,
    threads: int = 1,
    se_multiple: float = 3.0,
) -> CheckResult:
    """Monte Carlo ``VAR[N1+N2 | X1, X2]`` against ``VAR[N1|X1] + VAR[N2|X2]``.

    The conditional mean of N1 + N2 is fitted by a linear regression on
    (x1, x2) inside each of ``n_bins x n_bins`` equal-probability bins.
    Samples come in fixed chunks of a counter-based generator, chunk ``k``
    using stream ``k``, so the estimate does not depend on ``threads``.
    Passes when the gap is within ``se_multiple`` Monte Carlo standard errors.
    """
    if n_samples < MIN_MC_SAMPLES:
        raise InsufficientSamples(f"need at least {MIN_MC_SAMPLES} samples, got {n_samples}")
    v1, v2 = model.noise_variance_1, model.noise_variance_2
    s1, s2 = math.sqrt(v1), math.sqrt(v2)
    inv1, inv2 = _inverse_cdf(f1), _inverse_cdf(f2)
    e1 = _quantile_edges(observation_density(f1, v1), n_bins)
    e2 = _quantile_edges(observation_density(f2, v2), n_bins)
    nb = n_bins * n_bins
    sizes = [min(MC_CHUNK, n_samples - k) for k in range(0, n_samples, MC_CHUNK)]

    def draw(k):
        x1, x2, y = _chunk_samples(seed, k, sizes[k], inv1, inv2, s1, s2)
        bins = (np.searchsorted(e1, x1) * n_bins + np.searchsorted(e2, x2)).astype(np.int64)
        return bins, x1, x2, y

    def stats(k):
        bins, x1, x2, y = draw(k)
        return kernels.binned_regression_stats(bins, x1, x2, y, nb)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        acc = np.zeros((nb, 10))
        for part in pool.map(stats, range(len(sizes))):
            acc += part

        counts = acc[:, 0]
        keep = counts >= MIN_BIN_COUNT
        coef = _fit_bins(acc, keep)

        def resid(k):
            bins, x1, x2, y = draw(k)
            return kernels.binned_residual_sums(bins, x1, x2, y, coef, keep)

        r2 = r4 = 0.0
        used = 0
        for a, b, c in pool.map(resid, range(len(sizes))):
            r2 += a
            r4 += b
            used += c

    dropped = n_samples - used
    if used == 0 or dropped > 0.01 * n_samples:
        raise InsufficientSamples(f"{dropped} of {n_samples} samples fell in bins with < {MIN_BIN_COUNT} samples")
    n_kept_bins = int(keep.sum())
    estimate = r2 / (used - 3 * n_kept_bins)
    m2, m4 = r2 / used, r4 / used
    std_err = math.sqrt(max(m4 - m2 * m2, 0.0) / used)
    c1 = conditional_variance(f1, v1).cond_var
    c2 = conditional_variance(f2, v2).cond_var
    return CheckResult.identity(
        "var-additivity-mc", estimate, c1 + c2, se_multiple * std_err,
        std_err=std_err, var_1=c1, var_2=c2, n_samples=n_samples, seed=seed,
        bins=n_bins, bins_used=n_kept_bins, t=model.t, gain_a=model.gain_a,
        gain_b=model.gain_b, step=f1.step, n_points=f1.grid.n_points,
    )


def _fit_bins(acc, keep):
    n, sx1, sx2, sy, s11, s12, s22, s1y, s2y, _ = acc.T
    coef = np.zeros((acc.shape[0], 3))
    for b in np.nonzero(keep)[0]:
        xtx = np.array(
            [[n[b], sx1[b], sx2[b]], [sx1[b], s11[b], s12[b]], [sx2[b], s12[b], s22[b]]]
        )
        xty = np.array([sy[b], s1y[b], s2y[b]])
        coef[b] = np.linalg.lstsq(xtx, xty, rcond=None)[0]
    return np.ascontiguousarray(coef)


__all__ = [
    "ChannelModel",
    "PosteriorField",
    "ConditionalMoments",
    "posterior",
    "conditional_variance",
    "lemma1_residual",
    "score_mmse_identity_residual",
    "orthogonality_residual",
    "bayesian_var_identities",
    "var_additivity_mc_check",
    "valid_region",
]
