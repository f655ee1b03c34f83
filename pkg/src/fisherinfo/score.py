"""Score functions and translation Fisher information on grids."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import binary_dilation
from scipy.signal import fftconvolve

from .density import GridDensity, GridSpec, JointDensity2D, convolve, simpson, trapezoid_weights
from .errors import DegenerateDensity, InvalidDensity

SCORE_MEAN_TOL = 1e-4
MASK_MARGIN = 2
MIN_VALID_FRACTION = 0.5
MIN_VALID_POINTS = 32

# leftmost stencil offset, in order of preference: central first
_OFFSETS = (-2, -3, -1, -4, 0)


def _first_derivative_weights(offset: int) -> np.ndarray:
    """Five-point, fourth-order weights for f'(x_i) using x_{i+offset} .. x_{i+offset+4}."""
    p = np.arange(offset, offset + 5, dtype=float)
    vander = np.vander(p, 5, increasing=True).T
    rhs = np.zeros(5)
    rhs[1] = 1.0
    return np.linalg.solve(vander, rhs)


_WEIGHTS = {s: _first_derivative_weights(s) for s in _OFFSETS}


@dataclass(frozen=True, eq=False)
class ScoreField:
    """``d/dx ln f`` on a grid.

    ``squared`` is the pointwise value of rho^2 used by the Fisher integral;
    it differs from ``values**2`` only at kink nodes, where the score has two
    one-sided limits and the mean of their squares is used.
    """

    grid: GridSpec
    values: np.ndarray
    valid_mask: np.ndarray
    squared: np.ndarray

    def mean_under(self, f: GridDensity) -> float:
        """``int rho f dx`` over the valid region; zero for an exact score."""
        return float(simpson(np.where(self.valid_mask, self.values * f.values, 0.0), f.step))


@dataclass(frozen=True, eq=False)
class FisherMatrix2:
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        if e.shape != (2, 2):
            raise ValueError("FisherMatrix2 must be 2x2")
        if abs(e[0, 1] - e[1, 0]) > 1e-10 * max(1.0, np.abs(e).max()):
            raise InvalidDensity("Fisher matrix is not symmetric")
        if np.linalg.eigvalsh(e).min() < -1e-8:
            raise InvalidDensity("Fisher matrix is not positive semi-definite")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    def quadratic_form(self, a: float, b: float) -> float:
        v = np.array([a, b], dtype=float)
        return float(v @ self.entries @ v)


def valid_region(values: np.ndarray, tail_floor: float, margin: int = MASK_MARGIN) -> np.ndarray:
    """Points above the floor and at least ``margin`` points away from any point below it."""
    low = values <= tail_floor
    edge = np.zeros_like(low)
    # the stencil needs neighbours: treat the outside of the grid as below the floor
    sl = tuple(slice(None) for _ in values.shape)
    for ax in range(values.ndim):
        for end in (0, -1):
            idx = list(sl)
            idx[ax] = end
            edge[tuple(idx)] = True
    structure = np.ones((2 * margin + 1,) * values.ndim, dtype=bool)
    return ~binary_dilation(low | edge, structure=structure)


def _log_density(values, tail_floor):
    return np.log(np.maximum(values, tail_floor))


def _central_derivative(lnf: np.ndarray, step: float, axis: int) -> np.ndarray:
    w = _WEIGHTS[-2]
    out = np.zeros_like(lnf)
    n = lnf.shape[axis]
    core = [slice(None)] * lnf.ndim
    core[axis] = slice(2, n - 2)
    acc = np.zeros_like(lnf[tuple(core)])
    for k, wk in enumerate(w):
        s = [slice(None)] * lnf.ndim
        s[axis] = slice(k, n - 4 + k)
        acc = acc + wk * lnf[tuple(s)]
    out[tuple(core)] = acc / step
    return out


def score(f: GridDensity) -> ScoreField:
    """Fourth-order finite-difference score of ``ln max(f, tail_floor)``."""
    h = f.step
    x = f.x
    n = x.size
    lnf = _log_density(f.values, f.tail_floor)
    rho = _central_derivative(lnf, h, 0)
    sq = rho * rho
    valid = valid_region(f.values, f.tail_floor)

    for k in f.kinks:
        tol = 1e-9 * h
        at_kink = np.abs(x - k) <= tol
        side = np.sign(np.where(at_kink, 0.0, x - k))
        near = np.nonzero(np.abs(x - k) < 2.5 * h)[0]
        for i in near:
            if at_kink[i]:
                left = _stencil(lnf, i, -4, h)
                right = _stencil(lnf, i, 0, h)
                if left is None or right is None:
                    continue
                rho[i] = 0.5 * (left + right)
                sq[i] = 0.5 * (left * left + right * right)
                continue
            for off in _OFFSETS:
                lo, hi = i + off, i + off + 4
                if lo < 0 or hi >= n:
                    continue
                if np.all(side[lo : hi + 1] * side[i] >= 0):
                    rho[i] = _stencil(lnf, i, off, h)
                    sq[i] = rho[i] ** 2
                    break

    _check_resolution(valid, f.values > f.tail_floor, MIN_VALID_POINTS)
    return ScoreField(f.grid, _ro(rho), _ro(valid), _ro(sq))


def _check_resolution(valid, live, min_points):
    # fractions are taken over the above-floor region, not the whole grid:
    # wide zero-padded grids are legitimate
    n_valid, n_live = int(valid.sum()), int(live.sum())
    if n_valid < MIN_VALID_FRACTION * n_live or n_valid < min_points:
        raise DegenerateDensity(
            f"only {n_valid} usable grid points ({n_live} above the tail floor)"
        )


def _stencil(lnf, i, off, h):
    lo = i + off
    if lo < 0 or lo + 5 > lnf.size:
        return None
    return float(np.dot(_WEIGHTS[off], lnf[lo : lo + 5]) / h)


def _ro(a):
    a = np.asarray(a)
    a.setflags(write=False)
    return a


def fisher_information(f: GridDensity) -> float:
    """``J(X) = E[rho(X)^2]`` integrated over the valid region."""
    s = score(f)
    return float(simpson(np.where(s.valid_mask, s.squared * f.values, 0.0), f.step))


def fisher_matrix(j: JointDensity2D) -> FisherMatrix2:
    """``E[grad ln f grad ln f^T]`` for a 2-D joint density."""
    lnf = _log_density(j.values, j.tail_floor)
    g1 = _central_derivative(lnf, j.grid1.step, 0)
    g2 = _central_derivative(lnf, j.grid2.step, 1)
    valid = valid_region(j.values, j.tail_floor)
    _check_resolution(valid, j.values > j.tail_floor, MIN_VALID_POINTS**2)

    def integrate(a):
        a = np.where(valid, a * j.values, 0.0)
        return simpson(simpson(a, j.grid2.step, axis=1), j.grid1.step)

    j11, j22, j12 = integrate(g1 * g1), integrate(g2 * g2), integrate(g1 * g2)
    return FisherMatrix2(np.array([[j11, j12], [j12, j22]]))


def conditional_score(f1: GridDensity, f2: GridDensity):
    """``E[rho_1(N1) | N1 + N2 = s]`` on the grid of the sum.

    Returns ``(sum_density, conditional_mean, valid_mask)``.
    """
    fs = convolve(f1, f2)
    h = f1.step
    s1 = score(f1)
    # the integrand rho_1 f_1 = f_1' jumps at a kink; the node carries the mean of the
    # one-sided limits, which is what the trapezoid rule needs there
    w2 = trapezoid_weights(f2)
    num = fftconvolve(np.where(s1.valid_mask, s1.values, 0.0) * f1.values, w2) * h
    den = fftconvolve(trapezoid_weights(f1), w2) * h
    valid = valid_region(fs.values, fs.tail_floor)
    cond = np.zeros_like(num)
    cond[valid] = num[valid] / den[valid]
    return fs, cond, valid


def score_conditional_mean_residual(f1: GridDensity, f2: GridDensity) -> float:
    """f_S-weighted L2 distance between ``E[rho_1(N1)|S]`` and ``rho_S``."""
    fs, cond, valid = conditional_score(f1, f2)
    rs = score(fs)
    mask = valid & rs.valid_mask
    diff2 = np.where(mask, (cond - rs.values) ** 2 * fs.values, 0.0)
    return float(np.sqrt(simpson(diff2, fs.step)))
