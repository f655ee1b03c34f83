"""Densities sampled on uniform grids and the calculus on them.

All integrals use composite Simpson weights, which is why grids always carry
an odd number of points.  Convolution-type sums (``convolve``,
``sum_density_of_joint``) are discrete convolutions, i.e. the trapezoid rule
along each line, computed by FFT.

Densities are immutable: every operation returns a new object.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.signal import fftconvolve

from .errors import GridError, GridMismatch, InvalidDensity, SupportTooNarrow, ZeroScale
from .specs import SUPPORT_SIGMAS, Gaussian2D, Mixture2D, is_2d

TAIL_FLOOR = 1e-12
MASS_TOL = 1e-6
MIN_POINTS = 33
DEFAULT_POINTS = 1025
DEFAULT_POINTS_2D = 257

_STEP_RTOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid ``x_min + k * step`` for ``k = 0 .. n_points - 1``."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "x_max", float(self.x_max))
        if not self.x_min < self.x_max:
            raise GridError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if int(self.n_points) != self.n_points:
            raise GridError("n_points must be an integer")
        object.__setattr__(self, "n_points", int(self.n_points))
        if self.n_points < MIN_POINTS or self.n_points % 2 == 0:
            raise GridError(f"n_points must be odd and >= {MIN_POINTS}, got {self.n_points}")

    @property
    def step(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.step * np.arange(self.n_points)

    @property
    def center(self) -> float:
        return 0.5 * (self.x_min + self.x_max)

    @classmethod
    def around(cls, center: float, half_width: float, step: float, min_points: int = MIN_POINTS):
        """Grid of the given step, symmetric about ``center``, covering ``half_width``."""
        half = max(int(math.ceil(half_width / step - 1e-9)), (min_points - 1) // 2)
        return cls(center - half * step, center + half * step, 2 * half + 1)

    @classmethod
    def covering(cls, lo: float, hi: float, n_points: int = DEFAULT_POINTS):
        return cls(lo, hi, n_points)

    def to_dict(self):
        return {"x_min": self.x_min, "x_max": self.x_max, "n_points": self.n_points}


def simpson_weights(n: int, step: float) -> np.ndarray:
    if n < 3 or n % 2 == 0:
        raise GridError(f"Simpson needs an odd number (>= 3) of points, got {n}")
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (step / 3.0)


def simpson(values, step: float, axis: int = -1) -> float:
    values = np.asarray(values, dtype=float)
    w = simpson_weights(values.shape[axis], step)
    return np.tensordot(values, w, axes=([axis], [0]))


def same_step(h1: float, h2: float) -> bool:
    return abs(h1 - h2) <= _STEP_RTOL * max(abs(h1), abs(h2))


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GridDensity:
    """A 1-D probability density sampled on a uniform grid.

    ``kinks`` lists abscissae where the density has a derivative jump
    (e.g. the Laplace peak).  Score computations keep their stencils on one
    side of each kink.
    """

    grid: GridSpec
    values: np.ndarray
    kinks: tuple = ()
    tail_floor: float = field(default=TAIL_FLOOR, repr=False)

    def __post_init__(self):
        v = _frozen(self.values)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "kinks", tuple(float(k) for k in self.kinks))
        if v.shape != (self.grid.n_points,):
            raise InvalidDensity(f"values shape {v.shape} does not match grid ({self.grid.n_points},)")
        if not np.all(np.isfinite(v)):
            raise InvalidDensity("density values must be finite")
        if np.any(v < 0):
            raise InvalidDensity("density values must be non-negative")
        if max(v[0], v[-1]) > self.tail_floor:
            raise SupportTooNarrow(
                f"boundary value {max(v[0], v[-1]):.3g} exceeds tail floor {self.tail_floor:g}"
            )
        mass = simpson(v, self.grid.step)
        if abs(mass - 1.0) > MASS_TOL:
            raise InvalidDensity(f"Simpson mass {mass!r} is not within {MASS_TOL} of 1")

    @classmethod
    def from_values(cls, grid: GridSpec, values, kinks=(), tail_floor: float = TAIL_FLOOR):
        """Clip negatives (FFT round-off) and renormalize to unit Simpson mass."""
        v = np.clip(np.asarray(values, dtype=float), 0.0, None)
        mass = simpson(v, grid.step)
        if not mass > 0:
            raise InvalidDensity("values carry no mass")
        return cls(grid, v / mass, kinks, tail_floor)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def step(self) -> float:
        return self.grid.step

    @property
    def smooth(self) -> bool:
        return not self.kinks

    def integrate(self, g) -> float:
        """Simpson integral of ``g * f`` where ``g`` is an array on the grid."""
        return float(simpson(np.asarray(g) * self.values, self.step))

    def mass(self) -> float:
        return float(simpson(self.values, self.step))

    def mean(self) -> float:
        return self.integrate(self.x)

    def variance(self) -> float:
        mu = self.mean()
        return self.integrate((self.x - mu) ** 2)

    def std(self) -> float:
        return math.sqrt(self.variance())


@dataclass(frozen=True, eq=False)
class JointDensity2D:
    """Joint density on ``grid1 x grid2``; ``values[i, j]`` is f(x1_i, x2_j)."""

    grid1: GridSpec
    grid2: GridSpec
    values: np.ndarray
    tail_floor: float = field(default=TAIL_FLOOR, repr=False)

    def __post_init__(self):
        v = _frozen(self.values)
        object.__setattr__(self, "values", v)
        if v.shape != (self.grid1.n_points, self.grid2.n_points):
            raise InvalidDensity(f"values shape {v.shape} does not match the product grid")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise InvalidDensity("joint density values must be finite and non-negative")
        edge = max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max())
        if edge > self.tail_floor:
            raise SupportTooNarrow(f"boundary value {edge:.3g} exceeds tail floor {self.tail_floor:g}")
        mass = self.mass()
        if abs(mass - 1.0) > MASS_TOL:
            raise InvalidDensity(f"Simpson mass {mass!r} is not within {MASS_TOL} of 1")

    @classmethod
    def from_values(cls, grid1, grid2, values, tail_floor: float = TAIL_FLOOR):
        v = np.clip(np.asarray(values, dtype=float), 0.0, None)
        mass = simpson(simpson(v, grid2.step, axis=1), grid1.step)
        return cls(grid1, grid2, v / mass, tail_floor)

    def mass(self) -> float:
        return float(simpson(simpson(self.values, self.grid2.step, axis=1), self.grid1.step))

    def marginal(self, axis: int) -> GridDensity:
        """Marginal of x1 (``axis=0``) or x2 (``axis=1``)."""
        if axis == 0:
            return GridDensity.from_values(
                self.grid1, simpson(self.values, self.grid2.step, axis=1), tail_floor=self.tail_floor
            )
        return GridDensity.from_values(
            self.grid2, simpson(self.values, self.grid1.step, axis=0), tail_floor=self.tail_floor
        )


# -- construction -------------------------------------------------------------


def default_grid(spec, n_points: int = DEFAULT_POINTS, tail_floor: float = TAIL_FLOOR) -> GridSpec:
    lo, hi = spec.support(tail_floor)
    return GridSpec(lo, hi, n_points)


def shared_grid(specs, n_points: int = DEFAULT_POINTS, tail_floor: float = TAIL_FLOOR) -> GridSpec:
    """One grid covering every spec, so that all of them share a step."""
    boxes = [s.support(tail_floor) for s in specs]
    lo = min(b[0] for b in boxes)
    hi = max(b[1] for b in boxes)
    half = max(-lo, hi)
    return GridSpec(-half, half, n_points)


def materialize(spec, grid: GridSpec, grid2: GridSpec | None = None, tail_floor: float = TAIL_FLOOR):
    """Evaluate an analytic spec on a grid and renormalize.

    2-D specs need ``grid2`` (defaults to ``grid``) and return a
    ``JointDensity2D``.
    """
    if is_2d(spec):
        return _materialize_2d(spec, grid, grid if grid2 is None else grid2, tail_floor)
    sd = spec.std
    if grid.x_min > spec.mean - 10 * sd or grid.x_max < spec.mean + 10 * sd:
        raise SupportTooNarrow(
            f"grid [{grid.x_min:g}, {grid.x_max:g}] does not cover mean +/- 10 sd of {spec}"
        )
    values = spec.pdf(grid.x)
    edge = max(values[0], values[-1])
    if edge > tail_floor:
        raise SupportTooNarrow(f"{spec} has boundary value {edge:.3g} > {tail_floor:g} on this grid")
    return GridDensity.from_values(grid, values, spec.kinks, tail_floor)


def _materialize_2d(spec, grid1, grid2, tail_floor):
    x1, x2 = np.meshgrid(grid1.x, grid2.x, indexing="ij")
    values = spec.pdf(x1, x2)
    edge = max(values[0].max(), values[-1].max(), values[:, 0].max(), values[:, -1].max())
    if edge > tail_floor:
        raise SupportTooNarrow(f"{spec} has boundary value {edge:.3g} > {tail_floor:g} on this grid")
    return JointDensity2D.from_values(grid1, grid2, values, tail_floor)


def default_grid_2d(spec, n_points: int = DEFAULT_POINTS_2D):
    """Square grid pair with equal steps (needed by ``sum_density_of_joint``)."""
    (lo1, hi1), (lo2, hi2) = spec.support()
    half = max(-lo1, hi1, -lo2, hi2)
    g = GridSpec(-half, half, n_points)
    return g, g


# -- operations ---------------------------------------------------------------


def _check_steps(h1, h2):
    if not same_step(h1, h2):
        raise GridMismatch(f"grid steps differ: {h1!r} vs {h2!r}")


# fourth-order one-sided first-derivative weights (forward; backward is the mirror)
_FORWARD = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0


def kink_index(f: GridDensity, kink: float) -> int | None:
    pos = (kink - f.grid.x_min) / f.step
    i = int(round(pos))
    if abs(pos - i) > 1e-9 or i < 4 or i > f.grid.n_points - 5:
        return None
    return i


def trapezoid_weights(f: GridDensity) -> np.ndarray:
    """Values whose plain discrete convolution integrates to O(h^4) across kinks.

    The trapezoid rule over a derivative jump at node k overshoots by
    ``h^2/12 * (f'(k-) - f'(k+))`` times the other factor; that term is
    subtracted as a point correction at k.
    """
    v = np.array(f.values)
    h = f.step
    for k in f.kinks:
        i = kink_index(f, k)
        if i is None:
            continue
        right = float(np.dot(_FORWARD, f.values[i : i + 5])) / h
        left = -float(np.dot(_FORWARD, f.values[i - 4 : i + 1][::-1])) / h
        v[i] -= h / 12.0 * (left - right)
    return v


def convolve(f: GridDensity, g: GridDensity) -> GridDensity:
    """Density of the sum of independent variables with densities ``f`` and ``g``."""
    _check_steps(f.step, g.step)
    h = f.step
    n = f.grid.n_points + g.grid.n_points - 1
    grid = GridSpec(f.grid.x_min + g.grid.x_min, f.grid.x_min + g.grid.x_min + (n - 1) * h, n)
    values = fftconvolve(trapezoid_weights(f), trapezoid_weights(g)) * h
    return GridDensity.from_values(grid, values, (), min(f.tail_floor, g.tail_floor))


def sum_density_of_joint(j: JointDensity2D) -> GridDensity:
    """Density of ``x1 + x2`` by summing the joint along anti-diagonals."""
    _check_steps(j.grid1.step, j.grid2.step)
    h = j.grid1.step
    n1, n2 = j.values.shape
    idx = (np.arange(n1)[:, None] + np.arange(n2)[None, :]).ravel()
    values = np.bincount(idx, weights=j.values.ravel(), minlength=n1 + n2 - 1) * h
    n = n1 + n2 - 1
    x0 = j.grid1.x_min + j.grid2.x_min
    return GridDensity.from_values(GridSpec(x0, x0 + (n - 1) * h, n), values, (), j.tail_floor)


def affine_push(f: GridDensity, scale: float, shift: float = 0.0) -> GridDensity:
    """Density of ``scale * X + shift``; the grid is mapped along with it."""
    if scale == 0:
        raise ZeroScale("affine_push needs a nonzero scale")
    a, b = scale * f.grid.x_min + shift, scale * f.grid.x_max + shift
    values = f.values / abs(scale)
    if scale < 0:
        a, b = b, a
        values = values[::-1]
    kinks = tuple(sorted(scale * k + shift for k in f.kinks))
    return GridDensity.from_values(GridSpec(a, b, f.grid.n_points), values, kinks, f.tail_floor)


class PiecewiseSpline:
    """Cubic spline of grid values, split at kinks, zero outside the grid."""

    def __init__(self, x, y, kinks=()):
        self.lo, self.hi = x[0], x[-1]
        cuts = [k for k in sorted(kinks) if self.lo < k < self.hi]
        edges = [self.lo] + cuts + [self.hi]
        self.pieces = []
        for a, b in zip(edges[:-1], edges[1:]):
            sel = (x >= a - 1e-12 * (abs(a) + 1)) & (x <= b + 1e-12 * (abs(b) + 1))
            if sel.sum() >= 4:
                self.pieces.append((a, b, CubicSpline(x[sel], y[sel])))
            else:
                self.pieces.append((a, b, lambda t, xs=x[sel], ys=y[sel]: np.interp(t, xs, ys)))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for a, b, s in self.pieces:
            sel = (t >= a) & (t <= b)
            if np.any(sel):
                out[sel] = s(t[sel])
        return out


def log_interpolator(f: GridDensity):
    """Callable evaluating ``f`` off-grid by cubic interpolation of ``ln f``.

    Splines are split at kinks; outside the above-floor support the result
    is zero.  Exact for Gaussian and Laplace pieces.
    """
    live = np.nonzero(f.values > f.tail_floor)[0]
    lo, hi = live[0], live[-1]
    xs = f.x[lo : hi + 1]
    if xs.size < 2:
        return lambda t: np.where(np.abs(np.asarray(t) - f.x[lo]) < 0.5 * f.step, f.values[lo], 0.0)
    spline = PiecewiseSpline(xs, np.log(np.maximum(f.values[lo : hi + 1], f.tail_floor)), f.kinks)

    def evaluate(t):
        t = np.asarray(t, dtype=float)
        out = np.exp(spline(t))
        out[(t < xs[0]) | (t > xs[-1])] = 0.0
        return out

    return evaluate


def resample(f: GridDensity, grid: GridSpec) -> GridDensity:
    """Interpolate ``f`` onto another grid (log-cubic, split at kinks) and renormalize."""
    values = log_interpolator(f)(grid.x)
    # a spike narrower than the target step may fall between nodes
    if not np.any(values > 0):
        values = np.zeros(grid.n_points)
        values[int(round((f.mean() - grid.x_min) / grid.step))] = 1.0
    return GridDensity.from_values(grid, values, f.kinks, f.tail_floor)


def on_step(f: GridDensity, step: float, center: float | None = None) -> GridDensity:
    """Resample ``f`` onto a grid with the given step, keeping its support."""
    if same_step(step, f.step):
        return f
    c = f.grid.center if center is None else center
    half = max(c - f.grid.x_min, f.grid.x_max - c)
    return resample(f, GridSpec.around(c, half, step))


def refine(f: GridDensity, factor: int = 2) -> GridDensity:
    """Same support, ``factor`` times finer step."""
    n = (f.grid.n_points - 1) * factor + 1
    return resample(f, GridSpec(f.grid.x_min, f.grid.x_max, n))


def differential_entropy(f: GridDensity) -> float:
    """``-int f ln f`` in nats, with the integrand set to 0 where f <= tail floor."""
    v = f.values
    live = v > f.tail_floor
    integrand = np.zeros_like(v)
    integrand[live] = -v[live] * np.log(v[live])
    return float(simpson(integrand, f.step))


def moments(f: GridDensity, order: int) -> float:
    """Raw moment ``int x^order f(x) dx``."""
    if not 1 <= int(order) <= 8:
        raise ValueError(f"order must be in 1..8, got {order}")
    return f.integrate(f.x ** int(order))


def l1_distance(f: GridDensity, g: GridDensity) -> float:
    """Simpson L1 distance between two densities on step-commensurate grids.

    Both are zero-extended onto the union grid, whose nodes must line up.
    """
    _check_steps(f.step, g.step)
    h = f.step
    off = (g.grid.x_min - f.grid.x_min) / h
    k = int(round(off))
    if abs(off - k) > 1e-6:
        raise GridMismatch("grid nodes are not aligned")
    lo = min(0, k)
    hi = max(f.grid.n_points, k + g.grid.n_points)
    n = hi - lo
    if n % 2 == 0:
        n += 1
    a = np.zeros(n)
    b = np.zeros(n)
    a[-lo : -lo + f.grid.n_points] = f.values
    b[k - lo : k - lo + g.grid.n_points] = g.values
    return float(simpson(np.abs(a - b), h))


def l1_to_pdf(f: GridDensity, pdf) -> float:
    """Simpson L1 distance between ``f`` and an analytic pdf on f's grid."""
    return float(simpson(np.abs(f.values - pdf(f.x)), f.step))


def grid_for(spec, step: float, tail_floor: float = TAIL_FLOOR) -> GridSpec:
    """Grid of a prescribed step covering ``spec``'s support, centred on 0."""
    lo, hi = spec.support(tail_floor)
    return GridSpec.around(0.0, max(-lo, hi), step)


__all__ = [
    "TAIL_FLOOR",
    "MASS_TOL",
    "SUPPORT_SIGMAS",
    "GridSpec",
    "GridDensity",
    "JointDensity2D",
    "Gaussian2D",
    "Mixture2D",
    "materialize",
    "convolve",
    "sum_density_of_joint",
    "affine_push",
    "resample",
    "differential_entropy",
    "moments",
]
