"""Numerical checks of the Fisher information inequality, its reciprocal (Stam) form
and the two small-noise limits that establish it: mutual information and MMSE.

Every check returns a ``CheckResult`` (or a ``SweepReport`` for t-sweeps).
Three independent routes to Fisher information meet here:

* score quadrature (``score.fisher_information``),
* the small-t slope of mutual information (``mutual_info.de_bruijn_sweep``),
* the small-noise MMSE (``channel.mmse_fisher``).
"""

from __future__ import annotations

import math

import numpy as np

from . import channel
from .channel import observation_density, orthogonality_residual, score_mmse_identity_residual
from .density import GridDensity, JointDensity2D, convolve, grid_for, materialize, same_step, sum_density_of_joint
from .errors import GridMismatch
from .extrapolation import DEFAULT_T_VALUES, richardson_limit
from .mutual_info import Resolver, _check_t_values, de_bruijn_sweep, extrapolation_powers, mi_pair_bound_check
from .results import CheckResult, SweepReport
from .score import fisher_information, fisher_matrix, score
from .specs import Gaussian, GaussianMixture, Laplace

FISHER_TOL = 1e-5
LIMIT_RTOL = 0.01
IDENTITY_TOL = 1e-4
ORTHOGONALITY_TOL = 1e-5

DEFAULT_CATALOG = {
    "gauss-unit": Gaussian(0.0, 1.0),
    "gauss-wide": Gaussian(0.5, 2.0),
    "gmm-symmetric": GaussianMixture(((0.5, -1.0, 1.0), (0.5, 1.0, 1.0))),
    "gmm-skewed": GaussianMixture(((0.3, -2.0, 0.5), (0.7, 1.0, 0.8))),
    "laplace": Laplace(0.0, 1.0 / math.sqrt(2.0)),
}
DEFAULT_WEIGHTS = ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 1.0), (1.0, 3.0))


def _grid_info(f):
    return {"step": f.step, "n_points": f.grid.n_points}


def _check_weights(a, b):
    if a < 0 or b < 0:
        raise ValueError("weights must be non-negative")
    if a == 0 and b == 0:
        raise ValueError("weights (0, 0) are excluded")


def _rel_tol(target, rtol=LIMIT_RTOL, floor=FISHER_TOL):
    return max(rtol * abs(target), floor)


# -- direct inequalities ------------------------------------------------------


def fii_check(f1: GridDensity, f2: GridDensity, a: float, b: float, tolerance: float = FISHER_TOL) -> CheckResult:
    """``(a+b)^2 J(N1+N2) <= a^2 J(N1) + b^2 J(N2)``."""
    _check_weights(a, b)
    j1, j2 = fisher_information(f1), fisher_information(f2)
    js = fisher_information(convolve(f1, f2))
    lhs = (a + b) ** 2 * js
    rhs = a * a * j1 + b * b * j2
    return CheckResult.inequality("fii", lhs, rhs, tolerance, a=a, b=b, j1=j1, j2=j2, j_sum=js, **_grid_info(f1))


def stam_check(f1: GridDensity, f2: GridDensity, tolerance: float = FISHER_TOL) -> CheckResult:
    """``1/J(N1+N2) >= 1/J(N1) + 1/J(N2)``, i.e. the FII at weights a = 1/J1, b = 1/J2."""
    j1, j2 = fisher_information(f1), fisher_information(f2)
    if not (j1 > 0 and j2 > 0):
        raise ValueError("Fisher informations must be positive")
    js = fisher_information(convolve(f1, f2))
    return CheckResult.inequality(
        "stam", 1.0 / j1 + 1.0 / j2, 1.0 / js, tolerance,
        a_opt=1.0 / j1, b_opt=1.0 / j2, j1=j1, j2=j2, j_sum=js, **_grid_info(f1),
    )


def dependent_fii_check(j: JointDensity2D, a: float, b: float, tolerance: float = FISHER_TOL) -> CheckResult:
    """``(a+b)^2 J(N1+N2) <= [a b] J(N1, N2) [a b]^T`` for a joint density."""
    _check_weights(a, b)
    js = fisher_information(sum_density_of_joint(j))
    m = fisher_matrix(j)
    lhs = (a + b) ** 2 * js
    rhs = m.quadratic_form(a, b)
    return CheckResult.inequality(
        "dependent-fii", lhs, rhs, tolerance, a=a, b=b, j_sum=js,
        fisher_matrix=m.entries.tolist(), step=j.grid1.step, n_points=j.grid1.n_points,
    )


# -- Fisher / MMSE identities ---------------------------------------------------


def fisher_mmse_check(fN: GridDensity, sigma2: float, rtol: float = IDENTITY_TOL) -> CheckResult:
    """``J(N+W) = (sigma2 - VAR[N|N+W]) / sigma2^2`` (relative tolerance)."""
    jx = fisher_information(observation_density(fN, sigma2))
    mmse = channel.conditional_variance(fN, sigma2).cond_var
    rhs = (sigma2 - mmse) / sigma2**2
    return CheckResult.identity("fisher-mmse", jx, rhs, rtol * abs(jx), sigma2=sigma2, mmse=mmse, **_grid_info(fN))


IDENTITY_STEPS = ("zero-mean-score", "score-mmse-identity", "orthogonality", "fisher-mmse")


def identity_step_check(fN: GridDensity, sigma2: float, step: str, identity_tol: float = IDENTITY_TOL,
                   orthogonality_tol: float = ORTHOGONALITY_TOL) -> CheckResult:
    """One link of the chain from the score to the MMSE (see ``IDENTITY_STEPS``)."""
    info = dict(sigma2=sigma2, **_grid_info(fN))
    if step == "zero-mean-score":
        fx = observation_density(fN, sigma2)
        return CheckResult.identity(step, score(fx).mean_under(fx), 0.0, identity_tol, **info)
    if step == "score-mmse-identity":
        return CheckResult.identity(step, score_mmse_identity_residual(fN, sigma2), 0.0, identity_tol, **info)
    if step == "orthogonality":
        return CheckResult.identity(step, orthogonality_residual(fN, sigma2), 0.0, orthogonality_tol, **info)
    if step == "fisher-mmse":
        return fisher_mmse_check(fN, sigma2, identity_tol)
    raise ValueError(f"unknown step {step!r}")


def identity_step_checks(fN: GridDensity, sigma2: float, identity_tol: float = IDENTITY_TOL,
                    orthogonality_tol: float = ORTHOGONALITY_TOL) -> list:
    return [identity_step_check(fN, sigma2, s, identity_tol, orthogonality_tol) for s in IDENTITY_STEPS]


# -- t-sweeps -----------------------------------------------------------------


def standard_gaussian_like(f: GridDensity) -> GridDensity:
    """N(0, 1) on a grid with the step of ``f``."""
    return materialize(Gaussian(0.0, 1.0), grid_for(Gaussian(0.0, 1.0), f.step))


def de_bruijn_check(fW: GridDensity, fN: GridDensity, gain: float = 1.0, t_values=DEFAULT_T_VALUES,
                    rtol: float = LIMIT_RTOL, name: str = "debruijn") -> SweepReport:
    """Extrapolated ``2 I / (gain^2 t)`` against the score-quadrature J(N)."""
    sweep = de_bruijn_sweep(fW, fN, gain, t_values)
    jn = fisher_information(fN)
    results = [
        CheckResult.inequality(f"{name}-mi-nonnegative", 0.0, mi, 1e-9, t=t, slope=s, **_grid_info(fN))
        for t, mi, s in zip(sweep.t_values, sweep.mi_values, sweep.slope_estimates)
    ]
    target = gain * gain * jn
    limits = [CheckResult.identity(f"{name}-limit", sweep.extrapolated_limit * gain * gain, target,
                                   _rel_tol(target, rtol), powers=list(sweep.powers))]
    return SweepReport(name, "t", list(sweep.t_values), results, limits, {
        "extrapolated_limit": sweep.extrapolated_limit,
        "fisher_information": jn,
        "slope_estimates": sweep.slope_estimates,
        "remainder_ratio": sweep.remainder_ratio,
    })


def communications_proof_sweep(f1: GridDensity, f2: GridDensity, a: float, b: float, t_values=DEFAULT_T_VALUES,
                               fW: GridDensity | None = None, tolerance: float = FISHER_TOL,
                               rtol: float = LIMIT_RTOL) -> SweepReport:
    """Per-t check of ``I(W; X1+X2) <= I(W; X1) + I(W; X2)`` scaled by 2/t, and its t -> 0 limit.

    X_i = gain_i sqrt(t) W + N_i.  The limits of the two sides must equal
    ``(a+b)^2 J(N1+N2)`` and ``a^2 J(N1) + b^2 J(N2)``.
    """
    _check_weights(a, b)
    t = _check_t_values(t_values)
    fW = standard_gaussian_like(f1) if fW is None else fW
    fs = convolve(f1, f2)
    resolvers = (Resolver(f1), Resolver(f2), Resolver(fs))
    results, lhs_seq, rhs_seq = [], [], []
    for ti in t:
        pair = mi_pair_bound_check(fW, f1, f2, a, b, ti, resolvers=resolvers)
        lhs, rhs = 2.0 * pair.lhs / ti, 2.0 * pair.rhs / ti
        lhs_seq.append(lhs)
        rhs_seq.append(rhs)
        results.append(CheckResult.inequality("comm-proof-mi-chain", lhs, rhs, tolerance, t=ti, a=a, b=b,
                                              mi_sum=pair.lhs, mi_1=pair.diagnostics["mi_1"],
                                              mi_2=pair.diagnostics["mi_2"], **_grid_info(f1)))
    powers = extrapolation_powers(f1, f2)
    lhs_lim = richardson_limit(t, lhs_seq, powers)
    rhs_lim = richardson_limit(t, rhs_seq, powers)
    j1, j2, js = fisher_information(f1), fisher_information(f2), fisher_information(fs)
    lhs_target = (a + b) ** 2 * js
    rhs_target = a * a * j1 + b * b * j2
    limits = [
        CheckResult.identity("comm-proof-limit-lhs", lhs_lim, lhs_target, _rel_tol(lhs_target, rtol)),
        CheckResult.identity("comm-proof-limit-rhs", rhs_lim, rhs_target, _rel_tol(rhs_target, rtol)),
        CheckResult.inequality("comm-proof-limit-fii", lhs_lim, rhs_lim, _rel_tol(rhs_target, rtol)),
    ]
    return SweepReport("comm-proof", "t", t, results, limits, {
        "a": a, "b": b, "lhs_limit": lhs_lim, "rhs_limit": rhs_lim,
        "fii_lhs": lhs_target, "fii_rhs": rhs_target, "powers": list(powers),
    })


def bayesian_proof_sweep(f1: GridDensity, f2: GridDensity, a: float, b: float, t_values=DEFAULT_T_VALUES,
                         tolerance: float = FISHER_TOL, rtol: float = LIMIT_RTOL) -> SweepReport:
    """Per-t check of ``(a+b)^2 J(X1+X2) <= a^2 J(X1) + b^2 J(X2)`` with X_i = N_i + N(0, gain_i t).

    The gap is extrapolated to t = 0 and compared with the direct FII gap.
    """
    if not (a > 0 and b > 0):
        raise ValueError("bayesian sweep needs a, b > 0")
    t = _check_t_values(t_values)
    if not same_step(f1.step, f2.step):
        raise GridMismatch("bayesian sweep needs densities on a common step")
    r1, r2 = Resolver(f1), Resolver(f2)
    results, gaps, jx1, jx2 = [], [], [], []
    for ti in t:
        # refine both by the factor the narrower kernel needs, so X1 + X2 shares a step
        width = math.sqrt(min(a, b) * ti)
        x1 = observation_density(r1(width), a * ti)
        x2 = observation_density(r2(width), b * ti)
        j1, j2 = fisher_information(x1), fisher_information(x2)
        js = fisher_information(convolve(x1, x2))
        lhs = (a + b) ** 2 * js
        rhs = a * a * j1 + b * b * j2
        gaps.append(rhs - lhs)
        jx1.append(j1)
        jx2.append(j2)
        results.append(CheckResult.inequality("bayes-proof-finite-t", lhs, rhs, tolerance, t=ti, a=a, b=b,
                                              j_x1=j1, j_x2=j2, j_sum=js, step=x1.step, n_points=x1.grid.n_points))
    powers = extrapolation_powers(f1, f2)
    gap_lim = richardson_limit(t, gaps, powers)
    direct = fii_check(f1, f2, a, b)
    limits = [CheckResult.identity("bayes-proof-limit-gap", gap_lim, direct.gap, _rel_tol(direct.gap, rtol))]
    # J(X_i) should rise towards J(N_i) as t decreases
    mono1 = bool(np.all(np.diff(jx1) >= -1e-8 * max(jx1)))
    mono2 = bool(np.all(np.diff(jx2) >= -1e-8 * max(jx2)))
    return SweepReport("bayes-proof", "t", t, results, limits, {
        "a": a, "b": b, "gap_limit": gap_lim, "fii_gap": direct.gap,
        "j_x1": jx1, "j_x2": jx2, "j_n1": direct.diagnostics["j1"], "j_n2": direct.diagnostics["j2"],
        "monotone_j_x1": mono1, "monotone_j_x2": mono2, "powers": list(powers),
    })


def gaussianity_gap_probe(spec: GaussianMixture, epsilon_values, grid=None, tolerance: float = FISHER_TOL,
                          monotone_slack: float = 1e-6) -> SweepReport:
    """Stam gap of ``N + N'`` (i.i.d.) along a mixture family whose means are scaled by epsilon.

    epsilon = 0 collapses the mixture to a Gaussian.  Numerical evidence only.
    """
    from .density import default_grid

    eps = [float(e) for e in epsilon_values]
    if grid is None:
        grid = default_grid(scaled_mixture(spec, max(eps)))
    results, gaps = [], []
    for e in eps:
        f = materialize(scaled_mixture(spec, e), grid)
        r = stam_check(f, f, tolerance)
        r.diagnostics["epsilon"] = e
        results.append(r)
        gaps.append(r.gap)
    limits = []
    if 0.0 in eps:
        limits.append(CheckResult.identity("gap-probe-gaussian-end", gaps[eps.index(0.0)], 0.0, tolerance))
    order = np.argsort(eps)
    drops = np.diff(np.asarray(gaps)[order])
    worst = float(drops.min()) if drops.size else 0.0
    limits.append(CheckResult.inequality("gap-probe-monotone", -worst, 0.0, monotone_slack) if worst < 0
                  else CheckResult.inequality("gap-probe-monotone", 0.0, worst, monotone_slack))
    return SweepReport("gap-probe", "epsilon", eps, results, limits, {"gaps": gaps})


def scaled_mixture(spec: GaussianMixture, eps: float) -> GaussianMixture:
    return GaussianMixture(tuple((w, eps * m, v) for w, m, v in spec.components))


# -- cross-pipeline -------------------------------------------------------------


def mmse_fisher_limit(fN: GridDensity, sigma2_values=DEFAULT_T_VALUES) -> float:
    """J(N) as the small-noise limit of ``(sigma2 - mmse) / sigma2^2``."""
    s2 = _check_t_values(sigma2_values)
    vals = [channel.mmse_fisher(fN, s) for s in s2]
    return richardson_limit(s2, vals, extrapolation_powers(fN))


def fisher_routes(fN: GridDensity, t_values=DEFAULT_T_VALUES) -> dict:
    """J(N) by score quadrature, by the MI slope and by the MMSE limit."""
    fW = standard_gaussian_like(fN)
    return {
        "score": fisher_information(fN),
        "mutual_information": de_bruijn_sweep(fW, fN, 1.0, t_values).extrapolated_limit,
        "mmse": mmse_fisher_limit(fN, t_values),
    }


def cross_pipeline_check(fN: GridDensity, t_values=DEFAULT_T_VALUES, rtol: float = LIMIT_RTOL) -> CheckResult:
    """The three routes agree pairwise within ``rtol`` (relative to the smallest)."""
    routes = fisher_routes(fN, t_values)
    lo, hi = min(routes.values()), max(routes.values())
    return CheckResult.identity("fisher-routes", lo, hi, rtol * abs(lo), **routes, **_grid_info(fN))
