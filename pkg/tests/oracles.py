"""Independent reference computations used to derive frozen test values.

Everything here works from closed-form densities with adaptive quadrature
(scipy.integrate.quad); nothing touches the package's grid machinery.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

SQRT2PI = math.sqrt(2.0 * math.pi)


def gmm_pdf(x, comps):
    return sum(w * math.exp(-0.5 * (x - m) ** 2 / v) / math.sqrt(2 * math.pi * v) for w, m, v in comps)


def gmm_dpdf(x, comps):
    return sum(-w * (x - m) / v * math.exp(-0.5 * (x - m) ** 2 / v) / math.sqrt(2 * math.pi * v) for w, m, v in comps)


def gmm_convolve(c1, c2):
    return [(w1 * w2, m1 + m2, v1 + v2) for w1, m1, v1 in c1 for w2, m2, v2 in c2]


def _quad(fn, lo, hi, points=None):
    val, _ = integrate.quad(fn, lo, hi, points=points, limit=400, epsabs=1e-14, epsrel=1e-13)
    return val


def _span(comps, k=40.0):
    return (min(m - k * math.sqrt(v) for _, m, v in comps), max(m + k * math.sqrt(v) for _, m, v in comps))


def gmm_fisher(comps):
    lo, hi = _span(comps)

    def integrand(x):
        f = gmm_pdf(x, comps)
        return gmm_dpdf(x, comps) ** 2 / f if f > 1e-300 else 0.0

    pts = sorted({m for _, m, _ in comps})
    return _quad(integrand, lo, hi, points=pts)


def gmm_entropy(comps):
    lo, hi = _span(comps)

    def integrand(x):
        f = gmm_pdf(x, comps)
        return -f * math.log(f) if f > 1e-300 else 0.0

    return _quad(integrand, lo, hi, points=sorted({m for _, m, _ in comps}))


def gmm_mmse(comps, sigma2):
    """VAR[N | N + W] for a mixture prior and W ~ N(0, sigma2)."""
    obs = [(w, m, v + sigma2) for w, m, v in comps]
    lo, hi = _span(obs)

    def post_mean_sq_times_fx(x):
        num = den = 0.0
        for w, m, v in comps:
            s = v + sigma2
            lik = w * math.exp(-0.5 * (x - m) ** 2 / s) / math.sqrt(2 * math.pi * s)
            num += lik * (m + v / s * (x - m))
            den += lik
        return num * num / den if den > 1e-300 else 0.0

    second = sum(w * (v + m * m) for w, m, v in comps)
    return second - _quad(post_mean_sq_times_fx, lo, hi)


def laplace_gauss_pdf(x, b, s2):
    """Density of Laplace(0, b) + N(0, s2), evaluated in log space."""
    s = math.sqrt(s2)
    a = s / b
    base = 0.5 * a * a - math.log(2.0 * b)
    t1 = base - x / b + special.log_ndtr(x / s - a)
    t2 = base + x / b + special.log_ndtr(-x / s - a)
    return math.exp(t1) + math.exp(t2)


def laplace_gauss_fisher(b, s2, h=1e-5):
    span = 40.0 * (b + math.sqrt(s2))

    def integrand(x):
        f = laplace_gauss_pdf(x, b, s2)
        if f < 1e-300:
            return 0.0
        d = (laplace_gauss_pdf(x + h, b, s2) - laplace_gauss_pdf(x - h, b, s2)) / (2 * h)
        return d * d / f

    return 2.0 * _quad(integrand, 0.0, span)


def moment_roots_grid_search(p=0.1, s2=0.5, levels=9):
    """Roots (mu^2, s0^2) of the two moment equations by nested 2-D grid search."""

    def resid(mu2, s0):
        var = 2 * p * (mu2 + s2) + (1 - 2 * p) * s0 - 1.0
        kurt = 2 * p * (mu2 * mu2 + 6 * mu2 * s2 + 3 * s2 * s2) + 3 * (1 - 2 * p) * s0 * s0 - 3.0
        return np.hypot(var, kurt)

    roots = []
    # coarse scan for basins, then zoom on each
    m = np.linspace(0.0, 4.5, 901)
    s = np.linspace(0.01, 1.25, 621)
    M, S = np.meshgrid(m, s, indexing="ij")
    R = resid(M, S)
    for lo, hi in ((0.0, 1.0), (1.0, 4.5)):
        sel = (m >= lo) & (m < hi)
        i, j = np.unravel_index(np.argmin(np.where(sel[:, None], R, np.inf)), R.shape)
        cm, cs, half_m, half_s = m[i], s[j], 0.01, 0.01
        for _ in range(levels):
            mm = np.linspace(cm - half_m, cm + half_m, 201)
            ss = np.linspace(cs - half_s, cs + half_s, 201)
            MM, SS = np.meshgrid(mm, ss, indexing="ij")
            RR = resid(MM, SS)
            a, b2 = np.unravel_index(np.argmin(RR), RR.shape)
            cm, cs = mm[a], ss[b2]
            half_m /= 20.0
            half_s /= 20.0
        roots.append((float(cm), float(cs)))
    return roots


def mixture2d_fisher_matrix(comps):
    """``E[grad ln f grad ln f^T]`` for a bivariate Gaussian mixture; ``comps`` holds (w, mean, cov)."""
    parts = [(w, np.asarray(m, float), np.linalg.inv(np.asarray(c, float)), np.linalg.det(c)) for w, m, c in comps]

    def grad_and_pdf(x1, x2):
        x = np.array([x1, x2])
        f, g = 0.0, np.zeros(2)
        for w, m, p, det in parts:
            d = x - m
            v = w * math.exp(-0.5 * d @ p @ d) / (2 * math.pi * math.sqrt(det))
            f += v
            g -= v * (p @ d)
        return f, g

    def entry(i, j):
        def fn(x2, x1):
            f, g = grad_and_pdf(x1, x2)
            return g[i] * g[j] / f if f > 1e-300 else 0.0

        return integrate.dblquad(fn, -12, 12, -12, 12, epsabs=1e-12, epsrel=1e-10)[0]

    return np.array([[entry(0, 0), entry(0, 1)], [entry(0, 1), entry(1, 1)]])


def gmm_posterior_mean_var(x, comps, sigma2):
    """Closed-form ``E[N | N + W = x]`` and ``VAR[N | N + W = x]`` for a Gaussian-mixture prior."""
    post_w, post_m, post_v = [], [], []
    for w, m, v in comps:
        post_w.append(w * math.exp(-0.5 * (x - m) ** 2 / (v + sigma2)) / math.sqrt(v + sigma2))
        post_m.append(m + v / (v + sigma2) * (x - m))
        post_v.append(v * sigma2 / (v + sigma2))
    z = sum(post_w)
    mean = sum(pw * pm for pw, pm in zip(post_w, post_m)) / z
    second = sum(pw * (pv + pm * pm) for pw, pm, pv in zip(post_w, post_m, post_v)) / z
    return mean, second - mean * mean
