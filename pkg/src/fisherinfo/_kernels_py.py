"""Pure-numpy versions of the hot loops; used when the compiled module is absent.

Signatures match ``_kernels.pyx`` exactly.
"""

import math

import numpy as np

_CUTOFF = 40.0  # in kernel standard deviations
_ROWS = 256


def gauss_moments(n0, h, wf, x, sigma2):
    """Centered Gaussian-kernel moments over a uniform node set.

    For every target ``x[i]`` returns ``T_k[i] = sum_j wf[j] d^k phi(d)``
    with ``d = n_j - x[i]``, ``k = 0, 1, 2``, where ``n_j = n0 + j h`` and
    ``phi`` is the N(0, sigma2) density.
    """
    wf = np.asarray(wf, dtype=float)
    x = np.asarray(x, dtype=float)
    nodes = n0 + h * np.arange(wf.size)
    norm = 1.0 / math.sqrt(2.0 * math.pi * sigma2)
    out = np.zeros((3, x.size))
    for start in range(0, x.size, _ROWS):
        xs = x[start : start + _ROWS]
        d = nodes[None, :] - xs[:, None]
        k = np.exp(-0.5 * d * d / sigma2) * (norm * wf)[None, :]
        out[0, start : start + _ROWS] = k.sum(axis=1)
        kd = k * d
        out[1, start : start + _ROWS] = kd.sum(axis=1)
        out[2, start : start + _ROWS] = (kd * d).sum(axis=1)
    return out


def orthogonality_sum(n0, h, wf, x, wx, mean, sigma2):
    """``sum_i wx_i (m_i - x_i) sum_j wf_j phi(x_i - n_j) (n_j - m_i)``."""
    wf = np.asarray(wf, dtype=float)
    nodes = n0 + h * np.arange(wf.size)
    norm = 1.0 / math.sqrt(2.0 * math.pi * sigma2)
    total = 0.0
    for start in range(0, len(x), _ROWS):
        xs = np.asarray(x[start : start + _ROWS], dtype=float)
        ms = np.asarray(mean[start : start + _ROWS], dtype=float)
        ws = np.asarray(wx[start : start + _ROWS], dtype=float)
        d = nodes[None, :] - xs[:, None]
        k = np.exp(-0.5 * d * d / sigma2) * (norm * wf)[None, :]
        inner = (k * (nodes[None, :] - ms[:, None])).sum(axis=1)
        total += float(np.dot(ws * (ms - xs), inner))
    return total


def binned_regression_stats(bins, x1, x2, y, n_bins):
    """Per-bin sufficient statistics for ``y ~ 1 + x1 + x2``.

    Columns: n, Sx1, Sx2, Sy, Sx1x1, Sx1x2, Sx2x2, Sx1y, Sx2y, Syy.
    """
    cols = (None, x1, x2, y, x1 * x1, x1 * x2, x2 * x2, x1 * y, x2 * y, y * y)
    out = np.empty((n_bins, 10))
    for c, w in enumerate(cols):
        out[:, c] = np.bincount(bins, weights=w, minlength=n_bins)
    return out


def binned_residual_sums(bins, x1, x2, y, coef, keep):
    """Sums of r^2 and r^4 and the count over samples whose bin is kept."""
    sel = keep[bins]
    b = bins[sel]
    r = y[sel] - (coef[b, 0] + coef[b, 1] * x1[sel] + coef[b, 2] * x2[sel])
    r2 = r * r
    return float(r2.sum()), float((r2 * r2).sum()), int(sel.sum())
