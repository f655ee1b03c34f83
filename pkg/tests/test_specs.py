import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from fisherinfo.specs import Gaussian, Gaussian2D, GaussianMixture, Laplace, Mixture2D, is_2d, spec_from_dict

from conftest import SKEWED_GMM

SPECS = [
    Gaussian(0.5, 2.0),
    SKEWED_GMM,
    Laplace(1.0, 0.5),
    Gaussian2D((0.0, 1.0), ((1.0, 0.3), (0.3, 2.0))),
    Mixture2D(((0.4, Gaussian2D()), (0.6, Gaussian2D((1, 1), ((0.5, 0), (0, 0.5)))))),
]


@pytest.mark.parametrize("spec", SPECS)
def test_dict_round_trip(spec):
    assert spec_from_dict(spec.to_dict()) == spec


@pytest.mark.parametrize("spec", SPECS[:3])
def test_pdf_normalized(spec):
    lo, hi = spec.support()
    assert integrate.quad(spec.pdf, lo, hi, points=[spec.mean], limit=200)[0] == pytest.approx(1.0, abs=1e-9)


def test_mixture_moments():
    assert SKEWED_GMM.mean == pytest.approx(0.3 * -2 + 0.7 * 1)
    second = 0.3 * (0.5 + 4) + 0.7 * (0.8 + 1)
    assert SKEWED_GMM.variance == pytest.approx(second - SKEWED_GMM.mean**2)


def test_laplace_support_reaches_floor():
    spec = Laplace(0.0, 2.0)
    lo, hi = spec.support(1e-12)
    assert spec.pdf(hi) < 1e-12 and spec.pdf(lo) < 1e-12
    assert spec.kinks == (0.0,)


@pytest.mark.parametrize(
    "make",
    [
        lambda: Gaussian(0, 0),
        lambda: Gaussian(0, -1),
        lambda: Laplace(0, 0),
        lambda: GaussianMixture(()),
        lambda: GaussianMixture(((0.5, 0, 1), (0.4, 1, 1))),
        lambda: GaussianMixture(((1.0, 0, -1),)),
        lambda: Gaussian2D((0, 0), ((1, 2), (2, 1))),
        lambda: Gaussian2D((0, 0), ((1, 0.1), (0.2, 1))),
        lambda: Mixture2D(((0.5, Gaussian2D()),)),
        lambda: spec_from_dict({"kind": "cauchy"}),
    ],
)
def test_invalid_specs(make):
    with pytest.raises(ValueError):
        make()


def test_is_2d():
    assert is_2d(SPECS[3]) and is_2d(SPECS[4])
    assert not any(is_2d(s) for s in SPECS[:3])


@given(st.floats(-3, 3), st.floats(0.2, 2), st.floats(-0.9, 0.9))
def test_gaussian2d_pdf_matches_scipy(m, v, rho):
    from scipy.stats import multivariate_normal

    cov = ((v, rho * v), (rho * v, v))
    spec = Gaussian2D((m, -m), cov)
    pts = np.array([[0.0, 0.0], [m, -m], [1.0, -0.5]])
    ref = multivariate_normal((m, -m), cov).pdf(pts)
    assert np.allclose(spec.pdf(pts[:, 0], pts[:, 1]), ref, rtol=1e-12)


def test_gaussian_pdf_peak():
    assert Gaussian(0, 4).pdf(0.0) == pytest.approx(1 / math.sqrt(8 * math.pi))
