import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fisherinfo.density import GridSpec, convolve, grid_for, materialize, moments
from fisherinfo.errors import TSweepTooShort
from fisherinfo.extrapolation import DEFAULT_T_VALUES, KINKED_POWERS, SMOOTH_POWERS
from fisherinfo.mutual_info import (
    DeBruijnSweep,
    Resolver,
    de_bruijn_sweep,
    fourth_moment_residual,
    mi_additive,
    mi_pair_bound_check,
    moment_matched_density,
    moment_matched_nongaussian,
)
from fisherinfo.score import fisher_information
from fisherinfo.specs import Gaussian

from conftest import SKEWED_GMM, SYMMETRIC_GMM
from oracles import moment_roots_grid_search

STEP = 24.0 / 1024

# frozen from oracles.gmm_entropy: h(W + N) - h(N) with W ~ N(0, 1), N the symmetric mixture
MI_GAUSS_SYMMETRIC = 0.2110882415179458
# frozen from oracles.gmm_fisher
J_SYMMETRIC = 0.5504004907933274
J_SKEWED = 1.0112698604613295
J_SYMMETRIC_PAIR = 0.25386044824237397
# frozen from oracles.moment_roots_grid_search: the two (mu^2, s0^2) roots of the moment equations
ROOT_SMALL = (0.2889677749926289, 1.0527580562518435)
ROOT_LARGE = (1.8538893678645274, 0.6615276580338673)


def density(spec, step=STEP):
    return materialize(spec, grid_for(spec, step))


@pytest.fixture(scope="module")
def std_normal():
    return density(Gaussian(0, 1))


# -- mi_additive ---------------------------------------------------------------------


@pytest.mark.parametrize("g", [0.1, 1.0, 3.0])
def test_gaussian_capacity(std_normal, g):
    assert mi_additive(std_normal, std_normal, g) == pytest.approx(0.5 * math.log1p(g * g), rel=1e-6)


def test_vanishing_signal(std_normal):
    assert 0.0 <= mi_additive(std_normal, std_normal, 1e-6) < 1e-9


def test_mixture_noise_matches_oracle(std_normal):
    assert mi_additive(std_normal, density(SYMMETRIC_GMM), 1.0) == pytest.approx(MI_GAUSS_SYMMETRIC, rel=1e-5)


def test_mi_rejects_zero_gain(std_normal):
    with pytest.raises(ValueError):
        mi_additive(std_normal, std_normal, 0.0)


def test_mi_nonnegative_on_catalog(catalog):
    for wn, fW in catalog.items():
        for nn, fN in catalog.items():
            assert mi_additive(fW, fN, 0.5) >= 0.0, (wn, nn)


@pytest.mark.parametrize("noise", [SYMMETRIC_GMM, SKEWED_GMM])
def test_mi_monotone_in_gain(std_normal, noise):
    fN = density(noise)
    values = [mi_additive(std_normal, fN, g) for g in np.arange(1, 31) / 10]
    assert all(b >= a - 1e-8 for a, b in zip(values, values[1:]))


# -- de_bruijn_sweep -------------------------------------------------------------------


def test_de_bruijn_gaussian(std_normal):
    sweep = de_bruijn_sweep(std_normal, std_normal, 1.0, DEFAULT_T_VALUES)
    assert sweep.extrapolated_limit == pytest.approx(1.0, abs=1e-3)
    assert sweep.powers == SMOOTH_POWERS
    assert all(m >= 0 for m in sweep.mi_values)


def test_de_bruijn_zero_gain(std_normal):
    sweep = de_bruijn_sweep(std_normal, density(SYMMETRIC_GMM), 0.0, DEFAULT_T_VALUES)
    assert all(m < 1e-9 for m in sweep.mi_values)


@pytest.mark.parametrize("noise,j", [(SYMMETRIC_GMM, J_SYMMETRIC), (SKEWED_GMM, J_SKEWED)])
def test_de_bruijn_mixture_noise(std_normal, noise, j):
    fN = density(noise)
    sweep = de_bruijn_sweep(std_normal, fN, 1.0, DEFAULT_T_VALUES)
    assert sweep.extrapolated_limit == pytest.approx(fisher_information(fN), rel=0.01)
    assert sweep.extrapolated_limit == pytest.approx(j, rel=0.01)
    # the slope sequence has nearly converged by the end of the sweep
    assert abs(sweep.slope_estimates[-1] - sweep.extrapolated_limit) < 0.005 * sweep.extrapolated_limit


def test_de_bruijn_remainder_vanishes(std_normal):
    sweep = de_bruijn_sweep(std_normal, density(SKEWED_GMM), 2.0, DEFAULT_T_VALUES)
    r = np.abs(sweep.remainder_ratio)
    assert r[-1] < r[0]


def test_de_bruijn_uses_half_powers_for_kinks(std_normal, catalog):
    sweep = de_bruijn_sweep(catalog["gauss-unit"], catalog["laplace"], 1.0, DEFAULT_T_VALUES)
    assert sweep.powers == KINKED_POWERS
    assert sweep.extrapolated_limit == pytest.approx(2.0, rel=0.01)


def test_de_bruijn_rejects_short_sweep(std_normal):
    with pytest.raises(TSweepTooShort):
        de_bruijn_sweep(std_normal, std_normal, 1.0, [0.1, 0.05, 0.025])


@pytest.mark.parametrize("t", [[0.1, 0.2, 0.05, 0.01], [0.1, 0.01, 1e-4, 1e-6]])
def test_de_bruijn_rejects_bad_sweeps(std_normal, t):
    with pytest.raises(ValueError):
        de_bruijn_sweep(std_normal, std_normal, 1.0, t)


def test_sweep_record_validation():
    with pytest.raises(ValueError):
        DeBruijnSweep([0.1, 0.2], [0.0, 0.0], [0.0, 0.0], 0.0, [0.0, 0.0])
    with pytest.raises(ValueError):
        DeBruijnSweep([0.2, 0.1], [-1.0, 0.0], [0.0, 0.0], 0.0, [0.0, 0.0])


def test_resolver_refines_in_powers_of_two(std_normal):
    r = Resolver(std_normal)
    assert r.factor(1.0) == 1
    assert r.factor(std_normal.step) == 4
    assert r.factor(1e-9) == 16
    assert r(std_normal.step).step == pytest.approx(std_normal.step / 4)
    assert r(std_normal.step) is r(std_normal.step)


# -- moment-matched input ------------------------------------------------------------


def test_moment_matched_moments():
    m = moment_matched_nongaussian()
    for k, target in zip(range(1, 5), (0.0, 1.0, 0.0, 3.0)):
        assert m.moment(k) == pytest.approx(target, abs=1e-6)
    f = moment_matched_density(GridSpec(-16.0, 16.0, 2049))
    for k, target in zip(range(1, 5), (0.0, 1.0, 0.0, 3.0)):
        assert moments(f, k) == pytest.approx(target, abs=1e-6)


def test_moment_matched_is_not_gaussian():
    assert moment_matched_nongaussian().l1_from_gaussian > 0.01


def test_moment_roots_match_grid_search():
    m = moment_matched_nongaussian()
    assert (m.mu2, m.s0_2) == pytest.approx(ROOT_LARGE, abs=1e-6)
    assert fourth_moment_residual(ROOT_SMALL[0]) == pytest.approx(0.0, abs=1e-9)
    # the smaller root is too close to N(0, 1) to serve as a non-Gaussian input
    with pytest.raises(Exception):
        moment_matched_nongaussian(l1_threshold=1.0)


def test_moment_roots_oracle_is_reproducible():
    roots = sorted(moment_roots_grid_search())
    assert roots[0] == pytest.approx(ROOT_SMALL, abs=1e-6)
    assert roots[1] == pytest.approx(ROOT_LARGE, abs=1e-6)


def test_de_bruijn_moment_matched_input(std_normal):
    fW = materialize(moment_matched_nongaussian().to_spec(), grid_for(Gaussian(0, 1), STEP))
    sweep = de_bruijn_sweep(fW, std_normal, 1.0, DEFAULT_T_VALUES)
    assert sweep.extrapolated_limit == pytest.approx(1.0, rel=0.01)


# -- mi_pair_bound_check ------------------------------------------------------------


def test_pair_bound_gaussian_closed_forms(std_normal):
    r = mi_pair_bound_check(std_normal, std_normal, std_normal, 1.0, 1.0, 0.1)
    assert r.lhs == pytest.approx(0.5 * math.log1p(0.4 / 2), abs=1e-6)
    assert r.rhs == pytest.approx(math.log1p(0.1), abs=1e-6)
    assert r.passed and r.gap > 0


def test_pair_bound_with_one_silent_branch(std_normal):
    f1, f2 = density(SYMMETRIC_GMM), density(SKEWED_GMM)
    r = mi_pair_bound_check(std_normal, f1, f2, 1.5, 0.0, 0.1)
    assert r.passed
    assert r.diagnostics["mi_2"] == 0.0


def test_pair_bound_gap_tends_to_fisher_gap(std_normal):
    f1 = density(SYMMETRIC_GMM)
    fii_gap = 2 * J_SYMMETRIC - 4 * J_SYMMETRIC_PAIR
    resolvers = (Resolver(f1), Resolver(f1), Resolver(convolve(f1, f1)))
    ts = [0.1 * 2.0**-k for k in range(7)]
    scaled = [mi_pair_bound_check(std_normal, f1, f1, 1, 1, t, resolvers=resolvers).gap * 2 / t for t in ts]
    assert all(s > 0 for s in scaled)
    assert scaled[-1] == pytest.approx(fii_gap, rel=0.05)


@given(st.floats(0.0, 2.0), st.floats(0.0, 2.0), st.sampled_from([0.1, 0.02, 0.005]))
def test_pair_bound_property(a, b, t):
    f = density(Gaussian(0, 1))
    g = density(SKEWED_GMM)
    assert mi_pair_bound_check(f, f, g, a, b, t).passed


def test_pair_bound_rejects_negative_gain(std_normal):
    with pytest.raises(ValueError):
        mi_pair_bound_check(std_normal, std_normal, std_normal, -1.0, 1.0, 0.1)
