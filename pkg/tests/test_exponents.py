import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conecrit import exponents as ex
from conecrit.errors import DomainError, RegimeError
from conecrit.exponents import Zone


def orthant(N, k):
    return ex.alpha_roots(k * (k + N - 2), N)


@pytest.mark.parametrize("N,k", [(N, k) for N in range(2, 7) for k in range(1, N)])
def test_orthant_roots_exact(N, k):
    spec = orthant(N, k)
    assert spec.alpha_plus == k
    assert spec.alpha_minus == 2 - N - k


def test_known_half_space_values():
    spec = orthant(3, 1)
    assert ex.p_star_sub(spec, 0.0) == -1.0
    assert ex.p_star_super(spec, 0.0) == 2.0
    assert ex.linear_threshold(spec) == 2.25
    assert ex.kelvin_sigma(-1.0, 0.0, 3) == 6.0
    assert ex.p_star_sub_kelvin(spec, 6.0) == -1.0


def test_zero_eigenvalue():
    spec = ex.alpha_roots(0.0, 3)
    assert ex.p_star_sub(spec, 0.0) == -math.inf
    assert ex.p_star_super(spec, 0.0) == 3.0
    flat = ex.alpha_roots(0.0, 2)
    with pytest.raises(RegimeError):
        ex.p_star_super(flat, 0.0)
    with pytest.raises(RegimeError):
        ex.p_star_sub_kelvin(flat, 1.0)
    assert ex.classify(flat, 0.0, 3.0, 1.0).zone is Zone.UNSPECIFIED


def test_small_eigenvalue_no_cancellation():
    spec = ex.alpha_roots(1e-20, 5)
    assert spec.alpha_plus == pytest.approx(1e-20 / 3, rel=1e-14)


def test_clamping_at_one():
    spec = orthant(3, 1)
    assert ex.p_star_sub(spec, 2.5) == 1.0
    assert ex.p_star_super(spec, 2.5) == 1.0


@pytest.mark.parametrize("p,zone", [(-3, Zone.EXISTS), (-1, Zone.CRITICAL), (0.5, Zone.NOT_EXISTS),
                                    (1, Zone.UNSPECIFIED), (1.5, Zone.NOT_EXISTS),
                                    (2, Zone.CRITICAL), (3, Zone.EXISTS)])
def test_classify_half_space_s0(p, zone):
    assert ex.classify(orthant(3, 1), 0.0, p, 1.0).zone is zone


def test_classify_large_and_hardy_weights():
    spec = orthant(3, 1)
    for p in (-5, 0, 0.9, 1, 4):
        assert ex.classify(spec, 3.0, p, 1.0).zone is Zone.EXISTS
    lin = ex.classify(spec, 2.0, 1.0, 1.0)
    assert lin.zone is Zone.LINEAR_CASE and lin.c_max == 2.25
    assert ex.classify(spec, 2.0, 0.5, 1.0).zone is Zone.UNSPECIFIED
    with pytest.raises(DomainError):
        ex.classify(spec, 0.0, 0.0, 0.0)


def test_report_fields():
    rep = ex.report(orthant(3, 1), 0.0, -1.0, 1.0)
    assert (rep.p_star_sub, rep.p_star_super, rep.sigma_kelvin, rep.p_star_sub_kelvin) == (-1, 2, 6, -1)
    assert rep.classification.zone is Zone.CRITICAL
    bare = ex.report(orthant(3, 1), 0.0)
    assert bare.sigma_kelvin is None and bare.classification is None


def test_supersolution_alpha():
    assert ex.supersolution_alpha(-2.0, 0.0) == pytest.approx(2 / 3)
    with pytest.raises(DomainError):
        ex.supersolution_alpha(1.0, 0.0)


lams = st.floats(min_value=1e-3, max_value=200.0, allow_nan=False)
dims = st.integers(min_value=3, max_value=9)
weights = st.floats(min_value=-3.0, max_value=1.999, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(lams, dims)
def test_roots_solve_quadratic(lam, N):
    spec = ex.alpha_roots(lam, N)
    for a in (spec.alpha_plus, spec.alpha_minus):
        assert a * (a + N - 2) == pytest.approx(lam, rel=1e-12, abs=1e-12)
    assert spec.alpha_plus > 0 > spec.alpha_minus


@settings(max_examples=200, deadline=None)
@given(lams, dims, weights)
def test_kelvin_fixed_point(lam, N, s):
    spec = ex.alpha_roots(lam, N)
    p = ex.p_star_sub(spec, s)
    if p >= 1.0:
        return
    sigma = ex.kelvin_sigma(p, s, N)
    assert ex.p_star_sub_kelvin(spec, sigma) == pytest.approx(p, abs=1e-10 * max(1, abs(p)))


@settings(max_examples=200, deadline=None)
@given(lams, dims, weights)
def test_exponent_monotone_in_eigenvalue(lam, N, s):
    small, big = ex.alpha_roots(lam, N), ex.alpha_roots(lam * 1.5, N)
    assert ex.p_star_sub(big, s) >= ex.p_star_sub(small, s)
    assert ex.p_star_super(big, s) <= ex.p_star_super(small, s)
