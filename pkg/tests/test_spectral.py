import math

import numpy as np
import pytest

from conecrit.errors import DomainError, UnsupportedShapeError
from conecrit.spectral import (Arc, Cap, DomainSpec, ExplicitLambda, Orthant, angular_operator,
                               discrete_lambda1, grid_domain, lambda1, principal_eigenfunction,
                               rayleigh_quotient)

from .oracles import cap_lambda1_n3


@pytest.mark.parametrize("N,k", [(N, k) for N in range(2, 7) for k in range(1, N + 1)])
def test_orthant_closed_form(N, k):
    assert lambda1(DomainSpec(N, Orthant(k))) == k * (k + N - 2)


def test_arc_closed_form():
    assert lambda1(DomainSpec(2, Arc(math.pi))) == 1.0
    assert lambda1(DomainSpec(2, Arc(math.pi / 2))) == pytest.approx(4.0, rel=1e-15)


@pytest.mark.parametrize("N", [3, 4, 5])
def test_hemisphere_matches_half_space(N):
    lam = lambda1(DomainSpec(N, Cap(math.pi / 2)), 8192)
    assert abs(lam - (N - 1)) < 1e-5


@pytest.mark.parametrize("theta0", [0.3, 1.0, 2.0, 2.8])
def test_cap_against_legendre_root(theta0):
    lam = lambda1(DomainSpec(3, Cap(theta0)), 4096)
    assert lam == pytest.approx(cap_lambda1_n3(theta0), rel=2e-7)


def test_cap_second_order_convergence():
    dom = DomainSpec(3, Cap(1.0))
    exact = cap_lambda1_n3(1.0)
    errs = [abs(lambda1(dom, n) - exact) for n in (256, 512, 1024)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert all(1.8 < o < 2.2 for o in orders), orders


def test_cap_monotone_in_angle():
    lams = [lambda1(DomainSpec(3, Cap(t)), 1024) for t in (0.5, 1.0, 1.5, 2.5)]
    assert all(a > b for a, b in zip(lams, lams[1:]))


def test_discrete_arc_eigenvalue_is_exact_for_stencil():
    n = 64
    dom = DomainSpec(2, Arc(math.pi))
    op = angular_operator(dom, n)
    phi = principal_eigenfunction(dom, n).values[:-1]
    lam_h = discrete_lambda1(dom, n)
    np.testing.assert_allclose(op.apply(phi), lam_h * phi, atol=1e-11)


def test_eigenfunction_normalisation_and_sign():
    for dom, end in ((DomainSpec(3, Cap(1.2)), 1.2), (DomainSpec(2, Arc(2.0)), 2.0)):
        phi = principal_eigenfunction(dom, 512)
        assert phi.values.max() == pytest.approx(1.0, abs=1e-15)
        assert phi.values[-1] == 0.0
        assert np.all(phi.values[:-1] > 0)
        assert phi.nodes[-1] == end


def test_rayleigh_quotient_of_eigenfunction():
    dom = DomainSpec(4, Cap(1.1))
    phi = principal_eigenfunction(dom, 512)
    assert rayleigh_quotient(dom, phi) == pytest.approx(discrete_lambda1(dom, 512), rel=1e-12)
    # any other Dirichlet function has a larger quotient
    other = phi.with_values(np.cos(phi.nodes * math.pi / (2 * phi.theta0)) ** 3)
    assert rayleigh_quotient(dom, other) > discrete_lambda1(dom, 512)


def test_grid_domain_maps_half_space():
    assert grid_domain(DomainSpec(3, Orthant(1))).shape == Cap(math.pi / 2)
    assert grid_domain(DomainSpec(2, Orthant(1))).shape == Arc(math.pi)
    with pytest.raises(UnsupportedShapeError):
        grid_domain(DomainSpec(3, Orthant(2)))
    with pytest.raises(UnsupportedShapeError):
        principal_eigenfunction(DomainSpec(3, ExplicitLambda(2.0)))


@pytest.mark.parametrize("N,text", [(2, "cap:1.0"), (3, "arc:1.0"), (3, "orthant:4"),
                                    (3, "cap:4"), (3, "explicit:-1"), (3, "bogus:1"),
                                    (3, "orthant"), (3, "cap:abc"), (1, "orthant:1")])
def test_domain_validation(N, text):
    with pytest.raises(DomainError):
        DomainSpec.parse(N, text)


def test_parse_round_trip():
    for text in ("orthant:2", "cap:1.25", "explicit:3.5"):
        assert DomainSpec.parse(3, text).describe() == text
    assert DomainSpec.parse(2, "arc:2.5").describe() == "arc:2.5"


def test_too_coarse_grid_rejected():
    with pytest.raises(DomainError):
        lambda1(DomainSpec(3, Cap(1.0)), 8)
