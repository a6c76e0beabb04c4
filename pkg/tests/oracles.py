"""Reference values computed without the package's own solvers.

Each oracle uses a different method from the code under test: special
functions for cap eigenvalues, scipy's solve_ivp for ODEs, closed forms where
they exist.
"""

import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.special import lpmv


def cap_lambda1_n3(theta0):
    """First Dirichlet eigenvalue of a cap on S^2: nu(nu+1) with P_nu(cos theta0) = 0."""
    x = math.cos(theta0)
    f = lambda nu: lpmv(0, nu, x)
    # P_nu(x) > 0 for small nu; bracket the first sign change
    lo, hi = 1e-6, 0.5
    while f(hi) > 0:
        lo, hi = hi, hi * 1.5
    nu = brentq(f, lo, hi, xtol=1e-15, rtol=1e-15)
    return nu * (nu + 1.0)


def alpha_plus(lam, N):
    return (-(N - 2) + math.sqrt((N - 2) ** 2 + 4 * lam)) / 2


def linear_p0_solution(N, lam, s, c, K):
    """Closed-form ``v`` of ``-v'' - (N-1)v'/r + lam v/r^2 = c r^{-s}``, ``v(1)=0, v'(1)=K``.

    Requires the particular power ``2 - s`` to avoid the homogeneous exponents.
    """
    ap = alpha_plus(lam, N)
    am = -(N - 2) - ap
    q = 2.0 - s
    C = -c / (q * (q + N - 2) - lam)
    # v = A r^ap + B r^am + C r^q
    A, B = np.linalg.solve([[1.0, 1.0], [ap, am]], [-C, K - C * q])
    return lambda r: A * r**ap + B * r**am + C * r**q


def linear_p0_exit(N, lam, s, c, K):
    v = linear_p0_solution(N, lam, s, c, K)
    hi = 2.0
    while v(hi) > 0:
        hi *= 2.0
    return brentq(v, hi / 2, hi, xtol=1e-14, rtol=1e-15)


def radial_exit_ivp(N, lam, s, p, c, K, r_max=1e4):
    """Exit radius of the radial IVP in the original ``r`` variable with DOP853."""
    delta = 1.0 if p < 0 else 0.0

    def f(r, y):
        v, dv = y
        vp = max(v, 1e-300) ** p if p != 0 else 1.0
        return [dv, -(N - 1) / r * dv + lam / r**2 * v - c * r ** (-s) * vp]

    def hit(r, y):
        return y[0] - delta

    hit.terminal = True
    hit.direction = -1
    sol = solve_ivp(f, (1.0, r_max), [delta + 1e-300, K], method="DOP853", rtol=1e-12,
                    atol=1e-12, events=hit)
    if sol.t_events[0].size:
        return float(sol.t_events[0][0])
    return math.inf


def zonal_psi_n3(theta0, mu, p, boundary):
    """Zonal solution of ``psi'' + cot(t) psi' + mu psi + psi^p = 0`` on a cap of S^2.

    Shoots from the pole on the central value ``a`` with solve_ivp and matches
    ``psi(theta0) = boundary``.  Returns ``(a, evaluator)``.
    """
    eps = 1e-6

    def rhs(t, y):
        psi, d = y
        return [d, -d / math.tan(t) - mu * psi - max(psi, 1e-12) ** p]

    def run(a, dense=False):
        forcing = mu * a + a ** p
        y0 = [a - forcing * eps**2 / 4, -forcing * eps / 2]
        return solve_ivp(rhs, (eps, theta0), y0, method="DOP853", rtol=1e-12, atol=1e-13,
                         dense_output=dense)

    g = lambda a: run(a).y[0, -1] - boundary
    lo, hi = max(boundary, 1e-3), 1.0
    while g(hi) < 0:
        hi *= 2
    while g(lo) > 0:
        lo /= 2
    a = brentq(g, lo, hi, xtol=1e-14, rtol=1e-14)
    sol = run(a, dense=True)

    def evaluate(theta):
        theta = np.asarray(theta, dtype=float)
        out = np.where(theta < eps, a, 0.0)
        mask = theta >= eps
        out[mask] = sol.sol(theta[mask])[0]
        return out

    return a, evaluate
