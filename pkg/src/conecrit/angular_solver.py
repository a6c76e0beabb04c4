"""Separable positive solutions ``u = c^{1/(1-p)} r^alpha psi(theta)`` and polar residuals.

The angular profile solves

    -Delta_omega psi - mu psi = psi^p,   mu = alpha (alpha + N - 2),

which is coercive (and order preserving) whenever ``0 < mu < lambda1``.  For
``p in [0, 1)`` the profile vanishes on the boundary and is obtained by a
descending monotone iteration from a multiple of the torsion-like function
``phibar`` solving ``-Delta phibar - mu phibar = 1``.  For ``p < 0`` the
nonlinearity is singular at zero, so we solve for ``phi = psi - 1`` with
homogeneous boundary data instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import CoercivityError, DomainError, IterationLimitError
from .spectral import (AngularGrid, DomainSpec, angular_operator, discrete_lambda1,
                       grid_domain, lambda1, principal_eigenfunction)

DEFAULT_TOL = 1e-8
MAX_ITER = 100_000


@dataclass(frozen=True, eq=False)
class AngularSolution:
    grid: AngularGrid  # psi
    alpha: float
    p: float
    mu: float
    iterations: int
    residual_max: float
    bracket: Tuple[AngularGrid, AngularGrid]
    history: Optional[list] = None  # interior iterates of the monotone scheme


@dataclass(frozen=True, eq=False)
class ConeField:
    """A field ``u(r, theta) = r^a W(log r, theta)`` on a tensor grid.

    Storing the scaled profile ``W`` keeps fields with astronomically large
    radii representable.  ``dW_dlogr`` is optional exact radial derivative data;
    when present the polar residual uses a Hermite second derivative built from
    values and slopes instead of a plain second difference of ``W``.  ``delta`` is the shift in the nonlinearity
    ``c r^{-s} (u + delta)^p``.
    """

    log_r: np.ndarray
    theta: np.ndarray
    W: np.ndarray  # shape (len(log_r), len(theta))
    a: float
    N: int
    s: float
    p: float
    c: float
    kind: str  # "cap" or "arc"
    delta: float = 0.0
    dW_dlogr: Optional[np.ndarray] = None

    @property
    def r(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_r)

    @property
    def values(self) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(self.a * self.log_r)[:, None] * self.W

    def params(self):
        return (self.N, self.s, self.p, self.c, self.delta, self.kind)


def _coercive_mu(domain: DomainSpec, mu: float, resolution: int):
    gd = grid_domain(domain)
    lam = min(lambda1(gd, resolution), discrete_lambda1(gd, resolution))
    if not mu < lam:
        raise CoercivityError(f"mu = {mu!r} >= lambda1 = {lam!r}: operator not coercive")
    return gd, lam


def solve_linear_angular(domain: DomainSpec, mu: float, rhs: AngularGrid) -> AngularGrid:
    """Solve ``-Delta_omega phi - mu phi = rhs`` with ``phi = 0`` on the boundary."""
    n = len(rhs.nodes)
    gd, _ = _coercive_mu(domain, mu, n)
    op = angular_operator(gd, n)
    phi = op.solve_shifted(mu, np.asarray(rhs.values[:-1], dtype=float))
    return op.grid(np.append(phi, 0.0))


def _power(x: np.ndarray, p: float) -> np.ndarray:
    if p == 0.0:
        return np.ones_like(x)
    return np.maximum(x, 0.0) ** p


def bracket_constants(domain: DomainSpec, mu: float, p: float, resolution: int = 1024):
    """``(epsilon, tau)`` making ``epsilon phi1`` a sub- and ``tau phibar`` a supersolution.

    ``epsilon^{1-p} (lambda1 - mu) <= 1`` and ``tau^{1-p} >= max(phibar)^p``
    (with ``tau >= 1`` so the pair is ordered).  Both inequalities are checked
    node by node on the discrete operator before returning.
    """
    if not 0.0 <= p < 1.0:
        raise DomainError(f"bracket constants need p in [0, 1), got {p}")
    gd, _ = _coercive_mu(domain, mu, resolution)
    op = angular_operator(gd, resolution)
    lam_h = discrete_lambda1(gd, resolution)
    phi1 = principal_eigenfunction(gd, resolution).values[:-1]
    phibar = op.solve_shifted(mu, np.ones(op.size - 1))
    eps = min(1.0, (1.0 / (lam_h - mu)) ** (1.0 / (1.0 - p)))
    tau = max(1.0, float(phibar.max()) ** (p / (1.0 - p)))

    sub = eps * phi1
    lhs_sub = op.apply(sub) - mu * sub
    slack = 1e-9 * max(1.0, float(np.max(np.abs(lhs_sub))))
    if np.any(lhs_sub > _power(sub, p) + slack):
        raise AssertionError("epsilon * phi1 failed the discrete subsolution check")
    sup = tau * phibar
    lhs_sup = op.apply(sup) - mu * sup
    slack = 1e-9 * max(1.0, float(np.max(np.abs(lhs_sup))))
    if np.any(lhs_sup < _power(sup, p) - slack):
        raise AssertionError("tau * phibar failed the discrete supersolution check")
    return eps, tau


def psi_residual(domain: DomainSpec, psi: AngularGrid, mu: float, p: float) -> float:
    """Max-norm residual of ``-Delta psi - mu psi - psi^p`` at the interior nodes.

    For ``p < 0`` the boundary value of ``psi`` is 1 and the residual is taken
    on ``phi = psi - 1``, which has the same Laplacian.
    """
    op = angular_operator(grid_domain(domain), len(psi.nodes))
    shift = psi.values[-1]
    f = psi.values[:-1] - shift
    res = op.apply(f) - mu * psi.values[:-1] - _power(psi.values[:-1], p)
    return float(np.max(np.abs(res)))


def solve_psi(domain: DomainSpec, alpha: float, p: float, tol: float = DEFAULT_TOL,
              resolution: int = 1024, max_iter: int = MAX_ITER,
              keep_history: bool = False) -> AngularSolution:
    """Positive solution of ``-Delta psi - alpha(alpha+N-2) psi = psi^p`` on the cross-section."""
    if not p < 1:
        raise DomainError(f"need p < 1, got {p}")
    N = domain.N
    mu = alpha * (alpha + N - 2)
    if not mu > 0:
        raise CoercivityError(f"mu = alpha(alpha+N-2) = {mu!r} must be positive")
    gd, _ = _coercive_mu(domain, mu, resolution)
    op = angular_operator(gd, resolution)
    m = op.size - 1
    history = [] if keep_history else None

    if p >= 0:
        eps, tau = bracket_constants(gd, mu, p, resolution)
        phi1 = principal_eigenfunction(gd, resolution).values[:-1]
        phibar = op.solve_shifted(mu, np.ones(m))
        lower, upper = eps * phi1, tau * phibar
        if p == 0.0:
            psi, it = phibar, 1
        else:
            psi, it = _monotone(op, mu, upper, lambda f: _power(f, p), 0.0, tol, max_iter, history)
        values = np.append(psi, 0.0)
        bracket = (op.grid(np.append(lower, 0.0)), op.grid(np.append(upper, 0.0)))
    else:
        # phi = psi - 1 >= 0; shift by |p| >= sup |d/dphi (phi+1)^p| keeps the map increasing
        phibar = op.solve_shifted(mu, np.full(m, 1.0 + mu))
        shift = -p
        phi, it = _monotone(op, mu, phibar, lambda f: _power(f + 1.0, p) + mu, shift, tol,
                            max_iter, history)
        values = np.append(phi, 0.0) + 1.0
        bracket = (op.grid(np.ones(m + 1)), op.grid(np.append(phibar, 0.0) + 1.0))

    grid = op.grid(values)
    res = psi_residual(gd, grid, mu, p)
    if res > tol:
        raise IterationLimitError(f"angular residual {res:.3e} above tol {tol:.1e}", res)
    return AngularSolution(grid, float(alpha), float(p), float(mu), it, res, bracket, history)


def _monotone(op, mu, start, nonlin, shift, tol, max_iter, history):
    """Iterate ``(K - (mu - shift) m) f_new = m (nonlin(f) + shift f)`` from a supersolution."""
    f = start.copy()
    res = math.inf
    for it in range(1, max_iter + 1):
        rhs = nonlin(np.maximum(f, 0.0)) + shift * f
        f_new = op.solve_shifted(mu - shift, rhs)
        diff = float(np.max(np.abs(f_new - f)))
        if history is not None:
            history.append(f_new.copy())
        f = f_new
        if diff < tol / 10:
            res = float(np.max(np.abs(op.apply(f) - mu * f - nonlin(np.maximum(f, 0.0)))))
            if res <= tol:
                return f, it
    raise IterationLimitError(f"monotone iteration hit the cap of {max_iter} iterations", res)


def build_supersolution(solution: AngularSolution, c: float, s: float,
                        r_range: Tuple[float, float] = (1.0, 10.0),
                        radial_resolution: int = 256) -> ConeField:
    """Sample ``u = c^{1/(1-p)} r^alpha psi`` on a log-uniform radial grid."""
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    p = solution.p
    alpha = (2.0 - s) / (1.0 - p)
    if not math.isclose(alpha, solution.alpha, rel_tol=1e-12, abs_tol=1e-12):
        raise DomainError(f"s={s} gives alpha={alpha}, but psi was solved for alpha={solution.alpha}")
    rho, r_max = r_range
    if not 0 < rho < r_max:
        raise DomainError(f"bad radial range {r_range}")
    log_r = np.linspace(math.log(rho), math.log(r_max), int(radial_resolution))
    amp = c ** (1.0 / (1.0 - p))
    W = amp * np.exp(solution.alpha * log_r)[:, None] * solution.grid.values[None, :]
    N = solution.grid.weight_exponent + 2
    return ConeField(log_r, solution.grid.nodes, W, 0.0, N, s, p, c, solution.grid.kind)


@dataclass(frozen=True, eq=False)
class PolarResidual:
    """Residual of ``-Delta u - c r^{-s} (u + delta)^p`` at interior nodes.

    Arrays are normalised per radial shell by ``scale`` = the largest magnitude
    among the individual operator terms (``u_rr``-, ``u_r``-, zeroth-order and
    angular parts) and the right-hand side in that shell, so
    they stay finite however large ``r`` gets.  ``log_scale`` holds the log of
    that normaliser.
    """

    residual: np.ndarray  # (lhs - rhs) / scale
    rhs: np.ndarray  # rhs / scale
    log_scale: np.ndarray
    radial_index: np.ndarray
    angular_index: np.ndarray

    @property
    def max_relative(self) -> float:
        return float(np.max(np.abs(self.residual)))


def _d1(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Three-point derivative along axis 0 at interior points of a (nonuniform) grid."""
    h0 = (x[1:-1] - x[:-2])[:, None]
    h1 = (x[2:] - x[1:-1])[:, None]
    return (-h1 / (h0 * (h0 + h1)) * f[:-2] + (h1 - h0) / (h0 * h1) * f[1:-1]
            + h0 / (h1 * (h0 + h1)) * f[2:])


def _d2_hermite(x: np.ndarray, f: np.ndarray, df: np.ndarray) -> np.ndarray:
    """Second derivative at interior points from values and slopes at three nodes.

    Differentiates the local quintic Hermite interpolant, which is fourth order
    accurate on nonuniform grids.
    """
    h = (x[2:] - x[:-2])[:, None] / 2.0
    t = np.stack([x[:-2], x[1:-1], x[2:]], axis=1) - x[1:-1, None]
    t = t / h  # local coordinate, O(1)
    k = np.arange(6)
    vals = t[:, :, None] ** k
    ders = np.where(k > 0, k * t[:, :, None] ** np.maximum(k - 1, 0), 0.0)
    A = np.concatenate([vals, ders], axis=1)  # rows: conditions, cols: monomials
    e2 = np.zeros((len(t), 6, 1))
    e2[:, 2, 0] = 2.0
    wts = np.linalg.solve(np.transpose(A, (0, 2, 1)), e2)[:, :, 0]
    hv = h[:, 0]
    out = np.zeros_like(f[1:-1])
    for i, row in enumerate((f[:-2], f[1:-1], f[2:])):
        out += (wts[:, i] / hv**2)[:, None] * row
    for i, row in enumerate((df[:-2], df[1:-1], df[2:])):
        out += (wts[:, 3 + i] / hv)[:, None] * row
    return out


def _d2(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    h0 = (x[1:-1] - x[:-2])[:, None]
    h1 = (x[2:] - x[1:-1])[:, None]
    return 2.0 * (f[:-2] / (h0 * (h0 + h1)) - f[1:-1] / (h0 * h1) + f[2:] / (h1 * (h0 + h1)))


def _angular_laplacian(theta: np.ndarray, W: np.ndarray, N: int, kind: str) -> np.ndarray:
    """Centred ``W_tt + (N-2) cot(t) W_t`` at interior angular nodes (all but the last)."""
    h = theta[1] - theta[0]
    if kind == "cap":
        left = np.concatenate([W[:, :1], W[:, :-2]], axis=1)  # mirror ghost at -h/2
    else:
        left = np.concatenate([W[:, -1:], W[:, :-2]], axis=1)  # arc endpoint shares boundary value
    mid = W[:, :-1]
    right = W[:, 1:]
    lap = (right - 2.0 * mid + left) / h**2
    if kind == "cap" and N > 2:
        lap = lap + (N - 2) / np.tan(theta[:-1]) * (right - left) / (2.0 * h)
    return lap


def residual_polar(field: ConeField) -> PolarResidual:
    """Finite-difference residual of the polar form of ``-Delta u = c r^{-s} (u+delta)^p``.

    In ``x = log r`` with ``u = r^a W``:

        r^{2-a} (-Delta u) = -(W_xx + (2a+N-2) W_x + a(a+N-2) W) - Delta_omega W.

    Radial derivatives are centred three-point differences (second order on
    smoothly graded grids); the angular operator is the centred
    nonconservative stencil, independent of the flux form used by the solvers.
    """
    x, theta, W = field.log_r, field.theta, field.W
    if len(x) - 2 < 4 or len(theta) - 1 < 4:
        raise DomainError("grid too coarse: need at least 4 interior nodes in each direction")
    a, N = field.a, field.N
    Wi = W[1:-1, :-1]
    if field.dW_dlogr is not None:
        Wx = field.dW_dlogr[1:-1, :-1]
        Wxx = _d2_hermite(x, W, field.dW_dlogr)[:, :-1]
    else:
        Wx = _d1(x, W)[:, :-1]
        Wxx = _d2(x, W)[:, :-1]
    # r^{2-a} times each physical term; they are kept apart so the shell scale
    # reflects the largest individual term rather than a cancelled sum
    terms = [-Wxx, -(2 * a + N - 2) * Wx, -a * (a + N - 2) * Wi,
             -_angular_laplacian(theta, W[1:-1], N, field.kind)]
    xi = x[1:-1, None]
    with np.errstate(divide="ignore"):
        log_terms = [(a - 2) * xi + np.log(np.abs(t)) for t in terms]
        if field.c > 0:
            log_u = a * xi + np.log(np.maximum(Wi, 0.0))
            log_shift = np.logaddexp(log_u, math.log(field.delta)) if field.delta > 0 else log_u
            log_rhs = math.log(field.c) - field.s * xi + (field.p * log_shift if field.p != 0 else 0.0)
        else:
            log_rhs = np.full_like(Wi, -np.inf)
    log_scale = np.max([np.max(lt, axis=1) for lt in log_terms + [log_rhs]], axis=0)
    ls = log_scale[:, None]
    lhs = sum(np.sign(t) * np.exp(lt - ls) for t, lt in zip(terms, log_terms))
    rhs = np.exp(log_rhs - ls)
    return PolarResidual(lhs - rhs, rhs, log_scale, np.arange(1, len(x) - 1),
                         np.arange(len(theta) - 1))
