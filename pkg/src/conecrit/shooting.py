"""Radial shooting for the nonexistence regime and the subsolution certificate.

The initial value problem

    -v'' - (N-1)/r v' + lambda1/r^2 v = c r^{-s} v^p,   v(1) = delta,  v'(1) = K,

is integrated in the variables ``x = log r`` and ``w = v r^{-alpha}`` with
``alpha = alpha_+``.  Because ``alpha (alpha + N - 2) = lambda1`` the linear
part collapses and

    w_xx + beta w_x = -c e^{gamma x} w^p,   beta = N - 2 + 2 alpha,
                                             gamma = 2 - s - alpha (1 - p),

with ``w(0) = delta`` and ``w_x(0) = K - alpha delta``.  In the critical case
``gamma = 0`` the exit radius grows like ``exp(const * K^2)``; the scaled form
keeps such trajectories representable.  ``t = exp(-beta x)`` turns the same
``w`` into a solution of ``w_tt + c1 t^{-sigma} w^p = 0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import exponents
from .angular_solver import ConeField, PolarResidual, residual_polar
from .errors import DomainError, RegimeError, SearchFailure
from .integrate import integrate
from .spectral import AngularGrid, DomainSpec, grid_domain, lambda1, principal_eigenfunction

_EPS = np.finfo(float).eps
_LOG_HALF = math.log(0.5)


class ExitKind(enum.Enum):
    BLOW_DOWN = "blow_down"
    REACHED_RMAX = "reached_rmax"
    STEP_FAILURE = "step_failure"


@dataclass(frozen=True)
class ShootingParams:
    N: int
    lambda1: float
    s: float
    p: float
    c: float
    K: float

    def __post_init__(self):
        if self.N < 2:
            raise DomainError(f"N must be >= 2, got {self.N}")
        if not self.lambda1 >= 0:
            raise DomainError(f"lambda1 must be nonnegative, got {self.lambda1}")
        if not self.p < 1:
            raise DomainError(f"shooting needs p < 1, got {self.p}")
        if not self.c > 0:
            raise DomainError(f"c must be positive, got {self.c}")
        if not self.K > 1:
            raise DomainError(f"K must exceed 1, got {self.K}")

    @property
    def delta(self) -> float:
        return 1.0 if self.p < 0 else 0.0

    @property
    def alpha(self) -> float:
        return exponents.alpha_roots(self.lambda1, self.N).alpha_plus

    def with_K(self, K: float) -> "ShootingParams":
        return ShootingParams(self.N, self.lambda1, self.s, self.p, self.c, K)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Shooting solution sampled at the accepted steps (and requested radii).

    ``log_r``, ``w`` and ``w_x`` are the native variables; ``r``, ``v`` and
    ``dv`` convert back and overflow to ``inf`` only for radii beyond ~1e308.
    """

    params: ShootingParams
    log_r: np.ndarray
    w: np.ndarray
    w_x: np.ndarray
    exit_kind: ExitKind
    log_R: float  # inf unless exit_kind is BLOW_DOWN
    exit_residual: Optional[float]  # |v(R) - delta|, None when not representable
    log_r_max: float

    @property
    def alpha(self) -> float:
        return self.params.alpha

    @property
    def r(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_r)

    @property
    def v(self) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(self.alpha * self.log_r) * self.w

    @property
    def dv(self) -> np.ndarray:
        a = self.alpha
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp((a - 1.0) * self.log_r) * (self.w_x + a * self.w)

    @property
    def R(self) -> float:
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_R))

    @property
    def finite_exit(self) -> bool:
        return self.exit_kind is ExitKind.BLOW_DOWN

    def gap(self) -> np.ndarray:
        """``(v - delta) r^{-alpha}``, positive inside the admissible region."""
        return self.w - self.params.delta * np.exp(-self.alpha * self.log_r)

    def min_v_on(self, r_lo: float, r_hi: float) -> float:
        x_lo, x_hi = math.log(r_lo), math.log(r_hi)
        sel = (self.log_r >= x_lo - 1e-14) & (self.log_r <= x_hi + 1e-14)
        if not np.any(sel):
            raise DomainError(f"trajectory has no samples in [{r_lo}, {r_hi}]")
        return float(np.min(self.v[sel]))

    def at(self, r: float) -> Tuple[float, float]:
        """``(v, v')`` at a radius that was requested through ``r_eval``."""
        x = math.log(r)
        i = int(np.argmin(np.abs(self.log_r - x)))
        if abs(self.log_r[i] - x) > 1e-12 * max(1.0, abs(x)):
            raise DomainError(f"r={r} is not a sample of this trajectory")
        return float(self.v[i]), float(self.dv[i])


def _rhs_factory(params: ShootingParams):
    a = params.alpha
    beta = params.N - 2 + 2 * a
    gamma = 2.0 - params.s - a * (1.0 - params.p)
    p, c, delta = params.p, params.c, params.delta

    if delta > 0:
        def f(x, y):
            # v is clamped at delta/2 from below, i.e. w >= e^{-a x}/2
            w = y[0]
            lw = _LOG_HALF - a * x
            if w > 0:
                lw = max(lw, math.log(w))
            return np.array([y[1], -beta * y[1] - c * math.exp(gamma * x + p * lw)])
    else:
        def f(x, y):
            w = y[0]
            nl = 1.0 if p == 0.0 else (w ** p if w > 0 else 0.0)
            return np.array([y[1], -beta * y[1] - c * math.exp(gamma * x) * nl])
    return f, beta, gamma


def shoot(params: ShootingParams, r_max: Optional[float] = None, step_tol: float = 1e-10, *,
          log_r_max: Optional[float] = None, r_eval: Sequence[float] = (),
          max_step: float = math.inf) -> Trajectory:
    """Integrate the radial IVP from ``r = 1`` until ``v`` falls back to ``delta`` or ``r_max``.

    The downcrossing is bisected to ``|v - delta| <= 1e-10``.  When ``r`` is so
    large that ``v - delta`` is below the resolution of the scaled variables
    (possible for ``p < 0`` near the critical exponent), the exit is
    extrapolated linearly from the last step and ``exit_residual`` is None.
    """
    if log_r_max is None:
        if r_max is None or not r_max > 1:
            raise DomainError(f"need r_max > 1, got {r_max}")
        log_r_max = math.log(r_max)
    a = params.alpha
    delta = params.delta
    f, beta, _ = _rhs_factory(params)

    def event(x, y):
        g = y[0] - delta * math.exp(-a * x)
        return g * math.exp(min(a * x, 600.0))

    w_scale = [max(1.0, abs(params.K))]

    def floor_hit(x, y):
        # remaining gap in the scaled variable is below what the step size can resolve
        if delta == 0.0 or y[1] >= 0:
            return False
        w_scale[0] = max(w_scale[0], abs(y[0]))
        g = y[0] - delta * math.exp(-a * x)
        if math.exp(min(a * x, 700.0)) * step_tol * w_scale[0] <= 1e-10:
            return False
        return 0 < g <= max(step_tol * w_scale[0], 1e3 * _EPS * max(1.0, x) * abs(y[1]))

    x_eval = sorted(math.log(r) for r in r_eval if r > 1)
    sol = integrate(f, 0.0, [delta, params.K - a * delta], log_r_max, rtol=step_tol,
                    atol=step_tol, event=event, event_tol=1e-10, x_eval=x_eval,
                    max_step=max_step, stop_when=floor_hit)
    xs, ys = sol.x, sol.y
    if sol.status == "event":
        kind, log_R, res = ExitKind.BLOW_DOWN, float(xs[-1]), sol.event_residual
        if a * log_R > 600:
            res = None
    elif sol.status == "stopped":
        x_last, (w_last, wx_last) = xs[-1], ys[-1]
        g = w_last - delta * math.exp(-a * x_last)
        dx = g / (-wx_last)
        log_R = float(x_last + dx)
        w_R = delta * math.exp(-a * log_R)
        xs = np.append(xs, log_R)
        ys = np.vstack([ys, [w_R, wx_last]])
        kind, res = ExitKind.BLOW_DOWN, None
    elif sol.status == "end":
        kind, log_R, res = ExitKind.REACHED_RMAX, math.inf, None
    else:
        kind, log_R, res = ExitKind.STEP_FAILURE, math.inf, None
    return Trajectory(params, xs, ys[:, 0].copy(), ys[:, 1].copy(), kind, log_R, res,
                      float(log_r_max))


def _regime_gate(N, lambda1_value, s, p):
    if not s < 2:
        raise RegimeError(f"nonexistence shooting needs s < 2, got s={s}")
    if not p < 1:
        raise RegimeError(f"nonexistence shooting needs p < 1, got p={p}")
    spec = exponents.alpha_roots(lambda1_value, N)
    p_sub = exponents.p_star_sub(spec, s)
    if p < p_sub - exponents.CRITICAL_ATOL * max(1.0, abs(p_sub)):
        raise RegimeError(f"p = {p!r} < p_star_sub = {p_sub!r}: outside the nonexistence regime")
    return spec


def find_K(N: int, lambda1_value: float, s: float, p: float, c: float, r_star: float,
           r_dstar: float, M: float, K_cap: float = 2.0**30, *, step_tol: float = 1e-10,
           log_r_max: float = 1e6, max_step: float = math.inf,
           history: Optional[list] = None) -> Tuple[float, Trajectory]:
    """Doubling search ``K = 2, 4, 8, ...`` for a shot that exits beyond ``r_dstar``
    at finite ``R`` while staying ``>= M`` on ``[r_star, r_dstar]``.

    Returns the first witness, not the smallest possible one.  ``history``
    (if given) collects ``(K, min v, exit kind)`` for every attempt.
    """
    if not 1 < r_star < r_dstar:
        raise DomainError(f"need 1 < r_star < r_dstar, got [{r_star}, {r_dstar}]")
    _regime_gate(N, lambda1_value, s, p)
    delta = 1.0 if p < 0 else 0.0
    if not M > delta:
        raise DomainError(f"need M > delta = {delta}, got {M}")
    base = ShootingParams(N, lambda1_value, s, p, c, 2.0)
    K = 2.0
    best = -math.inf
    while K <= K_cap:
        traj = shoot(base.with_K(K), step_tol=step_tol, log_r_max=log_r_max,
                     r_eval=(r_star, r_dstar), max_step=max_step)
        ok_exit = traj.finite_exit and traj.log_R > math.log(r_dstar)
        m = traj.min_v_on(r_star, r_dstar) if traj.log_r[-1] >= math.log(r_dstar) else -math.inf
        best = max(best, m)
        if history is not None:
            history.append((K, m, traj.exit_kind))
        if ok_exit and m >= M:
            return K, traj
        K *= 2.0
    raise SearchFailure(f"no K <= {K_cap} reached min v >= {M} on [{r_star}, {r_dstar}] "
                        f"(best {best!r})", best)


@dataclass(frozen=True, eq=False)
class TransformedTrajectory:
    t: np.ndarray
    w: np.ndarray
    w_t: np.ndarray
    sigma_ode: float
    c1: float
    L: float
    T: float
    residual_max: float  # max |w_tt + c1 t^-sigma w^p| / max |c1 t^-sigma w^p|
    concavity_defect: float  # max (chord - w) / max |w|, <= 0 for concave data
    delta: float


def emden_fowler_transform(traj: Trajectory) -> TransformedTrajectory:
    """Map ``(r, v)`` to ``(t, w) = (r^{-beta}, v r^{-alpha})`` and check the transformed ODE.

    ``w_tt`` is obtained by differencing the exact slope ``w_t`` on the sample
    points, so the residual tests the exponent ``sigma`` and coefficient ``c1``
    independently of how they were derived.
    """
    prm = traj.params
    a = traj.alpha
    beta = prm.N - 2 + 2 * a
    if not beta > 0:
        raise DomainError("degenerate transform: N - 2 + 2 alpha = 0")
    sigma = (2 * prm.N - 2 + a * (prm.p + 3) - prm.s) / beta
    c1 = prm.c / beta**2
    L = (prm.K - a * prm.delta) / beta
    with np.errstate(under="ignore", over="ignore"):
        t = np.exp(-beta * traj.log_r)
        w_t = -traj.w_x * np.exp(beta * traj.log_r) / beta
        T = float(np.exp(-beta * traj.log_R)) if traj.finite_exit else 0.0
    order = np.argsort(t)
    ts, ws, wts = t[order], traj.w[order], w_t[order]
    # interior samples only: the exit sample sits on the singular edge for p in (0, 1)
    inner = slice(1, -1)
    w_tt = _d1(ts, wts)
    wp = np.where(ws[inner] > 0, np.maximum(ws[inner], 0.0), 0.0)
    nl = np.ones_like(wp) if prm.p == 0 else np.where(wp > 0, wp ** prm.p, 0.0)
    with np.errstate(over="ignore", invalid="ignore"):
        forcing = c1 * ts[inner] ** (-sigma) * nl
    good = np.isfinite(forcing) & np.isfinite(w_tt) & (ws[inner] > 0)
    if traj.finite_exit:
        good[0] = False  # neighbour of the exit point
    resid = np.abs(w_tt + forcing)[good]
    residual_max = float(resid.max() / np.max(np.abs(forcing[good])))
    chord = ws[:-2] + (ws[2:] - ws[:-2]) * ((ts[1:-1] - ts[:-2]) / (ts[2:] - ts[:-2]))
    concavity = float(np.max(chord - ws[1:-1]) / np.max(np.abs(ws)))
    return TransformedTrajectory(t, traj.w, w_t, sigma, c1, L, T, residual_max, concavity,
                                 prm.delta)


def _d1(x, f):
    h0 = x[1:-1] - x[:-2]
    h1 = x[2:] - x[1:-1]
    return (-h1 / (h0 * (h0 + h1)) * f[:-2] + (h1 - h0) / (h0 * h1) * f[1:-1]
            + h0 / (h1 * (h0 + h1)) * f[2:])


def _thin(x: np.ndarray, max_nodes: int) -> np.ndarray:
    """Indices of at most ``max_nodes`` samples, equidistributed in step count plus length.

    The adaptive integrator clusters samples where the solution varies quickly;
    the monitor ``i/n + (x_i - x_0)/(x_n - x_0)`` keeps that clustering while
    still covering long, smooth stretches.
    """
    n = len(x)
    if n <= max_nodes:
        return np.arange(n)
    span = x[-1] - x[0]
    monitor = np.arange(n) / (n - 1) + (x - x[0]) / span
    targets = np.linspace(0.0, monitor[-1], max_nodes)
    idx = np.searchsorted(monitor, targets)
    return np.unique(np.clip(idx, 0, n - 1))


def build_subsolution(traj: Trajectory, phi1: AngularGrid, max_radial: int = 4096) -> ConeField:
    """``w_M = (v - delta) phi1`` on (trajectory radii) x (angular grid), scaled by ``r^alpha``."""
    if not traj.finite_exit:
        raise DomainError("subsolution needs a finite exit radius R (compact radial support)")
    if abs(np.max(phi1.values) - 1.0) > 1e-12:
        raise DomainError("phi1 must be normalised to max 1")
    prm = traj.params
    a, delta = traj.alpha, prm.delta
    idx = _thin(traj.log_r, max_radial)
    # the event step can leave a sliver next to the exit; drop the sample
    # before it so the radial stencils stay well proportioned
    xs = traj.log_r
    while len(idx) > 4 and xs[idx[-1]] - xs[idx[-2]] < 0.5 * (xs[idx[-2]] - xs[idx[-3]]):
        idx = np.delete(idx, -2)
    x = traj.log_r[idx]
    decay = delta * np.exp(-a * x)
    radial = traj.w[idx] - decay
    radial[0] = 0.0
    radial[-1] = 0.0
    dradial = traj.w_x[idx] + a * decay
    W = radial[:, None] * phi1.values[None, :]
    dW = dradial[:, None] * phi1.values[None, :]
    return ConeField(x, phi1.nodes, W, a, prm.N, prm.s, prm.p, prm.c, phi1.kind, delta, dW)


@dataclass(frozen=True, eq=False)
class SubsolutionCheck:
    margin: float  # min over interior nodes of (rhs - lhs)/scale
    margin_coarse: float  # same on the half-resolution angular grid
    residual: PolarResidual


def check_subsolution(field: ConeField) -> SubsolutionCheck:
    """Discrete sign check of ``-Delta w <= c r^{-s} (w + delta)^p`` at interior nodes."""
    res = residual_polar(field)
    margin = float(np.min(-res.residual))
    coarse = _coarse_angular(field)
    margin_coarse = float(np.min(-residual_polar(coarse).residual)) if coarse is not None else margin
    return SubsolutionCheck(margin, margin_coarse, res)


def _coarse_angular(field: ConeField):
    """Every other angular node, keeping the boundary node (needs an odd node count for caps)."""
    n = len(field.theta)
    if field.kind == "cap":
        # cell-centred nodes (i + 1/2) h: nodes 1, 4, 7, ... form the grid with spacing 3h
        idx = np.arange(1, n, 3)
        if idx[-1] != n - 1 or len(idx) < 6:
            return None
    else:
        idx = np.arange(1, n, 2)
        if idx[-1] != n - 1 or len(idx) < 6:
            return None
    sl = (slice(None), idx)
    dW = field.dW_dlogr[sl] if field.dW_dlogr is not None else None
    return ConeField(field.log_r, field.theta[idx], field.W[sl], field.a, field.N, field.s,
                     field.p, field.c, field.kind, field.delta, dW)


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    max_difference: Optional[float]  # max(sub - super) over nodes, None if not compared
    sub_margin: float
    super_margin: float
    sub_verified: bool
    super_verified: bool
    ordered: Optional[bool]
    reason: str


def comparison_check(sub: ConeField, sup: ConeField, tol: float = 1e-3) -> ComparisonReport:
    """Order check ``sub <= super`` on a common grid, after verifying both fields.

    ``sub`` must be a discrete subsolution vanishing on the grid boundary and
    ``sup`` a discrete supersolution of the same equation (margins ``>= -tol``,
    relative per radial shell).  Ordering is only asserted for verified pairs.
    """
    if sub.params() != sup.params():
        raise DomainError(f"parameter mismatch: {sub.params()} vs {sup.params()}")
    if (sub.log_r.shape != sup.log_r.shape or sub.theta.shape != sup.theta.shape
            or not np.allclose(sub.log_r, sup.log_r, rtol=0, atol=1e-12)
            or not np.allclose(sub.theta, sup.theta, rtol=0, atol=1e-12)):
        raise DomainError("grid mismatch between subsolution and supersolution")
    vals = sub.values
    if (np.any(vals[0] != 0) or np.any(vals[-1] != 0) or np.any(vals[:, -1] != 0)):
        raise DomainError("subsolution must vanish on the grid boundary")
    sub_m = float(np.min(-residual_polar(sub).residual))
    sup_m = float(np.min(residual_polar(sup).residual))
    sub_ok, sup_ok = sub_m >= -tol, sup_m >= -tol
    if not (sub_ok and sup_ok):
        which = "subsolution" if not sub_ok else "supersolution"
        return ComparisonReport(None, sub_m, sup_m, sub_ok, sup_ok, None,
                                f"{which} failed discrete verification")
    with np.errstate(over="ignore", invalid="ignore"):
        diff = float(np.max(sub.values - sup.values))
    return ComparisonReport(diff, sub_m, sup_m, True, True, diff <= tol * max(1.0, float(np.max(np.abs(sup.values)))),
                            "verified")


@dataclass(frozen=True, eq=False)
class Certificate:
    K: float
    log_R: float
    R: float
    M: float
    compact: Tuple[float, float]
    radial_min: float  # min over [r_star, r_dstar] of v - delta
    min_on_compact: float  # min of w_M over [r_star, r_dstar] x {phi1 >= 1/2}
    subsolution_margin: float
    margin_coarse: float
    margin_tol: float
    verified: bool
    trajectory: Trajectory
    field: ConeField
    exit_residual: Optional[float]


def nonexistence_certificate(domain: DomainSpec, s: float, p: float, c: float,
                             compact: Tuple[float, float], M: float, *,
                             angular_resolution: int = 257, step_tol: float = 1e-10,
                             K_cap: float = 2.0**30, margin_tol: float = 1e-3,
                             max_radial: int = 4096, max_step: float = math.inf) -> Certificate:
    """Evidence that every positive supersolution exceeds ``M`` on a compact piece of the cone.

    Runs the ``K``-doubling search with target ``2M + delta`` so that on the
    compact ``[r_star, r_dstar] x {phi1 >= 1/2}`` the subsolution
    ``w_M = (v - delta) phi1`` is at least ``M``; then checks the discrete
    subsolution inequality on the whole support ``(1, R) x Omega``.
    """
    lam = lambda1(domain)
    spec = exponents.alpha_roots(lam, domain.N)
    cls = exponents.classify(spec, s, p, c)
    if cls.zone not in (exponents.Zone.NOT_EXISTS, exponents.Zone.CRITICAL):
        p_sub = exponents.p_star_sub(spec, s)
        why = f"p = {p!r} < p_star_sub = {p_sub!r}" if p < p_sub else f"class {cls.zone.value}"
        raise RegimeError(f"certificate needs the nonexistence regime: {why}")
    if not p < 1:
        raise RegimeError(f"certificate needs p < 1, got {p}")
    gd = grid_domain(domain)
    phi1 = principal_eigenfunction(gd, angular_resolution)
    r_star, r_dstar = compact
    delta = 1.0 if p < 0 else 0.0
    K, traj = find_K(domain.N, lam, s, p, c, r_star, r_dstar, 2.0 * M + delta, K_cap,
                     step_tol=step_tol, max_step=max_step)
    field = build_subsolution(traj, phi1, max_radial)
    check = check_subsolution(field)
    radial_min = traj.min_v_on(r_star, r_dstar) - delta
    # w_M is a product of nonnegative factors, so its minimum over the product set factorises
    min_compact = radial_min * float(np.min(phi1.values[phi1.values >= 0.5]))
    verified = check.margin >= -margin_tol and min_compact >= M
    return Certificate(K, traj.log_R, traj.R, M, (r_star, r_dstar), radial_min, min_compact,
                       check.margin, check.margin_coarse, margin_tol, verified, traj, field,
                       traj.exit_residual)
