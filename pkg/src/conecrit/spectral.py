"""Cone cross-sections and the principal Dirichlet eigenpair of the Laplace-Beltrami operator.

Four cross-section shapes are supported:

* ``Orthant(k)``  -- ``{x_1 > 0, ..., x_k > 0}`` on the sphere, closed form only.
* ``Cap(theta0)`` -- geodesic ball of radius ``theta0`` around a pole (``N >= 3``).
* ``Arc(length)`` -- an arc of the unit circle (``N == 2``), closed form.
* ``ExplicitLambda(lambda1)`` -- user supplied eigenvalue, no geometry.

For caps the eigenfunctions depending only on the polar angle satisfy the
Sturm-Liouville problem

    -(sin^{N-2}(t) f')' / sin^{N-2}(t) = lam f   on (0, theta0),   f(theta0) = 0,

which is discretised in flux form on a cell-centred grid ``t_i = (i + 1/2) h``
whose last node sits exactly on ``theta0``.  The face weight at ``t = 0`` is
``sin^{N-2}(0) = 0``, so regularity at the pole needs no special treatment.
Arcs use the plain three-point Laplacian on ``t_i = (i + 1) h``; their left
endpoint ``t = 0`` is not stored and carries the same boundary value as the
last node.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.linalg import solveh_banded

from .errors import DomainError, UnsupportedShapeError

MIN_NODES = 16


@dataclass(frozen=True)
class Orthant:
    k: int


@dataclass(frozen=True)
class Cap:
    theta0: float


@dataclass(frozen=True)
class Arc:
    length: float


@dataclass(frozen=True)
class ExplicitLambda:
    lambda1: float


Shape = Union[Orthant, Cap, Arc, ExplicitLambda]


@dataclass(frozen=True)
class DomainSpec:
    """Cross-section ``shape`` of a cone in ``R^N``."""

    N: int
    shape: Shape

    def __post_init__(self):
        N, shape = self.N, self.shape
        if int(N) != N or N < 2:
            raise DomainError(f"ambient dimension must be an integer >= 2, got {N}")
        if isinstance(shape, Orthant):
            if not 1 <= shape.k <= N:
                raise DomainError(f"orthant index k={shape.k} outside 1..{N}")
        elif isinstance(shape, Cap):
            if not 0.0 < shape.theta0 < math.pi:
                raise DomainError(f"cap angle must lie in (0, pi), got {shape.theta0}")
            if N == 2:
                raise DomainError("caps on S^1 are arcs: use Arc(length=2*theta0) for N=2")
        elif isinstance(shape, Arc):
            if N != 2:
                raise DomainError(f"Arc cross-sections exist only for N=2, got N={N}")
            if not 0.0 < shape.length <= 2 * math.pi:
                raise DomainError(f"arc length must lie in (0, 2*pi], got {shape.length}")
        elif isinstance(shape, ExplicitLambda):
            if not shape.lambda1 >= 0.0:
                raise DomainError(f"lambda1 must be nonnegative, got {shape.lambda1}")
        else:
            raise DomainError(f"unknown shape {shape!r}")

    @classmethod
    def parse(cls, N: int, text: str) -> "DomainSpec":
        """Parse ``orthant:k``, ``cap:theta``, ``arc:length`` or ``explicit:lambda``."""
        kind, sep, arg = text.partition(":")
        if not sep:
            raise DomainError(f"domain must look like kind:value, got {text!r}")
        kind = kind.strip().lower()
        try:
            if kind == "orthant":
                shape = Orthant(int(arg))
            elif kind == "cap":
                shape = Cap(float(arg))
            elif kind == "arc":
                shape = Arc(float(arg))
            elif kind == "explicit":
                shape = ExplicitLambda(float(arg))
            else:
                raise DomainError(f"unknown domain kind {kind!r}")
        except ValueError as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"bad domain value in {text!r}") from exc
        return cls(N, shape)

    def describe(self) -> str:
        s = self.shape
        if isinstance(s, Orthant):
            return f"orthant:{s.k}"
        if isinstance(s, Cap):
            return f"cap:{s.theta0!r}"
        if isinstance(s, Arc):
            return f"arc:{s.length!r}"
        return f"explicit:{s.lambda1!r}"


@dataclass(frozen=True, eq=False)
class AngularGrid:
    """Samples of a function of the polar angle.

    ``nodes`` is strictly increasing in ``(0, theta0]`` with the last node on
    the boundary.  ``kind`` is ``"cap"`` or ``"arc"`` and selects the stencil.
    """

    nodes: np.ndarray
    values: np.ndarray
    weight_exponent: int
    kind: str

    def __post_init__(self):
        if len(self.nodes) < MIN_NODES:
            raise DomainError(f"angular grid needs at least {MIN_NODES} nodes")
        if self.nodes.shape != self.values.shape:
            raise DomainError("nodes and values must have the same shape")

    @property
    def theta0(self) -> float:
        return float(self.nodes[-1])

    @property
    def h(self) -> float:
        return float(self.nodes[1] - self.nodes[0])

    def with_values(self, values) -> "AngularGrid":
        return AngularGrid(self.nodes, np.asarray(values, dtype=float), self.weight_exponent, self.kind)


def grid_domain(domain: DomainSpec) -> DomainSpec:
    """Return a grid-representable domain equal to ``domain``.

    Caps and arcs are returned unchanged; the half-space ``Orthant(1)`` is the
    cap of angle pi/2 (the arc of length pi when N=2).
    """
    s = domain.shape
    if isinstance(s, (Cap, Arc)):
        return domain
    if isinstance(s, Orthant) and s.k == 1:
        if domain.N == 2:
            return DomainSpec(2, Arc(math.pi))
        return DomainSpec(domain.N, Cap(math.pi / 2))
    raise UnsupportedShapeError(f"{domain.describe()} has no angular grid representation")


class AngularOperator:
    """Discrete ``-Laplace-Beltrami`` on the zonal functions of a cap or arc.

    ``stiffness`` (tridiagonal, symmetric positive definite) and the diagonal
    ``mass`` act on the interior nodes: ``-Delta f ~ (K f) / m``.
    """

    def __init__(self, domain: DomainSpec, resolution: int):
        if resolution < MIN_NODES:
            raise DomainError(f"resolution must be >= {MIN_NODES}, got {resolution}")
        n = int(resolution)
        shape = domain.shape
        if isinstance(shape, Cap):
            h = shape.theta0 / (n - 0.5)
            nodes = (np.arange(n) + 0.5) * h
            nodes[-1] = shape.theta0
            q = domain.N - 2
            left = np.sin(np.arange(n - 1) * h) ** q
            left[0] = 0.0
            right = np.sin((np.arange(n - 1) + 1.0) * h) ** q
            mass = h * np.sin(nodes[:-1]) ** q
            self.kind = "cap"
        elif isinstance(shape, Arc):
            h = shape.length / n
            nodes = (np.arange(n) + 1.0) * h
            nodes[-1] = shape.length
            left = np.ones(n - 1)
            right = np.ones(n - 1)
            mass = np.full(n - 1, h)
            self.kind = "arc"
        else:
            raise UnsupportedShapeError(f"{domain.describe()} has no angular grid representation")
        self.domain = domain
        self.nodes = nodes
        self.h = h
        self.mass = mass
        self.diag = (left + right) / h
        self.off = -right[:-1] / h
        self.weight_exponent = domain.N - 2

    @property
    def size(self) -> int:
        return len(self.nodes)

    def grid(self, values) -> AngularGrid:
        return AngularGrid(self.nodes, np.asarray(values, dtype=float), self.weight_exponent, self.kind)

    def stiffness_apply(self, interior: np.ndarray) -> np.ndarray:
        """``K f`` for ``f`` vanishing on the boundary."""
        out = self.diag * interior
        out[:-1] += self.off * interior[1:]
        out[1:] += self.off * interior[:-1]
        return out

    def apply(self, interior: np.ndarray) -> np.ndarray:
        """Discrete ``-Delta_omega f`` at the interior nodes (homogeneous Dirichlet data)."""
        return self.stiffness_apply(interior) / self.mass

    def solve_shifted(self, mu: float, rhs: np.ndarray) -> np.ndarray:
        """Solve ``(K - mu m) f = m rhs`` on the interior nodes."""
        ab = np.zeros((2, len(self.diag)))
        ab[0, 1:] = self.off
        ab[1] = self.diag - mu * self.mass
        return solveh_banded(ab, self.mass * rhs)


@functools.lru_cache(maxsize=64)
def angular_operator(domain: DomainSpec, resolution: int) -> AngularOperator:
    return AngularOperator(domain, resolution)


def inverse_iteration(op: AngularOperator, shift: float = 0.0, rtol: float = 1e-12, maxiter: int = 500):
    """Principal pair of ``K f = lam m f`` by shifted inverse power iteration.

    Stops once successive Rayleigh quotients agree to ``rtol`` (relative) and
    the sup-normalised iterates agree to ``rtol``.  Returns ``(lam, f)`` with
    ``max f = 1`` on the interior nodes.
    """
    ab = np.zeros((2, len(op.diag)))
    ab[0, 1:] = op.off
    ab[1] = op.diag - shift * op.mass
    x = np.ones(len(op.diag))
    rq_old = math.inf
    for _ in range(maxiter):
        z = solveh_banded(ab, op.mass * x)
        z /= np.max(np.abs(z))
        if z[np.argmax(np.abs(z))] < 0:
            z = -z
        rq = float(z @ op.stiffness_apply(z)) / float(z @ (op.mass * z))
        step = np.max(np.abs(z - x))
        x = z
        if abs(rq - rq_old) <= rtol * abs(rq) and step <= rtol:
            return rq, x
        rq_old = rq
    raise RuntimeError("inverse iteration did not converge")


@functools.lru_cache(maxsize=64)
def _eigenpair(domain: DomainSpec, resolution: int):
    op = angular_operator(domain, resolution)
    if op.kind == "arc":
        L = domain.shape.length
        lam = (4.0 / op.h**2) * math.sin(math.pi * op.h / (2 * L)) ** 2
        vec = np.sin(math.pi * op.nodes[:-1] / L)
        vec /= vec.max()
    else:
        lam, vec = inverse_iteration(op)
        vec = vec / vec.max()
    full = np.append(vec, 0.0)
    full.setflags(write=False)
    return lam, full


def lambda1(domain: DomainSpec, resolution: int = 4096) -> float:
    """Principal Dirichlet eigenvalue of ``-Delta_omega`` on the cross-section.

    Closed forms for orthants (``k(k+N-2)``), arcs (``(pi/length)^2``) and
    explicit values; the discrete eigenvalue at ``resolution`` nodes for caps.
    """
    s = domain.shape
    if isinstance(s, Orthant):
        return float(s.k * (s.k + domain.N - 2))
    if isinstance(s, ExplicitLambda):
        return float(s.lambda1)
    if isinstance(s, Arc):
        return (math.pi / s.length) ** 2
    return _eigenpair(domain, int(resolution))[0]


def discrete_lambda1(domain: DomainSpec, resolution: int) -> float:
    """Principal eigenvalue of the discrete operator used by the angular solvers."""
    return _eigenpair(grid_domain(domain), int(resolution))[0]


def principal_eigenfunction(domain: DomainSpec, resolution: int = 1024) -> AngularGrid:
    """Principal eigenfunction on the angular grid, normalised to sampled maximum 1."""
    if not isinstance(domain.shape, (Cap, Arc)):
        raise UnsupportedShapeError(
            f"{domain.describe()} has no angular grid; eigenfunctions need a Cap or Arc")
    op = angular_operator(domain, int(resolution))
    return op.grid(_eigenpair(domain, int(resolution))[1].copy())


def rayleigh_quotient(domain: DomainSpec, grid: AngularGrid) -> float:
    """Discrete Rayleigh quotient ``<K f, f> / <m f, f>`` of a Dirichlet grid function."""
    op = angular_operator(domain, len(grid.nodes))
    f = grid.values[:-1]
    return float(f @ op.stiffness_apply(f)) / float(f @ (op.mass * f))
