"""Critical exponents for ``-Delta u = c |x|^{-s} u^p`` in cones and their Kelvin duals.

Everything here is closed-form algebra on ``lambda1`` and ``N``.  The
sublinear exponent can be ``-inf``; it is returned as ``-math.inf`` (IEEE
negative infinity orders correctly against every finite ``p``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError, RegimeError

# Tolerance for "p sits exactly on a critical value".
CRITICAL_ATOL = 1e-12


@dataclass(frozen=True)
class SpectralData:
    lambda1: float
    alpha_plus: float
    alpha_minus: float
    N: int


class Zone(enum.Enum):
    EXISTS = "exists"
    NOT_EXISTS = "not_exists"
    CRITICAL = "critical"
    LINEAR_CASE = "linear_case"
    UNSPECIFIED = "unspecified"


@dataclass(frozen=True)
class Classification:
    zone: Zone
    c_max: Optional[float] = None  # only for Zone.LINEAR_CASE


@dataclass(frozen=True)
class CriticalReport:
    p_star_sub: float
    p_star_super: Optional[float]
    sigma_kelvin: Optional[float]
    p_star_sub_kelvin: Optional[float]
    linear_threshold_c: float
    classification: Optional[Classification]


def alpha_roots(lambda1: float, N: int) -> SpectralData:
    """Roots ``alpha_+ >= 0 >= alpha_-`` of ``alpha (alpha + N - 2) = lambda1``."""
    if not lambda1 >= 0:
        raise DomainError(f"lambda1 must be nonnegative, got {lambda1}")
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    b = N - 2
    disc = math.sqrt(b * b + 4.0 * lambda1)
    # the two forms avoid cancellation when lambda1 << (N-2)^2
    alpha_plus = 2.0 * lambda1 / (b + disc) if b > 0 else 0.5 * disc
    return SpectralData(float(lambda1), alpha_plus, -b - alpha_plus, int(N))


def p_star_sub(spec: SpectralData, s: float) -> float:
    """Sublinear critical exponent ``min(1 - (2-s)/alpha_+, 1)``, ``-inf`` when ``alpha_+ = 0``."""
    if spec.alpha_plus == 0.0:
        return -math.inf
    return min(1.0 - (2.0 - s) / spec.alpha_plus, 1.0)


def p_star_super(spec: SpectralData, s: float) -> float:
    """Superlinear critical exponent ``max(1 - (2-s)/alpha_-, 1)``."""
    if spec.alpha_minus == 0.0:
        raise RegimeError("superlinear exponent undefined: alpha_- = 0 (N=2, lambda1=0)")
    return max(1.0 - (2.0 - s) / spec.alpha_minus, 1.0)


def kelvin_sigma(p: float, s: float, N: int) -> float:
    """Weight exponent after the Kelvin transform ``y = x/|x|^2``."""
    return (N + 2) - p * (N - 2) - s


def p_star_sub_kelvin(spec: SpectralData, sigma: float) -> float:
    """Sublinear critical exponent of the Kelvin-transformed problem in the punctured cone."""
    if spec.alpha_minus == 0.0:
        raise RegimeError("Kelvin exponent undefined: alpha_- = 0 (N=2, lambda1=0)")
    return min(1.0 - (2.0 - sigma) / spec.alpha_minus, 1.0)


def linear_threshold(spec: SpectralData) -> float:
    """Largest ``c`` for which ``-Delta u = c |x|^{-2} u`` has positive supersolutions."""
    return (spec.N - 2) ** 2 / 4.0 + spec.lambda1


def _at(p: float, value: float) -> bool:
    return math.isfinite(value) and abs(p - value) <= CRITICAL_ATOL * max(1.0, abs(value))


def classify(spec: SpectralData, s: float, p: float, c: float) -> Classification:
    """Existence zone of positive supersolutions for the triple ``(p, s, c)``."""
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    if s > 2:
        return Classification(Zone.EXISTS)
    if s == 2:
        if _at(p, 1.0):
            return Classification(Zone.LINEAR_CASE, linear_threshold(spec))
        return Classification(Zone.UNSPECIFIED)
    if _at(p, 1.0):
        return Classification(Zone.UNSPECIFIED)
    if p < 1:
        lo = p_star_sub(spec, s)
        if _at(p, lo):
            return Classification(Zone.CRITICAL)
        return Classification(Zone.EXISTS if p < lo else Zone.NOT_EXISTS)
    if spec.alpha_minus == 0.0:
        return Classification(Zone.UNSPECIFIED)
    hi = p_star_super(spec, s)
    if _at(p, hi):
        return Classification(Zone.CRITICAL)
    return Classification(Zone.EXISTS if p > hi else Zone.NOT_EXISTS)


def supersolution_alpha(p: float, s: float) -> float:
    """Radial power ``(2-s)/(1-p)`` of the separable solution ``r^alpha psi``."""
    if not p < 1:
        raise DomainError(f"need p < 1, got {p}")
    return (2.0 - s) / (1.0 - p)


def report(spec: SpectralData, s: float, p: Optional[float] = None,
           c: Optional[float] = None) -> CriticalReport:
    """Bundle every exponent for ``(spec, s)``; Kelvin data and class need ``p`` (and ``c``)."""
    sub = p_star_sub(spec, s)
    sup = p_star_super(spec, s) if spec.alpha_minus != 0.0 else None
    sigma = kelvin_sigma(p, s, spec.N) if p is not None else None
    kel = None
    if sigma is not None and spec.alpha_minus != 0.0:
        kel = p_star_sub_kelvin(spec, sigma)
    cls = classify(spec, s, p, c) if (p is not None and c is not None) else None
    return CriticalReport(sub, sup, sigma, kel, linear_threshold(spec), cls)
