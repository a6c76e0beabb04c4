"""Dormand-Prince 5(4) integrator with a terminal downcrossing event.

Small, scalar-friendly and deterministic.  The event is located by bisection
on the step size of a single Runge-Kutta step taken from the last accepted
point, so the reported event state is a genuine fifth-order step of the
method rather than an interpolant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

# Dormand & Prince (1980), coefficients as in Hairer, Norsett & Wanner.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


def dopri_step(f, x: float, y: np.ndarray, h: float):
    """One Dormand-Prince step. Returns ``(y5, error_estimate)``."""
    k = [f(x, y)]
    for i in range(1, 7):
        yi = y.copy()
        for a, kj in zip(_A[i], k):
            if a:
                yi += h * a * kj
        k.append(f(x + _C[i] * h, yi))
    y5 = y.copy()
    err = np.zeros_like(y)
    for b, e, ki in zip(_B5, _E, k):
        if b:
            y5 += h * b * ki
        if e:
            err += h * e * ki
    return y5, err


@dataclass
class Solution:
    x: np.ndarray
    y: np.ndarray  # shape (n, dim)
    status: str  # "event", "end", "stopped", "step_failure"
    event_residual: Optional[float] = None
    n_rejected: int = 0
    messages: list = field(default_factory=list)


def integrate(f: Callable, x0: float, y0: Sequence[float], x_end: float, *,
              rtol: float = 1e-10, atol: float = 1e-10,
              event: Optional[Callable] = None, event_tol: float = 1e-10,
              arm_threshold: float = 1e-12, x_eval: Sequence[float] = (),
              max_step: float = math.inf, h0: Optional[float] = None,
              stop_when: Optional[Callable] = None) -> Solution:
    """Integrate ``y' = f(x, y)`` from ``x0`` towards ``x_end``.

    ``event(x, y)`` is a scalar; integration stops at its first downcrossing
    through zero once it has exceeded ``arm_threshold``.  The crossing is
    bisected until ``|event| <= event_tol`` or the bracket shrinks to floating
    point resolution.  ``stop_when(x, y)`` is checked after every accepted
    step and ends the run with status ``"stopped"``.  Every point of ``x_eval`` inside the integration range is
    hit exactly and appears among the returned samples.
    """
    y = np.array(y0, dtype=float)
    x = float(x0)
    targets = sorted(t for t in x_eval if x0 < t < x_end)
    ti = 0
    xs, ys = [x], [y.copy()]
    armed = event is not None and event(x, y) > arm_threshold
    g_old = event(x, y) if event is not None else None
    span = x_end - x0
    h = h0 if h0 is not None else min(max_step, 1e-3 * span, 1e-2)
    n_rej = 0
    while x < x_end:
        stop = targets[ti] if ti < len(targets) else x_end
        hit = False
        if x + h >= stop:
            h = stop - x
            hit = True
        if h <= 1e-14 * max(1.0, abs(x)):
            return Solution(np.array(xs), np.array(ys), "step_failure", n_rejected=n_rej,
                            messages=[f"step size underflow at x={x!r}"])
        y_new, err = dopri_step(f, x, y, h)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.max(np.abs(err) / scale)) if np.all(np.isfinite(y_new)) else math.inf
        if err_norm > 1.0:
            n_rej += 1
            factor = MIN_FACTOR if not math.isfinite(err_norm) else max(MIN_FACTOR, SAFETY * err_norm ** -0.2)
            h *= factor
            continue
        x_new = stop if hit else x + h
        if event is not None:
            g_new = event(x_new, y_new)
            if armed and g_old > 0.0 >= g_new:
                xe, ye, res = _locate(f, event, x, y, h, event_tol)
                xs.append(xe)
                ys.append(ye)
                return Solution(np.array(xs), np.array(ys), "event", res, n_rej)
            if not armed and g_new > arm_threshold:
                armed = True
            g_old = g_new
        x, y = x_new, y_new
        xs.append(x)
        ys.append(y.copy())
        if hit and ti < len(targets) and x == targets[ti]:
            ti += 1
        if stop_when is not None and stop_when(x, y):
            return Solution(np.array(xs), np.array(ys), "stopped", n_rejected=n_rej)
        factor = MAX_FACTOR if err_norm == 0.0 else min(MAX_FACTOR, SAFETY * err_norm ** -0.2)
        h = min(max_step, h * factor)
    return Solution(np.array(xs), np.array(ys), "end", n_rejected=n_rej)


def _locate(f, event, x, y, h, tol):
    lo, hi = 0.0, h
    y_hi, _ = dopri_step(f, x, y, h)
    best = (x + h, y_hi, abs(event(x + h, y_hi)))
    while True:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        y_mid, _ = dopri_step(f, x, y, mid)
        g = event(x + mid, y_mid)
        if abs(g) < best[2]:
            best = (x + mid, y_mid, abs(g))
        if abs(g) <= tol:
            break
        if g > 0.0:
            lo = mid
        else:
            hi = mid
    return best
