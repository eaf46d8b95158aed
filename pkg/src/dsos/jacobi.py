"""Jacobi polynomials rescaled to [0, 1] and their orthogonality norms.

The kernel machinery uses P~_n^{(a,b)}(x) = P_n^{(a,b)}(1 - 2x), orthogonal
on [0, 1] against the weight x^a (1 - x)^b.  Evaluation goes through the
standard three-term recurrence in z = 1 - 2x; for large degree-plus-parameter
combinations the recurrence is carried in a rescaled form that tracks an
accumulated log magnitude, so no intermediate overflows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .model import InvalidInputError

_LOG_FORM_THRESHOLD = 150
_RESCALE_AT = 1e120


@dataclass(frozen=True)
class JacobiParams:
    """Degree and weight parameters of one rescaled Jacobi polynomial."""

    n: int
    a: float
    b: float

    def __post_init__(self):
        if self.n < 0:
            raise InvalidInputError("degree must be >= 0")
        if self.a < 0 or self.b < 0:
            raise InvalidInputError("weight parameters must be >= 0")


def _recurrence(n: int, a: float, b: float, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Three-term recurrence with dynamic rescaling.

    Returns (scaled value, accumulated log scale) so that
    P_n(z) = value * exp(log_scale) elementwise.
    """
    z = np.asarray(z, dtype=float)
    logs = np.zeros_like(z)
    p_prev = np.ones_like(z)
    if n == 0:
        return p_prev, logs
    p_cur = (a + 1.0) + (a + b + 2.0) * (z - 1.0) / 2.0
    for k in range(2, n + 1):
        c0 = 2.0 * k * (k + a + b) * (2.0 * k + a + b - 2.0)
        c1 = (2.0 * k + a + b - 1.0)
        c2 = (2.0 * k + a + b) * (2.0 * k + a + b - 2.0)
        c3 = a * a - b * b
        c4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * (2.0 * k + a + b)
        p_next = (c1 * (c2 * z + c3) * p_cur - c4 * p_prev) / c0
        p_prev, p_cur = p_cur, p_next
        big = np.abs(p_cur) > _RESCALE_AT
        if np.any(big):
            scale = np.where(big, np.abs(p_cur), 1.0)
            logs = logs + np.log(scale)
            p_cur = p_cur / scale
            p_prev = p_prev / scale
    return p_cur, logs


def jacobi_eval(p: JacobiParams, x) -> np.ndarray | float:
    """P~_n^{(a,b)}(x) for x in [0, 1]; overflows to +-inf only when the
    true value exceeds double range."""
    x = np.asarray(x, dtype=float)
    val, logs = _recurrence(p.n, p.a, p.b, 1.0 - 2.0 * x)
    with np.errstate(over="ignore"):
        out = val * np.exp(logs)
    if out.ndim == 0:
        return float(out)
    return out


def jacobi_eval_log(p: JacobiParams, x) -> Tuple[np.ndarray, np.ndarray]:
    """(log|P~_n(x)|, sign) for stable products with huge/tiny cofactors."""
    x = np.asarray(x, dtype=float)
    val, logs = _recurrence(p.n, p.a, p.b, 1.0 - 2.0 * x)
    sign = np.sign(val)
    with np.errstate(divide="ignore"):
        logabs = np.where(val != 0.0, np.log(np.abs(np.where(val != 0.0, val, 1.0))) + logs,
                          -np.inf)
    return logabs, sign


def jacobi_norm(p: JacobiParams) -> float:
    """Squared weighted L2 norm of P~_n^{(a,b)} on [0, 1]."""
    n, a, b = p.n, p.a, p.b
    if n + a + 1 <= 0 or n + b + 1 <= 0 or n + a + b + 1 <= 0:
        raise InvalidInputError("norm requires nonnegative factorial arguments")
    log_norm = (math.lgamma(n + a + 1) + math.lgamma(n + b + 1)
                - math.lgamma(n + 1) - math.lgamma(n + a + b + 1)
                - math.log(2 * n + a + b + 1))
    return math.exp(log_norm)


def log_jacobi_norm(p: JacobiParams) -> float:
    n, a, b = p.n, p.a, p.b
    return (math.lgamma(n + a + 1) + math.lgamma(n + b + 1)
            - math.lgamma(n + 1) - math.lgamma(n + a + b + 1)
            - math.log(2 * n + a + b + 1))


def needs_log_form(p: JacobiParams) -> bool:
    """Heuristic switch point beyond which plain evaluation may overflow."""
    return p.n + p.a + p.b > _LOG_FORM_THRESHOLD
