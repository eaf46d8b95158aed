"""Deterministic large-N surface of the model.

In diagonal coordinates a line labelled S in (0, 2) carries a particle
density supported on [c_S, d_S]; integrating it gives an implicit equation
for the limiting height h(x, y) inside the unit square.  The closed form
below carries a corrected sign on the arctan term relative to the naive
transcription: differentiating the corrected form in h reproduces the
density exactly, and the quadrature tests pin this down.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.integrate import quad

from .distributions import HeightDistribution


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class ShapeQuery:
    """Interior point (x, y) with its line coordinates (S, t) and edge data."""

    x: float
    y: float

    def __post_init__(self):
        if not (0.0 < self.x < 1.0 and 0.0 < self.y < 1.0):
            raise DomainError("(x, y) must lie strictly inside the unit square")

    @property
    def s(self) -> float:
        return 1.0 + self.x - self.y

    @property
    def t(self) -> float:
        return self.x / self.s

    @property
    def d_tilde(self) -> float:
        return math.sqrt(self.s * (2.0 - self.s))


def support_bounds(s: float) -> Tuple[float, float]:
    """Support [c_S, d_S] of the line density for the uniform case."""
    if not 0.0 < s < 2.0:
        raise DomainError("S must lie in (0, 2)")
    half = 0.5 * math.sqrt(s * (2.0 - s))
    return 0.5 - half, 0.5 + half


def density_rho1(y, s: float):
    """Scaled one-point density on line S; zero outside the open support."""
    c, d = support_bounds(s)
    y = np.asarray(y, dtype=float)
    inside = (y > c) & (y < d)
    out = np.zeros_like(y)
    yy = np.where(inside, y, 0.5)
    out = np.where(inside,
                   np.sqrt(np.maximum((d - yy) * (yy - c), 0.0))
                   / (np.pi * yy * (1.0 - yy)),
                   0.0)
    if out.ndim == 0:
        return float(out)
    return out


def density_mass(s: float) -> float:
    """Integral of the line density over its support: min(S, 2-S).

    Uses the substitution y = (c+d)/2 + (d-c)/2 * sin(theta) to remove the
    square-root endpoint singularities.
    """
    c, d = support_bounds(s)
    mid, half = 0.5 * (c + d), 0.5 * (d - c)

    def integrand(theta):
        y = mid + half * math.sin(theta)
        return density_rho1(y, s) * half * math.cos(theta)

    val, _ = quad(integrand, -math.pi / 2, math.pi / 2, epsabs=1e-12, limit=200)
    return val


def _ts_of_v(v: float, d_tilde: float) -> float:
    """Closed form of the partial density integral t*S as a function of v.

    v = (2h - 1)/d_tilde in [-1, 1].  The arctan term enters with a minus
    sign (its derivative check against the density fixes the sign).
    """
    v = min(1.0, max(-1.0, v))
    root = math.sqrt(max(1.0 - d_tilde * d_tilde, 0.0))
    if v <= -1.0 + 1e-16:
        return 0.0
    if v >= 1.0 - 1e-16:
        at = math.pi / 2
    else:
        at = math.atan(root * v / math.sqrt(1.0 - v * v))
    return (math.asin(v) + math.pi / 2 - root * (at + math.pi / 2)) / math.pi


def shape_height(x: float, y: float) -> float:
    """Limiting height at an interior point of the unit square.

    Solved by bisection in v over [-1, 1]; the closed form is monotone in v.
    Points with S > 1 are mapped through the transpose symmetry h(x,y)=h(y,x).
    """
    q = ShapeQuery(x, y)
    if q.s > 1.0:
        return shape_height(y, x)
    s, t, dt = q.s, q.t, q.d_tilde
    target = t * s
    lo, hi = -1.0 + 1e-12, 1.0 - 1e-12
    flo = _ts_of_v(lo, dt) - target
    fhi = _ts_of_v(hi, dt) - target
    if flo > 0:
        return 0.5 * (1.0 + lo * dt)  # at the frozen boundary
    if fhi < 0:
        return 0.5 * (1.0 + hi * dt)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if _ts_of_v(mid, dt) - target > 0:
            hi = mid
        else:
            lo = mid
    v = 0.5 * (lo + hi)
    return 0.5 * (1.0 + v * dt)


def partial_mass(s: float, h: float) -> float:
    """Quadrature oracle for the integral of the density from c_S to h."""
    c, d = support_bounds(s)
    h = min(max(h, c), d)
    va = -1.0
    vb = (2.0 * h - 1.0) / math.sqrt(s * (2.0 - s))
    vb = min(1.0, max(-1.0, vb))

    def integrand(theta):
        v = math.sin(theta)
        yy = 0.5 * (1.0 + v * math.sqrt(s * (2.0 - s)))
        return density_rho1(yy, s) * 0.5 * math.sqrt(s * (2.0 - s)) * math.cos(theta)

    val, _ = quad(integrand, math.asin(va), math.asin(vb), epsabs=1e-12, limit=200)
    return val


def boundary_profiles(x: float) -> Tuple[float, float, float, float]:
    """Limiting heights (h(x,1), h(1,x), h(x,0), h(0,x)) along the four edges."""
    if not 0.0 <= x <= 1.0:
        raise DomainError("x must lie in [0, 1]")
    back = 0.5 * (1.0 + math.sqrt(x * (2.0 - x)))
    front = 0.5 * (1.0 - math.sqrt(max(1.0 - x * x, 0.0)))
    return back, back, front, front


def support_general(s: float, d: HeightDistribution) -> Tuple[float, float]:
    """Support endpoints for a general height distribution via the quantile."""
    c, dd = support_bounds(s)
    hi = float(d.quantile(dd))
    if not math.isfinite(hi):
        raise DomainError("upper support endpoint diverges (S=1 with unbounded law?)")
    return float(d.quantile(c)), hi


def surface_grid(resolution: int = 60) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Height surface sampled on an interior grid (for CSV export and plots)."""
    xs = np.linspace(0, 1, resolution + 2)[1:-1]
    ys = xs.copy()
    h = np.empty((resolution, resolution))
    for i, yv in enumerate(ys):
        for j, xv in enumerate(xs):
            h[i, j] = shape_height(xv, yv)
    return xs, ys, h
