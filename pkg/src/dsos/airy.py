"""Soft-edge asymptotics for the height field.

Provides the Airy function, the extended (multi-time) Airy kernel, Fredholm
determinants over half-lines (Tracy-Widom as the single-time case), the
affine scaling frames that map raw heights near the edge of support to Airy
coordinates, the uniform Jacobi-polynomial edge expansion, and the corner
extreme-value law.  All determinants use the same block Nystrom scheme with
node doubling as the finite-size gap probabilities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special

from .distributions import HeightDistribution
from .jacobi import JacobiParams, jacobi_eval_log, log_jacobi_norm
from .kernel import QuadratureRule
from .model import InvalidInputError
from .sampler import NumericalError
from .shape import DomainError


def airy_ai(x):
    """Airy function Ai; accepts scalars or arrays, |x| <= 200."""
    arr = np.asarray(x, dtype=float)
    if np.any(np.abs(arr) > 200):
        raise DomainError("argument outside the supported range |x| <= 200")
    out = special.airy(arr)[0]
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def _airy_kernel_equal_time(X, Y):
    """Christoffel-Darboux form of the (single-time) Airy kernel, vectorized."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    ai_x, aip_x, _, _ = special.airy(X)
    ai_y, aip_y, _, _ = special.airy(Y)
    diff = X - Y
    near = np.abs(diff) < 1e-7
    safe = np.where(near, 1.0, diff)
    off = (ai_x * aip_y - aip_x * ai_y) / safe
    mid = 0.5 * (X + Y)
    ai_m, aip_m, _, _ = special.airy(mid)
    diag = aip_m ** 2 - mid * ai_m ** 2
    return np.where(near, diag, off)


def _kernel_block(Xs, s, Ys, t, nodes=240):
    """Matrix of extended-kernel values between two time slices.

    The u-integral is shared across all (X, Y) pairs by evaluating the Airy
    factors on a common Gauss-Legendre grid.  For s >= t the integrand decays
    at worst like Ai^2, so a fixed window [0, 40] bounds the tail below
    1e-12 for arguments above -15; for s < t the exponential factor sets the
    window.
    """
    Xs = np.atleast_1d(np.asarray(Xs, dtype=float))
    Ys = np.atleast_1d(np.asarray(Ys, dtype=float))
    if s == t:
        return _airy_kernel_equal_time(Xs[:, None], Ys[None, :])
    z, w = leggauss(nodes)
    if s > t:
        lo, hi = 0.0, 40.0
        sign = 1.0
    else:
        lo, hi = -min(35.0 / (t - s) + 5.0, 2000.0), 0.0
        sign = -1.0
    u = 0.5 * (hi - lo) * (z + 1) + lo
    w = 0.5 * (hi - lo) * w
    f = w * np.exp((t - s) * u)
    ai_x = special.airy(u[:, None] + Xs[None, :])[0]
    ai_y = special.airy(u[:, None] + Ys[None, :])[0]
    return sign * (ai_x.T @ (f[:, None] * ai_y))


def airy_process_kernel(X: float, s: float, Y: float, t: float) -> float:
    """Extended Airy kernel; reduces to the Christoffel-Darboux form at s=t."""
    if not all(map(math.isfinite, (X, s, Y, t))):
        raise InvalidInputError("kernel arguments must be finite")
    return float(_kernel_block([X], s, [Y], t)[0, 0])


def _det_at(times, thresholds, cutoff, m):
    blocks = len(times)
    nodes, weights, slices = [], [], []
    pos = 0
    for v in thresholds:
        z, w = leggauss(m)
        a, b = v, max(cutoff, v + 1.0)
        nodes.append(0.5 * (b - a) * (z + 1) + a)
        weights.append(0.5 * (b - a) * w)
        slices.append(slice(pos, pos + m))
        pos += m
    a = np.empty((pos, pos))
    for i in range(blocks):
        for j in range(blocks):
            blk = _kernel_block(nodes[i], times[i], nodes[j], times[j])
            sw = np.sqrt(weights[i])[:, None] * np.sqrt(weights[j])[None, :]
            a[slices[i], slices[j]] = sw * blk
    sign, logdet = np.linalg.slogdet(np.eye(pos) - a)
    return sign * math.exp(logdet)


def fredholm_det_airy(times, thresholds, quad: QuadratureRule | None = None,
                      tail: float = 14.0) -> float:
    """det(1 - K) of the extended Airy kernel on the union of (V_i, inf).

    Each half-line is truncated at max(V) + tail (the Airy-squared tail
    beyond is below 1e-12) and discretized by Gauss-Legendre nodes with
    symmetrized weights; node counts double until the determinant moves by
    less than the tolerance.
    """
    times = [float(s) for s in times]
    thresholds = [float(v) for v in thresholds]
    if len(times) != len(thresholds) or not times:
        raise InvalidInputError("times and thresholds must align, n >= 1")
    if any(a > b for a, b in zip(times, times[1:])):
        raise InvalidInputError("times must be nondecreasing")
    quad = quad or QuadratureRule()
    cutoff = max(thresholds) + tail
    m = quad.initial_nodes
    prev = _det_at(times, thresholds, cutoff, m)
    while 2 * m <= quad.max_nodes:
        m *= 2
        cur = _det_at(times, thresholds, cutoff, m)
        if abs(cur - prev) < quad.tol:
            return float(min(max(cur, 0.0), 1.0))
        prev = cur
    raise NumericalError(
        f"Fredholm determinant not converged at {m} nodes; "
        f"last values {prev:.12g}")


def tracy_widom_cdf(v: float, quad: QuadratureRule | None = None) -> float:
    """CDF of the scaled largest-height fluctuation (single-time marginal)."""
    if v > 10.0:
        return 1.0
    return fredholm_det_airy([0.0], [v], quad)


@dataclass(frozen=True)
class ScalingFrame:
    """Affine map between raw heights near the upper edge and Airy coordinates.

    X = (x - edge) * density_at_edge * N^(2/3) / sigma on the height axis and
    s = (S_x - S) * N^(1/3) / tau on the line axis.
    """

    s: float
    n: int
    edge: float
    sigma: float
    tau: float
    density_at_edge: float = 1.0

    def to_scaled(self, x):
        return (np.asarray(x, dtype=float) - self.edge) * \
            self.density_at_edge * self.n ** (2 / 3) / self.sigma

    def from_scaled(self, X):
        return self.edge + np.asarray(X, dtype=float) * self.sigma / (
            self.density_at_edge * self.n ** (2 / 3))

    def line_to_scaled(self, s_x):
        return (s_x - self.s) * self.n ** (1 / 3) / self.tau


def _sigma_tau(s: float):
    if not 0 < s < 2 or s == 1.0:
        raise DomainError("scaled line must lie in (0,2) with S != 1 "
                          "(degenerate scaling, sigma = 0)")
    root = math.sqrt(s * (2 - s))
    sigma = ((1 - s) ** 4 / (16 * root)) ** (1 / 3)
    tau = (1 - s) ** 2 * root / (2 * sigma)
    return sigma, tau


def scaling_frame_uniform(s: float, n: int) -> ScalingFrame:
    """Edge frame for uniform heights: edge at (1 + sqrt(S(2-S)))/2."""
    sigma, tau = _sigma_tau(s)
    edge = 0.5 * (1 + math.sqrt(s * (2 - s)))
    return ScalingFrame(s=s, n=n, edge=edge, sigma=sigma, tau=tau)


def scaling_frame_general(s: float, n: int, d: HeightDistribution) -> ScalingFrame:
    """Edge frame for a general height law: quantile-mapped edge, density rescale."""
    sigma, tau = _sigma_tau(s)
    edge = float(d.quantile(0.5 * (1 + math.sqrt(s * (2 - s)))))
    dens = float(d.pdf(edge))
    if not math.isfinite(edge) or dens <= 0:
        raise DomainError("height density must be positive and finite at the edge")
    return ScalingFrame(s=s, n=n, edge=edge, sigma=sigma, tau=tau,
                        density_at_edge=dens)


def johnstone_vars(n: int, a: float, b: float):
    """Edge-expansion variables (kappa, psi, gamma, M, sigma_n)."""
    kappa = 2 * n + a + b + 1
    psi = math.acos((a - b) / kappa)
    gamma = math.acos((a + b) / kappa)
    m_n = math.cos(psi + gamma)
    sigma_n = (2 * math.sin(psi + gamma) ** 4
               / (kappa ** 2 * math.sin(psi) * math.sin(gamma))) ** (1 / 3)
    return kappa, psi, gamma, m_n, sigma_n


def johnstone_check(n: int, a: float, b: float, X: float):
    """Uniform edge asymptotics of the shifted Jacobi polynomials.

    Evaluates the degree-n polynomial at x = (1 - M_n)/2 + sigma_n X / 2,
    strips the square-root prefactor of the expansion in log space, and
    returns the pair (scaled polynomial value, Ai(X)) whose difference is
    O(n^{-2/3}).
    """
    if n < 1 or a < 1 or b < 1:
        raise InvalidInputError("need n, a, b >= 1")
    kappa, _, _, m_n, sigma_n = johnstone_vars(n, a, b)
    x = (1 - m_n) / 2 + sigma_n * X / 2
    if not 0 < x < 1:
        raise DomainError(f"expansion point {x} outside (0, 1)")
    p = JacobiParams(n=n, a=a, b=b)
    log_p, sign = jacobi_eval_log(p, x)
    log_pref = 0.5 * (math.log(kappa) + math.log(sigma_n) + log_jacobi_norm(p)
                      - math.log(2) - (a + 1) * math.log(x)
                      - (b + 1) * math.log(1 - x))
    scaled = float(sign) * math.exp(float(log_p) - log_pref)
    return scaled, airy_ai(X)


def corner_cdf(n: int, d: HeightDistribution, x):
    """CDF of the corner height x_NN: H(x)^(N^2).

    The corner is the global maximum of all N^2 heights, and the ordering
    constraints do not bind the event {max < x}, so the i.i.d. power law is
    exact at every N.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    h = np.asarray(d.cdf(x), dtype=float)
    out = h ** (n * n)
    return float(out) if np.ndim(x) == 0 else out
