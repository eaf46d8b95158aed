"""Exact configuration sampling via random corank-1 projections.

Each line of the configuration is obtained from the previous one as the
zeros of a random rational function sum_i q_i / (x - a_i), where the poles
are the previous line's values (padded with 0 and 1 during the growth phase)
and the weights q are Dirichlet with the pole multiplicities as parameters.
The zeros strictly interlace the poles, so the construction is acceptance
free and exact for uniformly distributed heights; a general distribution is
reached through its quantile function.

All heavy paths are vectorized across a batch of independent configurations,
which matters on a single core.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .distributions import HeightDistribution, uniform
from .model import (GridConfig, InvalidInputError, LineSystem, inverse_transform,
                    lines_to_grid)

_BISECT_ITERS = 50  # brackets start below width 1, so final width < 1e-15
_MIN_POLE_GAP = 1e-13


class NumericalError(RuntimeError):
    pass


@dataclass(frozen=True)
class SpectrumState:
    """Distinct eigenvalues with multiplicities of the current diagonal matrix."""

    poles: np.ndarray
    multiplicities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.poles, dtype=float)
        s = np.asarray(self.multiplicities, dtype=int)
        if p.ndim != 1 or p.shape != s.shape or p.size == 0:
            raise InvalidInputError("poles and multiplicities must match, nonempty")
        if np.any(np.diff(p) <= 0):
            raise InvalidInputError("poles must be strictly increasing")
        if np.any(s < 1):
            raise InvalidInputError("multiplicities must be positive integers")
        object.__setattr__(self, "poles", p)
        object.__setattr__(self, "multiplicities", s)


def dirichlet_sample(s: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    """Dirichlet D[s_1,...,s_m] via normalized Gamma draws."""
    s = np.asarray(s, dtype=float)
    if s.size == 0:
        raise InvalidInputError("empty multiplicity vector")
    g = rng.gamma(shape=s)
    while np.any(g.sum() <= 0):  # essentially impossible, but keep the invariant
        g = rng.gamma(shape=s)
    return g / g.sum()


def _secular_roots_numpy(poles: np.ndarray, q: np.ndarray) -> np.ndarray:
    lo = poles[:, :-1].copy()
    hi = poles[:, 1:].copy()
    a = poles[:, None, :]
    w = q[:, None, :]
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        f = np.sum(w / (mid[:, :, None] - a), axis=2)
        pos = f > 0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    return 0.5 * (lo + hi)


try:
    from numba import njit

    @njit(cache=True)
    def _secular_roots_jit(poles, q):  # pragma: no cover - numerics tested via wrapper
        nb, m = poles.shape
        roots = np.empty((nb, m - 1))
        for b in range(nb):
            for j in range(m - 1):
                lo = poles[b, j]
                hi = poles[b, j + 1]
                for _ in range(_BISECT_ITERS):
                    if hi - lo < 1e-15:
                        break
                    mid = 0.5 * (lo + hi)
                    f = 0.0
                    for i in range(m):
                        f += q[b, i] / (mid - poles[b, i])
                    if f > 0.0:
                        lo = mid
                    else:
                        hi = mid
                roots[b, j] = 0.5 * (lo + hi)
        return roots

    def _secular_roots_batch(poles: np.ndarray, q: np.ndarray) -> np.ndarray:
        return _secular_roots_jit(np.ascontiguousarray(poles),
                                  np.ascontiguousarray(q))
except ImportError:  # pragma: no cover
    _secular_roots_batch = _secular_roots_numpy

_secular_roots_batch.__doc__ = """Roots of sum_i q_i/(x - a_i) for a batch: poles, q of shape (B, m).

The function is strictly decreasing from +inf to -inf on each open interval
between consecutive poles, so bisection brackets never fail.  Returns roots
of shape (B, m-1), ascending.
"""


def secular_roots(poles: Sequence[float], q: Sequence[float]) -> np.ndarray:
    """Zeros of the random rational function for one weight vector."""
    p = np.asarray(poles, dtype=float)
    w = np.asarray(q, dtype=float)
    if p.ndim != 1 or p.shape != w.shape or p.size < 2:
        raise InvalidInputError("need matching pole/weight vectors of length >= 2")
    if np.any(np.diff(p) <= 0):
        raise InvalidInputError("poles must be strictly increasing (coincident poles?)")
    if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-10:
        raise InvalidInputError("weights must be positive and sum to 1")
    roots = _secular_roots_batch(p[None, :], w[None, :])[0]
    if np.any(roots <= p[:-1]) or np.any(roots >= p[1:]):
        raise NumericalError("bracket failure in secular root search")
    return roots


def corank1_step(state: SpectrumState, rng: np.random.Generator) -> np.ndarray:
    """One corank-1 projection: Dirichlet weights, then the secular zeros."""
    q = dirichlet_sample(state.multiplicities, rng)
    return secular_roots(state.poles, q)


def sample_uniform_lines_batch(n: int, count: int, rng: np.random.Generator,
                               keep: Sequence[int] | None = None,
                               ) -> List[np.ndarray | None]:
    """Sample `count` uniform-case line systems at once.

    Returns a list indexed by line (1-based line l at position l-1); entry l-1
    is an array of shape (count, N(l)) with each row descending, or None if l
    was not requested via `keep`.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    keep_set = set(range(1, 2 * n)) if keep is None else set(keep)
    if keep_set and (min(keep_set) < 1 or max(keep_set) > 2 * n - 1):
        raise InvalidInputError("requested line out of range")
    last = max(keep_set, default=0)  # construction can stop once this is stored
    out: List[np.ndarray | None] = [None] * (2 * n - 1)
    prev = None  # ascending values of the current line, shape (count, m)
    for r in range(1, n + 1):  # growth: line r has r values
        pad = n - r + 1
        if r == 1:
            poles = np.tile(np.array([0.0, 1.0]), (count, 1))
            mult = np.array([float(pad), float(pad)])
        else:
            poles = np.concatenate(
                [np.zeros((count, 1)), prev, np.ones((count, 1))], axis=1)
            mult = np.concatenate([[float(pad)], np.ones(r - 1), [float(pad)]])
        prev = _step(poles, np.broadcast_to(mult, poles.shape), rng)
        if r in keep_set:
            out[r - 1] = prev[:, ::-1].copy()
        if r >= last:
            return out
    for r in range(1, n):  # shrink: line N+r has N-r values
        prev = _step(prev, np.ones_like(prev), rng)
        if n + r in keep_set:
            out[n + r - 1] = prev[:, ::-1].copy()
        if n + r >= last:
            return out
    return out


def _step(poles: np.ndarray, mult: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    gaps = np.min(np.diff(poles, axis=1), axis=1)
    bad = gaps < _MIN_POLE_GAP
    if np.any(bad):  # floating-point coalescence: probability ~0, resample below
        raise NumericalError("pole coalescence; resample the configuration")
    g = rng.gamma(shape=np.ascontiguousarray(mult))
    q = g / g.sum(axis=1, keepdims=True)
    return _secular_roots_batch(poles, q)


def sample_uniform_config(n: int, rng: np.random.Generator) -> LineSystem:
    """One exact uniform-case configuration in line coordinates."""
    for _ in range(4):
        try:
            lines = sample_uniform_lines_batch(n, 1, rng)
            return LineSystem(n=n, lines=[arr[0] for arr in lines])
        except NumericalError:
            continue
    raise NumericalError("repeated pole coalescence; check the RNG stream")


def sample_config(n: int, d: HeightDistribution, rng: np.random.Generator) -> GridConfig:
    """Exact sampler for a general height distribution via the quantile map."""
    ls = sample_uniform_config(n, rng)
    if d.name != uniform().name:
        ls = inverse_transform(ls, d)
    return lines_to_grid(ls)


def worker_rng(master_seed: int, worker: int) -> np.random.Generator:
    """Reproducible per-worker stream, independent of scheduling order."""
    return np.random.default_rng(np.random.SeedSequence(
        entropy=master_seed, spawn_key=(worker,)))
