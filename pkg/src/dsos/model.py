"""Core representations of the directed solid-on-solid model.

A configuration is an N x N field of heights, strictly increasing along rows
and up columns.  In diagonal-line coordinates the same configuration is a
system of 2N-1 descending sequences with strict interlacing between
neighbouring lines; grid monotonicity and interlacing are exactly equivalent
under the coordinate maps here.  The module also provides the exact
normalization constant, the joint density, and a brute-force rejection
sampler that serves as the distributional oracle for everything else.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import List

import numpy as np

from .distributions import HeightDistribution


class InvalidInputError(ValueError):
    pass


class ConstraintViolationError(ValueError):
    pass


class ResourceLimitError(RuntimeError):
    pass


@dataclass(frozen=True)
class GridConfig:
    """N x N height field; heights[i][j] is the height at row i, column j (0-based)."""

    n: int
    heights: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.heights, dtype=float)
        if h.shape != (self.n, self.n):
            raise InvalidInputError(f"heights must be {self.n}x{self.n}, got {h.shape}")
        object.__setattr__(self, "heights", h)


@dataclass(frozen=True)
class LineSystem:
    """Diagonal-line coordinates: 2N-1 strictly decreasing sequences.

    Line l (1-based) holds N - |l - N| values; the central line l = N holds N.
    """

    n: int
    lines: List[np.ndarray]

    def __post_init__(self):
        if len(self.lines) != 2 * self.n - 1:
            raise InvalidInputError(
                f"expected {2 * self.n - 1} lines, got {len(self.lines)}")
        lines = []
        for k, line in enumerate(self.lines):
            arr = np.asarray(line, dtype=float)
            want = line_size(self.n, k + 1)
            if arr.shape != (want,):
                raise InvalidInputError(
                    f"line {k + 1} must hold {want} values, got {arr.shape}")
            lines.append(arr)
        object.__setattr__(self, "lines", lines)


def line_size(n: int, l: int) -> int:
    """Number of particles on line l (1-based) of an N x N configuration."""
    if not 1 <= l <= 2 * n - 1:
        raise InvalidInputError(f"line index {l} out of range 1..{2 * n - 1}")
    return n - abs(l - n)


def validate_grid(g: GridConfig) -> bool:
    """True iff heights increase strictly along every row and up every column."""
    h = g.heights
    if not np.all(np.isfinite(h)):
        raise InvalidInputError("non-finite height entry")
    rows_ok = bool(np.all(np.diff(h, axis=1) > 0))
    cols_ok = bool(np.all(np.diff(h, axis=0) > 0))
    return rows_ok and cols_ok


def grid_to_lines(g: GridConfig) -> LineSystem:
    """Map grid entry x[i][j] (1-based) to line l = N + (j - i), sorted descending.

    Along a fixed diagonal the heights increase with the row index, so the
    descending order is deterministic and the map is exactly invertible.
    """
    if not validate_grid(g):
        raise ConstraintViolationError("grid violates monotonicity constraints")
    n, h = g.n, g.heights
    lines = []
    for l in range(1, 2 * n):
        c = l - n  # j - i offset, -(N-1) .. N-1
        diag = np.diagonal(h, offset=c)
        lines.append(diag[::-1].copy())  # increasing in i -> descending list
    return LineSystem(n=n, lines=lines)


def lines_to_grid(ls: LineSystem) -> GridConfig:
    """Inverse of grid_to_lines; bit-identical round trip."""
    if not interlacing_valid(ls):
        raise ConstraintViolationError("line system violates interlacing constraints")
    n = ls.n
    h = np.empty((n, n), dtype=float)
    for l in range(1, 2 * n):
        c = l - n
        vals = ls.lines[l - 1][::-1]  # ascending along the diagonal
        for k, v in enumerate(vals):
            i = k if c >= 0 else k - c
            j = i + c
            h[i, j] = v
    return GridConfig(n=n, heights=h)


def interlacing_valid(ls: LineSystem) -> bool:
    """True iff both strict interlacing chains hold.

    Left half (l <= N):  y[j+1 on l] < y[j on l-1] < y[j on l].
    Right half (l >= N): y[j+1 on l] < y[j on l+1] < y[j on l].
    """
    n = ls.n
    for line in ls.lines:
        if not np.all(np.isfinite(line)):
            raise InvalidInputError("non-finite line entry")
        if line.size > 1 and not np.all(np.diff(line) < 0):
            return False
    # growth side: line l-1 interlaces inside line l, for l = 2..N
    for l in range(2, n + 1):
        outer = ls.lines[l - 1]
        inner = ls.lines[l - 2]
        if not (np.all(inner < outer[:-1]) and np.all(inner > outer[1:])):
            return False
    # shrink side: line l+1 interlaces inside line l, for l = N..2N-2
    for l in range(n, 2 * n - 1):
        outer = ls.lines[l - 1]
        inner = ls.lines[l]
        if not (np.all(inner < outer[:-1]) and np.all(inner > outer[1:])):
            return False
    return True


@dataclass(frozen=True)
class NormalizationConstant:
    n: int
    value: Fraction

    @property
    def real(self) -> float:
        return float(self.value)


def normalization_constant(n: int) -> NormalizationConstant:
    """Exact acceptance probability of the monotonicity constraints.

    C(N) = prod_{j=0}^{N-1} j! / (N+j)!, equal to the inverse product of the
    hook lengths of the N x N Young diagram.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    value = Fraction(1)
    for j in range(n):
        value *= Fraction(math.factorial(j), math.factorial(n + j))
    return NormalizationConstant(n=n, value=value)


def hook_length_constant(n: int) -> Fraction:
    """Independent oracle: 1 / prod of hook lengths of the N x N diagram."""
    prod = 1
    for i in range(n):
        for j in range(n):
            prod *= (n - i - 1) + (n - j - 1) + 1
    return Fraction(1, prod)


def log_joint_density(g: GridConfig, d: HeightDistribution) -> float:
    """Log of the joint density; -inf for invalid configurations."""
    if not validate_grid(g):
        return -math.inf
    with np.errstate(divide="ignore"):
        logs = np.log(d.pdf(g.heights))
    if not np.all(np.isfinite(logs)):
        return -math.inf
    log_c = float(sum(math.lgamma(1 + j) - math.lgamma(g.n + j + 1) for j in range(g.n)))
    return float(np.sum(logs)) - log_c


def joint_density(g: GridConfig, d: HeightDistribution) -> float:
    """Joint PDF of the configuration; 0 for invalid configurations."""
    lp = log_joint_density(g, d)
    if lp < -745.0:  # exp underflows double precision
        return 0.0
    return math.exp(lp)


def rejection_sample(n: int, d: HeightDistribution, rng: np.random.Generator,
                     max_attempts: int = 100_000_000) -> GridConfig:
    """Exact sampler: draw N^2 i.i.d. heights, accept iff the grid is valid.

    Feasible only for small N (acceptance probability C(N)); the batched
    variant below is preferred for Monte Carlo campaigns.
    """
    batch = max(1, min(int(2.0 / normalization_constant(n).real), 200_000) // max(1, n * n))
    attempts = 0
    while attempts < max_attempts:
        take = max(1, min(batch, (max_attempts - attempts)))
        out = rejection_sample_batch(n, d, rng, proposals=take)
        attempts += take
        if out.shape[0] > 0:
            return GridConfig(n=n, heights=out[0])
    rate = normalization_constant(n).real
    raise ResourceLimitError(
        f"no acceptance in {attempts} attempts (expected rate {rate:.3g})")


def rejection_sample_batch(n: int, d: HeightDistribution, rng: np.random.Generator,
                           count: int | None = None, proposals: int | None = None,
                           presort_rows: bool = False) -> np.ndarray:
    """Vectorized rejection sampling; returns an array of accepted grids.

    If `count` is given, keeps proposing until that many are accepted.  With
    `presort_rows` each proposal's rows are sorted first, which leaves the
    accepted law unchanged (row-sorting is a bijection between orderings) and
    raises acceptance by (n!)^n.
    """
    if (count is None) == (proposals is None):
        raise InvalidInputError("pass exactly one of count, proposals")

    def propose(m: int) -> np.ndarray:
        u = rng.random((m, n, n))
        x = np.asarray(d.quantile(u), dtype=float)
        if presort_rows:
            x = np.sort(x, axis=2)
        rows = np.all(np.diff(x, axis=2) > 0, axis=(1, 2))
        cols = np.all(np.diff(x, axis=1) > 0, axis=(1, 2))
        return x[rows & cols]

    if proposals is not None:
        return propose(proposals)

    rate = normalization_constant(n).real
    if presort_rows:
        rate *= math.factorial(n) ** n
    accepted = []
    got = 0
    while got < count:
        m = int(min(5_000_000 // (n * n), max(1024, 1.3 * (count - got) / rate)))
        x = propose(m)
        accepted.append(x)
        got += x.shape[0]
    return np.concatenate(accepted)[:count]


def cdf_transform(ls: LineSystem, d: HeightDistribution) -> LineSystem:
    """Apply u = H(y) elementwise; interlacings are preserved by monotonicity."""
    for line in ls.lines:
        d.check_support(line)
    return LineSystem(n=ls.n, lines=[np.asarray(d.cdf(line), dtype=float)
                                     for line in ls.lines])


def inverse_transform(ls: LineSystem, d: HeightDistribution) -> LineSystem:
    """Apply y = H^-1(u) elementwise."""
    for line in ls.lines:
        arr = np.asarray(line)
        if np.any(arr < 0) or np.any(arr > 1):
            raise InvalidInputError("inverse transform input must lie in [0, 1]")
    return LineSystem(n=ls.n, lines=[np.asarray(d.quantile(line), dtype=float)
                                     for line in ls.lines])


# ---------------------------------------------------------------------------
# serialization

def grid_to_json(g: GridConfig) -> str:
    return json.dumps({"n": g.n, "heights": g.heights.tolist()})


def grid_from_json(text: str) -> GridConfig:
    obj = json.loads(text)
    try:
        n = int(obj["n"])
        heights = np.asarray(obj["heights"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed grid JSON: {exc}") from exc
    if heights.shape != (n, n):
        raise InvalidInputError(
            f"heights cardinality mismatch: n={n} but shape {heights.shape}")
    return GridConfig(n=n, heights=heights)


def lines_to_json(ls: LineSystem) -> str:
    return json.dumps({"n": ls.n, "lines": [line.tolist() for line in ls.lines]})


def lines_from_json(text: str) -> LineSystem:
    obj = json.loads(text)
    try:
        n = int(obj["n"])
        lines = [np.asarray(line, dtype=float) for line in obj["lines"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed lines JSON: {exc}") from exc
    if len(lines) != 2 * n - 1 or any(
            line.shape != (line_size(n, k + 1),) for k, line in enumerate(lines)):
        raise InvalidInputError("line cardinality mismatch")
    return LineSystem(n=n, lines=lines)


def save_grid(g: GridConfig, path: str | Path) -> None:
    Path(path).write_text(grid_to_json(g))


def load_grid(path: str | Path) -> GridConfig:
    return grid_from_json(Path(path).read_text())
