"""Height distributions: PDF / CDF / quantile triples used to sample the model.

Built-ins cover the uniform, exponential and power-law (Beta(a,1)) cases;
arbitrary absolutely continuous laws can be supplied through a tabulated CDF
with monotone interpolation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator


class SupportError(ValueError):
    """A value fell outside the support of the distribution."""


@dataclass(frozen=True)
class HeightDistribution:
    """An absolutely continuous law on an interval, with explicit quantile.

    The quantile function is the exact inverse of the CDF; samplers apply it
    to uniform draws, so `cdf(quantile(u)) == u` must hold to high accuracy.
    """

    name: str
    pdf: Callable[[np.ndarray], np.ndarray]
    cdf: Callable[[np.ndarray], np.ndarray]
    quantile: Callable[[np.ndarray], np.ndarray]
    support: Tuple[float, float]

    def check_support(self, x: np.ndarray) -> None:
        lo, hi = self.support
        x = np.asarray(x, dtype=float)
        if np.any(x < lo) or np.any(x > hi):
            raise SupportError(f"value outside support [{lo}, {hi}] of {self.name}")

    def __repr__(self) -> str:  # keep manifests readable
        return f"HeightDistribution({self.name!r})"


def uniform() -> HeightDistribution:
    return HeightDistribution(
        name="uniform",
        pdf=lambda x: np.where((np.asarray(x) >= 0) & (np.asarray(x) <= 1), 1.0, 0.0),
        cdf=lambda x: np.clip(np.asarray(x, dtype=float), 0.0, 1.0),
        quantile=lambda u: np.asarray(u, dtype=float),
        support=(0.0, 1.0),
    )


def exponential(rate: float = 1.0) -> HeightDistribution:
    if rate <= 0:
        raise ValueError("rate must be positive")

    def _pdf(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, rate * np.exp(-rate * x), 0.0)

    def _cdf(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, -np.expm1(-rate * x), 0.0)

    def _quantile(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return -np.log1p(-u) / rate

    return HeightDistribution(
        name=f"exp:{rate:g}" if rate != 1.0 else "exp",
        pdf=_pdf, cdf=_cdf, quantile=_quantile,
        support=(0.0, math.inf),
    )


def beta_power(a: float) -> HeightDistribution:
    """Beta(a, 1): density a x^(a-1) on [0, 1]."""
    if a <= 0:
        raise ValueError("shape must be positive")

    def _pdf(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = a * np.power(x, a - 1.0)
        return np.where((x >= 0) & (x <= 1), v, 0.0)

    return HeightDistribution(
        name=f"beta:{a:g}",
        pdf=_pdf,
        cdf=lambda x: np.clip(np.asarray(x, dtype=float), 0.0, 1.0) ** a,
        quantile=lambda u: np.asarray(u, dtype=float) ** (1.0 / a),
        support=(0.0, 1.0),
    )


def from_table(values: np.ndarray, cdf_values: np.ndarray, name: str = "table") -> HeightDistribution:
    """Build a distribution from tabulated (x, H(x)) pairs.

    Uses monotone (PCHIP) interpolation for the CDF and its inverse; the PDF
    is the interpolant's derivative.
    """
    x = np.asarray(values, dtype=float)
    h = np.asarray(cdf_values, dtype=float)
    if x.ndim != 1 or x.shape != h.shape or x.size < 3:
        raise ValueError("need matching 1-d arrays with at least 3 points")
    if np.any(np.diff(x) <= 0) or np.any(np.diff(h) <= 0):
        raise ValueError("table must be strictly increasing in both columns")
    if abs(h[0]) > 1e-12 or abs(h[-1] - 1.0) > 1e-12:
        raise ValueError("CDF column must run from 0 to 1")
    h = h.copy()
    h[0], h[-1] = 0.0, 1.0
    cdf_i = PchipInterpolator(x, h)
    quant_i = PchipInterpolator(h, x)
    pdf_i = cdf_i.derivative()
    return HeightDistribution(
        name=name,
        pdf=lambda v: np.clip(pdf_i(np.clip(v, x[0], x[-1])), 0.0, None),
        cdf=lambda v: np.clip(cdf_i(np.clip(v, x[0], x[-1])), 0.0, 1.0),
        quantile=lambda u: quant_i(np.clip(u, 0.0, 1.0)),
        support=(float(x[0]), float(x[-1])),
    )


def from_table_file(path: str | Path, name: str | None = None) -> HeightDistribution:
    """Read a two-column (value, cdf) CSV table."""
    data = np.loadtxt(path, delimiter=",", comments="#")
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns value,cdf")
    return from_table(data[:, 0], data[:, 1], name=name or f"table:{path}")


def parse_distribution(spec: str) -> HeightDistribution:
    """Parse a CLI descriptor: uniform | exp | exp:<rate> | beta:<a> | table:<path>."""
    if spec == "uniform":
        return uniform()
    if spec == "exp":
        return exponential()
    if spec.startswith("exp:"):
        return exponential(float(spec[4:]))
    if spec.startswith("beta:"):
        return beta_power(float(spec[5:]))
    if spec.startswith("table:"):
        return from_table_file(spec[6:])
    raise ValueError(f"unknown distribution descriptor {spec!r}")
