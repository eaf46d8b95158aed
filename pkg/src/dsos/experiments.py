"""Reproducible Monte Carlo campaigns comparing samplers with theory.

A campaign is described by an ExperimentSpec and produces a RunManifest plus
delimited data files and rendered figures under the output directory.  Samples
are drawn in fixed-size blocks, each with its own counter-derived RNG stream,
so results are bit-identical regardless of how many workers process the
blocks.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import airy, io, kernel, model, plots, sampler, shape
from .distributions import parse_distribution
from .model import InvalidInputError

MANIFEST_VERSION = 1
BLOCK = 250  # samples per RNG stream; fixed so output ignores the worker count

KINDS = ("universality", "shape", "kernel-validate", "corner", "tw-table",
         "sample")


@dataclass
class ExperimentSpec:
    """Declarative description of one campaign."""

    kind: str
    n: int = 50
    samples: int = 1000
    distributions: tuple = ("uniform",)
    line_s: float = 0.5
    seed: int = 0
    workers: int = 0  # 0 -> DSOS_WORKERS env var, else 1
    out: str = "run"
    resolution: int = 60
    couple_seeds: bool = False
    v_min: float = -6.0
    v_max: float = 3.0
    v_step: float = 0.1

    def __post_init__(self):
        self.distributions = tuple(self.distributions)
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown campaign kind {self.kind!r}")
        if self.n < 1 or self.samples < 0 or self.resolution < 2:
            raise InvalidInputError("counts must be positive")
        if self.kind in ("universality", "corner") and self.samples < 1:
            raise InvalidInputError("sampling campaigns need samples >= 1")
        if self.kind == "universality" and not 0 < self.line_s < 2:
            raise InvalidInputError("scaled line must lie in (0, 2)")
        if self.kind == "universality" and self.line_s == 1.0:
            raise InvalidInputError("scaled line S = 1 has a degenerate frame")
        for name in self.distributions:
            parse_distribution(name)  # fail before any sampling

    def to_dict(self) -> dict:
        d = asdict(self)
        d["distributions"] = list(self.distributions)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        return cls(**d)


@dataclass
class RunManifest:
    """Everything needed to reproduce and audit a campaign."""

    spec: dict
    version: int = MANIFEST_VERSION
    streams: list = field(default_factory=list)
    wall_time: float = 0.0
    summary: dict = field(default_factory=dict)
    files: list = field(default_factory=list)

    def save(self, path: str | Path) -> Path:
        return io.write_json(path, asdict(self))

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        d = io.read_json(path)
        if d.get("version") != MANIFEST_VERSION:
            raise io.ParseError(f"{path}: unsupported manifest version")
        return cls(**d)


# --- goodness-of-fit statistics --------------------------------------------

def ks_two_sample(a, b) -> float:
    """Exact sup distance between two empirical step CDFs."""
    a, b = np.sort(np.asarray(a, float)), np.sort(np.asarray(b, float))
    allv = np.concatenate([a, b])
    fa = np.searchsorted(a, allv, side="right") / a.size
    fb = np.searchsorted(b, allv, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_to_cdf(sample, cdf) -> float:
    """Sup distance between an empirical CDF and a continuous CDF."""
    v = np.sort(np.asarray(sample, float))
    f = np.asarray(cdf(v), float)
    n = v.size
    up = np.max(np.arange(1, n + 1) / n - f)
    dn = np.max(f - np.arange(0, n) / n)
    return float(max(up, dn))


# --- block-parallel sampling helpers ---------------------------------------

def _resolve_workers(spec: ExperimentSpec) -> int:
    if spec.workers > 0:
        return spec.workers
    return max(1, int(os.environ.get("DSOS_WORKERS", "1")))


def _blocks(total: int):
    return [(i, min(BLOCK, total - i * BLOCK))
            for i in range((total + BLOCK - 1) // BLOCK)]


def _run_blocks(fn, argss, workers: int):
    if workers <= 1 or len(argss) <= 1:
        return [fn(a) for a in argss]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, argss))


def _top_of_line_block(args):
    n, line, seed, stream, count = args
    rng = sampler.worker_rng(seed, stream)
    out = sampler.sample_uniform_lines_batch(n, count, rng, keep=[line])
    return out[line - 1][:, 0]


def _all_lines_block(args):
    n, seed, stream, count = args
    rng = sampler.worker_rng(seed, stream)
    return sampler.sample_uniform_lines_batch(n, count, rng)


def _mean_grid_block(args):
    n, seed, stream, count = args
    rng = sampler.worker_rng(seed, stream)
    acc = np.zeros((n, n))
    for _ in range(count):
        acc += model.lines_to_grid(sampler.sample_uniform_config(n, rng)).heights
    return acc


def _sample_top_line(spec: ExperimentSpec, line: int, namespace: int):
    workers = _resolve_workers(spec)
    argss = [(spec.n, line, spec.seed, namespace * 1_000_000 + b, c)
             for b, c in _blocks(spec.samples)]
    vals = np.concatenate(_run_blocks(_top_of_line_block, argss, workers))
    return vals, [a[3] for a in argss]


def _safe(name: str) -> str:
    return name.replace(":", "-").replace("/", "-")


def _tw_reference(lo: float, hi: float, pts: int = 90):
    xs = np.linspace(lo, hi, pts)
    ys = np.array([airy.tracy_widom_cdf(float(v)) for v in xs])
    return xs, ys


# --- campaigns --------------------------------------------------------------

def run_universality(spec: ExperimentSpec) -> RunManifest:
    """Edge-fluctuation universality: rescaled back-row maxima across laws.

    For each distribution, the top particle of the diagonal line nearest
    scaled position S is sampled (through the uniform-case sampler plus the
    quantile map), rescaled by the distribution's edge frame, and the
    empirical CDFs are compared pairwise and against the limiting law.
    """
    t0 = time.time()
    out = Path(spec.out)
    line = int(round(spec.line_s * spec.n))
    line = min(max(line, 1), 2 * spec.n - 1)
    manifest = RunManifest(spec=spec.to_dict())
    scaled = {}
    for di, name in enumerate(spec.distributions):
        d = parse_distribution(name)
        frame = airy.scaling_frame_general(spec.line_s, spec.n, d)
        # with coupled seeds every distribution reuses the same uniform-case
        # draws, realizing the quantile coupling between the laws
        u, streams = _sample_top_line(spec, line,
                                      0 if spec.couple_seeds else di)
        scaled[name] = np.asarray(frame.to_scaled(d.quantile(u)), float)
        manifest.streams.extend(streams)
        manifest.files.append(str(io.write_ecdf(
            out / f"ecdf_{_safe(name)}.csv", scaled[name])))
    names = list(spec.distributions)
    pairwise = {f"{a}|{b}": ks_two_sample(scaled[a], scaled[b])
                for i, a in enumerate(names) for b in names[i + 1:]}
    lo = min(v.min() for v in scaled.values()) - 0.5
    hi = max(v.max() for v in scaled.values()) + 0.5
    xs, ys = _tw_reference(lo, hi)
    ks_tw = {name: ks_to_cdf(v, lambda t: np.interp(t, xs, ys))
             for name, v in scaled.items()}
    manifest.summary = {
        "line": line,
        "pairwise_ks": pairwise,
        "ks_vs_limit": ks_tw,
    }
    manifest.files.append(str(plots.plot_ecdfs(
        out / "ecdf.png", scaled, reference=(xs, ys),
        xlabel="rescaled back-row maximum")))
    manifest.wall_time = time.time() - t0
    manifest.save(out / "manifest.json")
    return manifest


def run_kernel_validate(spec: ExperimentSpec) -> RunManifest:
    """Small-N oracle comparison of kernels against both exact samplers."""
    if spec.n > 4:
        raise InvalidInputError("kernel validation is restricted to n <= 4")
    t0 = time.time()
    out = Path(spec.out)
    n, m = spec.n, spec.samples
    ctx = kernel.KernelContext(n)
    workers = _resolve_workers(spec)
    argss = [(n, spec.seed, b, c) for b, c in _blocks(m)]
    parts = _run_blocks(_all_lines_block, argss, workers)
    lines = [np.concatenate([p[l] for p in parts]) for l in range(2 * n - 1)]

    bins = 50
    edges = np.linspace(0, 1, bins + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    off = np.array([-0.5 * math.sqrt(0.6), 0.0, 0.5 * math.sqrt(0.6)]) / bins
    wts = np.array([5.0, 8.0, 5.0]) / 18.0
    sup, emp_all, pred_all = {}, {}, {}
    for l in range(1, 2 * n):
        hist, _ = np.histogram(lines[l - 1].ravel(), bins=edges)
        emp = hist / lines[l - 1].shape[0] * bins
        pred = sum(w * kernel.kernel_K(ctx, l, mids + o, l, mids + o)
                   for o, w in zip(off, wts))
        sup[l] = float(np.max(np.abs(emp - pred)))
        emp_all[l], pred_all[l] = emp, pred

    e0 = kernel.gap_probability_E0(ctx, [(n, 0.7)])
    mc_e0 = float(np.mean(np.max(lines[n - 1], axis=1) < 0.7))

    rng = sampler.worker_rng(spec.seed, 999_999)
    grids = model.rejection_sample_batch(n, parse_distribution("uniform"), rng,
                                         count=min(m, 100_000),
                                         presort_rows=True)
    marg_ks = {}
    for l in range(1, 2 * n):
        diag = np.sort(np.diagonal(grids, offset=l - n, axis1=1, axis2=2),
                       axis=1)[:, ::-1]
        for j in range(diag.shape[1]):
            marg_ks[f"{l}:{j + 1}"] = ks_two_sample(diag[:, j],
                                                    lines[l - 1][:, j])

    manifest = RunManifest(spec=spec.to_dict(), streams=[a[2] for a in argss])
    manifest.summary = {
        "density_sup_error": {str(k): v for k, v in sup.items()},
        "gap_probability": {"kernel": e0, "mc": mc_e0, "abs_error": abs(e0 - mc_e0)},
        "sampler_cross_ks_max": max(marg_ks.values()),
    }
    manifest.files.append(str(io.write_table(
        out / "density_error.csv", ["line", "sup_error"], sup.items())))
    manifest.files.append(str(io.write_table(
        out / "marginal_ks.csv", ["line", "position", "ks"],
        ((int(k.split(":")[0]), int(k.split(":")[1]), v)
         for k, v in marg_ks.items()))))
    manifest.files.append(str(plots.plot_density_comparison(
        out / "density.png", mids, emp_all, pred_all)))
    manifest.wall_time = time.time() - t0
    manifest.save(out / "manifest.json")
    return manifest


def run_shape(spec: ExperimentSpec) -> RunManifest:
    """Limit-shape surface export, with an optional finite-N MC comparison."""
    t0 = time.time()
    out = Path(spec.out)
    xs, ys, h = shape.surface_grid(spec.resolution)
    rows = [(x, y, h[i, j]) for i, x in enumerate(xs) for j, y in enumerate(ys)]
    manifest = RunManifest(spec=spec.to_dict())
    manifest.files.append(str(io.write_table(out / "surface.csv",
                                             ["x", "y", "h"], rows)))
    manifest.files.append(str(plots.plot_surface(out / "surface.png", xs, ys, h)))
    anti = max(abs(shape.shape_height(x, 1 - x) - 0.5)
               for x in np.linspace(0.05, 0.95, 19))
    manifest.summary = {"antidiagonal_max_error": float(anti)}

    if spec.samples > 0:
        workers = _resolve_workers(spec)
        argss = [(spec.n, spec.seed, b, c) for b, c in _blocks(spec.samples)]
        acc = sum(_run_blocks(_mean_grid_block, argss, workers))
        mean = acc / spec.samples
        manifest.streams = [a[2] for a in argss]
        step = max(1, spec.n // 16)
        rows, devs = [], []
        for i in range(step, spec.n - step, step):
            for j in range(step, spec.n - step, step):
                x, y = (i + 0.5) / spec.n, (j + 0.5) / spec.n
                pred = shape.shape_height(x, y)
                dev = float(mean[i, j] - pred)
                rows.append((x, y, mean[i, j], pred, dev))
                devs.append(abs(dev))
        manifest.files.append(str(io.write_table(
            out / "mc_deviation.csv",
            ["x", "y", "mc_mean", "predicted", "deviation"], rows)))
        manifest.summary["mc_max_deviation"] = max(devs)
    manifest.wall_time = time.time() - t0
    manifest.save(out / "manifest.json")
    return manifest


def run_corner(spec: ExperimentSpec) -> RunManifest:
    """Corner-height extreme values: exact power law plus limit regimes.

    The corner x_NN is the global maximum, so its law is the i.i.d. power law
    for every distribution; the limiting regimes (and the scale needed to
    reach them) differ by distribution, which is the non-universal contrast
    to the edge-fluctuation campaign.
    """
    t0 = time.time()
    out = Path(spec.out)
    n = spec.n
    manifest = RunManifest(spec=spec.to_dict())
    summary = {}
    ecdfs = {}
    for di, name in enumerate(spec.distributions):
        d = parse_distribution(name)
        u, streams = _sample_top_line(spec, n, di)
        corner = np.asarray(d.quantile(u), float)
        manifest.streams.extend(streams)
        manifest.files.append(str(io.write_ecdf(
            out / f"corner_{_safe(name)}.csv", corner)))
        entry = {"ks_exact": ks_to_cdf(corner,
                                       lambda x: airy.corner_cdf(n, d, x))}
        if name == "uniform":
            t = n * n * (1.0 - corner)
            entry["ks_limit"] = ks_to_cdf(t, lambda v: -np.expm1(-np.maximum(v, 0)))
            ecdfs["uniform: N^2(1-x)"] = t
        elif name.startswith("exp"):
            rate = 1.0 if name == "exp" else float(name.split(":")[1])
            t = rate * corner - 2 * math.log(n)
            entry["ks_limit"] = ks_to_cdf(t, lambda v: np.exp(-np.exp(-v)))
            ecdfs["exp: x - 2 log N"] = t
        summary[name] = entry
    manifest.summary = summary
    if ecdfs:
        manifest.files.append(str(plots.plot_ecdfs(
            out / "corner.png", ecdfs, xlabel="rescaled corner height")))
    manifest.wall_time = time.time() - t0
    manifest.save(out / "manifest.json")
    return manifest


def run_tw_table(spec: ExperimentSpec) -> RunManifest:
    """Tabulate the limiting edge CDF on a configurable grid."""
    t0 = time.time()
    out = Path(spec.out)
    vs = np.arange(spec.v_min, spec.v_max + 0.5 * spec.v_step, spec.v_step)
    f2 = np.array([airy.tracy_widom_cdf(float(v)) for v in vs])
    manifest = RunManifest(spec=spec.to_dict())
    manifest.files.append(str(io.write_table(out / "tw.csv", ["v", "F2"],
                                             zip(vs, f2))))
    manifest.files.append(str(plots.plot_curve(out / "tw.png", vs, f2,
                                               "v", "F2(v)")))
    manifest.summary = {"points": int(vs.size),
                        "median_bracket": [float(vs[np.searchsorted(f2, 0.5) - 1]),
                                           float(vs[np.searchsorted(f2, 0.5)])]}
    manifest.wall_time = time.time() - t0
    manifest.save(out / "manifest.json")
    return manifest


def run_sample(spec: ExperimentSpec) -> RunManifest:
    """Draw configurations and write them as JSON lines."""
    t0 = time.time()
    out = Path(spec.out)
    d = parse_distribution(spec.distributions[0])
    out.mkdir(parents=True, exist_ok=True)
    path = out / "samples.jsonl"
    first = None
    streams = []
    with path.open("w") as fh:
        for b, count in _blocks(spec.samples):
            rng = sampler.worker_rng(spec.seed, b)
            streams.append(b)
            for _ in range(count):
                g = sampler.sample_config(spec.n, d, rng)
                if first is None:
                    first = g
                fh.write(model.grid_to_json(g) + "\n")
    manifest = RunManifest(spec=spec.to_dict(), streams=streams)
    manifest.files.append(str(path))
    if first is not None:
        manifest.files.append(str(plots.plot_heights(out / "sample.png",
                                                     first.heights)))
    manifest.summary = {"written": spec.samples}
    manifest.wall_time = time.time() - t0
    manifest.save(out / "manifest.json")
    return manifest


_RUNNERS = {
    "universality": run_universality,
    "shape": run_shape,
    "kernel-validate": run_kernel_validate,
    "corner": run_corner,
    "tw-table": run_tw_table,
    "sample": run_sample,
}


def run(spec: ExperimentSpec) -> RunManifest:
    """Dispatch a campaign to its runner."""
    return _RUNNERS[spec.kind](spec)
