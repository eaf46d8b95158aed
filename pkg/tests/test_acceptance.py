"""End-to-end acceptance gate.

One test per acceptance criterion; each prints a single pass/fail line with
the measured quantities, bypassing capture so the verdicts always appear in
the run log.
"""
import math

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from dsos import airy, kernel, model, sampler, shape
from dsos.distributions import beta_power, exponential, uniform
from dsos.experiments import ExperimentSpec, ks_two_sample, run
from dsos.kernel import QuadratureRule


@pytest.fixture
def report(capsys):
    def _report(num, desc, ok, detail=""):
        with capsys.disabled():
            print(f"\n[criterion {num:02d}] {'PASS' if ok else 'FAIL'} "
                  f"{desc}: {detail}")
        assert ok, f"criterion {num:02d} {desc}: {detail}"
    return _report


def _valid_grid(n, rng):
    g = rng.exponential(size=(n, n))
    h = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            left = h[i, j - 1] if j else 0.0
            below = h[i - 1, j] if i else 0.0
            h[i, j] = max(left, below) + g[i, j]
    return model.GridConfig(n=n, heights=h / (1.0 + h.max()))


def test_criterion_01_normalization(report):
    exact = all(model.normalization_constant(n).value
                == model.hook_length_constant(n) for n in range(1, 7))
    rng = np.random.default_rng(101)
    m = 1_000_000
    acc = model.rejection_sample_batch(2, uniform(), rng, proposals=m).shape[0]
    p = 1 / 12
    dev = abs(acc / m - p) / math.sqrt(p * (1 - p) / m)
    report(1, "normalization constant", exact and dev < 3,
           f"hook oracle exact N<=6: {exact}; acceptance z={dev:.2f}")


def test_criterion_02_coordinate_equivalence(report):
    rng = np.random.default_rng(102)
    failures = 0
    trials = 0
    for n in (2, 3, 4, 5, 6):
        for _ in range(1600):
            g = _valid_grid(n, rng)
            ls = model.grid_to_lines(g)
            if not (model.interlacing_valid(ls)
                    and np.array_equal(model.lines_to_grid(ls).heights,
                                       g.heights)):
                failures += 1
            trials += 1
    for n in (2, 3, 4):
        for _ in range(700):
            h = _valid_grid(n, rng).heights.copy()
            i, j = rng.integers(0, n, size=2)
            h[i, j] += rng.normal(scale=0.3)
            valid = model.validate_grid(model.GridConfig(n, h))
            lines = [np.sort(np.diagonal(h, offset=l - n))[::-1]
                     for l in range(1, 2 * n)]
            try:
                inter = model.interlacing_valid(model.LineSystem(n, lines))
            except model.InvalidInputError:
                inter = False
            if valid != inter:
                failures += 1
            trials += 1
    report(2, "grid/line coordinate equivalence", failures == 0,
           f"{trials} randomized checks, {failures} failures")


def test_criterion_03_sampler_law(report):
    rng = np.random.default_rng(103)
    m = 100_000
    lines = sampler.sample_uniform_lines_batch(2, m, rng)
    grids = model.rejection_sample_batch(2, uniform(), rng, count=m,
                                         presort_rows=True)
    pairs = [(lines[0][:, 0], grids[:, 1, 0]),
             (lines[1][:, 0], grids[:, 1, 1]),
             (lines[1][:, 1], grids[:, 0, 0]),
             (lines[2][:, 0], grids[:, 0, 1])]
    ks = max(ks_two_sample(a, b) for a, b in pairs)
    gap2 = float(np.mean((lines[1][:, 0] - lines[1][:, 1]) ** 2))
    ok = ks < 0.02 and abs(gap2 - 0.4) < 0.01
    report(3, "corank-1 sampler vs rejection oracle", ok,
           f"max marginal KS={ks:.4f} (<0.02), E[(y1-y2)^2]={gap2:.4f} (0.400±0.010)")


def test_criterion_04_kernel_correctness(report):
    n, m = 3, 1_000_000
    ctx = kernel.KernelContext(n)
    rng = np.random.default_rng(104)
    lines = sampler.sample_uniform_lines_batch(n, m, rng)
    bins = 50
    edges = np.linspace(0, 1, bins + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    off = np.array([-0.5 * math.sqrt(0.6), 0.0, 0.5 * math.sqrt(0.6)]) / bins
    wts = np.array([5.0, 8.0, 5.0]) / 18.0
    sup = 0.0
    for l in range(1, 2 * n):
        hist, _ = np.histogram(lines[l - 1].ravel(), bins=edges)
        emp = hist / m * bins
        pred = sum(w * kernel.kernel_K(ctx, l, mids + o, l, mids + o)
                   for o, w in zip(off, wts))
        sup = max(sup, float(np.max(np.abs(emp - pred))))
    z, w = leggauss(200)
    x, w = 0.5 * (z + 1), 0.5 * w
    count_err = max(abs(float(np.sum(w * kernel.kernel_K(ctx, l, x, l, x)))
                        - model.line_size(n, l)) for l in range(1, 2 * n))
    e0 = kernel.gap_probability_E0(ctx, [(n, 0.7)])
    mc = float(np.mean(np.max(lines[n - 1], axis=1) < 0.7))
    ok = sup < 0.05 and count_err < 1e-6 and abs(e0 - mc) < 0.01
    report(4, "finite-size kernel vs Monte Carlo", ok,
           f"density sup={sup:.4f} (<0.05), count err={count_err:.2e} (<1e-6), "
           f"|E0-MC|={abs(e0 - mc):.4f} (<0.01)")


def test_criterion_05_limit_shape(report):
    anti = max(abs(shape.shape_height(x, 1 - x) - 0.5)
               for x in np.linspace(0.02, 0.98, 25))
    prof = 0.0
    for x in np.linspace(0.0, 1.0, 21):
        back, front = 0.5 * (1 + math.sqrt(x * (2 - x))), \
            0.5 * (1 - math.sqrt(1 - x ** 2))
        b4 = shape.boundary_profiles(x)
        prof = max(prof, abs(b4[0] - back), abs(b4[1] - back),
                   abs(b4[2] - front), abs(b4[3] - front))
    rng = np.random.default_rng(105)
    integral = 0.0
    for _ in range(20):
        x, y = rng.uniform(0.1, 0.9, size=2)
        h = shape.shape_height(x, y)
        s = 1 + x - y
        # the transpose symmetry h(x,y)=h(y,x) maps S>1 points to S<1
        ss, mass = (s, x) if s <= 1 else (2 - s, y)
        integral = max(integral, abs(shape.partial_mass(ss, h) - mass))
    n, m = 100, 200
    acc = np.zeros((n, n))
    for _ in range(m):
        acc += model.lines_to_grid(sampler.sample_uniform_config(n, rng)).heights
    mean = acc / m
    dev = max(abs(mean[i, j] - shape.shape_height((i + 0.5) / n, (j + 0.5) / n))
              for i in range(10, n - 10, 10) for j in range(10, n - 10, 10))
    ok = anti < 1e-8 and prof < 1e-8 and integral < 1e-8 and dev < 0.02
    report(5, "limit shape solver", ok,
           f"anti-diag={anti:.1e}, profiles={prof:.1e}, "
           f"integral eq={integral:.1e} (each <1e-8), MC dev={dev:.4f} (<0.02)")


def test_criterion_06_edge_expansion(report):
    grid = np.linspace(-2, 2, 17)
    sup = {}
    for n in (20, 40, 80):
        sup[n] = max(abs(np.subtract(*airy.johnstone_check(n, n, n, float(x))))
                     for x in grid)
    ratios = [sup[40] / sup[20], sup[80] / sup[40]]
    expect = 2 ** (-2 / 3)
    ok = all(expect / 2 < r < 2 * expect for r in ratios)
    report(6, "uniform edge expansion rate", ok,
           f"sup errors {sup[20]:.3f}/{sup[40]:.3f}/{sup[80]:.3f}, "
           f"ratios {ratios[0]:.3f},{ratios[1]:.3f} vs 2^(-2/3)={expect:.3f} "
           f"within factor 2")


def test_criterion_07_fredholm(report):
    conv = 0.0
    for v in np.linspace(-5, 2, 8):
        a = airy.fredholm_det_airy([0.0], [float(v)])
        b = airy.fredholm_det_airy([0.0], [float(v)],
                                   QuadratureRule(initial_nodes=128,
                                                  max_nodes=1024, tol=1e-10))
        conv = max(conv, abs(a - b))
    single = abs(airy.fredholm_det_airy([2.5], [-1.0])
                 - airy.fredholm_det_airy([0.0], [-1.0]))
    joint = airy.fredholm_det_airy([0.0, 40.0], [-0.5, 0.3])
    prod = airy.tracy_widom_cdf(-0.5) * airy.tracy_widom_cdf(0.3)
    fact = abs(joint - prod)
    ok = conv < 1e-8 and single < 1e-10 and fact < 1e-4
    report(7, "edge-law Fredholm determinants", ok,
           f"self-convergence {conv:.1e} (<1e-8), n=1 match {single:.1e} "
           f"(<1e-10), factorization {fact:.1e} (<1e-4)")


def test_criterion_08_universality(report, tmp_path):
    m = run(ExperimentSpec(kind="universality", n=200, samples=2000,
                           distributions=("uniform", "exp", "beta:2"),
                           line_s=0.5, seed=108, out=str(tmp_path)))
    pair = max(m.summary["pairwise_ks"].values())
    tw = max(m.summary["ks_vs_limit"].values())
    ok = pair < 0.05 and tw < 0.08
    pairs = ", ".join(f"{k}={v:.3f}" for k, v in m.summary["pairwise_ks"].items())
    report(8, "edge fluctuation universality (N=200, M=2000, S=1/2)", ok,
           f"pairwise KS {pairs} (<0.05), max KS vs limit={tw:.4f} (<0.08); "
           "note: the population-level KS between the exp and uniform scaled "
           "laws is ~0.075 at N=200 (quantile curvature at the edge), so the "
           "exp pairs cannot meet 0.05 at this size")


def test_criterion_09_corner_nonuniversality(report, tmp_path):
    m = run(ExperimentSpec(kind="corner", n=50, samples=2000,
                           distributions=("uniform", "exp"), seed=109,
                           out=str(tmp_path)))
    ks_u = m.summary["uniform"]["ks_limit"]
    ks_e = m.summary["exp"]["ks_limit"]
    ok = ks_u < 0.05 and ks_e < 0.05
    report(9, "corner laws (N=50)", ok,
           f"uniform N^2(1-x) vs Exp(1) KS={ks_u:.4f}, "
           f"exp x-2logN vs Gumbel KS={ks_e:.4f} (each <0.05)")


def test_criterion_10_conjugation_invariance(report):
    rng = np.random.default_rng(110)
    pts = [(-0.8, 0.0), (0.2, 0.7), (1.0, 1.6)]
    base = np.array([[airy.airy_process_kernel(x, s, y, t)
                      for (y, t) in pts] for (x, s) in pts])
    worst = 0.0
    for _ in range(10):
        f = rng.uniform(0.05, 20.0, size=3)
        gauged = base * (f[:, None] / f[None, :])
        worst = max(worst, abs(np.linalg.det(gauged) - np.linalg.det(base)))
    ok = worst < 1e-12
    report(10, "determinant gauge invariance", ok,
           f"max |det shift| = {worst:.1e} (<1e-12)")
