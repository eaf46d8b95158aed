from fractions import Fraction

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from dsos import kernel, model, sampler
from dsos.kernel import KernelContext, QuadratureRule, kernel_K


def gl(m=200):
    z, w = leggauss(m)
    return 0.5 * (z + 1), 0.5 * w


CTX2 = KernelContext(2)
CTX3 = KernelContext(3)

# Exact two-point values frozen from symbolic polytope integration at N=3.
EXACT_RHO2 = {
    ((1, 2), Fraction(3, 5), Fraction(3, 10)): Fraction(12348, 3125),
    ((2, 3), Fraction(1, 4), Fraction(3, 5)): Fraction(4749, 1000),
    ((1, 3), Fraction(1, 2), Fraction(1, 3)): Fraction(10, 3),
    ((3, 4), Fraction(2, 5), Fraction(7, 10)): Fraction(2916, 625),
    ((4, 5), Fraction(3, 10), Fraction(4, 5)): Fraction(4662, 3125),
    ((2, 4), Fraction(1, 3), Fraction(2, 3)): Fraction(1064, 243),
    ((1, 5), Fraction(1, 4), Fraction(3, 4)): Fraction(195, 256),
    ((1, 4), Fraction(7, 10), Fraction(1, 5)): Fraction(9558, 3125),
    ((2, 5), Fraction(3, 5), Fraction(1, 2)): Fraction(171, 50),
    ((1, 2), Fraction(1, 2), Fraction(7, 10)): Fraction(1953, 400),
}

EXACT_RHO1 = {
    (1, Fraction(1, 4)): Fraction(135, 128),
    (2, Fraction(1, 4)): Fraction(81, 32),
    (3, Fraction(1, 4)): Fraction(117, 64),
    (4, Fraction(2, 3)): Fraction(56, 27),
    (5, Fraction(2, 3)): Fraction(40, 27),
}


class TestDiagonalClosedForms:
    def test_n2_line1(self):
        u = np.linspace(0.05, 0.95, 9)
        np.testing.assert_allclose(kernel_K(CTX2, 1, u, 1, u),
                                   6 * u * (1 - u), rtol=1e-12)

    def test_n2_central(self):
        v = np.linspace(0.05, 0.95, 9)
        np.testing.assert_allclose(kernel_K(CTX2, 2, v, 2, v),
                                   1 + 3 * (1 - 2 * v) ** 2, rtol=1e-12)

    def test_n2_above_diagonal(self):
        u, v = 0.31, 0.64
        assert kernel_K(CTX2, 2, v, 1, u) == pytest.approx(6 * (2 * v - 1))
        assert kernel_K(CTX2, 3, v, 1, u) == pytest.approx(-12.0)

    def test_n2_below_diagonal(self):
        # frozen from the exactly solved N=2 system
        u, v = 0.3, 0.6
        want = -3 * u * (1 - u) * (1 - 2 * v) + float(v < u) - u
        assert kernel_K(CTX2, 1, u, 2, v) == pytest.approx(want, abs=1e-12)
        want13 = -3 * u * (1 - u) * v * (1 - v) + min(u, v) - u * v
        assert kernel_K(CTX2, 1, u, 3, v) == pytest.approx(want13, abs=1e-12)


class TestExactRegression:
    @pytest.mark.parametrize("key", sorted(EXACT_RHO1))
    def test_rho1_n3(self, key):
        l, u = key
        got = kernel_K(CTX3, l, float(u), l, float(u))
        assert got == pytest.approx(float(EXACT_RHO1[key]), rel=1e-10)

    @pytest.mark.parametrize("key", sorted(EXACT_RHO2))
    def test_rho2_n3(self, key):
        (s, t), u, v = key
        got = kernel.correlation_rho(CTX3, [(s, float(u)), (t, float(v))])
        assert got == pytest.approx(float(EXACT_RHO2[key]), rel=1e-9)


class TestKernelStructure:
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 6])
    def test_particle_counts(self, n):
        ctx = KernelContext(n)
        x, w = gl()
        for l in range(1, 2 * n):
            total = np.sum(w * kernel_K(ctx, l, x, l, x))
            assert total == pytest.approx(model.line_size(n, l), abs=1e-6)

    @pytest.mark.parametrize("s,m,t", [(3, 2, 1), (4, 3, 2), (5, 3, 1),
                                       (5, 4, 3), (4, 4, 2)])
    def test_reproducing_property(self, s, m, t):
        x, w = gl(300)
        u, v = 0.37, 0.62
        lhs = np.sum(w * kernel_K(CTX3, s, u, m, x) * kernel_K(CTX3, m, x, t, v))
        rhs = kernel_K(CTX3, s, u, t, v)
        assert lhs == pytest.approx(rhs, abs=max(1e-8, 1e-10 * abs(rhs)))

    def test_single_line_minors_nonnegative(self):
        # correlations of any order are principal minors and must be >= 0
        rng = np.random.default_rng(0)
        for _ in range(25):
            l = rng.integers(1, 6)
            pts = [(int(l), float(x)) for x in np.sort(rng.random(3))]
            mat = np.array([[kernel_K(CTX3, a, x, b, y) for (b, y) in pts]
                            for (a, x) in pts])
            for rows in [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)]:
                idx = np.ix_(rows, rows)
                assert np.linalg.det(mat[idx]) > -1e-10

    def test_coincident_points_rho_zero(self):
        assert kernel.correlation_rho(CTX3, [(2, 0.4), (2, 0.4)]) == pytest.approx(0.0, abs=1e-12)

    def test_invalid_line(self):
        with pytest.raises(model.InvalidInputError):
            kernel_K(CTX3, 0, 0.5, 1, 0.5)
        with pytest.raises(model.InvalidInputError):
            kernel_K(CTX3, 1, 1.5, 1, 0.5)

    def test_large_n_no_overflow(self):
        ctx = KernelContext(60)
        u = np.linspace(0.02, 0.98, 25)
        for l in (1, 20, 60, 100, 119):
            vals = kernel_K(ctx, l, u, l, u)
            assert np.all(np.isfinite(vals)) and np.all(vals > -1e-9)
        x, w = gl(400)
        total = np.sum(w * kernel_K(ctx, 60, x, 60, x))
        assert total == pytest.approx(60, rel=1e-6)


@pytest.fixture(scope="module")
def lines_n3():
    rng = np.random.default_rng(21)
    return sampler.sample_uniform_lines_batch(3, 1_000_000, rng)


class TestMonteCarloAgreement:
    def test_one_point_density(self, lines_n3):
        bins = 50
        edges = np.linspace(0, 1, bins + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        # 3-point Gauss rule inside each bin: the histogram estimates the
        # bin average of the density, so compare against that average
        off = np.array([-0.5 * np.sqrt(0.6), 0.0, 0.5 * np.sqrt(0.6)]) / bins
        wts = np.array([5.0, 8.0, 5.0]) / 18.0
        for l in range(1, 6):
            hist, _ = np.histogram(lines_n3[l - 1].ravel(), bins=edges)
            emp = hist / lines_n3[l - 1].shape[0] * bins
            pred = sum(w * kernel_K(CTX3, l, mid + o, l, mid + o)
                       for o, w in zip(off, wts))
            assert np.max(np.abs(emp - pred)) < 0.05

    def test_pair_correlation_narrow_window(self, lines_n3):
        h = 0.02
        for (s, t, u, v) in [(1, 2, 0.5, 0.7), (2, 3, 0.25, 0.6),
                             (3, 4, 0.4, 0.7), (2, 5, 0.6, 0.5)]:
            ys, yt = lines_n3[s - 1], lines_n3[t - 1]
            cu = np.sum((ys > u - h) & (ys < u + h), axis=1)
            cv = np.sum((yt > v - h) & (yt < v + h), axis=1)
            emp = np.mean(cu * cv) / (2 * h) ** 2
            pred = kernel.correlation_rho(CTX3, [(s, u), (t, v)])
            assert emp == pytest.approx(pred, rel=0.08, abs=0.05)


class TestGapProbability:
    def test_limits(self):
        assert kernel.gap_probability_E0(CTX3, [(3, 0.999999)]) == pytest.approx(1.0, abs=1e-3)
        assert kernel.gap_probability_E0(CTX3, [(3, 1e-6)]) == pytest.approx(0.0, abs=1e-3)

    def test_bounds_and_monotone(self):
        us = [0.2, 0.4, 0.6, 0.8]
        vals = [kernel.gap_probability_E0(CTX3, [(2, u)]) for u in us]
        assert all(0 <= v <= 1 for v in vals)
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_vs_monte_carlo(self):
        rng = np.random.default_rng(33)
        lines = sampler.sample_uniform_lines_batch(3, 100_000, rng, keep=[3])[2]
        mc = np.mean(np.max(lines, axis=1) < 0.7)
        e0 = kernel.gap_probability_E0(CTX3, [(3, 0.7)])
        assert e0 == pytest.approx(mc, abs=0.01)

    def test_multi_line_request(self):
        # cross-line blocks carry a jump along u = v, so the quadrature
        # plateaus near 1e-4: the default tolerance must raise, and a
        # tolerance matching the plateau must agree with Monte Carlo
        with pytest.raises(sampler.NumericalError):
            kernel.gap_probability_E0(CTX3, [(2, 0.8), (3, 0.85)])
        rng = np.random.default_rng(34)
        out = sampler.sample_uniform_lines_batch(3, 100_000, rng, keep=[2, 3])
        mc = np.mean((np.max(out[1], axis=1) < 0.8) & (np.max(out[2], axis=1) < 0.85))
        e0 = kernel.gap_probability_E0(CTX3, [(2, 0.8), (3, 0.85)],
                                       QuadratureRule(tol=5e-4))
        assert e0 == pytest.approx(mc, abs=0.01)

    def test_nonconvergence_reports_values(self):
        with pytest.raises(sampler.NumericalError):
            kernel.gap_probability_E0(
                CTX3, [(3, 0.5)], QuadratureRule(initial_nodes=2, max_nodes=4,
                                                 tol=1e-15))


class TestMaxHeightPdf:
    def test_normalizes(self):
        x, w = gl(40)
        # integrate the central-line max density at N=2 over (0,1)
        vals = np.array([kernel.max_height_pdf(CTX2, [2], [xi]) for xi in x])
        assert np.sum(w * vals) == pytest.approx(1.0, abs=1e-3)

    def test_matches_survival(self):
        u = 0.6
        x, w = gl(40)
        xs = u + (1 - u) * x
        vals = np.array([kernel.max_height_pdf(CTX2, [2], [xi]) for xi in xs])
        integral = (1 - u) * np.sum(w * vals)
        e0 = kernel.gap_probability_E0(CTX2, [(2, u)])
        assert integral == pytest.approx(1 - e0, abs=1e-3)

    def test_matches_sampler_histogram(self):
        rng = np.random.default_rng(55)
        lines = sampler.sample_uniform_lines_batch(2, 200_000, rng, keep=[2])[1]
        mx = np.max(lines, axis=1)
        bins = 20
        edges = np.linspace(0, 1, bins + 1)
        hist, _ = np.histogram(mx, bins=edges)
        emp = hist / mx.size * bins
        mid = 0.5 * (edges[:-1] + edges[1:])
        pred = np.array([kernel.max_height_pdf(CTX2, [2], [m]) for m in mid])
        assert np.max(np.abs(emp - pred)) < 0.05
