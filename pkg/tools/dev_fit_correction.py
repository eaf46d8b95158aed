"""Fit the exact below-diagonal correction Delta = K_true - S at N=3.

K_true(s,u;t,v) for s<t is recovered from the exact pair correlation:
  rho2 = rho1(s,u) rho1(t,v) - K(s,u;t,v) K(t,v;s,u),
and K(t,v;s,u) is the validated above-diagonal branch.  Delta is fitted as a
bivariate polynomial separately on u>v and u<v.
"""
import sys
from fractions import Fraction

import sympy as sp

sys.path.insert(0, "src")
sys.path.insert(0, "tools")

import dev_exact_rho as ex  # noqa: E402

U, V = sp.symbols("u v")
N = 3


def mpar(l):
    return N - abs(N - l)


def dpar(l):
    return abs(N - l)


def S_exact(s, u, t, v):
    """Exact rational S-sum (same formula as the numeric prototype)."""
    u, v = sp.Rational(u), sp.Rational(v)
    ms, mt, ds, dt = mpar(s), mpar(t), dpar(s), dpar(t)
    A = ((-u) * (1 - u)) ** (N - s) if s <= N else sp.Integer(1)
    B = sp.Integer(-1) ** (N - t) if t <= N else (v * (1 - v)) ** (t - N)
    acc = sp.Integer(0)
    for lp in range(1, min(ms, mt) + 1):
        cs = sp.factorial(s - lp) / sp.factorial(N - lp)
        ct = sp.factorial(t - lp) / sp.factorial(N - lp)
        ps = sp.jacobi(ms - lp, ds, ds, 1 - 2 * u)
        pt = sp.jacobi(mt - lp, dt, dt, 1 - 2 * v)
        n_, a_ = mt - lp, dt
        norm = (sp.Rational(1, 2 * n_ + 2 * a_ + 1)
                * sp.factorial(n_ + a_) ** 2
                / (sp.factorial(n_) * sp.factorial(n_ + 2 * a_)))
        acc += (cs / ct) * ps * pt / norm
    return sp.expand(A * B * acc)


_rho1_cache = {}
_rho2_cache = {}


def rho1c(l, u):
    key = (l, u)
    if key not in _rho1_cache:
        _rho1_cache[key] = ex.rho1(l, u)
    return _rho1_cache[key]


def K_true(s, u, t, v):
    assert s < t
    r2 = ex.rho2(s, u, t, v)
    num = rho1c(s, u) * rho1c(t, v) - r2
    den = S_exact(t, v, s, u)
    if den == 0:
        return None
    return sp.cancel(num / den)


def fit_region(s, t, pts):
    """Exact polynomial fit of Delta on the given points; returns expr."""
    deg = 6
    monos = [(i, j) for i in range(deg + 1) for j in range(deg + 1)
             if i + j <= deg]
    rows, rhs, used = [], [], []
    for (u, v) in pts:
        kt = K_true(s, u, t, v)
        if kt is None:
            continue
        delta = sp.cancel(kt - S_exact(s, u, t, v))
        rows.append([sp.Rational(u) ** i * sp.Rational(v) ** j
                     for (i, j) in monos])
        rhs.append(delta)
        used.append((u, v))
        if len(rows) == len(monos) + 12:
            break
    A = sp.Matrix(rows)
    b = sp.Matrix(rhs)
    At = A.T
    sol = (At * A).solve(At * b)
    resid = (A * sol - b).norm()
    expr = sum(c * U ** i * V ** j for c, (i, j) in zip(sol, monos))
    return sp.expand(expr), resid


def grid_points(region, k=14):
    pts = []
    for a in range(1, k):
        for b in range(1, k):
            u, v = Fraction(a, k), Fraction(b, k)
            if region == ">" and u > v:
                pts.append((u, v))
            if region == "<" and u < v:
                pts.append((u, v))
    # deterministic shuffle for varied interpolation geometry
    pts.sort(key=lambda p: ((p[0].numerator * 7919 + p[1].numerator * 104729)
                            % 997))
    return pts


if __name__ == "__main__":
    pair = (int(sys.argv[1]), int(sys.argv[2]))
    s, t = pair
    for region in ("<", ">"):
        expr, resid = fit_region(s, t, grid_points(region))
        print(f"pair {pair} region u{region}v: residual {resid}")
        print("  Delta =", sp.factor(expr))
