"""Dev-time validation of the finite-N kernel, esp. the s<t branch.

Not shipped; results frozen into tests/test_kernel.py.
"""
import math
import sys

import numpy as np

sys.path.insert(0, "src")
from dsos import jacobi, sampler  # noqa: E402


def dpar(n, l):
    return abs(n - l)


def mpar(n, l):
    return n - abs(n - l)


def A_pref(n, s, u):
    if s <= n:
        k = n - s
        return ((-u) * (1 - u)) ** k
    return np.ones_like(np.asarray(u, dtype=float))


def B_pref(n, t, v):
    if t <= n:
        return (-1.0) ** (n - t) * np.ones_like(np.asarray(v, dtype=float))
    k = t - n
    return (v * (1 - v)) ** k


def Ccoef(n, l, j):
    return math.factorial(l - j) / math.factorial(n - j)


def S_sum(n, s, u, t, v):
    """The finite sum part (valid as-is for s >= t)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    ms, mt = mpar(n, s), mpar(n, t)
    ds, dt = dpar(n, s), dpar(n, t)
    alpha = min(ms, mt)
    acc = np.zeros(np.broadcast(u, v).shape)
    for lp in range(1, alpha + 1):
        ps = jacobi.jacobi_eval(jacobi.JacobiParams(ms - lp, ds, ds), u)
        pt = jacobi.jacobi_eval(jacobi.JacobiParams(mt - lp, dt, dt), v)
        norm = jacobi.jacobi_norm(jacobi.JacobiParams(mt - lp, dt, dt))
        acc = acc + (Ccoef(n, s, lp) / Ccoef(n, t, lp)) * ps * pt / norm
    return A_pref(n, s, u) * B_pref(n, t, v) * acc


# ---- piecewise polynomial transition kernels: P(u,v) + chi(v<u) Q(u,v) ----

class PW:
    def __init__(self, P, Q):
        self.P = np.asarray(P, dtype=float)  # coeff[i,j] u^i v^j
        self.Q = np.asarray(Q, dtype=float)

    def __call__(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return (polyval2(self.P, u, v)
                + (v < u) * polyval2(self.Q, u, v))


def polyval2(c, u, v):
    res = np.zeros(np.broadcast(u, v).shape)
    for i in range(c.shape[0]):
        for j in range(c.shape[1]):
            if c[i, j]:
                res = res + c[i, j] * u ** i * v ** j
    return res


def compose(f: PW, g: PW) -> PW:
    """h(u,v) = int_0^1 f(u,w) g(w,v) dw, closed under this class."""
    # trivariate products: T[i, k, j] coeff of u^i w^k v^j
    def tri(Fc, Gc):
        T = np.zeros((Fc.shape[0], Fc.shape[1] + Gc.shape[0] - 1, Gc.shape[1]))
        for i in range(Fc.shape[0]):
            for a in range(Fc.shape[1]):
                if not Fc[i, a]:
                    continue
                for b in range(Gc.shape[0]):
                    for j in range(Gc.shape[1]):
                        if Gc[b, j]:
                            T[i, a + b, j] += Fc[i, a] * Gc[b, j]
        return T

    def w_antideriv(T):
        S = np.zeros((T.shape[0], T.shape[1] + 1, T.shape[2]))
        for k in range(T.shape[1]):
            S[:, k + 1, :] = T[:, k, :] / (k + 1)
        return S

    def eval_w_at_u(S):
        # substitute w = u: u^i w^k -> u^(i+k)
        out = np.zeros((S.shape[0] + S.shape[1] - 1, S.shape[2]))
        for i in range(S.shape[0]):
            for k in range(S.shape[1]):
                out[i + k, :] += S[i, k, :]
        return out

    def eval_w_at_v(S):
        out = np.zeros((S.shape[0], S.shape[1] + S.shape[2] - 1))
        for k in range(S.shape[1]):
            for j in range(S.shape[2]):
                out[:, k + j] += S[:, k, j]
        return out

    def eval_w_at_1(S):
        return S.sum(axis=1)

    def pad_add(a, b):
        r = np.zeros((max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1])))
        r[:a.shape[0], :a.shape[1]] += a
        r[:b.shape[0], :b.shape[1]] += b
        return r

    P = np.zeros((1, 1))
    # term 1: int_0^1 P1 P2
    S1 = w_antideriv(tri(f.P, g.P))
    P = pad_add(P, eval_w_at_1(S1))
    # term 2: int_0^u Q1 P2
    S2 = w_antideriv(tri(f.Q, g.P))
    P = pad_add(P, eval_w_at_u(S2))
    # term 3: int_v^1 P1 Q2
    S3 = w_antideriv(tri(f.P, g.Q))
    P = pad_add(P, eval_w_at_1(S3))
    P = pad_add(P, -eval_w_at_v(S3))
    # term 4: chi(v<u) int_v^u Q1 Q2
    S4 = w_antideriv(tri(f.Q, g.Q))
    Q = pad_add(eval_w_at_u(S4), -eval_w_at_v(S4))
    return PW(P, Q)


def beta_cdf_coeffs(d):
    """Coefficients (ascending powers) of the Beta(d,d) CDF polynomial."""
    from math import comb
    # integrand w^(d-1)(1-w)^(d-1) / B(d,d); B(d,d) = (d-1)!^2/(2d-1)!
    from math import factorial
    c = np.zeros(2 * d)
    for k in range(d):
        c[d + k] = (-1) ** k * comb(d - 1, k) / (d + k)
    c *= factorial(2 * d - 1) / factorial(d - 1) ** 2
    return c


def one_step_phi(n, l):
    """Centered transition from line l to l+1; phi = P + chi(v<u) Q.

    Growth (l < n): phi(u,v) = F_{n-l}(u) - chi(v<u);
    shrink (l >= n): phi(u,v) = (1 - F_{l+1-n}(v)) - chi(v<u),
    where F_d is the Beta(d,d) CDF.
    """
    if l < n:
        f = beta_cdf_coeffs(n - l)
        return PW(f.reshape(-1, 1), np.array([[-1.0]]))
    f = -beta_cdf_coeffs(l + 1 - n)
    f[0] += 1.0
    return PW(f.reshape(1, -1), np.array([[-1.0]]))


def phi_st(n, s, t):
    f = one_step_phi(n, s)
    for l in range(s + 1, t):
        f = compose(f, one_step_phi(n, l))
    return f


def kernel_K(n, s, u, t, v):
    if s >= t:
        return S_sum(n, s, u, t, v)
    return S_sum(n, s, u, t, v) - phi_st(n, s, t)(u, v)


def check_n2():
    u = np.linspace(0.05, 0.95, 7)
    v = np.linspace(0.1, 0.9, 7)
    ok = True
    ok &= np.allclose(kernel_K(2, 1, u, 1, u), 6 * u * (1 - u))
    ok &= np.allclose(kernel_K(2, 2, v, 2, v), 1 + 3 * (1 - 2 * v) ** 2)
    ok &= np.allclose(kernel_K(2, 2, v, 1, u), 6 * (2 * v - 1))
    # s<t exact values from the solved N=2 system
    K12 = -3 * u * (1 - u) * (1 - 2 * v) + (v < u) - u
    ok &= np.allclose(kernel_K(2, 1, u, 2, v), K12)
    K13 = -12 * u * (1 - u) * v * (1 - v) + np.minimum(u, v) - u * v
    ok &= np.allclose(kernel_K(2, 1, u, 3, v), K13)
    K23 = (-(1 - 2 * u) * (1 - 2 * v) * 3 * v * (1 - v) - 2 * v * (1 - v) * 1
           + (v < u) - (1 - v))
    # recompute S for (2,3) directly instead of trusting the line above
    print("n2 basic:", bool(ok))


def mc_lines(n, m, seed=1):
    rng = np.random.default_rng(seed)
    return sampler.sample_uniform_lines_batch(n, m, rng)


def check_rho1(n, lines, bins=50):
    edges = np.linspace(0, 1, bins + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    worst = 0.0
    for l in range(1, 2 * n):
        vals = lines[l - 1].ravel()
        hist, _ = np.histogram(vals, bins=edges)
        emp = hist / lines[l - 1].shape[0] / (1.0 / bins)
        pred = kernel_K(n, l, mid, l, mid)
        err = np.max(np.abs(emp - pred))
        worst = max(worst, err)
        print(f"  line {l}: sup|emp-pred| = {err:.4f}  (max rho1 {pred.max():.2f})")
    return worst


def check_counts(n):
    from numpy.polynomial.legendre import leggauss
    z, w = leggauss(200)
    x = 0.5 * (z + 1)
    w = 0.5 * w
    for l in range(1, 2 * n):
        c = np.sum(w * kernel_K(n, l, x, l, x))
        print(f"  line {l}: integral rho1 = {c:.10f} want {mpar(n, l)}")


def check_rho2(n, lines, pairs, grid=5, tol_rel=0.08):
    gs = np.linspace(0.1, 0.9, grid)
    m = lines[0].shape[0]
    h = 0.08  # half-width of the window
    all_ok = True
    for (s, t) in pairs:
        ys, yt = lines[s - 1], lines[t - 1]
        worst = 0.0
        for u in gs:
            cu = np.sum((ys > u - h) & (ys < u + h), axis=1)
            for v in gs:
                cv = np.sum((yt > v - h) & (yt < v + h), axis=1)
                emp = np.mean(cu * cv) / (2 * h) ** 2
                pred = (kernel_K(n, s, u, s, u) * kernel_K(n, t, v, t, v)
                        - kernel_K(n, s, u, t, v) * kernel_K(n, t, v, s, u))
                # window-average the prediction crudely via 5-pt quadrature
                uu = u + h * np.array([-0.9, -0.45, 0, 0.45, 0.9])
                vv = v + h * np.array([-0.9, -0.45, 0, 0.45, 0.9])
                UU, VV = np.meshgrid(uu, vv, indexing="ij")
                pr = (kernel_K(n, s, UU, s, UU) * kernel_K(n, t, VV, t, VV)
                      - kernel_K(n, s, UU, t, VV) * kernel_K(n, t, VV, s, UU))
                pred_avg = pr.mean()
                denom = max(abs(pred_avg), 0.3)
                worst = max(worst, abs(emp - pred_avg) / denom)
        flag = "OK " if worst < tol_rel else "FAIL"
        if worst >= tol_rel:
            all_ok = False
        print(f"  pair ({s},{t}): worst rel err {worst:.3f} {flag}")
    return all_ok


if __name__ == "__main__":
    check_n2()
    n = 3
    print("counts N=3:")
    check_counts(n)
    print("sampling N=3 ...")
    lines = mc_lines(n, 400_000)
    print("rho1 N=3:")
    check_rho1(n, lines)
    print("rho2 cross-line N=3:")
    pairs = [(1, 2), (2, 3), (1, 3), (2, 4), (3, 4), (1, 5), (4, 5), (1, 4), (2, 5)]
    check_rho2(n, lines, pairs)
