"""Exact rho1/rho2 at N=3 by symbolic integration over the interlacing polytope.

Variables (all heights uniform on [0,1], joint density 8640 on the polytope):
  line1: a            with b2 < a < b1
  line2: b1 > b2      with c2 < b1 < c1, c3 < b2 < c2
  line3: c1 > c2 > c3 in (0,1)
  line4: d1 > d2      with c2 < d1 < c1, c3 < d2 < c2
  line5: e            with d2 < e < d1

Used to freeze exact kernel values for the below-diagonal branch.
"""
import itertools
from fractions import Fraction

import sympy as sp

C1, C2, C3 = sp.symbols("c1 c2 c3", positive=True)
DENS = sp.Integer(8640)

LINE_SIZE = {1: 1, 2: 2, 3: 3, 4: 2, 5: 1}


def _resolve(items, cell, kind):
    """max/min of symbols (center vars) and numerics, resolved inside a cell.

    cell maps each free center symbol to (alpha, beta) numeric interval;
    center order c1 > c2 > c3 always holds.
    """
    def key(it):
        if isinstance(it, sp.Symbol):
            a, b = cell[it]
            return (sp.Rational(a) + sp.Rational(b)) / 2
        return sp.Rational(it)

    return max(items, key=key) if kind == "max" else min(items, key=key)


def _side_integral(prefix, cvals, fixed, cell):
    """Integrate the free variables of one side (left: a,b; right: e,d).

    cvals: the three center values (symbols or numerics), descending.
    fixed: dict like {"x1": value, "x2": value, "x0": value} where x1,x2 are
    the two middle-line values (descending) and x0 the outer single value.
    Returns a polynomial in the center symbols.
    """
    cv1, cv2, cv3 = cvals
    x1 = fixed.get(prefix + "1")
    x2 = fixed.get(prefix + "2")
    x0 = fixed.get(prefix + "0")

    s1 = sp.Symbol(prefix + "1s")
    s2 = sp.Symbol(prefix + "2s")
    s0 = sp.Symbol(prefix + "0s")
    v1 = s1 if x1 is None else sp.Rational(x1)
    v2 = s2 if x2 is None else sp.Rational(x2)
    v0 = s0 if x0 is None else sp.Rational(x0)

    expr = sp.Integer(1)
    # innermost: the outer single value, v0 in (v2, v1)
    if x0 is None:
        expr = sp.integrate(expr, (s0, v2, v1))
    else:
        # constraint v2 < x0 < v1 handled via bounds below (numeric checks
        # happen when v1/v2 are numeric too)
        pass

    steps = []
    # middle-line lower value v2 in (cv3, cv2), also v2 < x0 if x0 fixed
    if x2 is None:
        lo = cv3
        hi_items = [cv2] + ([sp.Rational(x0)] if x0 is not None else [])
        hi = _resolve(hi_items, cell, "min")
        steps.append((s2, lo, hi))
    # middle-line upper value v1 in (cv2, cv1), also v1 > x0 if fixed
    if x1 is None:
        lo_items = [cv2] + ([sp.Rational(x0)] if x0 is not None else [])
        lo = _resolve(lo_items, cell, "max")
        hi = cv1
        steps.append((s1, lo, hi))

    for sym, lo, hi in steps:
        expr = sp.expand(sp.integrate(expr, (sym, lo, hi)))

    # numeric feasibility among fixed values on this side
    if x1 is not None and x2 is not None and not (x2 < x1):
        return sp.Integer(0)
    if x0 is not None and x1 is not None and not (x0 < x1):
        return sp.Integer(0)
    if x0 is not None and x2 is not None and not (x2 < x0):
        return sp.Integer(0)
    return expr


def _center_cells(free_syms, constraints, points):
    """Assignments of free center symbols to elementary intervals of [0,1].

    constraints: dict sym -> (lo, up) numeric window the symbol must lie in.
    points: sorted numeric breakpoints in (0,1).
    """
    pts = [Fraction(0)] + sorted(points) + [Fraction(1)]
    intervals = [(pts[i], pts[i + 1]) for i in range(len(pts) - 1)
                 if pts[i] < pts[i + 1]]
    order = [s for s in (C1, C2, C3) if s in free_syms]  # descending values
    for combo in itertools.product(range(len(intervals)), repeat=len(order)):
        # descending symbols need non-increasing interval indices
        if any(combo[i] < combo[i + 1] for i in range(len(combo) - 1)):
            continue
        cell = {}
        ok = True
        for s, idx in zip(order, combo):
            a, b = intervals[idx]
            lo, up = constraints[s]
            if not (lo <= a and b <= up):
                ok = False
                break
            cell[s] = (a, b)
        if ok:
            yield cell


def _integrate_center(expr, cell, fixed_c):
    """Integrate free center symbols over one cell, honoring c1 > c2 > c3."""
    order = [s for s in (C3, C2, C1) if s in cell]  # innermost first
    syms_desc = [s for s in (C1, C2, C3) if s in cell or s in fixed_c]
    for s in order:
        a, b = cell[s]
        # chained bound against the next-larger center value in the same cell
        larger = {C3: C2, C2: C1}.get(s)
        hi = sp.Rational(b)
        if larger is not None and larger in cell and cell[larger] == cell[s]:
            hi = larger
        elif larger is not None and larger in fixed_c:
            if a < fixed_c[larger] < b:
                hi = sp.Rational(fixed_c[larger])
        lo = sp.Rational(a)
        smaller = {C1: C2, C2: C3}.get(s)
        if smaller is not None and smaller in fixed_c:
            if a < fixed_c[smaller] < b:
                lo = sp.Rational(fixed_c[smaller])
        expr = sp.expand(sp.integrate(expr, (s, lo, hi)))
    del syms_desc
    return expr


def marginal(assign):
    """Exact marginal density for fixed positions.

    assign: dict mapping (line, position) -> Fraction value; positions are
    1-based from the top (largest) of each line.
    """
    fixed_left = {}
    fixed_right = {}
    fixed_c = {}
    for (line, pos), val in assign.items():
        v = Fraction(val)
        if line == 1:
            fixed_left["L0"] = v
        elif line == 2:
            fixed_left[f"L{pos}"] = v
        elif line == 3:
            fixed_c[[C1, C2, C3][pos - 1]] = v
        elif line == 4:
            fixed_right[f"R{pos}"] = v
        elif line == 5:
            fixed_right["R0"] = v

    # center ordering feasibility
    cfix = sorted(fixed_c.items(), key=lambda kv: [C1, C2, C3].index(kv[0]))
    vals = [v for _, v in cfix]
    if any(vals[i] <= vals[i + 1] for i in range(len(vals) - 1)):
        return sp.Integer(0)

    # numeric windows each free center symbol must respect
    constraints = {s: [Fraction(0), Fraction(1)] for s in (C1, C2, C3)}

    def narrow(sym, lo=None, up=None):
        if lo is not None:
            constraints[sym][0] = max(constraints[sym][0], Fraction(lo))
        if up is not None:
            constraints[sym][1] = min(constraints[sym][1], Fraction(up))

    # side-fixed values constrain the center: m1 in (c2,c1), m2 in (c3,c2)
    for fixed in (fixed_left, fixed_right):
        pref = "L" if fixed is fixed_left else "R"
        if pref + "1" in fixed:
            narrow(C2, up=fixed[pref + "1"])
            narrow(C1, lo=fixed[pref + "1"])
        if pref + "2" in fixed:
            narrow(C3, up=fixed[pref + "2"])
            narrow(C2, lo=fixed[pref + "2"])
        if pref + "0" in fixed:
            # outer single value x0 needs b2 < x0 < b1, so c3 < x0 < c1
            narrow(C1, lo=fixed[pref + "0"])
            narrow(C3, up=fixed[pref + "0"])

    # fixed center values must lie inside the windows the side values imply
    for sym, val in fixed_c.items():
        lo, up = constraints[sym]
        if not (lo < val < up):
            return sp.Integer(0)

    # fixed center values also split/narrow the free ones
    for sym, val in fixed_c.items():
        i = [C1, C2, C3].index(sym)
        for other in (C1, C2, C3)[:i]:
            narrow(other, lo=val)
        for other in (C1, C2, C3)[i + 1:]:
            narrow(other, up=val)

    points = sorted({Fraction(v) for v in
                     list(fixed_left.values()) + list(fixed_right.values())
                     + [v for v in fixed_c.values()]
                     + [lo for lo, up in constraints.values()]
                     + [up for lo, up in constraints.values()]
                     if 0 < Fraction(v) < 1})

    free_syms = [s for s in (C1, C2, C3) if s not in fixed_c]
    cvals = [fixed_c.get(s, s) for s in (C1, C2, C3)]

    total = sp.Integer(0)
    for cell in _center_cells(free_syms,
                              {s: tuple(constraints[s]) for s in free_syms},
                              points):
        left = _side_integral("L", cvals, {
            "L1": fixed_left.get("L1"), "L2": fixed_left.get("L2"),
            "L0": fixed_left.get("L0")}, cell)
        right = _side_integral("R", cvals, {
            "R1": fixed_right.get("R1"), "R2": fixed_right.get("R2"),
            "R0": fixed_right.get("R0")}, cell)
        expr = sp.expand(left * right)
        expr = expr.subs({s: sp.Rational(v) for s, v in fixed_c.items()})
        total += _integrate_center(expr, cell, fixed_c)
    return DENS * total


def rho1(line, u):
    u = Fraction(u)
    return sum(marginal({(line, p): u})
               for p in range(1, LINE_SIZE[line] + 1))


def rho2(s, u, t, v):
    u, v = Fraction(u), Fraction(v)
    tot = sp.Integer(0)
    for p in range(1, LINE_SIZE[s] + 1):
        for q in range(1, LINE_SIZE[t] + 1):
            tot += marginal({(s, p): u, (t, q): v})
    return tot


if __name__ == "__main__":
    import sys
    sys.path.insert(0, "src")
    sys.path.insert(0, "tools")
    from dev_kernel_proto import kernel_K
    # validate rho1 against the (already MC-validated) diagonal kernel
    for line in (1, 2, 3):
        for u in (Fraction(1, 4), Fraction(2, 3)):
            exact = rho1(line, u)
            pred = kernel_K(3, line, float(u), line, float(u))
            print(f"rho1 line {line} u={u}: exact {sp.nsimplify(exact)} = "
                  f"{float(exact):.6f} vs kernel {float(pred):.6f}")
