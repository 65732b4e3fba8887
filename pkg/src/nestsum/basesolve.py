"""Complete first-order parameterized solver over the base field K(k).

Solves  a1 * sigma(g) + a2 * g = c_1 f_1 + ... + c_n f_n  for all
(c, g) in K^n x K(k), K = Q(params), returning a basis of the solution
space.  The recipe is the classical one: clear denominators, bound the
denominator of g by a universal denominator built from a dispersion
loop, bound the numerator degree, and solve the remaining linear system
over K exactly.

Also hosts the multiplicative (homogeneous) solver used to certify
product generators: smallest m > 0 with sigma(g) = a^m * g for rational
g, found through shift-quotient stripping of the candidate a^m.
"""

from __future__ import annotations

from gmpy2 import mpq

from .polys import (MPoly, RatFunc, mpoly_gcd, exact_div, dispersion,
                    radical, PolyError)


class BaseSolveError(Exception):
    pass


def _lcm_poly(a, b):
    g = mpoly_gcd(a, b)
    if g.is_const:
        return a * b
    return exact_div(a * b, g)


def clear_denominators(a1, a2, fs):
    """Multiply the equation through by a common polynomial denominator.

    Returns (A, B, Fs) with A*sigma(g) + B*g = sum c_i Fs_i equivalent
    to the original equation and all entries polynomial."""
    vars = a1.vars
    d = _lcm_poly(a1.den, a2.den)
    for f in fs:
        d = _lcm_poly(d, f.den)
    A = a1.num * exact_div(d, a1.den)
    B = a2.num * exact_div(d, a2.den)
    Fs = [f.num * exact_div(d, f.den) for f in fs]
    return A, B, Fs


def universal_denominator(A, B):
    """Denominator bound for rational solutions of
    A*g(k+1) + B*g(k) = polynomial right-hand side."""
    vars = A.vars
    astar = A.shift("k", -1)
    bstar = B
    u = MPoly.one(vars)
    if astar.degree("k") <= 0 or bstar.degree("k") <= 0:
        return u
    js, _ = dispersion(astar, bstar, "k")
    for h in js:
        d = mpoly_gcd(astar, bstar.shift("k", h))
        if d.is_const:
            continue
        astar = exact_div(astar, d)
        bstar = exact_div(bstar, d.shift("k", -h))
        for i in range(h + 1):
            u = u * d.shift("k", -i)
    return u


def degree_bound_base(Ahat, Bhat, deg_rhs):
    """Complete degree bound for polynomial solutions of
    Ahat*p(k+1) + Bhat*p(k) = rhs with deg_k(rhs) <= deg_rhs.

    Returns -1 when only p = 0 is possible."""
    alpha = Ahat.degree("k")
    beta = Bhat.degree("k")
    mx = max(alpha, beta)
    lca = Ahat.coeff("k", alpha)
    lcb = Bhat.coeff("k", beta)
    if alpha != beta or not (lca + lcb).is_zero:
        return max(deg_rhs - mx, -1)
    # leading terms cancel
    phi = Ahat + Bhat
    bound = max(deg_rhs - alpha + 1, 0)
    c1 = phi.coeff("k", alpha - 1) if alpha >= 1 else MPoly.zero(Ahat.vars)
    if not c1.is_zero:
        ratio = RatFunc(c1, lca)
        if ratio.is_const:
            v = ratio.const_value()
            if v.denominator == 1 and v <= 0:
                bound = max(bound, int(-v))
    return bound


def nullspace(matrix, ncols, vars):
    """Basis of the right nullspace of a matrix over K = Q(params).

    matrix: list of rows, each a list of k-free RatFunc entries."""
    rows = [list(r) for r in matrix]
    nrows = len(rows)
    pivots = []
    pr = 0
    for col in range(ncols):
        sel = None
        for r in range(pr, nrows):
            if not rows[r][col].is_zero:
                sel = r
                break
        if sel is None:
            continue
        rows[pr], rows[sel] = rows[sel], rows[pr]
        inv = rows[pr][col].inv()
        rows[pr] = [x * inv for x in rows[pr]]
        for r in range(nrows):
            if r != pr and not rows[r][col].is_zero:
                factor = rows[r][col]
                rows[r] = [x - factor * y
                           for x, y in zip(rows[r], rows[pr])]
        pivots.append(col)
        pr += 1
        if pr == nrows:
            break
    pivot_set = set(pivots)
    free = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    one = RatFunc.one(vars)
    zero = RatFunc.zero(vars)
    for fc in free:
        vec = [zero] * ncols
        vec[fc] = one
        for r, pc in enumerate(pivots):
            vec[pc] = -rows[r][fc]
        basis.append(tuple(vec))
    return basis


def _poly_to_colfuncs(p):
    """k-degree -> k-free coefficient, as RatFunc entries."""
    return {d: RatFunc.from_poly(c) for d, c in p.as_univariate("k").items()}


def solve_pfde_base(a1, a2, fs):
    """Basis of {(c, g) in K^n x K(k) : a1*sigma(g) + a2*g = c . f}.

    a1, a2, fs are RatFunc over vars (..., params ..., 'k').
    Returns a list of (c_tuple, g) with c entries k-free RatFunc."""
    vars = a1.vars
    n = len(fs)
    if a1.is_zero and a2.is_zero:
        raise BaseSolveError("zero operator")
    if a1.is_zero:
        return [(_unit(n, i, vars), fs[i] / a2) for i in range(n)]
    if a2.is_zero:
        return [(_unit(n, i, vars), (fs[i] / a1).shift("k", -1))
                for i in range(n)]
    A, B, Fs = clear_denominators(a1, a2, fs)
    u = universal_denominator(A, B)
    # substitute g = p/u and clear again:
    #   A*u(k) * p(k+1) + B*u(k+1) * p(k) = F * u(k) * u(k+1)
    ushift = u.shift("k", 1)
    Ahat = A * u
    Bhat = B * ushift
    Fhat = [F * u * ushift for F in Fs]
    deg_rhs = max([F.degree("k") for F in Fhat], default=-1)
    b = degree_bound_base(Ahat, Bhat, deg_rhs)
    npoly = b + 1
    # columns: p_0..p_b, c_1..c_n
    cols = []
    kvar = MPoly.var(vars, "k")
    kp1 = kvar + MPoly.one(vars)
    for j in range(npoly):
        cols.append(_poly_to_colfuncs(Ahat * kp1 ** j + Bhat * kvar ** j))
    for F in Fhat:
        cols.append(_poly_to_colfuncs(-F))
    degrees = sorted({d for col in cols for d in col})
    zero = RatFunc.zero(vars)
    matrix = [[col.get(d, zero) for col in cols] for d in degrees]
    vecs = nullspace(matrix, npoly + n, vars)
    urf = RatFunc.from_poly(u)
    rows = []
    for v in vecs:
        p = MPoly.zero(vars)
        for j in range(npoly):
            if not v[j].is_zero:
                p = p + v[j].num.scale(
                    1 / v[j].den.const_value()) * kvar ** j
        g = RatFunc.from_poly(p) / urf
        c = tuple(v[npoly:])
        if g.is_zero and all(x.is_zero for x in c):
            continue
        rows.append((c, g))
    return rows


def _unit(n, i, vars):
    one = RatFunc.one(vars)
    zero = RatFunc.zero(vars)
    return tuple(one if j == i else zero for j in range(n))


# -- multiplicative homogeneous problems ------------------------------

def sigma_quotient_witness(r):
    """If r = sigma(w)/w for some rational w, return w, else None.

    Works by stripping shift-equivalent factor pairs from numerator and
    denominator (the candidate w is assembled from the stripped gcds)
    and verifying the candidate exactly at the end."""
    vars = r.vars
    if r.is_zero:
        return None
    p, q = r.num, r.den
    if p.degree("k") != q.degree("k"):
        return None
    a, b = p, q
    c = MPoly.one(vars)
    if a.degree("k") > 0:
        # shift candidates only depend on the squarefree parts, and the
        # radical keeps the resultant small for high powers
        js, _ = dispersion(radical(a, "k"), radical(b, "k"), "k")
        for j in js:
            if j == 0:
                continue
            while True:
                d = mpoly_gcd(a, b.shift("k", j))
                if d.is_const:
                    break
                a = exact_div(a, d)
                b = exact_div(b, d.shift("k", -j))
                for i in range(1, j + 1):
                    c = c * d.shift("k", -i)
        # also strip exact common factors (j = 0)
        d = mpoly_gcd(a, b)
        if not d.is_const:
            a = exact_div(a, d)
            b = exact_div(b, d)
    w = RatFunc.from_poly(c)
    if w.shift("k", 1) / w == r:
        return w
    return None


def solve_homogeneous_mult(a, m_max=12):
    """Smallest 0 < m <= m_max with sigma(g) = a^m * g solvable for a
    nonzero rational g; returns (m, g) or None."""
    if a.is_zero:
        raise BaseSolveError("zero multiplier")
    power = RatFunc.one(a.vars)
    for m in range(1, m_max + 1):
        power = power * a
        w = sigma_quotient_witness(power)
        if w is not None:
            return m, w
    return None
