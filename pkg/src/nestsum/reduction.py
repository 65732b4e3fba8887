"""Reduction of first-order parameterized difference equations over a
tower to subproblems one level down.

The driver peels the top generator t of the working region:

  * split each right-hand entry into a part proper in t and a part
    polynomial in t;
  * proper parts: zero for sum generators (anything else is out of
    scope), Laurent tails for product generators, handled power by
    power since sigma respects the t-grading there;
  * polynomial parts: coefficient recursion from a degree bound down to
    zero, where the coefficient problem at degree r carries the twisted
    pair (a1 * alpha^r, a2) one level down.

All stages are chained through one running state (constant matrix C,
partial solutions g, residual right-hand sides), which is exactly the
matrix recombination of the classical reduction, unrolled.  The
subproblem solvers are injected, so the same driver serves both the
plain recursive strategy and the depth-optimal one (which may extend
the tower during a subcall; the driver re-levels its state through the
returned level maps).
"""

from __future__ import annotations

from .polys import RatFunc
from .field import (Elem, Tower, PI, SIGMA, base_elem, zero_elem, one_elem,
                    eadd, esub, emul, eneg, ediv, einv, epow, escale,
                    gen_elem, elem_vars, relevel, _as_pair, _pdivmod,
                    _ptrim, max_level)
from . import basesolve


class ScopeError(Exception):
    """Input outside the supported fragment (structured)."""

    def __init__(self, message, generator=None):
        super().__init__(message)
        self.generator = generator


class SolutionBasis:
    """Basis rows (c, g) of a solution space V(a, f, F), c over K."""

    __slots__ = ("n", "rows", "a_pair")

    def __init__(self, n, rows, a_pair=None):
        self.n = n
        self.rows = list(rows)
        self.a_pair = a_pair

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def __repr__(self):
        return "SolutionBasis(n=%d, dim=%d)" % (self.n, len(self.rows))


def identity_map(tower):
    return list(range(tower.height + 1))


def compose_maps(lm1, lm2):
    if lm1 is None:
        return lm2
    if lm2 is None:
        return lm1
    return [lm2[x] for x in lm1]


def apply_map(lm, level):
    return level if lm is None else lm[level]


def relevel_rows(rows, lm):
    if lm is None:
        return rows
    return [(c, relevel(g, lm)) for c, g in rows]


# -- linear algebra over K -------------------------------------------

def _is_one(e):
    return e.level == 0 and e.base.is_const and e.base.const_value() == 1


def _is_minus_one(e):
    return e.level == 0 and e.base.is_const and e.base.const_value() == -1


def rref_rows(rows, n, vars):
    """Deterministic normalization of basis rows: reduced row echelon
    form on the constant block; homogeneous rows (c = 0) trail, a
    constant g among them is normalized to 1."""
    work = [(list(c), g) for c, g in rows]
    pr = 0
    for col in range(n):
        sel = None
        for i in range(pr, len(work)):
            if not work[i][0][col].is_zero:
                sel = i
                break
        if sel is None:
            continue
        work[pr], work[sel] = work[sel], work[pr]
        c, g = work[pr]
        inv = c[col].inv()
        c = [x * inv for x in c]
        g = emul(base_elem(inv), g)
        work[pr] = (c, g)
        for i in range(len(work)):
            if i != pr and not work[i][0][col].is_zero:
                factor = work[i][0][col]
                ci, gi = work[i]
                ci = [x - factor * y for x, y in zip(ci, c)]
                gi = esub(gi, emul(base_elem(factor), g))
                work[i] = (ci, gi)
        pr += 1
    head = work[:pr]
    tail = []
    seen_const = False
    for c, g in work[pr:]:
        if g.is_zero:
            continue
        if g.level == 0 and g.base.is_const:
            if seen_const:
                continue
            seen_const = True
            g = one_elem(vars)
        tail.append((c, g))
    return [(tuple(c), g) for c, g in head + tail]


def in_rowspace(rref, vec):
    """Whether a K-vector lies in the row space of c-parts of rref rows."""
    v = list(vec)
    for c, _ in rref:
        col = next((i for i, x in enumerate(c) if not x.is_zero), None)
        if col is None:
            continue
        if not v[col].is_zero:
            factor = v[col] / c[col]
            v = [x - factor * y for x, y in zip(v, c)]
    return all(x.is_zero for x in v)


def _mat_rows(rows):
    return [c for c, _ in rows]


def _unit_vec(n, i, vars):
    one = RatFunc.one(vars)
    zero = RatFunc.zero(vars)
    return tuple(one if j == i else zero for j in range(n))


# -- spec-level helpers ------------------------------------------------

def split_rational(f, level, tower):
    """f = h + p in the top generator t of the working region, with h
    proper (negative part) and p polynomial.

    Returns (laurent, poly) where laurent maps negative powers of t to
    coefficient elements and poly is the list of polynomial
    coefficients.  Raises ScopeError for denominators this fragment
    does not cover."""
    gen = tower.gen_at(level)
    num, den = _as_pair(f, level)
    if len(den) == 1:
        return {}, list(num)
    if gen.kind == SIGMA:
        raise ScopeError(
            "denominator involves the sum generator %s; only base-field "
            "and product-generator denominators are supported"
            % gen.name, generator=gen.name)
    if any(not c.is_zero for c in den[:-1]):
        raise ScopeError(
            "denominator in product generator %s is not a monomial"
            % gen.name, generator=gen.name)
    j = len(den) - 1
    quot, rem = _pdivmod(num, den)
    laurent = {i - j: rem[i] for i in range(len(rem))
               if not rem[i].is_zero}
    return laurent, list(quot)


def degree_bound(poly_parts, gen_kind, safety=0):
    """Degree bound for polynomial solutions in the top generator."""
    degs = [len(p) - 1 for p in poly_parts if p]
    b = max(degs + [1])
    if gen_kind == SIGMA:
        b += 1
    return b + safety


class _ChainState:
    """Running recombination state of the staged reduction."""

    __slots__ = ("n", "C", "gs", "rhs", "vars")

    def __init__(self, n, vars):
        self.n = n
        self.vars = vars
        self.C = [_unit_vec(n, i, vars) for i in range(n)]
        self.gs = [zero_elem(vars)] * n
        self.rhs = None  # set by the driver

    @property
    def width(self):
        return len(self.C)

    def update(self, sub_rows, monomial, a1, a2, tower):
        """Fold a subproblem basis into the state.  sub_rows solve
        a1*sigma(w)+a2*w = d . tilde; each returned row contributes
        g += w * monomial and rhs -= a1*sigma(w*mono) + a2*(w*mono)."""
        newC, newg, newrhs = [], [], []
        for d, w in sub_rows:
            c = [sum((d[j] * self.C[j][i] for j in range(self.width)),
                     RatFunc.zero(self.vars)) for i in range(self.n)]
            g = zero_elem(self.vars)
            r = zero_elem(self.vars)
            for j in range(self.width):
                if not d[j].is_zero:
                    dj = base_elem(d[j])
                    g = eadd(g, emul(dj, self.gs[j]))
                    r = eadd(r, emul(dj, self.rhs[j]))
            if not w.is_zero:
                term = emul(w, monomial)
                g = eadd(g, term)
                r = esub(r, eadd(emul(a1, tower.sigma(term)),
                                 emul(a2, term)))
            newC.append(tuple(c))
            newg.append(g)
            newrhs.append(r)
        self.C = newC
        self.gs = newg
        self.rhs = newrhs

    def relevel(self, lm):
        if lm is None:
            return
        self.gs = [relevel(g, lm) for g in self.gs]
        self.rhs = [relevel(r, lm) for r in self.rhs]

    def final_rows(self):
        return list(zip(self.C, self.gs))


def _coeff_at(e, level, r):
    num, den = _as_pair(e, level)
    if len(den) != 1:
        raise ScopeError("residual right-hand side is not polynomial")
    if r < len(num):
        return num[r]
    return zero_elem(elem_vars(e))


def reduce_level(a1, a2, f, level, tower, cp_solver, final_solver,
                 rp_solver, safety=0):
    """Stage-chained reduction at one generator level.

    cp_solver/final_solver/rp_solver(a1, a2, tilde, level, tower)
    -> (tower, level_map, rows); cp handles the degree coefficients
    r >= 1, final the degree-0 problem, rp the Laurent coefficients.
    Returns (tower, total_level_map, rows)."""
    n = len(f)
    vars = tower.vars
    gen = tower.gen_at(level)
    alpha = gen.defining if gen.kind == PI else None
    total_lm = None

    state = _ChainState(n, vars)
    laurent_all = []
    polys = []
    for fi in f:
        laurent, poly = split_rational(fi, level, tower)
        laurent_all.append(laurent)
        polys.append(poly)

    # state.rhs holds full elements (Laurent + polynomial residue)
    state.rhs = list(f)

    # -- proper (Laurent) stages, most negative power first -----------
    powers = sorted({j for lau in laurent_all for j in lau})
    t_level = level
    for j in powers:
        t = gen_elem(t_level, vars)
        tilde = [_laurent_coeff(r, t_level, j, vars) for r in state.rhs]
        a1_eff = emul(a1, epow(alpha, j))
        tower, lm, rows = rp_solver(a1_eff, a2, tilde, t_level - 1, tower)
        if lm is not None:
            state.relevel(lm)
            a1 = relevel(a1, lm)
            a2 = relevel(a2, lm)
            alpha = relevel(alpha, lm) if alpha is not None else None
            t_level = apply_map(lm, t_level)
            total_lm = compose_maps(total_lm, lm)
        mono = epow(gen_elem(t_level, vars), j)
        state.update(rows, mono, a1, a2, tower)

    # -- polynomial stages --------------------------------------------
    b = degree_bound(polys, gen.kind, safety=safety)
    for r in range(b, -1, -1):
        tilde = [_coeff_at(x, t_level, r) for x in state.rhs]
        if gen.kind == PI and r > 0:
            a1_eff = emul(a1, epow(alpha, r))
        else:
            a1_eff = a1
        solver = final_solver if r == 0 else cp_solver
        tower, lm, rows = solver(a1_eff, a2, tilde, t_level - 1, tower)
        if lm is not None:
            state.relevel(lm)
            a1 = relevel(a1, lm)
            a2 = relevel(a2, lm)
            alpha = relevel(alpha, lm) if alpha is not None else None
            t_level = apply_map(lm, t_level)
            total_lm = compose_maps(total_lm, lm)
        mono = epow(gen_elem(t_level, vars), r)
        state.update(rows, mono, a1, a2, tower)
    for r in state.rhs:
        if not r.is_zero:
            raise ScopeError("reduction left a nonzero residual")
    return tower, total_lm, state.final_rows()


def _laurent_coeff(e, level, j, vars):
    """Coefficient of t^j (j < 0) of an element at the given level."""
    num, den = _as_pair(e, level)
    if len(den) == 1:
        return zero_elem(vars)
    jd = len(den) - 1
    _, rem = _pdivmod(num, den)
    i = j + jd
    if 0 <= i < len(rem):
        return rem[i]
    return zero_elem(vars)


# -- plain recursive (non-extending) solver ----------------------------

def _dedup(f, vars):
    """Collapse zero and duplicate entries; returns (reduced, expand)
    where expand(rows_reduced) lifts a reduced basis back."""
    reduced = []
    index = {}
    mapping = []  # per original entry: None (zero) or reduced index
    for fi in f:
        if fi.is_zero:
            mapping.append(None)
            continue
        key = fi
        if key in index:
            mapping.append(index[key])
        else:
            index[key] = len(reduced)
            mapping.append(len(reduced))
            reduced.append(fi)

    n = len(f)
    zero = RatFunc.zero(vars)
    one = RatFunc.one(vars)

    def expand(rows):
        out = []
        first_of = {}
        for i, m in enumerate(mapping):
            if m is not None and m not in first_of:
                first_of[m] = i
        # kernel rows: zero entries and duplicate differences
        for i, m in enumerate(mapping):
            if m is None:
                out.append((_unit_vec(n, i, vars), zero_elem(vars)))
            elif first_of[m] != i:
                c = list(_unit_vec(n, i, vars))
                c[first_of[m]] = -one
                out.append((tuple(c), zero_elem(vars)))
        for d, g in rows:
            c = [zero] * n
            for ri, oi in first_of.items():
                c[oi] = d[ri]
            out.append((tuple(c), g))
        return out

    return reduced, expand


def _is_plain_pair(a1, a2):
    return _is_one(a1) and _is_minus_one(a2)


def solve_pfde_tower(a1, a2, f, level, tower, safety=0):
    """Basis of V((a1, a2), f, F_level) without extending the tower.

    F_level is the subfield spanned by the base and generators
    1..level.  Every returned g lies in that subfield."""
    vars = tower.vars
    n = len(f)
    reduced, expand = _dedup(f, vars)
    rows = _solve_plain(a1, a2, reduced, level, tower, safety)
    return rref_rows(expand(rows), n, vars)


def _solve_plain(a1, a2, f, level, tower, safety=0):
    vars = tower.vars
    key = (a1, a2, tuple(f), level, safety)
    cached = tower._solve_cache.get(key)
    if cached is not None:
        return cached
    if not f and _is_plain_pair(a1, a2):
        rows = [((), one_elem(vars))]
        tower._solve_cache[key] = rows
        return rows
    if level == 0:
        rows = basesolve.solve_pfde_base(
            _to_base(a1), _to_base(a2), [_to_base(x) for x in f])
        rows = [(c, base_elem(g)) for c, g in rows]
        tower._solve_cache[key] = rows
        return rows

    def sub(a1s, a2s, tilde, lvl, tw):
        rs = solve_pfde_tower(a1s, a2s, tilde, lvl, tw, safety=safety)
        return tw, None, rs

    _, _, rows = reduce_level(a1, a2, f, level, tower, sub, sub, sub,
                              safety=safety)
    rows = rref_rows(rows, len(f), vars)
    tower._solve_cache[key] = rows
    return rows


def _to_base(e):
    if e.level != 0:
        raise ScopeError("expected a base-field element")
    return e.base


def solve_rp(a1, a2, f, level, tower, safety=0):
    """Proper-part solutions at the top generator: thin wrapper kept as
    a named entry point; delegates to the plain solver on the Laurent
    coefficient problems."""
    return solve_pfde_tower(a1, a2, f, level, tower, safety=safety)


def solve_pt(f, tower, policy="naive", level=None, safety=0):
    """Parameterized telescoping: basis of V((1,-1), f, F)."""
    vars = tower.vars
    one = one_elem(vars)
    if level is None:
        level = tower.height
    if policy == "naive":
        rows = solve_pfde_tower(one, eneg(one), list(f), level, tower,
                                safety=safety)
        return tower, rows
    if policy == "refined":
        from . import depthopt
        d = max((tower.depth(x) for x in f), default=0) + 1
        tower2, _, rows, _ = depthopt.find_depth_complete_ext(
            list(f), d, level, tower)
        return tower2, rows
    raise ValueError("unknown policy %r" % (policy,))
