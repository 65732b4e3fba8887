"""Depth-bounded telescoping with on-demand tower extension.

The plain solver of `reduction` answers "is there a telescoper in the
field we already have".  Here the tower is grown, column by column,
until the solution space of the parameterized problem is as large as
solutions of bounded nesting depth allow.  A sum generator is adjoined
for a right-hand entry only after every cheaper way out fails: the
entry already lies in the span of the basis found one depth lower, a
generator of the working region or one riding above it telescopes the
entry verbatim, or the full tower happens to contain a solution.

The recursion reuses the staged reduction driver of `reduction`, with
depth-aware subsolvers plugged in: coefficient problems of positive
degree run with the depth budget lowered by one, the degree-zero
problem keeps the budget, and twisted problems coming from product
generators never warrant an extension and fall back to the plain
solver.
"""

from __future__ import annotations

from itertools import product as _cartesian

from .polys import RatFunc
from .field import (Tower, PI, SIGMA, base_elem, one_elem, zero_elem,
                    eneg, emul, epow, relevel)
from .reduction import (ScopeError, solve_pfde_tower, rref_rows,
                        in_rowspace, reduce_level, relevel_rows,
                        compose_maps, apply_map, _dedup, _is_plain_pair,
                        _unit_vec)
from .basesolve import sigma_quotient_witness


class TelescoperExistsError(Exception):
    """Raised when an element offered as a sum generator already
    telescopes; carries the solution."""

    def __init__(self, message, g=None):
        super().__init__(message)
        self.g = g


class ProductDependenceError(Exception):
    """Raised when an element offered as a product generator is
    multiplicatively dependent on the tower; carries the witness."""

    def __init__(self, message, power=1, exponents=(), g=None,
                 witness_base=None):
        super().__init__(message)
        self.power = power
        self.exponents = exponents
        self.g = g
        self.witness_base = witness_base


class TelescoperResult:
    """A telescoper sigma(g) - g = f together with the tower it lives
    in and the names of generators adjoined along the way."""

    __slots__ = ("tower", "g", "adjoined", "rows", "level_map")

    def __init__(self, tower, g, adjoined, rows, level_map=None):
        self.tower = tower
        self.g = g
        self.adjoined = adjoined
        self.rows = rows
        self.level_map = level_map

    def __repr__(self):
        return "TelescoperResult(adjoined=%r)" % (self.adjoined,)


def new_generator_names(old_tower, new_tower):
    before = {g.name for g in old_tower.gens}
    return [g.name for g in new_tower.gens if g.name not in before]


# -- the extension-building solver --------------------------------------

def find_depth_complete_ext(f, d, split, tower, safety=0):
    """Basis of V((1,-1), f, F') where F' extends the working region
    (levels 1..split) just enough to be complete for solutions of
    depth <= d.

    Returns (tower, split, rows, level_map); rows are rref-normalized
    and every g lies inside the (possibly grown) region."""
    vars = tower.vars
    n = len(f)
    reduced, expand = _dedup(list(f), vars)
    tower, split, rows, lm = _find_dce(reduced, d, split, tower, safety)
    rows = rref_rows(expand(rows), n, vars)
    return tower, split, rows, lm


def _find_dce(f, d, split, tower, safety):
    vars = tower.vars
    n = len(f)
    d = min(d, tower.depth_of_region(split) + 1)
    one = one_elem(vars)
    neg_one = eneg(one)

    if d <= 0 or (d == 1 and tower.ground_height == 0):
        # nothing of depth <= d can be adjoined beyond the region
        rows = solve_pfde_tower(one, neg_one, list(f), split, tower,
                                safety=safety)
        return tower, split, rows, None

    if tower.depth_of_region(split) < d:
        return _complete(f, d, split, tower, safety)

    # -- reduction: peel the top generator of the region ---------------
    def cp(a1s, a2s, tilde, lvl, tw):
        if _is_plain_pair(a1s, a2s):
            tw2, _, rows, lm = _find_dce(list(tilde), d - 1, lvl, tw,
                                         safety)
            return tw2, lm, rows
        return tw, None, solve_pfde_tower(a1s, a2s, tilde, lvl, tw,
                                          safety=safety)

    def final(a1s, a2s, tilde, lvl, tw):
        if _is_plain_pair(a1s, a2s):
            tw2, _, rows, lm = _find_dce(list(tilde), d, lvl, tw, safety)
            return tw2, lm, rows
        return tw, None, solve_pfde_tower(a1s, a2s, tilde, lvl, tw,
                                          safety=safety)

    def rp(a1s, a2s, tilde, lvl, tw):
        return tw, None, solve_pfde_tower(a1s, a2s, tilde, lvl, tw,
                                          safety=safety)

    tower, total_lm, rows = reduce_level(one, neg_one, list(f), split,
                                         tower, cp, final, rp,
                                         safety=safety)
    split = apply_map(total_lm, split)
    return tower, split, rref_rows(rows, n, vars), total_lm


def _complete(f, d, split, tower, safety):
    """Completion step: start from a basis one depth level lower and
    settle every uncovered column, adjoining a sum generator when no
    existing part of the tower accounts for it."""
    vars = tower.vars
    n = len(f)
    tower, split, rows, total_lm = _find_dce(f, d - 1, split, tower,
                                             safety)
    if total_lm is not None:
        f = [relevel(x, total_lm) for x in f]
    rows = rref_rows(rows, n, vars)

    for j in range(n):
        if f[j].is_zero:
            continue
        unit = _unit_vec(n, j, vars)
        if in_rowspace(rows, unit):
            continue

        # a region generator telescoping f[j] verbatim gives a row
        matched = False
        for lvl in range(1, split + 1):
            gen = tower.gen_at(lvl)
            if gen.kind != SIGMA:
                continue
            if gen.defining == f[j]:
                rows.append((unit, tower.gen(lvl)))
                matched = True
                break
            if gen.defining == eneg(f[j]):
                rows.append((unit, eneg(tower.gen(lvl))))
                matched = True
                break
        if matched:
            rows = rref_rows(rows, n, vars)
            continue

        # a plain solve inside the region may still succeed (the
        # depth-bounded recursion only sees solutions within budget)
        reg = solve_pfde_tower(one_elem(vars), eneg(one_elem(vars)),
                               [f[j]], split, tower, safety=safety)
        hit = next((r for r in reg if not r[0][0].is_zero), None)
        if hit is not None:
            c = [RatFunc.zero(vars)] * n
            c[j] = hit[0][0]
            rows.append((tuple(c), hit[1]))
            rows = rref_rows(rows, n, vars)
            continue

        # generators riding above the region mark the column complete
        # without contributing a row (their level is out of bounds)
        if _carried_witness(tower, split, f[j]):
            continue
        if _solvable_in_full_tower(f[j], tower, safety):
            continue

        # genuinely new: adjoin sigma(s) = s + f[j] inside the region
        name = tower.fresh_name(tower.depth(f[j]) + 1)
        tower, lm, lvl = tower.extend(name, SIGMA, f[j], max_pos=split,
                                      certified=True)
        split += 1
        f = [relevel(x, lm) for x in f]
        rows = relevel_rows(rows, lm)
        total_lm = compose_maps(total_lm, lm)
        rows.append((unit, tower.gen(lvl)))
        rows = rref_rows(rows, n, vars)

    return tower, split, rows, total_lm


def _carried_witness(tower, split, fj):
    neg = eneg(fj)
    for lvl in range(split + 1, tower.height + 1):
        gen = tower.gen_at(lvl)
        if gen.kind == SIGMA and gen.defining in (fj, neg):
            return True
    return False


def _solvable_in_full_tower(fj, tower, safety):
    vars = tower.vars
    rows = solve_pfde_tower(one_elem(vars), eneg(one_elem(vars)), [fj],
                            tower.height, tower, safety=safety)
    return any(not c[0].is_zero for c, _ in rows)


# -- user-facing entry points -------------------------------------------

def telescope_depth_optimal(f, tower, safety=0):
    """Telescoper for a single element: sigma(g) - g = f with g at most
    one depth level above f, extending the tower as needed."""
    d = tower.depth(f) + 1
    tw, _, rows, lm = find_depth_complete_ext([f], d, tower.height, tower,
                                              safety=safety)
    sol = next((row for row in rows if not row[0][0].is_zero), None)
    if sol is None:
        return None
    c, g = sol
    if c[0] != RatFunc.one(tw.vars):
        g = emul(base_elem(c[0].inv()), g)
    return TelescoperResult(tw, g, new_generator_names(tower, tw), rows,
                            level_map=lm)


def parameterized_telescope(f, tower, safety=0):
    """Basis of sigma(g) - g = c1*f1 + ... + cn*fn among solutions of
    depth bounded by the entries themselves.  Returns (tower, rows,
    adjoined names)."""
    d = max((tower.depth(x) for x in f), default=0)
    tw, _, rows, _ = find_depth_complete_ext(list(f), d, tower.height,
                                             tower, safety=safety)
    return tw, rows, new_generator_names(tower, tw)


def adjoin_sigma(tower, name, beta, safety=0):
    """Adjoin sigma(t) = t + beta after checking that beta telescopes
    neither in the tower nor in any extension within beta's depth.

    Returns (tower, level_map, level); raises TelescoperExistsError
    with the solution when the generator would be redundant."""
    rows = solve_pfde_tower(tower.one(), eneg(tower.one()), [beta],
                            tower.height, tower, safety=safety)
    hit = next((r for r in rows if not r[0][0].is_zero), None)
    if hit is not None:
        g = emul(base_elem(hit[0][0].inv()), hit[1])
        raise TelescoperExistsError(
            "element already telescopes in the tower", g=g)
    d = tower.depth(beta)
    tw, _, rows, _ = find_depth_complete_ext([beta], d, tower.height,
                                             tower, safety=safety)
    hit = next((r for r in rows if not r[0][0].is_zero), None)
    if hit is not None:
        g = emul(base_elem(hit[0][0].inv()), hit[1])
        raise TelescoperExistsError(
            "element telescopes in an extension of depth %d" % d, g=g)
    return tower.extend(name, SIGMA, beta, certified=True)


def adjoin_pi(tower, name, alpha, m_max=12, cross_max=4, ground=False):
    """Adjoin sigma(t) = alpha * t after checking multiplicative
    independence: no power alpha^m (1 <= m <= m_max), possibly combined
    with powers of existing product generators in [-cross_max,
    cross_max], may be a shift quotient sigma(w)/w of a base element.

    Returns (tower, level_map, level); raises ProductDependenceError
    with (power, exponents, witness) otherwise."""
    if alpha.is_zero:
        raise ScopeError("product generator with zero multiplier")
    if alpha.level != 0:
        raise ScopeError("product multiplier must be a base element")
    a0 = alpha.base
    pis = []
    for lvl in range(1, tower.height + 1):
        gen = tower.gen_at(lvl)
        if gen.kind != PI:
            continue
        if gen.defining.level != 0:
            raise ScopeError(
                "product generator %s has a non-base multiplier; "
                "independence check not supported" % gen.name,
                generator=gen.name)
        pis.append((lvl, gen.defining.base))

    for m in range(1, m_max + 1):
        base_pow = a0 ** m
        for expo in _cartesian(range(-cross_max, cross_max + 1),
                               repeat=len(pis)):
            r = base_pow
            for (_, ai), e in zip(pis, expo):
                if e:
                    r = r * (ai ** e)
            dk = r.num.degree("k")
            if dk != r.den.degree("k"):
                continue
            if r.num.coeff("k", dk) != r.den.coeff("k", dk):
                continue
            w = sigma_quotient_witness(r)
            if w is None:
                continue
            g = base_elem(w)
            for (lvl, _), e in zip(pis, expo):
                if e:
                    g = emul(g, epow(tower.gen(lvl), -e))
            raise ProductDependenceError(
                "alpha^%d depends multiplicatively on the tower" % m,
                power=m, exponents=expo, g=g, witness_base=w)
    return tower.extend(name, PI, alpha, certified=True, ground=ground)
