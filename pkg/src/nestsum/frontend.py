"""Translation between nested-sum expressions and tower elements.

A Session owns a tower and grows it as expressions are registered.
Sums become (or reuse) sum generators; binomials, powers and explicit
products become product generators after shift-normalization so that
the generator's sequence starts at 1 and never crosses a zero or pole.
In refined mode every sum is pushed through the depth-bounded
telescoper first, so a generator is adjoined only when the sum cannot
be expressed with the nesting depth of its summand.

The reverse direction rebuilds expressions from elements, deriving a
sum/product form for each generator from its defining element (or a
recorded display form, e.g. the harmonic-sum shorthand), with additive
offsets fixed by exact evaluation at a small initial point.
"""

from __future__ import annotations

from gmpy2 import mpq

from .polys import MPoly, RatFunc, integer_roots
from .field import (Tower, PI, SIGMA, base_elem, relevel, eadd, esub,
                    emul, eneg, ediv, epow)
from .reduction import solve_pt, compose_maps, ScopeError
from . import depthopt
from .expressions import (Expr, Const, Sym, Add, Mul, Div, Neg, Pow,
                          Binom, SumE, ProdE, HarmonicS, free_symbols,
                          substitute, to_text)
from .oracle import (eval_elem_symbolic, EvalError, verify_identity,
                     eval_expr, SeqEvaluator, default_assignments)


class FrontendError(Exception):
    pass


_BINOM_RATIOS = {
    # (top slope, bottom slope) -> ratio binom at k+1 over binom at k,
    # as a function of the entries A, B at the point k
    (0, 0): lambda A, B, one: (one, one),
    (1, 0): lambda A, B, one: (A + one, A + one - B),
    (-1, 0): lambda A, B, one: (A - B, A),
    (0, 1): lambda A, B, one: (A - B, B + one),
    (0, -1): lambda A, B, one: (B, A - B + one),
    (1, 1): lambda A, B, one: (A + one, B + one),
    (-1, -1): lambda A, B, one: (B, A),
}


class IdentityCertificate:
    """A checked statement: input expression, its representation, the
    tower it lives in, and the oracle report that validated it."""

    __slots__ = ("kind", "input", "result_expr", "elem", "session",
                 "oracle_report", "flags")

    def __init__(self, kind, input, result_expr, elem, session,
                 oracle_report, flags=None):
        self.kind = kind
        self.input = input
        self.result_expr = result_expr
        self.elem = elem
        self.session = session
        self.oracle_report = oracle_report
        self.flags = dict(flags or {})

    @property
    def passed(self):
        return self.oracle_report["pass"]


class Session:
    """A growing tower plus naming/display bookkeeping."""

    def __init__(self, params=(), mode="refined", m_max=12,
                 ground_products=False, safety=0, shortcuts=True):
        # when products go to the ground region (creative telescoping)
        # the summation variable is ground as well, so nesting depth is
        # measured relative to it
        self.tower = Tower(params=tuple(sorted(params)),
                           ground_height=1 if ground_products else 0)
        self.mode = mode
        self.m_max = m_max
        self.ground_products = ground_products
        self.safety = safety         # extra slack on degree bounds
        self.shortcuts = shortcuts   # reuse generators by defining
        self.displays = {}   # generator name -> expression in n
        self.harmonics = {}  # index tuple -> (element, map mark)
        self._maps = []      # level-map history, for releveling
        self._counters = {"t": 0, "p": 0}
        self._pshift = None  # (param, i): shift a parameter by i
        self._sum_depth = 0
        self._top_outcome = None

    # -- bookkeeping ----------------------------------------------------

    def _advance(self, lm):
        if lm is not None:
            self._maps.append(lm)

    def _map_since(self, mark):
        lm = None
        for m in self._maps[mark:]:
            lm = compose_maps(lm, m)
        return lm

    def _fresh(self, prefix):
        used = {g.name for g in self.tower.gens}
        while True:
            name = "%s%d" % (prefix, self._counters[prefix])
            self._counters[prefix] += 1
            if name not in used:
                return name

    def _rf(self, q):
        return RatFunc.from_poly(MPoly.const(self.tower.vars, mpq(q)))

    def _rfvar(self, name):
        return RatFunc.var(self.tower.vars, name)

    # -- registration -----------------------------------------------------

    def register(self, expr, outer="n"):
        """Element representing expr as a sequence in the outer
        variable (base variable k plays its role)."""
        self._top_outcome = None
        return self._rep(expr, outer)

    def _rep(self, expr, var):
        tower = self.tower
        if isinstance(expr, Const):
            return tower.const(expr.value)
        if isinstance(expr, Sym):
            if expr.name == var:
                return tower.k()
            if expr.name in tower.params:
                rf = self._rfvar(expr.name)
                if self._pshift and self._pshift[0] == expr.name:
                    rf = rf + self._rf(self._pshift[1])
                return base_elem(rf)
            raise FrontendError("unbound symbol %r" % expr.name)
        if isinstance(expr, (Add, Mul)):
            parts = expr.terms if isinstance(expr, Add) else expr.factors
            op = eadd if isinstance(expr, Add) else emul
            out = None
            for child in parts:
                mark = len(self._maps)
                r = self._rep(child, var)
                lm = self._map_since(mark)
                if out is not None and lm is not None:
                    out = relevel(out, lm)
                out = r if out is None else op(out, r)
            return out
        if isinstance(expr, Div):
            num = self._rep(expr.num, var)
            mark = len(self._maps)
            den = self._rep(expr.den, var)
            lm = self._map_since(mark)
            if lm is not None:
                num = relevel(num, lm)
            return ediv(num, den)
        if isinstance(expr, Neg):
            return eneg(self._rep(expr.arg, var))
        if isinstance(expr, Pow):
            if isinstance(expr.exp, Const) and \
                    expr.exp.value.denominator == 1:
                return epow(self._rep(expr.base, var),
                            int(expr.exp.value))
            return self._product_atom(expr, var)
        if isinstance(expr, Binom):
            return self._product_atom(expr, var)
        if isinstance(expr, ProdE):
            return self._product_atom(expr, var)
        if isinstance(expr, SumE):
            return self._sum_node(expr.idx, expr.lower, expr.upper,
                                  expr.body, var)
        if isinstance(expr, HarmonicS):
            return self._harmonic_node(expr.indices, expr.arg, var)
        raise FrontendError("unsupported node %r" % (expr,))

    # -- base-level translation ------------------------------------------

    def _base_rf(self, expr, var, pshift=None):
        """Expression -> rational function over the base field, with
        var playing the role of k.  Rejects anything non-rational."""
        if isinstance(expr, Const):
            return self._rf(expr.value)
        if isinstance(expr, Sym):
            if expr.name == var:
                return self._rfvar("k")
            if expr.name in self.tower.params:
                rf = self._rfvar(expr.name)
                if pshift and pshift[0] == expr.name:
                    rf = rf + self._rf(pshift[1])
                return rf
            raise FrontendError("unbound symbol %r" % expr.name)
        if isinstance(expr, Add):
            out = self._rf(0)
            for t in expr.terms:
                out = out + self._base_rf(t, var, pshift)
            return out
        if isinstance(expr, Mul):
            out = self._rf(1)
            for t in expr.factors:
                out = out * self._base_rf(t, var, pshift)
            return out
        if isinstance(expr, Div):
            return (self._base_rf(expr.num, var, pshift)
                    / self._base_rf(expr.den, var, pshift))
        if isinstance(expr, Neg):
            return -self._base_rf(expr.arg, var, pshift)
        if isinstance(expr, Pow) and isinstance(expr.exp, Const) and \
                expr.exp.value.denominator == 1:
            return self._base_rf(expr.base, var, pshift) \
                ** int(expr.exp.value)
        raise FrontendError("expected a rational expression, got %s"
                            % to_text(expr))

    # -- product generators ------------------------------------------------

    def _product_atom(self, expr, var):
        """Represent a hypergeometric atom (binomial, symbolic power,
        explicit product) via a product generator, shift-normalized so
        the generator starts at 1."""
        ratio, value_at = self._atom_ratio(expr, var)
        # shift past every nonnegative integer zero/pole of the ratio
        roots = [r for r in integer_roots(ratio.num * ratio.den, "k")
                 if r >= 0]
        s = max(roots) + 1 if roots else 0
        alpha = ratio.shift("k", s)
        defining = base_elem(alpha)

        t = None
        if self.shortcuts:
            for lvl in range(1, self.tower.height + 1):
                g = self.tower.gen_at(lvl)
                if g.kind == PI and g.defining == defining:
                    t = self.tower.gen(lvl)
                    break
        if t is None:
            name = self._fresh("p")
            try:
                tower, lm, level = depthopt.adjoin_pi(
                    self.tower, name, defining, m_max=self.m_max,
                    ground=self.ground_products)
            except depthopt.ProductDependenceError as exc:
                if exc.power != 1:
                    raise
                # alpha is already a shift quotient sigma(t)/t: the
                # product is t itself, scaled so its value at 0 is 1
                # (alpha has no zeros or poles at nonnegative integers,
                # hence neither has the witness sequence)
                c0 = exc.witness_base.subs_values({"k": mpq(0)})
                t = emul(base_elem(c0 ** -1), exc.g)
            else:
                self.tower = tower
                self._advance(lm)
                t = self.tower.gen(level)

        rep = emul(base_elem(value_at(s)), self.tower.sigma(t, -s))
        if self._pshift and self._pshift[1]:
            rep = emul(base_elem(self._param_correction(expr, var)), rep)
        return rep

    def _atom_ratio(self, expr, var):
        """(ratio, value_at): the shift quotient atom(var+1)/atom(var)
        as a base rational function, and a function giving the exact
        symbolic value of the atom at var = s."""
        vars = self.tower.vars
        one = self._rf(1)
        if isinstance(expr, Pow):
            base = self._base_rf(expr.base, var)
            if base.involves("k"):
                raise FrontendError(
                    "power base must not involve the index: %s"
                    % to_text(expr))
            if self._pshift and base.involves(self._pshift[0]):
                raise FrontendError(
                    "power base may not involve the recurrence "
                    "parameter: %s" % to_text(expr))
            e0, d = self._linear_probe(expr.exp, var)
            ratio = base ** d

            def value_at(s):
                return base ** (e0 + d * s)
            return ratio, value_at
        if isinstance(expr, Binom):
            A = self._base_rf(expr.top, var)
            B = self._base_rf(expr.bottom, var)
            da = self._int_slope(A, "k")
            db = self._int_slope(B, "k")
            try:
                num, den = _BINOM_RATIOS[(da, db)](A, B, one)
            except KeyError:
                raise FrontendError(
                    "binomial entries must be fixed or move by one "
                    "with the index: %s" % to_text(expr))
            ratio = num / den

            def value_at(s):
                return _binom_symbolic(A.subs_values({"k": mpq(s)}),
                                       B.subs_values({"k": mpq(s)}),
                                       vars)
            return ratio, value_at
        if isinstance(expr, ProdE):
            if not isinstance(expr.lower, int) or expr.lower < 1:
                raise FrontendError("product lower bound must be a "
                                    "positive integer")
            off = self._upper_offset(expr.upper, var)
            if off != 0:
                raise FrontendError("product upper bound must be the "
                                    "enclosing variable itself")
            rb = self._base_rf(expr.body, expr.idx)
            if self._pshift and rb.involves(self._pshift[0]):
                raise FrontendError(
                    "product body may not involve the recurrence "
                    "parameter: %s" % to_text(expr))
            ratio = rb.shift("k", 1)
            lo = expr.lower

            def value_at(s):
                out = self._rf(1)
                for j in range(lo, s + 1):
                    out = out * rb.subs_values({"k": mpq(j)})
                return out
            return ratio, value_at
        raise FrontendError("unsupported product atom %s" % to_text(expr))

    def _param_correction(self, expr, var):
        """Rrequired when representing an atom with a shifted
        recurrence parameter through the unshifted generator:
        atom(p+i)/atom(p) as a base rational function."""
        p, i = self._pshift
        one = self._rf(1)
        if isinstance(expr, Pow) or isinstance(expr, ProdE):
            return one  # parameter-free by the checks above
        if isinstance(expr, Binom):
            A = self._base_rf(expr.top, var)
            B = self._base_rf(expr.bottom, var)
            da = self._int_slope(A, p)
            db = self._int_slope(B, p)
            try:
                num, den = _BINOM_RATIOS[(da, db)](A, B, one)
            except KeyError:
                raise FrontendError(
                    "binomial entries must be fixed or move by one "
                    "with the recurrence parameter: %s" % to_text(expr))
            step = num / den
            out = one
            for j in range(i):
                out = out * step.shift(p, j)
            return out
        raise FrontendError("unsupported atom %s" % to_text(expr))

    def _linear_probe(self, exp, var):
        """exp must be var-linear with integer slope; returns
        (value at var=0, slope)."""
        rf = self._base_rf(exp, var)
        e0 = rf.subs_values({"k": mpq(0)})
        e1 = rf.subs_values({"k": mpq(1)})
        e2 = rf.subs_values({"k": mpq(2)})
        d = e1 - e0
        if e2 - e1 != d or not d.is_const or not e0.is_const:
            raise FrontendError("exponent must be integer-linear in "
                                "the index")
        dv = d.const_value()
        ev = e0.const_value()
        if dv.denominator != 1 or ev.denominator != 1:
            raise FrontendError("exponent must take integer values")
        return int(ev), int(dv)

    def _int_slope(self, rf, name):
        d = rf.shift(name, 1) - rf
        if d.is_zero:
            return 0
        if not d.is_const:
            return None
        v = d.const_value()
        return int(v) if v.denominator == 1 else None

    def _upper_offset(self, upper, var):
        """upper bound must be var + integer offset; returns the
        offset."""
        rf = self._base_rf(upper, var)
        d = rf - self._rfvar("k")
        if not d.is_const:
            raise FrontendError("upper bound must be the enclosing "
                                "variable plus an integer")
        if d.is_zero:
            return 0
        v = d.const_value()
        if v.denominator != 1:
            raise FrontendError("upper bound offset must be an integer")
        return int(v)

    # -- sum generators ----------------------------------------------------

    def _sum_node(self, idx, lower, upper, body, var, pref_name=None,
                  display=None):
        off = self._upper_offset(upper, var)
        if off > 0:
            raise FrontendError("sum upper bound may not exceed the "
                                "enclosing variable")
        free = free_symbols(body) - set(self.tower.params) - {idx}
        if free:
            raise FrontendError("summand may only involve its own "
                                "index and parameters; stray %s"
                                % sorted(free))
        if not isinstance(lower, int) or lower < 0:
            raise FrontendError("sum lower bound must be an integer "
                                ">= 0")
        head = self.tower.zero()
        if lower == 0:
            head = self._const_term(body, idx, 0)
            lower = 1

        self._sum_depth += 1
        try:
            rep = self._sum_from_one(idx, body, lower, pref_name,
                                     display)
        finally:
            self._sum_depth -= 1
        if off:
            # sum to n+off is the shifted sum-to-n sequence
            rep = self.tower.sigma(rep, off)
        if not head.is_zero:
            rep = eadd(rep, head)
        return rep

    def _const_term(self, body, idx, value):
        """Summand at a fixed integer index, as a constant element."""
        fb = self._rep(body, idx)
        try:
            c = eval_elem_symbolic(fb, self.tower, value)
        except EvalError:
            raise FrontendError("summand undefined at %s = %d"
                                % (idx, value))
        return base_elem(c)

    def _sum_from_one(self, idx, body, lower, pref_name, display):
        fb = self._rep(body, idx)
        f = self.tower.sigma(fb)

        if self.shortcuts:
            for lvl in range(1, self.tower.height + 1):
                g = self.tower.gen_at(lvl)
                if g.kind == SIGMA and g.defining == f:
                    if self._sum_depth == 1:
                        self._top_outcome = "expressed"
                    return self._with_offset(self.tower.gen(lvl), fb,
                                             lower)

        if self.mode == "naive":
            _, rows = solve_pt([f], self.tower, policy="naive",
                               safety=self.safety)
            hit = next((r for r in rows if not r[0][0].is_zero), None)
            if hit is not None:
                c0 = hit[0][0]
                if isinstance(c0, RatFunc):
                    c0 = base_elem(c0)
                g = ediv(hit[1], c0)
                if self._sum_depth == 1:
                    self._top_outcome = "expressed"
                return self._with_offset(g, fb, lower)
            name = pref_name or self._fresh("t")
            tower, lm, level = self.tower.extend(name, SIGMA, f)
            self.tower = tower
            self._advance(lm)
            self._record_display(name, idx, body, display)
            if self._sum_depth == 1:
                self._top_outcome = "adjoined"
            return self._with_offset(self.tower.gen(level),
                                     relevel(fb, lm), lower)

        res = depthopt.telescope_depth_optimal(f, self.tower,
                                               safety=self.safety)
        if res is None:
            raise FrontendError("telescoping failed unexpectedly")
        self.tower = res.tower
        self._advance(res.level_map)
        if res.level_map is not None:
            f = relevel(f, res.level_map)
            fb = relevel(fb, res.level_map)
        own = None
        for name in res.adjoined:
            gen = self.tower.gen_at(self.tower.level_of(name))
            if gen.defining == f:
                own = name
        if own is not None:
            final = pref_name or own
            if pref_name and pref_name != own:
                self.tower = self.tower.rename(own, pref_name)
                final = pref_name
            self._record_display(final, idx, body, display)
        if self._sum_depth == 1:
            self._top_outcome = "adjoined" if own else "expressed"
        return self._with_offset(res.g, fb, lower)

    def _with_offset(self, g, fb, lower):
        """g + c where c makes g agree with the partial sums of fb
        starting at the given lower bound."""
        for n0 in range(0, 12):
            try:
                s = RatFunc.zero(self.tower.vars)
                for i in range(lower, n0 + 1):
                    s = s + eval_elem_symbolic(fb, self.tower, i)
                gv = eval_elem_symbolic(g, self.tower, n0)
            except EvalError:
                continue
            c = s - gv
            if c.is_zero:
                return g
            return eadd(g, base_elem(c))
        raise FrontendError("could not find a pole-free initial point")

    def _record_display(self, name, idx, body, display):
        if display is not None:
            self.displays[name] = display
        else:
            self.displays[name] = SumE(idx, 1, Sym("n"), body)

    def _harmonic_node(self, indices, arg, var):
        body_idx = "i"
        body = Div(Const(1), Pow(Sym(body_idx), Const(indices[0])))
        if len(indices) > 1:
            body = Mul(body, HarmonicS(indices[1:], Sym(body_idx)))
        pref = "s" + "_".join(str(i) for i in indices)
        display = HarmonicS(indices, Sym("n"))
        rep = self._sum_node(body_idx, 1, arg, body, var,
                             pref_name=pref, display=display)
        key = tuple(indices)
        if key not in self.harmonics and isinstance(arg, Sym):
            self.harmonics[key] = (rep, len(self._maps))
        return rep

    def harmonic_elem(self, indices):
        """Element of a previously registered nested harmonic sum,
        releveled into the current tower."""
        e, mark = self.harmonics[tuple(indices)]
        lm = self._map_since(mark)
        return relevel(e, lm) if lm is not None else e

    # -- backward translation ----------------------------------------------

    def to_expr(self, e, outer="n"):
        return self._elem_expr(e, outer, 0)

    def _gen_expr(self, level, outer, depth):
        gen = self.tower.gen_at(level)
        disp = self.displays.get(gen.name)
        if disp is not None:
            return (disp if outer == "n"
                    else substitute(disp, "n", Sym(outer)))
        ps = self._power_sum_display(gen, outer)
        if ps is not None:
            return ps
        idx = "i%d" % depth
        step = self.tower.sigma(gen.defining, -1)
        body = self._elem_expr(step, idx, depth + 1)
        cls = ProdE if gen.kind == PI else SumE
        return cls(idx, 1, Sym(outer), body)

    def _power_sum_display(self, gen, outer):
        """Recognize a sum generator whose step is c / i^m and render
        it as c * S[m](outer)."""
        if gen.kind != SIGMA:
            return None
        step = self.tower.sigma(gen.defining, -1)
        if step.level != 0:
            return None
        rf = step.base
        if not rf.num.is_const or len(rf.den.terms) != 1:
            return None
        (exps, dc), = rf.den.terms.items()
        ki = rf.den.vars.index("k")
        m = exps[ki]
        if m < 1 or any(e for i, e in enumerate(exps) if i != ki):
            return None
        c = rf.num.const_value() / dc
        hs = HarmonicS((m,), Sym(outer))
        return hs if c == 1 else Mul(Const(c), hs)

    def _elem_expr(self, e, outer, depth):
        if e.level == 0:
            return _ratfunc_expr(e.base, outer)
        t = self._gen_expr(e.level, outer, depth)
        num = self._poly_expr(e.num, t, outer, depth)
        if len(e.den) == 1 and e.den[0].level == 0 and \
                e.den[0].base.is_const and \
                e.den[0].base.const_value() == 1:
            return num
        den = self._poly_expr(e.den, t, outer, depth)
        return Div(num, den)

    def _poly_expr(self, coeffs, t, outer, depth):
        terms = []
        for d, c in enumerate(coeffs):
            if c.is_zero:
                continue
            ce = self._elem_expr(c, outer, depth)
            if d == 0:
                terms.append(ce)
            else:
                p = t if d == 1 else Pow(t, Const(d))
                if isinstance(ce, Const) and ce.value == 1:
                    terms.append(p)
                else:
                    terms.append(Mul(ce, p))
        if not terms:
            return Const(0)
        return terms[0] if len(terms) == 1 else Add(*terms)

    # -- reports -----------------------------------------------------------

    def depth_profile(self):
        """Depth multiset of the tower: the base variable plus every
        generator."""
        return sorted([self.tower.k_depth()]
                      + [g.depth for g in self.tower.gens])


def _binom_symbolic(A0, B0, vars):
    """binom(A0, B0) for rational-function entries, when it reduces to
    a rational function: integer bottom, or integer difference."""
    if B0.is_const:
        b = B0.const_value()
        if b.denominator == 1:
            b = int(b)
            if b < 0:
                return RatFunc.zero(vars)
            out = RatFunc.one(vars)
            for j in range(b):
                out = out * (A0 - RatFunc.from_poly(
                    MPoly.const(vars, mpq(j))))
            for j in range(2, b + 1):
                out = out / RatFunc.from_poly(MPoly.const(vars, mpq(j)))
            return out
    diff = A0 - B0
    if diff.is_const:
        c = diff.const_value()
        if c.denominator == 1 and int(c) >= 0:
            c = int(c)
            out = RatFunc.one(vars)
            for j in range(1, c + 1):
                out = out * (B0 + RatFunc.from_poly(
                    MPoly.const(vars, mpq(j))))
                out = out / RatFunc.from_poly(MPoly.const(vars, mpq(j)))
            return out
    raise FrontendError("binomial value at the normalization point is "
                        "not rational")


def _ratfunc_expr(rf, outer):
    num = _poly_to_expr(rf.num, outer)
    if rf.den.is_const and rf.den.const_value() == 1:
        return num
    return Div(num, _poly_to_expr(rf.den, outer))


def _poly_to_expr(p, outer):
    if p.is_zero:
        return Const(0)
    terms = []
    for e, c in sorted(p.terms.items(), reverse=True):
        factors = []
        if c != 1 or not any(e):
            factors.append(Const(c))
        for v, d in zip(p.vars, e):
            if d == 0:
                continue
            sym = Sym(outer if v == "k" else v)
            factors.append(sym if d == 1 else Pow(sym, Const(d)))
        if not factors:
            factors.append(Const(c))
        terms.append(factors[0] if len(factors) == 1 else Mul(*factors))
    return terms[0] if len(terms) == 1 else Add(*terms)


def elem_str(e, tower):
    """Readable canonical string of an element using generator names."""
    if e.level == 0:
        return str(e.base)
    t = tower.gen_at(e.level).name
    num = _coeff_str(e.num, t, tower)
    if len(e.den) == 1 and e.den[0].level == 0 and e.den[0].base.is_const \
            and e.den[0].base.const_value() == 1:
        return num
    return "(%s)/(%s)" % (num, _coeff_str(e.den, t, tower))


def _coeff_str(coeffs, t, tower):
    parts = []
    for d, c in enumerate(coeffs):
        if c.is_zero:
            continue
        cs = elem_str(c, tower)
        if d == 0:
            parts.append(cs)
        elif cs == "1":
            parts.append(t if d == 1 else "%s^%d" % (t, d))
        else:
            parts.append("(%s)*%s" % (cs, t if d == 1
                                      else "%s^%d" % (t, d)))
    return " + ".join(parts) if parts else "0"


def serialize_tower(tower):
    return [{"name": g.name, "kind": g.kind, "level": lvl,
             "defining": elem_str(g.defining, tower), "depth": g.depth}
            for lvl, g in enumerate(tower.gens, start=1)]


# -- user-level operations -------------------------------------------------


def _params_of(expr, params, outer="n"):
    out = free_symbols(expr) - {outer}
    if params is not None:
        out |= set(params)
    return sorted(out)


def simplify(expr, params=None, rng=(1, 30), m_max=12, safety=0,
             shortcuts=True):
    """Depth-minimal representation of a nested-sum expression, as a
    checked certificate."""
    params = _params_of(expr, params)
    sess = Session(params=params, mode="refined", m_max=m_max,
                   safety=safety, shortcuts=shortcuts)
    rep = sess.register(expr)
    result = sess.to_expr(rep)
    report = verify_identity(expr, result, rng=rng,
                             assignments=default_assignments(params))
    flags = {"m_max": m_max,
             "depth": sess.tower.depth(rep),
             "tower_depths": sess.depth_profile()}
    return IdentityCertificate("simplify", expr, result, rep, sess,
                               report, flags)


def telescope(expr, params=None, rng=(1, 30), m_max=12, safety=0,
              shortcuts=True):
    """Telescoper certificate for a sum: expr must be a single sum; the
    result expression is its depth-minimal closed/nested form."""
    if not isinstance(expr, (SumE, HarmonicS)):
        raise FrontendError("telescope expects a sum")
    return simplify(expr, params=params, rng=rng, m_max=m_max,
                    safety=safety, shortcuts=shortcuts)


class RecurrenceCertificate:
    """A verified linear recurrence for a parameterized definite sum:
    sum_i coeffs[i](p) * S(p+i) = rhs(p), with the summation variable
    telescoped away by a certificate element g."""

    __slots__ = ("input", "param", "order", "coeffs", "g", "session",
                 "rhs_values", "rhs_formula", "report", "flags")

    def __init__(self, input, param, order, coeffs, g, session,
                 rhs_values, rhs_formula, report, flags=None):
        self.input = input
        self.param = param
        self.order = order
        self.coeffs = coeffs
        self.g = g
        self.session = session
        self.rhs_values = rhs_values
        self.rhs_formula = rhs_formula
        self.report = report
        self.flags = dict(flags or {})

    @property
    def passed(self):
        return self.report["pass"]

    def recurrence_text(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero:
                continue
            shift = self.param if i == 0 else "%s+%d" % (self.param, i)
            terms.append("(%s)*S(%s)" % (c, shift))
        rhs = self.rhs_formula if self.rhs_formula else "r(%s)" % self.param
        return " + ".join(terms) + " = " + rhs


def creative_telescope(expr, param, mode="refined", max_order=5,
                       m_max=12, check=(0, 25), assignments=None,
                       safety=0, shortcuts=True):
    """Recurrence in a parameter for a definite sum whose upper bound
    is that parameter.  Returns a RecurrenceCertificate, or None when
    no recurrence of order <= max_order exists in the chosen mode."""
    if not isinstance(expr, SumE):
        raise FrontendError("creative telescoping expects an explicit "
                            "sum")
    idx = expr.idx
    if not (isinstance(expr.upper, Sym) and expr.upper.name == param):
        raise FrontendError("the sum's upper bound must be the "
                            "recurrence parameter")
    if not isinstance(expr.lower, int) or expr.lower < 0:
        raise FrontendError("sum lower bound must be an integer >= 0")
    allp = sorted((free_symbols(expr) - {idx}) | {param})
    others = [p for p in allp if p != param]
    asg = {k: mpq(v) for k, v in (assignments or {}).items()}
    for p in others:
        if p not in asg:
            raise FrontendError("assign a value to parameter %r" % p)

    sess = Session(params=allp, mode=mode, m_max=m_max,
                   ground_products=True, safety=safety,
                   shortcuts=shortcuts)
    found = None
    for order in range(1, max_order + 1):
        f = []
        for i in range(order + 1):
            mark = len(sess._maps)
            sess._pshift = (param, i)
            try:
                fi = sess._rep(expr.body, idx)
            finally:
                sess._pshift = None
            lm = sess._map_since(mark)
            if lm is not None:
                f = [relevel(x, lm) for x in f]
            f.append(fi)
        if mode == "refined":
            d = max(sess.tower.depth(x) for x in f)
            tw, _, rows, lm = depthopt.find_depth_complete_ext(
                list(f), d, sess.tower.height, sess.tower,
                safety=safety)
            sess.tower = tw
            sess._advance(lm)
            if lm is not None:
                f = [relevel(x, lm) for x in f]
        else:
            _, rows = solve_pt(f, sess.tower, policy="naive",
                               safety=safety)
        hit = next((r for r in rows
                    if any(not c.is_zero for c in r[0])), None)
        if hit is not None:
            found = (order, hit, f)
            break
    if found is None:
        return None
    order, (cs, g), f = found
    coeffs = [_const_ratfunc(c) for c in cs]
    combo = sess.tower.zero()
    for c, fi in zip(cs, f):
        ce = c if not isinstance(c, RatFunc) else base_elem(c)
        combo = eadd(combo, emul(ce, fi))

    # verify: replay the recurrence against direct summation
    mu1, mu2 = check
    rhs_values = {}
    failures = []
    checked = 0
    direct = {}

    def S(mu):
        if mu not in direct:
            direct[mu] = sum(
                (eval_expr(expr.body, j, {param: mpq(mu), **asg},
                           outer=idx)
                 for j in range(expr.lower, mu + 1)), mpq(0))
        return direct[mu]

    for mu in range(mu1, mu2 + 1):
        pt = {param: mpq(mu), **asg}
        cvals = [c.eval_mpq(pt) for c in coeffs]
        ev = SeqEvaluator(sess.tower, pt)
        # telescoped part equals g(mu+1) - g(lower), but g can have a
        # removable 0/0 right at the boundary; sum the telescoped
        # combination directly instead
        lhs_inner = sum((ev.eval(combo, j)
                         for j in range(expr.lower, mu + 1)), mpq(0))
        # tail terms F(mu+i, k) for k = mu+1 .. mu+i
        rhs = lhs_inner
        for i in range(1, order + 1):
            if cvals[i] == 0:
                continue
            tail = sum((eval_expr(expr.body, j,
                                  {param: mpq(mu + i), **asg}, outer=idx)
                        for j in range(mu + 1, mu + i + 1)), mpq(0))
            rhs += cvals[i] * tail
        rhs_values[mu] = rhs
        lhs = sum(cvals[i] * S(mu + i) for i in range(order + 1))
        checked += 1
        if lhs != rhs:
            failures.append({"mu": mu, "lhs": str(lhs),
                             "rhs": str(rhs)})
    # replay the closed form from initial values
    replay = {mu: S(mu) for mu in range(mu1, mu1 + order)}
    for mu in range(mu1, mu2 - order + 1):
        pt = {param: mpq(mu), **asg}
        ctop = coeffs[order].eval_mpq(pt)
        if ctop == 0:
            failures.append({"mu": mu, "error": "leading coefficient "
                                                "vanishes"})
            break
        acc = rhs_values[mu]
        for i in range(order):
            acc -= coeffs[i].eval_mpq(pt) * replay[mu + i]
        replay[mu + order] = acc / ctop
        if replay[mu + order] != S(mu + order):
            failures.append({"mu": mu + order,
                             "replay": str(replay[mu + order]),
                             "direct": str(S(mu + order))})
    report = {"range": [mu1, mu2], "checked": checked,
              "failures": failures, "pass": not failures and checked > 0}
    rhs_formula = _fit_rhs(rhs_values, param)
    return RecurrenceCertificate(
        expr, param, order, coeffs, g, sess, rhs_values, rhs_formula,
        report, {"mode": mode, "m_max": m_max,
                 "tower_depths": sess.depth_profile()})


def _const_ratfunc(e):
    if isinstance(e, RatFunc):
        return e
    if e.level != 0:
        raise FrontendError("recurrence coefficient is not constant in "
                            "the summation variable")
    return e.base


def _fit_rhs(values, param):
    """Try to present the right-hand side values as
    (p(m) + q(m)*rho^m) / D(m) with small polynomials and a small
    rational rho; returns a display string or None."""
    mus = sorted(values)
    if len(mus) < 10 or any(values[mu] == 0 for mu in mus[-4:]):
        return None
    from fractions import Fraction
    dens = [("1", lambda m: mpq(1)),
            ("%s + 1" % param, lambda m: mpq(m + 1)),
            ("(%s + 1)*(%s + 2)" % (param, param),
             lambda m: mpq((m + 1) * (m + 2)))]
    for dname, dfun in dens:
        # purely rational right-hand side
        for deg in (0, 1, 2, 3):
            rows = [[mpq(mu) ** j for j in range(deg + 1)]
                    for mu in mus[:deg + 1]]
            rhs = [values[mu] * dfun(mu) for mu in mus[:deg + 1]]
            p = _solve_linear(rows, rhs)
            if p is not None and all(
                    sum(c * mpq(mu) ** j for j, c in enumerate(p))
                    == values[mu] * dfun(mu) for mu in mus[deg + 1:]):
                return _format_fit(p, [mpq(0)], mpq(1), dname, param)
        w1 = values[mus[-2]] * dfun(mus[-2])
        w2 = values[mus[-1]] * dfun(mus[-1])
        if w1 == 0:
            continue
        rho = mpq(Fraction(float(w2 / w1)).limit_denominator(12))
        if rho in (0, 1):
            continue
        for deg in (0, 1, 2):
            fit = _solve_fit(values, mus, rho, dfun, deg)
            if fit is None:
                continue
            p, q = fit
            return _format_fit(p, q, rho, dname, param)
    return None


def _solve_fit(values, mus, rho, dfun, deg):
    """Interpolate p, q of the given degree so that
    p(m) + q(m)*rho^m = value(m)*D(m) on the early points, then demand
    the fit hold on all remaining points."""
    ncoef = 2 * (deg + 1)
    if len(mus) < ncoef + 3:
        return None
    rows = []
    rhs = []
    for mu in mus[:ncoef]:
        rpow = rho ** mu
        rows.append([mpq(mu) ** j for j in range(deg + 1)]
                    + [rpow * mpq(mu) ** j for j in range(deg + 1)])
        rhs.append(values[mu] * dfun(mu))
    sol = _solve_linear(rows, rhs)
    if sol is None:
        return None
    p, q = sol[:deg + 1], sol[deg + 1:]
    for mu in mus[ncoef:]:
        val = sum(c * mpq(mu) ** j for j, c in enumerate(p)) \
            + rho ** mu * sum(c * mpq(mu) ** j for j, c in enumerate(q))
        if val != values[mu] * dfun(mu):
            return None
    return p, q


def _solve_linear(rows, rhs):
    n = len(rows[0])
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
    for i in range(r, len(m)):
        if m[i][n] != 0:
            return None
    if r < n:
        return None
    return [m[i][n] for i in range(n)]


def _poly_str(coeffs, param):
    parts = []
    for j, c in enumerate(coeffs):
        if c == 0:
            continue
        if j == 0:
            parts.append(str(c))
        else:
            mono = param if j == 1 else "%s^%d" % (param, j)
            parts.append(mono if c == 1 else "%s*%s" % (c, mono))
    return " + ".join(parts) if parts else "0"


def _format_fit(p, q, rho, dname, param):
    ps = _poly_str(p, param)
    qs = _poly_str(q, param)
    geo = "%s^%s" % (rho, param) if rho.denominator == 1 \
        else "(%s)^%s" % (rho, param)
    if all(c == 0 for c in q):
        num = ps
    elif all(c == 0 for c in p):
        num = "(%s)*%s" % (qs, geo)
    else:
        num = "%s + (%s)*%s" % (ps, qs, geo)
    return num if dname == "1" else "(%s) / (%s)" % (num, dname)


def find_relations(exprs, params=None, rng=(1, 30), m_max=12,
                   mode="refined", safety=0, shortcuts=True):
    """Register sums in one shared tower; emit an identity certificate
    for every sum expressible through the previously seen ones.

    A certificate is tagged "relation" when the sum is moreover a
    polynomial (homogeneous in the weight) in the other nested
    harmonic sums encountered so far; otherwise it is tagged
    "representation" and its result is the backward translation of the
    element through the tower's generators.  Returns (certificates,
    session)."""
    allp = set()
    for e in exprs:
        allp |= free_symbols(e) - {"n"}
    if params is not None:
        allp |= set(params)
    sess = Session(params=sorted(allp), mode=mode, m_max=m_max,
                   safety=safety, shortcuts=shortcuts)
    certs = []
    for expr in exprs:
        rep = sess.register(expr)
        if sess._top_outcome != "expressed":
            continue
        kind = "representation"
        result = None
        if isinstance(expr, HarmonicS) and not allp:
            result = _harmonic_relation(sess, tuple(expr.indices), rep)
            if result is not None:
                kind = "relation"
        if result is None:
            result = sess.to_expr(rep)
        report = verify_identity(expr, result, rng=rng,
                                 assignments=default_assignments(
                                     sorted(allp)))
        cert = IdentityCertificate(
            kind, expr, result, rep, sess, report,
            {"m_max": m_max, "tower_depths": sess.depth_profile()})
        certs.append(cert)
    return certs, sess


def _harmonic_relation(sess, indices, rep):
    """Express rep as a weight-homogeneous polynomial in the other
    nested harmonic sums seen by the session, or None.

    Candidates are first filtered greedily, in a canonical order
    (weight ascending; within a weight single sums first, then deeper
    nestings first), down to an algebraically independent family, so
    the combination found for rep is unique and canonical."""
    w = sum(indices)
    cands = [t for t in sess.harmonics
             if t != tuple(indices) and sum(t) <= w]
    cands.sort(key=lambda t: (sum(t), 0 if len(t) == 1 else 1,
                              -len(t), t))
    ev = SeqEvaluator(sess.tower, {})
    basis = []
    for t in cands:
        e = sess.harmonic_elem(t)
        if _express(sess, ev, e, sum(t), basis) is None:
            basis.append((t, e))
    combo = _express(sess, ev, rep, w, basis)
    if combo is None:
        return None
    terms = []
    for coef, mon in combo:
        counts = {}
        for i in mon:
            counts[i] = counts.get(i, 0) + 1
        factors = []
        for i in sorted(counts):
            hs = HarmonicS(basis[i][0], Sym("n"))
            factors.append(hs if counts[i] == 1
                           else Pow(hs, Const(counts[i])))
        if not factors:
            terms.append(Const(coef))
        elif coef == 1:
            terms.append(factors[0] if len(factors) == 1
                         else Mul(*factors))
        else:
            terms.append(Mul(Const(coef), *factors))
    if not terms:
        return Const(0)
    return terms[0] if len(terms) == 1 else Add(*terms)


def _express(sess, ev, target, weight, basis):
    """Exact coefficients writing target as a constant plus a
    weight-homogeneous polynomial in the basis elements, or None.

    A numeric interpolation proposes the coefficients; the result is
    then checked exactly in the field before being accepted."""
    mons = _monomials(basis, weight)
    npts = len(mons) + 4
    used = sorted({i for mon in mons for i in mon})
    try:
        bvals = {i: [ev.eval(basis[i][1], n)
                     for n in range(1, npts + 1)] for i in used}
        rows = [[_mon_value(bvals, mon, j) for mon in mons]
                for j in range(npts)]
        rhs = [ev.eval(target, n) for n in range(1, npts + 1)]
    except EvalError:
        return None
    sol = _solve_system(rows, rhs)
    if sol is None:
        return None
    combo = [(c, mon) for c, mon in zip(sol, mons) if c != 0]
    acc = sess.tower.zero()
    for c, mon in combo:
        term = sess.tower.const(c)
        for i in mon:
            term = emul(term, basis[i][1])
        acc = eadd(acc, term)
    if not esub(acc, target).is_zero:
        return None
    return combo


def _monomials(basis, weight):
    """Monomials in the basis of total weight equal to weight, plus
    the empty (constant) monomial."""
    out = [()]

    def rec(start, rem, cur):
        if rem == 0:
            out.append(tuple(cur))
            return
        for i in range(start, len(basis)):
            if sum(basis[i][0]) <= rem:
                cur.append(i)
                rec(i, rem - sum(basis[i][0]), cur)
                cur.pop()

    rec(0, weight, [])
    return out


def _mon_value(bvals, mon, j):
    v = mpq(1)
    for i in mon:
        v *= bvals[i][j]
    return v


def _solve_system(rows, rhs):
    """Any exact solution of rows * x = rhs (free unknowns set to
    zero), or None when the system is inconsistent."""
    n = len(rows[0])
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    piv_cols = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        piv_cols.append(c)
        r += 1
    for i in range(r, len(m)):
        if m[i][n] != 0:
            return None
    sol = [mpq(0)] * n
    for i, c in enumerate(piv_cols):
        sol[c] = m[i][n]
    return sol
