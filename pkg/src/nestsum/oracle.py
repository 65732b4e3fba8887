"""Exact sequence evaluation, independent of the solver stack.

Expressions are summed literally; tower elements are evaluated by
unrolling each generator's first-order recurrence from its initial
value (sum generators start at 0, product generators at 1, at n = 0,
and the base variable k evaluates to n).  Everything is exact rational
arithmetic; identities are checked point by point over a range of n
and a set of parameter assignments.
"""

from __future__ import annotations

from gmpy2 import mpq

from .polys import RatFunc, DivisionByZero, PolyError
from .field import PI
from .expressions import (Expr, Const, Sym, Add, Mul, Div, Neg, Pow,
                          Binom, SumE, ProdE, HarmonicS, ExprError)


class EvalError(Exception):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


def binom_value(top, bottom):
    """binom(top, bottom) for rational top and integer bottom >= 0 via
    the falling factorial; 0 for negative bottom."""
    bottom = mpq(bottom)
    if bottom.denominator != 1:
        raise EvalError("binomial with non-integer lower entry %s"
                        % bottom)
    b = int(bottom)
    if b < 0:
        return mpq(0)
    num = mpq(1)
    for j in range(b):
        num *= (mpq(top) - j)
    den = mpq(1)
    for j in range(2, b + 1):
        den *= j
    return num / den


# -- expressions ---------------------------------------------------------

def eval_expr(expr, n, params=None, outer="n"):
    """Value of an expression at the outer point n, exactly."""
    env = {k: mpq(v) for k, v in (params or {}).items()}
    env[outer] = mpq(n)
    return _ev(expr, env)


def _ev(expr, env):
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Sym):
        try:
            return env[expr.name]
        except KeyError:
            raise EvalError("unbound symbol %r" % expr.name)
    if isinstance(expr, Add):
        return sum((_ev(t, env) for t in expr.terms), mpq(0))
    if isinstance(expr, Mul):
        out = mpq(1)
        for f in expr.factors:
            out *= _ev(f, env)
        return out
    if isinstance(expr, Div):
        den = _ev(expr.den, env)
        if den == 0:
            raise EvalError("division by zero", point=dict(env))
        return _ev(expr.num, env) / den
    if isinstance(expr, Neg):
        return -_ev(expr.arg, env)
    if isinstance(expr, Pow):
        e = _ev(expr.exp, env)
        if e.denominator != 1:
            raise EvalError("non-integer exponent %s" % e)
        base = _ev(expr.base, env)
        if e < 0 and base == 0:
            raise EvalError("zero base with negative exponent",
                            point=dict(env))
        return base ** int(e)
    if isinstance(expr, Binom):
        return binom_value(_ev(expr.top, env), _ev(expr.bottom, env))
    if isinstance(expr, (SumE, ProdE)):
        lo = (expr.lower if not isinstance(expr.lower, Expr)
              else _as_int(_ev(expr.lower, env), "lower bound"))
        hi = _as_int(_ev(expr.upper, env), "upper bound")
        total = mpq(0) if isinstance(expr, SumE) else mpq(1)
        sub = dict(env)
        for i in range(lo, hi + 1):
            sub[expr.idx] = mpq(i)
            v = _ev(expr.body, sub)
            total = total + v if isinstance(expr, SumE) else total * v
        return total
    if isinstance(expr, HarmonicS):
        hi = _as_int(_ev(expr.arg, env), "harmonic sum argument")
        return _harmonic(expr.indices, hi)
    raise ExprError("unknown node %r" % (expr,))


def _as_int(v, what):
    if mpq(v).denominator != 1:
        raise EvalError("%s is not an integer: %s" % (what, v))
    return int(v)


def _harmonic(indices, n):
    """Bottom-up table evaluation of nested harmonic sums (linear in
    n per index instead of the naive power blowup)."""
    if n < 0:
        return mpq(0)
    table = [mpq(1)] * (n + 1)  # empty index list: S()(i) = 1
    for m in reversed(indices):
        new = [mpq(0)] * (n + 1)
        acc = mpq(0)
        for i in range(1, n + 1):
            acc += table[i] / mpq(i) ** m
            new[i] = acc
        table = new
    return table[n]


# -- tower elements ------------------------------------------------------

class SeqEvaluator:
    """Evaluates tower elements as sequences under one parameter
    assignment, caching the generator value tables."""

    def __init__(self, tower, params=None):
        self.tower = tower
        self.params = {k: mpq(v) for k, v in (params or {}).items()}
        missing = [p for p in tower.params if p not in self.params]
        if missing:
            raise EvalError("missing parameter values for %s" % missing)
        self._table = [[mpq(1) if g.kind == PI else mpq(0)
                        for g in tower.gens]]

    def _vals(self, n):
        while len(self._table) <= n:
            i = len(self._table) - 1
            cur = self._table[-1]
            new = []
            for lvl, g in enumerate(self.tower.gens, start=1):
                step = self._at(g.defining, i, cur)
                if g.kind == PI:
                    new.append(cur[lvl - 1] * step)
                else:
                    new.append(cur[lvl - 1] + step)
            self._table.append(new)
        return self._table[n]

    def _at(self, e, kval, vals):
        if e.level == 0:
            env = dict(self.params)
            env["k"] = mpq(kval)
            try:
                return e.base.eval_mpq(env)
            except DivisionByZero:
                raise EvalError("pole at k = %d" % kval, point=kval)
        t = vals[e.level - 1]
        num = self._horner(e.num, t, kval, vals)
        den = self._horner(e.den, t, kval, vals)
        if den == 0:
            raise EvalError("pole at k = %d" % kval, point=kval)
        return num / den

    def _horner(self, coeffs, t, kval, vals):
        out = mpq(0)
        for c in reversed(coeffs):
            out = out * t + self._at(c, kval, vals)
        return out

    def eval(self, e, n):
        return self._at(e, n, self._vals(n))


def eval_elem(e, tower, n, params=None):
    return SeqEvaluator(tower, params).eval(e, n)


# -- symbolic evaluation at a fixed integer point ------------------------

def eval_elem_symbolic(e, tower, n):
    """Value of an element at n as an exact rational function of the
    parameters (k specialized, generators unrolled symbolically).
    Raises EvalError on a pole."""
    vars = tower.vars
    vals = [RatFunc.one(vars) if g.kind == PI else RatFunc.zero(vars)
            for g in tower.gens]
    for i in range(n):
        new = []
        for lvl, g in enumerate(tower.gens, start=1):
            step = _sym_at(g.defining, i, vals)
            if g.kind == PI:
                new.append(vals[lvl - 1] * step)
            else:
                new.append(vals[lvl - 1] + step)
        vals = new
    return _sym_at(e, n, vals)


def _sym_at(e, kval, vals):
    if e.level == 0:
        f = e.base.subs_values({"k": mpq(kval)})
        if f.den.is_zero:
            raise EvalError("pole at k = %d" % kval, point=kval)
        return f
    t = vals[e.level - 1]
    num = _sym_horner(e.num, t, kval, vals)
    den = _sym_horner(e.den, t, kval, vals)
    if den.is_zero:
        raise EvalError("pole at k = %d" % kval, point=kval)
    return num / den


def _sym_horner(coeffs, t, kval, vals):
    out = RatFunc.zero(t.vars)
    for c in reversed(coeffs):
        out = out * t + _sym_at(c, kval, vals)
    return out


# -- identity checking ---------------------------------------------------

def default_assignments(params):
    """Two standard assignments: small distinct integers and distinct
    non-integer rationals."""
    params = list(params)
    ints = [2, 3, 5, 7, 11, 13]
    rats = [mpq(1, 2), mpq(5, 7), mpq(3, 11), mpq(7, 5), mpq(2, 9)]
    out = [{p: mpq(ints[i % len(ints)]) for i, p in enumerate(params)}]
    out.append({p: rats[i % len(rats)] for i, p in enumerate(params)})
    if not params:
        out = [{}]
    return out


def _side_value(side, tower, n, asg, outer):
    if isinstance(side, Expr):
        return eval_expr(side, n, asg, outer=outer)
    return eval_elem(side, tower, n, asg)


def verify_identity(lhs, rhs, rng=(1, 30), assignments=None, tower=None,
                    outer="n"):
    """Point-by-point comparison report.

    A point where the reference side is undefined (a pole, or a
    binomial outside its domain at the chosen parameter values) is
    skipped and counted, not failed; a point where only the candidate
    side errors is a failure.  Passing requires no failures and at
    least one genuinely checked point."""
    if assignments is None:
        params = tower.params if tower is not None else sorted(
            (free_params(lhs) | free_params(rhs)) - {outer})
        assignments = default_assignments(params)
    n1, n2 = rng
    failures = []
    checked = 0
    skipped = 0
    for asg in assignments:
        evaluators = {}
        for n in range(n1, n2 + 1):
            try:
                a = _cached_value(lhs, tower, n, asg, outer, evaluators,
                                  "lhs")
            except (EvalError, PolyError):
                skipped += 1
                continue
            checked += 1
            try:
                b = _cached_value(rhs, tower, n, asg, outer, evaluators,
                                  "rhs")
            except (EvalError, PolyError) as exc:
                failures.append({"n": n, "assignment": _asg_repr(asg),
                                 "error": str(exc)})
                continue
            if a != b:
                failures.append({"n": n, "assignment": _asg_repr(asg),
                                 "lhs": str(a), "rhs": str(b)})
    return {"range": [n1, n2],
            "assignments": [_asg_repr(a) for a in assignments],
            "checked": checked,
            "skipped": skipped,
            "failures": failures,
            "pass": not failures and checked > 0}


def _cached_value(side, tower, n, asg, outer, evaluators, tag):
    if isinstance(side, Expr):
        return eval_expr(side, n, asg, outer=outer)
    ev = evaluators.get(tag)
    if ev is None:
        ev = evaluators[tag] = SeqEvaluator(tower, asg)
    return ev.eval(side, n)


def _asg_repr(asg):
    return {k: str(v) for k, v in sorted(asg.items())}


def free_params(side):
    if isinstance(side, Expr):
        from .expressions import free_symbols
        return free_symbols(side)
    return set()
