"""Exact polynomial and rational-function arithmetic over Q(params).

Everything downstream sits on three layers:

  * big rationals (gmpy2.mpq),
  * sparse multivariate polynomials (MPoly) with a fixed variable tuple
    and graded-lex term order,
  * normalized rational functions (RatFunc) whose denominator is monic
    in the graded-lex leading coefficient.

Parameters are transcendental over Q; the coefficient domain is always
the rational function field Q(params).  Shift-equation machinery
(dispersion, integer roots of resultants) lives here as well since it
only needs polynomial arithmetic.
"""

from __future__ import annotations

import math

from gmpy2 import mpq, mpz
import sympy


class PolyError(Exception):
    pass


class DivisionByZero(PolyError):
    pass


_Q0 = mpq(0)
_Q1 = mpq(1)


def as_mpq(x):
    if isinstance(x, type(_Q0)):
        return x
    if isinstance(x, (int, mpz)):
        return mpq(x)
    if isinstance(x, str):
        return mpq(x)
    raise PolyError("cannot coerce %r to a rational" % (x,))


def _grlex_key(expo):
    return (sum(expo), expo)


class MPoly:
    """Sparse multivariate polynomial over Q.

    terms maps exponent tuples (one entry per variable) to nonzero mpq
    coefficients.  The variable tuple is shared by every polynomial in
    a computation; mixing variable tuples is an error.
    """

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, vars, terms, _normalized=False):
        self.vars = vars
        if _normalized:
            self.terms = terms
        else:
            self.terms = {e: c for e, c in terms.items() if c != 0}
        self._hash = None

    # -- constructors ------------------------------------------------

    @classmethod
    def zero(cls, vars):
        return cls(vars, {}, _normalized=True)

    @classmethod
    def const(cls, vars, c):
        c = as_mpq(c)
        if c == 0:
            return cls.zero(vars)
        return cls(vars, {(0,) * len(vars): c}, _normalized=True)

    @classmethod
    def one(cls, vars):
        return cls.const(vars, 1)

    @classmethod
    def var(cls, vars, name):
        i = vars.index(name)
        e = tuple(1 if j == i else 0 for j in range(len(vars)))
        return cls(vars, {e: _Q1}, _normalized=True)

    # -- predicates --------------------------------------------------

    @property
    def is_zero(self):
        return not self.terms

    @property
    def is_const(self):
        return not self.terms or (len(self.terms) == 1
                                  and not any(next(iter(self.terms))))

    def const_value(self):
        if not self.terms:
            return _Q0
        ((e, c),) = self.terms.items()
        if any(e):
            raise PolyError("not a constant")
        return c

    def involves(self, name):
        i = self.vars.index(name)
        return any(e[i] for e in self.terms)

    # -- arithmetic --------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, MPoly):
            return NotImplemented
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = terms.get(e, _Q0) + c
            if s == 0:
                terms.pop(e, None)
            else:
                terms[e] = s
        return MPoly(self.vars, terms, _normalized=True)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return MPoly(self.vars, {e: -c for e, c in self.terms.items()},
                     _normalized=True)

    def __mul__(self, other):
        if not isinstance(other, MPoly):
            return NotImplemented
        if not self.terms or not other.terms:
            return MPoly.zero(self.vars)
        terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = terms.get(e, _Q0) + c1 * c2
                if s == 0:
                    terms.pop(e, None)
                else:
                    terms[e] = s
        return MPoly(self.vars, terms, _normalized=True)

    def scale(self, c):
        c = as_mpq(c)
        if c == 0:
            return MPoly.zero(self.vars)
        return MPoly(self.vars, {e: c * v for e, v in self.terms.items()},
                     _normalized=True)

    def __pow__(self, n):
        if n < 0:
            raise PolyError("negative power of a polynomial")
        result = MPoly.one(self.vars)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        return (isinstance(other, MPoly) and self.vars == other.vars
                and self.terms == other.terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars,
                               frozenset(self.terms.items())))
        return self._hash

    # -- structure ---------------------------------------------------

    def degree(self, name):
        """Degree in one variable; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        i = self.vars.index(name)
        return max(e[i] for e in self.terms)

    def coeff(self, name, d):
        """Coefficient of name**d, as a polynomial with that variable
        exponent zeroed out."""
        i = self.vars.index(name)
        terms = {}
        for e, c in self.terms.items():
            if e[i] == d:
                e2 = e[:i] + (0,) + e[i + 1:]
                terms[e2] = terms.get(e2, _Q0) + c
        return MPoly(self.vars, terms)

    def as_univariate(self, name):
        """Map degree -> coefficient polynomial (variable zeroed out)."""
        i = self.vars.index(name)
        out = {}
        for e, c in self.terms.items():
            d = e[i]
            e2 = e[:i] + (0,) + e[i + 1:]
            cur = out.setdefault(d, {})
            s = cur.get(e2, _Q0) + c
            if s == 0:
                cur.pop(e2, None)
            else:
                cur[e2] = s
        return {d: MPoly(self.vars, t, _normalized=True)
                for d, t in out.items() if t}

    @classmethod
    def from_univariate(cls, vars, name, coeffs):
        i = vars.index(name)
        terms = {}
        for d, p in coeffs.items():
            for e, c in p.terms.items():
                e2 = e[:i] + (e[i] + d,) + e[i + 1:]
                s = terms.get(e2, _Q0) + c
                if s == 0:
                    terms.pop(e2, None)
                else:
                    terms[e2] = s
        return cls(vars, terms, _normalized=True)

    def shift(self, name, a):
        """Substitute name -> name + a for a rational a."""
        a = as_mpq(a)
        if a == 0 or not self.involves(name):
            return self
        uni = self.as_univariate(name)
        x = MPoly.var(self.vars, name)
        xa = x + MPoly.const(self.vars, a)
        # Horner from the top degree down.
        degs = sorted(uni, reverse=True)
        top = degs[0]
        out = uni[top]
        for d in range(top - 1, -1, -1):
            out = out * xa
            if d in uni:
                out = out + uni[d]
        return out

    def subs_values(self, values):
        """Substitute mpq values for a subset of the variables."""
        terms = {}
        idx = [(i, as_mpq(values[v])) for i, v in enumerate(self.vars)
               if v in values]
        for e, c in self.terms.items():
            for i, val in idx:
                if e[i]:
                    c = c * val ** e[i]
            e2 = tuple(0 if any(i == j for j, _ in idx) else x
                       for i, x in enumerate(e))
            s = terms.get(e2, _Q0) + c
            if s == 0:
                terms.pop(e2, None)
            else:
                terms[e2] = s
        return MPoly(self.vars, terms, _normalized=True)

    def leading(self):
        """(exponent, coefficient) of the graded-lex leading term."""
        if not self.terms:
            raise PolyError("zero polynomial has no leading term")
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def leading_coeff(self):
        return self.leading()[1]

    def monic(self):
        if not self.terms:
            return self
        lc = self.leading_coeff()
        if lc == 1:
            return self
        return self.scale(1 / lc)

    def total_degree(self):
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=_grlex_key, reverse=True):
            c = self.terms[e]
            factors = []
            for v, p in zip(self.vars, e):
                if p == 1:
                    factors.append(v)
                elif p > 1:
                    factors.append("%s^%d" % (v, p))
            mono = "*".join(factors)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append("%s*%s" % (c, mono))
        s = " + ".join(parts)
        return s.replace("+ -", "- ")

    def __repr__(self):
        return "MPoly(%s)" % self


# -- univariate helpers over the coefficient field --------------------

def poly_divmod(p, q, name):
    """Divide p by q as univariate polynomials in `name` whose
    coefficients live in the fraction field of the remaining variables.

    Returns (quot, rem) as maps degree -> RatFunc coefficient with
    p = quot*q + rem and deg_name(rem) < deg_name(q)."""
    if q.is_zero:
        raise DivisionByZero("polynomial division by zero")
    vars = p.vars
    pu = {d: RatFunc.from_poly(c) for d, c in p.as_univariate(name).items()}
    qu = {d: RatFunc.from_poly(c) for d, c in q.as_univariate(name).items()}
    dq = max(qu)
    lcq = qu[dq]
    quot = {}
    rem = dict(pu)
    while rem and max(rem) >= dq:
        dr = max(rem)
        c = rem[dr] / lcq
        quot[dr - dq] = c
        for d, qc in qu.items():
            nd = d + dr - dq
            val = rem.get(nd, None)
            val = (val - c * qc) if val is not None else -(c * qc)
            if val.is_zero:
                rem.pop(nd, None)
            else:
                rem[nd] = val
    return quot, rem


def _gcd_univariate(a, b, name):
    """Monic Euclidean gcd for polynomials involving a single variable."""
    au = {d: c.const_value() for d, c in a.as_univariate(name).items()}
    bu = {d: c.const_value() for d, c in b.as_univariate(name).items()}

    def divmod_u(p, q):
        dq = max(q)
        lcq = q[dq]
        r = dict(p)
        while r and max(r) >= dq:
            dr = max(r)
            c = r[dr] / lcq
            for d, qc in q.items():
                nd = d + dr - dq
                v = r.get(nd, _Q0) - c * qc
                if v == 0:
                    r.pop(nd, None)
                else:
                    r[nd] = v
        return r

    while bu:
        au, bu = bu, divmod_u(au, bu)
    lc = au[max(au)]
    vars = a.vars
    i = vars.index(name)
    terms = {}
    for d, c in au.items():
        e = tuple(d if j == i else 0 for j in range(len(vars)))
        terms[e] = c / lc
    return MPoly(vars, terms, _normalized=True)


_SYMS = {}


def _sym(name):
    if name not in _SYMS:
        _SYMS[name] = sympy.Symbol(name)
    return _SYMS[name]


def _to_sympy(p):
    expr = sympy.Integer(0)
    for e, c in p.terms.items():
        t = sympy.Rational(int(c.numerator), int(c.denominator))
        for v, d in zip(p.vars, e):
            if d:
                t *= _sym(v) ** d
        expr += t
    return expr


def _from_sympy(expr, vars):
    poly = sympy.Poly(sympy.expand(expr), *[_sym(v) for v in vars],
                      domain="QQ")
    terms = {}
    for e, c in poly.terms():
        terms[tuple(int(x) for x in e)] = mpq(int(c.numerator),
                                              int(c.denominator))
    return MPoly(vars, terms)


def mpoly_gcd(a, b):
    """Monic gcd.  Euclid when only one variable occurs, sympy when the
    problem is genuinely multivariate."""
    if a.is_zero:
        return b.monic() if not b.is_zero else b
    if b.is_zero:
        return a.monic()
    if a.is_const or b.is_const:
        return MPoly.one(a.vars)
    used = [v for v in a.vars if a.involves(v) or b.involves(v)]
    if len(used) == 1:
        return _gcd_univariate(a, b, used[0])
    g = sympy.gcd(_to_sympy(a), _to_sympy(b))
    return _from_sympy(g, a.vars).monic()


def deriv(p, name):
    """Partial derivative with respect to one variable."""
    i = p.vars.index(name)
    terms = {}
    for e, c in p.terms.items():
        if e[i] == 0:
            continue
        e2 = e[:i] + (e[i] - 1,) + e[i + 1:]
        terms[e2] = terms.get(e2, mpq(0)) + c * e[i]
    return MPoly(p.vars, terms)


def radical(p, name):
    """Squarefree part with respect to one variable (repeated roots in
    name collapsed to multiplicity one)."""
    if p.is_zero or p.degree(name) <= 0:
        return p
    g = mpoly_gcd(p, deriv(p, name))
    return p if g.is_const else exact_div(p, g)


def resultant(a, b, name):
    """Resultant with respect to one variable, as an MPoly in the rest."""
    r = sympy.resultant(_to_sympy(a), _to_sympy(b), _sym(name))
    return _from_sympy(r, a.vars)


def integer_roots(p, name):
    """All integers r with p(name=r) identically zero in the remaining
    variables.  Parameters are handled by specializing them at random
    rational points to get candidates, then verifying exactly."""
    if p.is_zero:
        raise PolyError("integer_roots of the zero polynomial")
    if p.degree(name) <= 0:
        return []
    others = [v for v in p.vars if v != name and p.involves(v)]
    if not others:
        uni = {d: c.const_value() for d, c in p.as_univariate(name).items()}
        return _integer_roots_rational(uni)
    candidates = None
    for trial in ((mpq(j * 7 + 3, 2) for j in range(len(others))),
                  (mpq(j * 11 + 5, 3) for j in range(len(others)))):
        vals = dict(zip(others, trial))
        spec = p.subs_values(vals)
        if spec.degree(name) < p.degree(name):
            continue  # unlucky specialization dropped the degree
        uni = {d: c.const_value()
               for d, c in spec.as_univariate(name).items()}
        roots = set(_integer_roots_rational(uni))
        candidates = roots if candidates is None else candidates & roots
        if not candidates:
            return []
    if candidates is None:
        candidates = set()
    out = []
    for r in sorted(candidates):
        if p.subs_values({name: mpq(r)}).is_zero:
            out.append(r)
    return out


def _integer_roots_rational(uni):
    """Integer roots of a univariate polynomial given as degree->mpq.

    Delegates to sympy's rational-root machinery: the constant terms
    coming out of resultants are far too large for naive divisor
    enumeration, while polynomial factorization over Q stays fast."""
    x = sympy.Symbol("_ir_x")
    expr = sympy.Add(*[
        sympy.Rational(int(c.numerator), int(c.denominator)) * x ** d
        for d, c in uni.items()])
    roots = sympy.Poly(expr, x).ground_roots()
    return sorted(int(r) for r in roots if r.is_Integer)


def dispersion(p, q, name):
    """Largest j >= 0 with gcd(p(x), q(x+j)) nonconstant, together with
    the full set of such j (descending).  Returns ([], -1) when none."""
    if p.is_zero or q.is_zero or p.degree(name) <= 0 or q.degree(name) <= 0:
        return [], -1
    jname = "_disp_j"
    vars2 = p.vars + (jname,)
    p2 = MPoly(vars2, {e + (0,): c for e, c in p.terms.items()},
               _normalized=True)
    q2 = MPoly(vars2, {e + (0,): c for e, c in q.terms.items()},
               _normalized=True)
    j = MPoly.var(vars2, jname)
    x = MPoly.var(vars2, name)
    qshift = _subst_uni(q2, name, x + j)
    res = resultant(p2, qshift, name)
    if res.is_zero:
        # degenerate (shared content); fall back to a bounded scan
        js = []
        bound = p.degree(name) * q.degree(name) + 1
        for cand in range(bound + 1):
            if not mpoly_gcd(p, q.shift(name, cand)).is_const:
                js.append(cand)
        js.sort(reverse=True)
        return js, (js[0] if js else -1)
    roots = [r for r in integer_roots(res, jname) if r >= 0]
    js = []
    for r in sorted(roots, reverse=True):
        if not mpoly_gcd(p, q.shift(name, r)).is_const:
            js.append(r)
    return js, (js[0] if js else -1)


def _subst_uni(p, name, image):
    """Substitute an MPoly image for one variable (Horner)."""
    uni = p.as_univariate(name)
    if not uni:
        return p
    degs = sorted(uni, reverse=True)
    out = uni[degs[0]]
    for d in range(degs[0] - 1, -1, -1):
        out = out * image
        if d in uni:
            out = out + uni[d]
    return out


class RatFunc:
    """Normalized rational function: coprime num/den, den monic in its
    graded-lex leading coefficient.  Equality is structural."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den, _normalized=False):
        if den.is_zero:
            raise DivisionByZero("rational function with zero denominator")
        if not _normalized:
            if num.is_zero:
                den = MPoly.one(num.vars)
            else:
                g = mpoly_gcd(num, den)
                if not g.is_const:
                    num = exact_div(num, g)
                    den = exact_div(den, g)
                lc = den.leading_coeff()
                if lc != 1:
                    num = num.scale(1 / lc)
                    den = den.scale(1 / lc)
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def from_poly(cls, p):
        return cls(p, MPoly.one(p.vars), _normalized=True)

    @classmethod
    def const(cls, vars, c):
        return cls.from_poly(MPoly.const(vars, c))

    @classmethod
    def zero(cls, vars):
        return cls.from_poly(MPoly.zero(vars))

    @classmethod
    def one(cls, vars):
        return cls.from_poly(MPoly.one(vars))

    @classmethod
    def var(cls, vars, name):
        return cls.from_poly(MPoly.var(vars, name))

    @property
    def vars(self):
        return self.num.vars

    @property
    def is_zero(self):
        return self.num.is_zero

    @property
    def is_const(self):
        return self.num.is_const and self.den.is_const

    def const_value(self):
        return self.num.const_value() / self.den.const_value()

    def involves(self, name):
        return self.num.involves(name) or self.den.involves(name)

    def __add__(self, other):
        if not isinstance(other, RatFunc):
            return NotImplemented
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den,
                       self.den * other.den)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return RatFunc(-self.num, self.den, _normalized=True)

    def __mul__(self, other):
        if not isinstance(other, RatFunc):
            return NotImplemented
        if self.is_zero or other.is_zero:
            return RatFunc.zero(self.vars)
        return RatFunc(self.num * other.num, self.den * other.den)

    def __truediv__(self, other):
        if not isinstance(other, RatFunc):
            return NotImplemented
        if other.is_zero:
            raise DivisionByZero("division by the zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def inv(self):
        if self.is_zero:
            raise DivisionByZero("inverse of zero")
        return RatFunc(self.den, self.num)

    def __pow__(self, n):
        if n < 0:
            return self.inv() ** (-n)
        return RatFunc(self.num ** n, self.den ** n)

    def scale(self, c):
        return RatFunc(self.num.scale(c), self.den, _normalized=True)

    def shift(self, name, a):
        return RatFunc(self.num.shift(name, a), self.den.shift(name, a))

    def subs_values(self, values):
        num = self.num.subs_values(values)
        den = self.den.subs_values(values)
        return RatFunc(num, den)

    def eval_mpq(self, values):
        num = self.num.subs_values(values)
        den = self.den.subs_values(values)
        if not den.is_const or not num.is_const:
            raise PolyError("incomplete evaluation")
        d = den.const_value()
        if d == 0:
            raise DivisionByZero("pole at %r" % (values,))
        return num.const_value() / d

    def __eq__(self, other):
        return (isinstance(other, RatFunc) and self.num == other.num
                and self.den == other.den)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __str__(self):
        if self.den.is_const and self.den.const_value() == 1:
            return str(self.num)
        ns = str(self.num)
        if len(self.num.terms) > 1:
            ns = "(%s)" % ns
        ds = str(self.den)
        if len(self.den.terms) > 1:
            ds = "(%s)" % ds
        return "%s/%s" % (ns, ds)

    def __repr__(self):
        return "RatFunc(%s)" % self


def exact_div(p, q):
    """Exact polynomial division (raises if not exact)."""
    if q.is_const:
        return p.scale(1 / q.const_value())
    name = next(v for v in q.vars if q.involves(v))
    quot, rem = poly_divmod(p, q, name)
    if rem:
        raise PolyError("inexact division")
    out = MPoly.zero(p.vars)
    name_var = MPoly.var(p.vars, name)
    for d, c in quot.items():
        if not c.den.is_const:
            raise PolyError("inexact division")
        out = out + c.num.scale(1 / c.den.const_value()) * name_var ** d
    return out
