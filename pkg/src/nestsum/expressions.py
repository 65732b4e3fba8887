"""Nested-sum expression trees, their parser and printer.

The grammar covers the inputs the engine accepts: rational constants,
parameters, indexed sums and products with explicit bounds, binomial
coefficients, symbolic powers, and the shorthand `S[m1,...,mr](n)` for
nested harmonic sums with positive indices.

    expr    :=  term (('+'|'-') term)*
    term    :=  unary (('*'|'/') unary)*
    unary   :=  '-' unary | power
    power   :=  atom ('^' unary)?
    atom    :=  integer | name | call | 'S' '[' ints ']' '(' expr ')'
              | '(' expr ')'
    call    :=  'sum' '(' name ',' expr ',' expr ',' expr ')'
              | 'prod' '(' name ',' expr ',' expr ',' expr ')'
              | 'binom' '(' expr ',' expr ')'

Trees are immutable and compare structurally.
"""

from __future__ import annotations

import re

from gmpy2 import mpq


class ExprError(Exception):
    pass


class ParseError(ExprError):
    def __init__(self, message, pos):
        super().__init__("%s (at position %d)" % (message, pos))
        self.pos = pos


class Expr:
    __slots__ = ()

    def __eq__(self, other):
        return (type(self) is type(other)
                and self._key() == other._key())

    def __hash__(self):
        return hash((type(self).__name__, self._key()))

    def __repr__(self):
        return to_text(self)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = mpq(value)

    def _key(self):
        return self.value


class Sym(Expr):
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def _key(self):
        return self.name


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, *terms):
        self.terms = tuple(terms)

    def _key(self):
        return self.terms


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, *factors):
        self.factors = tuple(factors)

    def _key(self):
        return self.factors


class Div(Expr):
    __slots__ = ("num", "den")

    def __init__(self, num, den):
        self.num = num
        self.den = den

    def _key(self):
        return (self.num, self.den)


class Neg(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg):
        self.arg = arg

    def _key(self):
        return self.arg


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base, exp):
        self.base = base
        self.exp = exp

    def _key(self):
        return (self.base, self.exp)


class Binom(Expr):
    __slots__ = ("top", "bottom")

    def __init__(self, top, bottom):
        self.top = top
        self.bottom = bottom

    def _key(self):
        return (self.top, self.bottom)


class SumE(Expr):
    __slots__ = ("idx", "lower", "upper", "body")

    def __init__(self, idx, lower, upper, body):
        self.idx = idx
        self.lower = lower
        self.upper = upper
        self.body = body

    def _key(self):
        return (self.idx, self.lower, self.upper, self.body)


class ProdE(Expr):
    __slots__ = ("idx", "lower", "upper", "body")

    def __init__(self, idx, lower, upper, body):
        self.idx = idx
        self.lower = lower
        self.upper = upper
        self.body = body

    def _key(self):
        return (self.idx, self.lower, self.upper, self.body)


class HarmonicS(Expr):
    __slots__ = ("indices", "arg")

    def __init__(self, indices, arg):
        indices = tuple(int(i) for i in indices)
        if not indices or any(i <= 0 for i in indices):
            raise ExprError("harmonic sum indices must be positive "
                            "integers, got %r" % (indices,))
        self.indices = indices
        self.arg = arg

    def _key(self):
        return (self.indices, self.arg)


def harmonic_expanded(indices, idx, upper):
    """The explicit nested-sum form of S[indices](upper), using idx as
    the outermost summation variable."""
    m = indices[0]
    body = Div(Const(1), Pow(Sym(idx), Const(m)))
    if len(indices) > 1:
        inner = "%s_" % idx
        body = Mul(body, harmonic_expanded(indices[1:], inner, Sym(idx)))
    return SumE(idx, 1, upper, body)


def free_symbols(expr, bound=frozenset()):
    if isinstance(expr, Const):
        return set()
    if isinstance(expr, Sym):
        return set() if expr.name in bound else {expr.name}
    if isinstance(expr, Add):
        return set().union(*(free_symbols(t, bound) for t in expr.terms))
    if isinstance(expr, Mul):
        return set().union(*(free_symbols(t, bound) for t in expr.factors))
    if isinstance(expr, Div):
        return free_symbols(expr.num, bound) | free_symbols(expr.den, bound)
    if isinstance(expr, Neg):
        return free_symbols(expr.arg, bound)
    if isinstance(expr, Pow):
        return free_symbols(expr.base, bound) | free_symbols(expr.exp, bound)
    if isinstance(expr, Binom):
        return (free_symbols(expr.top, bound)
                | free_symbols(expr.bottom, bound))
    if isinstance(expr, (SumE, ProdE)):
        out = free_symbols(expr.upper, bound)
        if isinstance(expr.lower, Expr):
            out |= free_symbols(expr.lower, bound)
        return out | free_symbols(expr.body, bound | {expr.idx})
    if isinstance(expr, HarmonicS):
        return free_symbols(expr.arg, bound)
    raise ExprError("unknown node %r" % (expr,))


def substitute(expr, name, replacement):
    """Replace the free symbol `name` by another expression."""
    if isinstance(expr, Const):
        return expr
    if isinstance(expr, Sym):
        return replacement if expr.name == name else expr
    if isinstance(expr, Add):
        return Add(*(substitute(t, name, replacement) for t in expr.terms))
    if isinstance(expr, Mul):
        return Mul(*(substitute(t, name, replacement)
                     for t in expr.factors))
    if isinstance(expr, Div):
        return Div(substitute(expr.num, name, replacement),
                   substitute(expr.den, name, replacement))
    if isinstance(expr, Neg):
        return Neg(substitute(expr.arg, name, replacement))
    if isinstance(expr, Pow):
        return Pow(substitute(expr.base, name, replacement),
                   substitute(expr.exp, name, replacement))
    if isinstance(expr, Binom):
        return Binom(substitute(expr.top, name, replacement),
                     substitute(expr.bottom, name, replacement))
    if isinstance(expr, (SumE, ProdE)):
        if expr.idx == name:
            return expr
        lower = expr.lower
        if isinstance(lower, Expr):
            lower = substitute(lower, name, replacement)
        cls = SumE if isinstance(expr, SumE) else ProdE
        return cls(expr.idx, lower,
                   substitute(expr.upper, name, replacement),
                   substitute(expr.body, name, replacement))
    if isinstance(expr, HarmonicS):
        return HarmonicS(expr.indices,
                         substitute(expr.arg, name, replacement))
    raise ExprError("unknown node %r" % (expr,))


# -- parsing -------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)"
                    r"|(\[|\]|\(|\)|,|\+|-|\*|/|\^))")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ParseError("unexpected character %r" % text[pos], pos)
            break
        if m.group(1):
            tokens.append(("int", int(m.group(1)), m.start(1)))
        elif m.group(2):
            tokens.append(("name", m.group(2), m.start(2)))
        else:
            tokens.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.next()
        if kind != "op" or val != value:
            raise ParseError("expected %r, got %r" % (value, val), pos)

    def parse(self):
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError("trailing input %r" % (val,), pos)
        return e

    def expr(self):
        terms = [self.term()]
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in ("+", "-"):
                self.next()
                t = self.term()
                terms.append(Neg(t) if val == "-" else t)
            else:
                break
        return terms[0] if len(terms) == 1 else Add(*terms)

    def term(self):
        e = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in ("*", "/"):
                self.next()
                rhs = self.unary()
                e = Mul(e, rhs) if val == "*" else Div(e, rhs)
            else:
                break
        return e

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self):
        e = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.next()
            return Pow(e, self.unary())
        return e

    def atom(self):
        kind, val, pos = self.next()
        if kind == "int":
            return Const(val)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "name":
            return self.named(val, pos)
        raise ParseError("unexpected token %r" % (val,), pos)

    def named(self, name, pos):
        kind, val, _ = self.peek()
        if name == "S" and kind == "op" and val == "[":
            self.next()
            indices = [self.integer()]
            while self.peek()[1] == ",":
                self.next()
                indices.append(self.integer())
            self.expect("]")
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return HarmonicS(indices, arg)
        if name in ("sum", "prod") and kind == "op" and val == "(":
            self.next()
            ikind, ival, ipos = self.next()
            if ikind != "name":
                raise ParseError("summation index must be a name", ipos)
            self.expect(",")
            lower = self.expr()
            self.expect(",")
            upper = self.expr()
            self.expect(",")
            body = self.expr()
            self.expect(")")
            if isinstance(lower, Const) and lower.value.denominator == 1:
                lower = int(lower.value)
            cls = SumE if name == "sum" else ProdE
            return cls(ival, lower, upper, body)
        if name == "binom" and kind == "op" and val == "(":
            self.next()
            top = self.expr()
            self.expect(",")
            bottom = self.expr()
            self.expect(")")
            return Binom(top, bottom)
        return Sym(name)

    def integer(self):
        kind, val, pos = self.next()
        neg = False
        if kind == "op" and val == "-":
            neg = True
            kind, val, pos = self.next()
        if kind != "int":
            raise ParseError("expected an integer", pos)
        return -val if neg else val


def parse(text):
    return _Parser(text).parse()


# -- printing ------------------------------------------------------------

def _paren(s, needed):
    return "(%s)" % s if needed else s


def to_text(expr):
    return _print(expr, 0)


# precedence levels: 0 sum, 1 product, 2 unary/power, 3 atom
def _print(expr, level):
    if isinstance(expr, Const):
        v = expr.value
        if v.denominator == 1:
            s = str(v.numerator)
            return _paren(s, level >= 2 and v < 0)
        s = "%s/%s" % (v.numerator, v.denominator)
        return _paren(s, level >= 1)
    if isinstance(expr, Sym):
        return expr.name
    if isinstance(expr, Add):
        parts = []
        for i, t in enumerate(expr.terms):
            if isinstance(t, Neg) and i > 0:
                parts.append(" - " + _print(t.arg, 1))
            else:
                parts.append((" + " if i > 0 else "") + _print(t, 1))
        return _paren("".join(parts), level >= 1)
    if isinstance(expr, Mul):
        return _paren("*".join(_print(f, 2) for f in expr.factors),
                      level >= 2)
    if isinstance(expr, Div):
        return _paren("%s/%s" % (_print(expr.num, 2),
                                 _print(expr.den, 2)), level >= 2)
    if isinstance(expr, Neg):
        return _paren("-%s" % _print(expr.arg, 2), level >= 1)
    if isinstance(expr, Pow):
        return "%s^%s" % (_print(expr.base, 3), _print(expr.exp, 3))
    if isinstance(expr, Binom):
        return "binom(%s, %s)" % (_print(expr.top, 0),
                                  _print(expr.bottom, 0))
    if isinstance(expr, (SumE, ProdE)):
        word = "sum" if isinstance(expr, SumE) else "prod"
        lower = (expr.lower if not isinstance(expr.lower, Expr)
                 else _print(expr.lower, 0))
        return "%s(%s, %s, %s, %s)" % (word, expr.idx, lower,
                                       _print(expr.upper, 0),
                                       _print(expr.body, 0))
    if isinstance(expr, HarmonicS):
        return "S[%s](%s)" % (",".join(str(i) for i in expr.indices),
                              _print(expr.arg, 0))
    raise ExprError("unknown node %r" % (expr,))
