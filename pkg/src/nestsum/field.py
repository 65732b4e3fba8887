"""Towers of difference-field extensions and their elements.

A Tower is Q(params)(k)(t_1)...(t_e) with the shift acting as
sigma(k) = k+1 and each generator t_i either a product generator
(sigma(t) = alpha*t) or a sum generator (sigma(t) = t + beta), where the
defining element lives strictly below t_i.

Elements (Elem) are stored canonically and recursively:

  * level 0: a normalized RatFunc in k over Q(params);
  * level i: a coprime pair of univariate polynomials in t_i whose
    coefficients are elements of level < i, the denominator monic, and
    the representation at the minimal possible level.

Towers are immutable; extending or reordering returns a new tower plus
a level map for relocating existing elements.
"""

from __future__ import annotations

from .polys import (MPoly, RatFunc, DivisionByZero, PolyError)


class FieldError(Exception):
    pass


class ReorderError(FieldError):
    def __init__(self, message, violator=None):
        super().__init__(message)
        self.violator = violator


PI = "pi"
SIGMA = "sigma"


class Elem:
    __slots__ = ("level", "base", "num", "den", "_hash")

    def __init__(self, level, base=None, num=None, den=None):
        self.level = level
        self.base = base
        self.num = num
        self.den = den
        self._hash = None

    @property
    def is_zero(self):
        return self.level == 0 and self.base.is_zero

    @property
    def is_base(self):
        return self.level == 0

    def is_const(self):
        """Free of k and of every generator (an element of K)."""
        return self.level == 0 and not self.base.involves("k")

    def const_ratfunc(self):
        if not self.is_const():
            raise FieldError("not a constant of the tower")
        return self.base

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Elem) or self.level != other.level:
            return False
        if self.level == 0:
            return self.base == other.base
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            if self.level == 0:
                self._hash = hash((0, self.base))
            else:
                self._hash = hash((self.level, self.num, self.den))
        return self._hash

    def __repr__(self):
        return "Elem(level=%d)" % self.level


_ZEROES = {}
_ONES = {}


def base_elem(rf):
    return Elem(0, base=rf)


def zero_elem(vars):
    if vars not in _ZEROES:
        _ZEROES[vars] = base_elem(RatFunc.zero(vars))
    return _ZEROES[vars]


def one_elem(vars):
    if vars not in _ONES:
        _ONES[vars] = base_elem(RatFunc.one(vars))
    return _ONES[vars]


def const_elem(vars, c):
    return base_elem(RatFunc.const(vars, c))


def gen_elem(level, vars):
    """The generator t_level itself as an element."""
    return Elem(level, num=(zero_elem(vars), one_elem(vars)),
                den=(one_elem(vars),))


def elem_vars(e):
    while e.level > 0:
        e = e.num[0]
    return e.base.vars


# -- polynomial helpers on coefficient tuples -------------------------

def _ptrim(cs):
    cs = list(cs)
    while cs and cs[-1].is_zero:
        cs.pop()
    return cs


def _padd(a, b):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        if i < len(a) and i < len(b):
            out.append(eadd(a[i], b[i]))
        elif i < len(a):
            out.append(a[i])
        else:
            out.append(b[i])
    return _ptrim(out)


def _pneg(a):
    return [eneg(c) for c in a]


def _pmul(a, b):
    if not a or not b:
        return []
    vars = elem_vars(a[0] if a else b[0])
    out = [zero_elem(vars)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca.is_zero:
            continue
        for j, cb in enumerate(b):
            if cb.is_zero:
                continue
            out[i + j] = eadd(out[i + j], emul(ca, cb))
    return _ptrim(out)


def _pscale(a, c):
    if c.is_zero:
        return []
    return _ptrim([emul(x, c) for x in a])


def _pdivmod(u, v):
    """Polynomial division with field-element coefficients."""
    v = _ptrim(v)
    if not v:
        raise DivisionByZero("division by the zero polynomial")
    r = _ptrim(u)
    dv = len(v) - 1
    lci = einv(v[-1])
    vars = elem_vars(v[0])
    q = [zero_elem(vars)] * max(len(r) - dv, 0)
    while r and len(r) - 1 >= dv:
        dr = len(r) - 1
        c = emul(r[-1], lci)
        q[dr - dv] = c
        for i, vc in enumerate(v):
            r[i + dr - dv] = esub(r[i + dr - dv], emul(c, vc))
        r = _ptrim(r)  # the top coefficient cancels exactly
    return _ptrim(q), r


def _pgcd(u, v):
    """Monic gcd of coefficient-tuple polynomials over the tower field."""
    a, b = _ptrim(u), _ptrim(v)
    while b:
        _, r = _pdivmod(a, b)
        a, b = b, r
    if not a:
        return a
    lci = einv(a[-1])
    return [emul(c, lci) for c in a]


def _peval(coeffs, point):
    """Horner evaluation of a coefficient tuple at an element."""
    if not coeffs:
        return zero_elem(elem_vars(point))
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = eadd(emul(acc, point), c)
    return acc


def make_elem(level, num, den):
    """Canonical constructor for a level >= 1 element."""
    num = _ptrim(num)
    den = _ptrim(den)
    if not den:
        raise DivisionByZero("zero denominator in tower element")
    if not num:
        return zero_elem(elem_vars(den[0]))
    if len(den) == 1:
        d0 = den[0]
        if not (d0.level == 0 and d0.base.is_const
                and d0.base.const_value() == 1):
            d0i = einv(d0)
            num = [emul(c, d0i) for c in num]
        if len(num) == 1:
            return num[0]
        one = one_elem(elem_vars(num[0]))
        return Elem(level, num=tuple(num), den=(one,))
    g = _pgcd(num, den)
    if len(g) > 1:
        num, _ = _pdivmod(num, g)
        den, _ = _pdivmod(den, g)
        if len(den) == 1:
            return make_elem(level, num, den)
    lc = den[-1]
    if not (lc.level == 0 and lc.base.is_const
            and lc.base.const_value() == 1):
        lci = einv(lc)
        num = [emul(c, lci) for c in num]
        den = [emul(c, lci) for c in den]
    return Elem(level, num=tuple(num), den=tuple(den))


def _as_pair(e, level):
    """View e as a (num, den) coefficient pair at the given level."""
    if e.level == level:
        return list(e.num), list(e.den)
    return [e], [one_elem(elem_vars(e))]


def eadd(a, b):
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    level = max(a.level, b.level)
    if level == 0:
        return base_elem(a.base + b.base)
    n1, d1 = _as_pair(a, level)
    n2, d2 = _as_pair(b, level)
    if d1 == d2:
        return make_elem(level, _padd(n1, n2), d1)
    num = _padd(_pmul(n1, d2), _pmul(n2, d1))
    return make_elem(level, num, _pmul(d1, d2))


def eneg(a):
    if a.level == 0:
        return base_elem(-a.base)
    return Elem(a.level, num=tuple(eneg(c) for c in a.num), den=a.den)


def esub(a, b):
    return eadd(a, eneg(b))


def emul(a, b):
    if a.is_zero or b.is_zero:
        return zero_elem(elem_vars(a))
    level = max(a.level, b.level)
    if level == 0:
        return base_elem(a.base * b.base)
    n1, d1 = _as_pair(a, level)
    n2, d2 = _as_pair(b, level)
    return make_elem(level, _pmul(n1, n2), _pmul(d1, d2))


def einv(a):
    if a.is_zero:
        raise DivisionByZero("inverse of zero tower element")
    if a.level == 0:
        return base_elem(a.base.inv())
    return make_elem(a.level, list(a.den), list(a.num))


def ediv(a, b):
    return emul(a, einv(b))


def epow(a, n):
    if n < 0:
        return epow(einv(a), -n)
    vars = elem_vars(a)
    result = one_elem(vars)
    base = a
    while n:
        if n & 1:
            result = emul(result, base)
        base = emul(base, base)
        n >>= 1
    return result


def escale(a, c):
    """Multiply by an mpq scalar."""
    if a.level == 0:
        return base_elem(a.base.scale(c))
    if c == 0:
        return zero_elem(elem_vars(a))
    return Elem(a.level, num=tuple(escale(x, c) for x in a.num), den=a.den)


def max_level(e):
    if e.level == 0:
        return 0
    m = e.level
    for c in e.num + e.den:
        m = max(m, max_level(c))
    return m


def relevel(e, level_map):
    """Relocate an element after tower levels have shifted.

    level_map[old_level] = new_level, must be strictly increasing."""
    if e.level == 0:
        return e
    return Elem(level_map[e.level],
                num=tuple(relevel(c, level_map) for c in e.num),
                den=tuple(relevel(c, level_map) for c in e.den))


class Generator:
    __slots__ = ("name", "kind", "defining", "depth", "depth_optimal_certified")

    def __init__(self, name, kind, defining, depth,
                 depth_optimal_certified=False):
        if kind not in (PI, SIGMA):
            raise FieldError("unknown generator kind %r" % (kind,))
        self.name = name
        self.kind = kind
        self.defining = defining
        self.depth = depth
        self.depth_optimal_certified = depth_optimal_certified

    def __repr__(self):
        return "Generator(%s, %s, depth=%d)" % (self.name, self.kind,
                                                self.depth)


class Tower:
    """Immutable description of Q(params)(k)(t_1)...(t_e).

    ground_height = 0 means depths are measured over the constants
    (delta(k) = 1).  ground_height = h >= 1 places k and the first h-1
    generators inside the ground field (depth 0); this is how a
    creative-telescoping parameter setup measures depth relative to a
    larger base.
    """

    __slots__ = ("params", "vars", "gens", "ground_height", "_sig_cache",
                 "_solve_cache")

    def __init__(self, params=(), gens=(), ground_height=0):
        self.params = tuple(params)
        self.vars = self.params + ("k",)
        self.gens = tuple(gens)
        self.ground_height = ground_height
        self._sig_cache = {}
        self._solve_cache = {}

    # -- basics --------------------------------------------------------

    @property
    def height(self):
        return len(self.gens)

    def gen_at(self, level):
        if not 1 <= level <= len(self.gens):
            raise FieldError("no generator at level %d" % level)
        return self.gens[level - 1]

    def zero(self):
        return zero_elem(self.vars)

    def one(self):
        return one_elem(self.vars)

    def const(self, c):
        return const_elem(self.vars, c)

    def base(self, ratfunc):
        return base_elem(ratfunc)

    def k(self):
        return base_elem(RatFunc.var(self.vars, "k"))

    def gen(self, level):
        return gen_elem(level, self.vars)

    def gen_named(self, name):
        for i, g in enumerate(self.gens):
            if g.name == name:
                return self.gen(i + 1)
        raise FieldError("no generator named %r" % name)

    def level_of(self, name):
        for i, g in enumerate(self.gens):
            if g.name == name:
                return i + 1
        raise FieldError("no generator named %r" % name)

    def k_depth(self):
        return 1 if self.ground_height == 0 else 0

    def depth_of_region(self, split):
        """delta of the subfield spanned by levels 0..split."""
        d = self.k_depth()
        for g in self.gens[:split]:
            d = max(d, g.depth)
        return d

    @property
    def field_depth(self):
        return self.depth_of_region(len(self.gens))

    def is_ordered(self):
        depths = [g.depth for g in self.gens]
        return all(a <= b for a, b in zip(depths, depths[1:]))

    # -- depth -----------------------------------------------------------

    def depth(self, e):
        if e.level == 0:
            return self.k_depth() if e.base.involves("k") else 0
        d = self.gen_at(e.level).depth
        for c in e.num + e.den:
            d = max(d, self.depth(c))
        return d

    def compute_depth(self, defining):
        return self.depth(defining) + 1

    # -- shift -------------------------------------------------------

    def _gen_image(self, level, sign):
        key = (level, sign)
        img = self._sig_cache.get(key)
        if img is not None:
            return img
        g = self.gen_at(level)
        t = self.gen(level)
        if sign > 0:
            if g.kind == PI:
                img = emul(g.defining, t)
            else:
                img = eadd(t, g.defining)
        else:
            if g.kind == PI:
                img = ediv(t, self.sigma(g.defining, -1))
            else:
                img = esub(t, self.sigma(g.defining, -1))
        self._sig_cache[key] = img
        return img

    def sigma(self, e, power=1):
        while power:
            sign = 1 if power > 0 else -1
            e = self._sigma1(e, sign)
            power -= sign
        return e

    def _sigma1(self, e, sign):
        if e.level == 0:
            return base_elem(e.base.shift("k", sign))
        img = self._gen_image(e.level, sign)
        num = [self._sigma1(c, sign) for c in e.num]
        den = [self._sigma1(c, sign) for c in e.den]
        return ediv(_peval(num, img), _peval(den, img))

    def delta_op(self, e):
        """sigma(e) - e."""
        return esub(self.sigma(e), e)

    # -- structure ---------------------------------------------------

    def as_polynomial(self, e):
        """Exponent-vector map over the generators with RatFunc
        coefficients, or None if e is not polynomial in the generators
        (base-field denominators are fine)."""
        out = {}
        width = len(self.gens)

        def walk(x, expo):
            if x.level == 0:
                key = tuple(expo)
                cur = out.get(key)
                out[key] = x.base if cur is None else cur + x.base
                return True
            den_ok = (len(x.den) == 1 and x.den[0].level == 0
                      and x.den[0].base.is_const)
            if not den_ok:
                return False
            scale = x.den[0].base.const_value() if not x.den[0].is_zero else 1
            for d, c in enumerate(x.num):
                if c.is_zero:
                    continue
                e2 = list(expo)
                e2[x.level - 1] += d
                cc = escale(c, 1 / scale) if scale != 1 else c
                if not walk(cc, e2):
                    return False
            return True

        if walk(e, [0] * width):
            return {k: v for k, v in out.items() if not v.is_zero}
        return None

    # -- extension -----------------------------------------------------

    def insert_position(self, depth, defining, max_pos=None):
        """First level at which a new generator of the given depth can
        be inserted while keeping the tower ordered and dependencies
        below it."""
        lo = max_level(defining) + 1
        hi = (len(self.gens) if max_pos is None else max_pos) + 1
        pos = hi
        for i in range(len(self.gens)):
            if i + 1 >= hi:
                break
            if self.gens[i].depth > depth:
                pos = i + 1
                break
        if pos < lo:
            pos = lo
        return pos

    def extend(self, name, kind, defining, pos=None, certified=False,
               max_pos=None, ground=False):
        """Insert a generator; returns (tower, level_map, level_of_new).

        ground=True appends the generator to the ground region (depth
        0, e.g. the fixed part of a creative-telescoping setup); its
        defining element must be base-level."""
        if any(g.name == name for g in self.gens):
            raise FieldError("generator name %r already in use" % name)
        if ground:
            if max_level(defining) >= max(self.ground_height, 1):
                raise FieldError("ground generator may only depend on "
                                 "the ground region")
            depth = 0
            pos = max(self.ground_height, 1)
            explicit = True
        else:
            depth = self.compute_depth(defining)
            explicit = pos is not None
        if pos is None:
            pos = self.insert_position(depth, defining, max_pos=max_pos)
        if max_level(defining) >= pos:
            raise FieldError("defining element depends on higher levels")
        level_map = list(range(len(self.gens) + 1))
        for l in range(pos, len(self.gens) + 1):
            level_map[l] = l + 1
        gens = []
        for i, g in enumerate(self.gens):
            if i + 1 < pos:
                gens.append(g)
            else:
                gens.append(Generator(g.name, g.kind,
                                      relevel(g.defining, level_map),
                                      g.depth, g.depth_optimal_certified))
        new_gen = Generator(name, kind, defining, depth, certified)
        gens.insert(pos - 1, new_gen)
        gh = self.ground_height + (1 if ground else 0)
        if ground and self.ground_height == 0:
            gh = 2  # k joins the ground together with the first member
        tower = Tower(self.params, gens, gh)
        if not explicit and self.is_ordered() and not tower.is_ordered():
            raise FieldError("insertion broke the depth ordering")
        return tower, level_map, pos

    def fresh_name(self, depth):
        used = {g.name for g in self.gens}
        i = 0
        while True:
            name = "w%d_%d" % (depth, i)
            if name not in used:
                return name
            i += 1

    def rename(self, old, new):
        if any(g.name == new for g in self.gens):
            raise FieldError("generator name %r already in use" % new)
        gens = tuple(
            Generator(new if g.name == old else g.name, g.kind,
                      g.defining, g.depth, g.depth_optimal_certified)
            for g in self.gens)
        if all(g.name != new for g in gens):
            raise FieldError("no generator named %r" % old)
        return Tower(self.params, gens, self.ground_height)

    # -- reorder -------------------------------------------------------

    def reorder(self, order):
        """Rebuild the tower with generators in the given order (a
        permutation of names or 1-based levels).  Fails with the first
        violating generator named when a defining element would refer
        to a generator placed above it."""
        if len(order) != len(self.gens):
            raise ReorderError("order must mention every generator")
        levels = []
        for item in order:
            levels.append(item if isinstance(item, int)
                          else self.level_of(item))
        if sorted(levels) != list(range(1, len(self.gens) + 1)):
            raise ReorderError("order is not a permutation")
        new_pos = {old: i + 1 for i, old in enumerate(levels)}
        for old in levels:
            g = self.gen_at(old)
            for used in _levels_used(g.defining):
                if new_pos[used] > new_pos[old]:
                    raise ReorderError(
                        "generator %s would precede its defining "
                        "generator %s" % (g.name,
                                          self.gen_at(used).name),
                        violator=g.name)
        # rebuild in order; defining elements get converted as we go
        tower = Tower(self.params, (), self.ground_height)
        for new_level, old in enumerate(levels, start=1):
            g = self.gen_at(old)
            defining = convert_elem(g.defining, self, tower,
                                    {o: new_pos[o] for o in levels})
            tower, _, _ = tower.extend(g.name, g.kind, defining,
                                       pos=new_level,
                                       certified=g.depth_optimal_certified)
        if not tower.is_ordered():
            bad = next(tower.gens[i].name
                       for i in range(1, len(tower.gens))
                       if tower.gens[i].depth < tower.gens[i - 1].depth)
            raise ReorderError("requested order is not depth-ordered "
                               "(at %s)" % bad, violator=bad)
        return tower

    def __repr__(self):
        names = ["k"] + [g.name for g in self.gens]
        return "Tower(Q(%s)(%s))" % (",".join(self.params),
                                     ")(".join(names))


def _levels_used(e):
    out = set()

    def walk(x):
        if x.level == 0:
            return
        out.add(x.level)
        for c in x.num + x.den:
            walk(c)

    walk(e)
    return out


def convert_elem(e, old_tower, new_tower, pos_map):
    """Re-express an element of old_tower inside new_tower, mapping
    generator level l to pos_map[l]."""
    if e.level == 0:
        return e
    num = [convert_elem(c, old_tower, new_tower, pos_map) for c in e.num]
    den = [convert_elem(c, old_tower, new_tower, pos_map) for c in e.den]
    t = new_tower.gen(pos_map[e.level])
    return ediv(_peval(num, t), _peval(den, t))
