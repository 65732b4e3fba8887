import random

import pytest
from gmpy2 import mpq

from nestsum.polys import MPoly, RatFunc
from nestsum.field import Tower, SIGMA, base_elem, ediv, emul, eadd

VARS = ("x", "k")


def rand_mpq(rng, span=6):
    num = rng.randint(-span, span)
    den = rng.randint(1, span)
    return mpq(num, den)


def rand_poly(rng, vars=VARS, deg=2, nterms=3, span=6):
    terms = {}
    for _ in range(nterms):
        exps = tuple(rng.randint(0, deg) for _ in vars)
        terms[exps] = rand_mpq(rng, span)
    return MPoly(vars, terms)


def rand_poly_nonzero(rng, vars=VARS, deg=2, nterms=3, span=6):
    while True:
        p = rand_poly(rng, vars, deg, nterms, span)
        if not p.is_zero:
            return p


def rand_ratfunc(rng, vars=VARS, deg=2):
    return (RatFunc.from_poly(rand_poly(rng, vars, deg))
            / RatFunc.from_poly(rand_poly_nonzero(rng, vars, deg)))


@pytest.fixture
def rng():
    return random.Random(20240817)


def harmonic_tower():
    """Tower Q(k)(h)(hh): h the harmonic numbers, hh the nested sum
    over h(i)/i."""
    tower = Tower(params=())
    k1 = RatFunc.var(tower.vars, "k") + RatFunc.one(tower.vars)
    beta1 = base_elem(RatFunc.one(tower.vars) / k1)
    tower, _, _ = tower.extend("h", SIGMA, beta1)
    beta2 = tower.sigma(ediv(tower.gen(1), tower.k()))
    tower, _, _ = tower.extend("hh", SIGMA, beta2)
    return tower


@pytest.fixture(scope="module")
def htower():
    return harmonic_tower()


def rand_elem(rng, tower, level=None, deg=2):
    """Random polynomial in the generator at the given level with
    rational-function base coefficients."""
    if level is None:
        level = tower.height
    t = tower.gen(level)
    out = tower.zero()
    tp = tower.one()
    for _ in range(deg + 1):
        c = base_elem(rand_ratfunc(rng, tower.vars, deg=1))
        out = eadd(out, emul(c, tp))
        tp = emul(tp, t)
    return out
