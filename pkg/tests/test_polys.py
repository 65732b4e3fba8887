import random

import pytest
from gmpy2 import mpq

from nestsum.polys import (MPoly, RatFunc, mpoly_gcd, deriv, radical,
                           resultant, integer_roots, dispersion,
                           exact_div, DivisionByZero, PolyError)
from conftest import VARS, rand_poly, rand_poly_nonzero, rand_ratfunc, \
    rand_mpq

N_CASES = 120


def _pts(rng):
    return {"x": rand_mpq(rng) + 7, "k": rand_mpq(rng) + 5}


def test_poly_ring_laws_random():
    rng = random.Random(1)
    for _ in range(N_CASES):
        a = rand_poly(rng)
        b = rand_poly(rng)
        c = rand_poly(rng)
        env = _pts(rng)
        av = a.subs_values(env).const_value()
        bv = b.subs_values(env).const_value()
        cv = c.subs_values(env).const_value()
        assert ((a + b) * c).subs_values(env).const_value() == \
            (av + bv) * cv
        assert (a * b - b * a).is_zero
        assert (a + (b + c)) == ((a + b) + c)


def test_poly_shift_is_substitution():
    rng = random.Random(2)
    for _ in range(N_CASES):
        p = rand_poly(rng)
        env = _pts(rng)
        shifted = p.shift("k", 3)
        env2 = dict(env)
        env2["k"] = env["k"] + 3
        assert shifted.subs_values(env).const_value() == \
            p.subs_values(env2).const_value()


def test_deriv_product_rule():
    rng = random.Random(3)
    for _ in range(N_CASES):
        p = rand_poly(rng)
        q = rand_poly(rng)
        lhs = deriv(p * q, "k")
        rhs = deriv(p, "k") * q + p * deriv(q, "k")
        assert lhs == rhs


def test_deriv_monomial():
    k = MPoly.var(VARS, "k")
    p = k * k * k
    assert deriv(p, "k") == MPoly.const(VARS, 3) * k * k


def test_gcd_divides_and_recovers_common_factor():
    rng = random.Random(4)
    for _ in range(60):
        a = rand_poly_nonzero(rng, deg=1)
        b = rand_poly_nonzero(rng, deg=1)
        c = rand_poly_nonzero(rng, deg=1)
        g = mpoly_gcd(a * c, b * c)
        # g divides both products exactly
        assert exact_div(a * c, g) * g == a * c
        assert exact_div(b * c, g) * g == b * c
        # and contains the planted factor
        assert mpoly_gcd(g, c).degree("k") == c.degree("k") or \
            c.degree("k") == 0 or mpoly_gcd(a, b).degree("k") > 0 or \
            g.degree("x") >= c.degree("x")


def test_radical_is_squarefree_divisor():
    rng = random.Random(5)
    for _ in range(60):
        p = rand_poly_nonzero(rng, deg=2)
        cube = p * p * p
        r = radical(cube, "k")
        if cube.degree("k") == 0:
            continue
        # r divides the cube and is squarefree in k
        assert exact_div(cube, r) * r == cube
        assert mpoly_gcd(r, deriv(r, "k")).degree("k") == 0


def test_integer_roots_planted():
    vars = ("m", "k")
    k = MPoly.var(vars, "k")

    def lin(c):
        return k - MPoly.const(vars, c)

    p = lin(-2) * lin(0) * lin(5) * (k - MPoly.var(vars, "m"))
    roots = integer_roots(p, "k")
    assert set(roots) >= {-2, 0, 5}
    for r in roots:
        assert p.subs_values({"k": mpq(r)}).involves("k") is False


def test_integer_roots_none():
    vars = ("k",)
    k = MPoly.var(vars, "k")
    p = k * k + MPoly.const(vars, 1)
    assert integer_roots(p, "k") == []


def test_dispersion_contains_planted_shift():
    rng = random.Random(6)
    for j in (1, 2, 5):
        p = rand_poly_nonzero(rng, deg=1, nterms=2)
        while p.degree("k") == 0:
            p = rand_poly_nonzero(rng, deg=1, nterms=2)
        q = p.shift("k", -j)
        js, _ = dispersion(p, q, "k")
        assert j in js


def test_resultant_vanishes_iff_common_root():
    vars = ("k",)
    k = MPoly.var(vars, "k")
    one = MPoly.const(vars, 1)
    two = MPoly.const(vars, 2)
    assert resultant((k - one) * (k - two), k - one, "k").is_zero
    assert not resultant(k - one, k - two, "k").is_zero


def test_ratfunc_canonical_normalization():
    vars = ("k",)
    k = RatFunc.var(vars, "k")
    one = RatFunc.one(vars)
    a = (k * k - one) / (k + one)
    assert a == k - one
    assert a.den.is_const


def test_ratfunc_field_laws_random():
    rng = random.Random(7)
    for _ in range(N_CASES):
        a = rand_ratfunc(rng, deg=1)
        b = rand_ratfunc(rng, deg=1)
        if not b.is_zero:
            assert (a / b) * b == a
        assert a * b - b * a == RatFunc.zero(VARS)
        assert (a + b) - b == a


def test_ratfunc_negative_power():
    vars = ("k",)
    k = RatFunc.var(vars, "k")
    assert (k ** -2) * k * k == RatFunc.one(vars)


def test_division_by_zero_raises():
    vars = ("k",)
    with pytest.raises((DivisionByZero, PolyError, ZeroDivisionError)):
        RatFunc.one(vars) / RatFunc.zero(vars)
