import random

import pytest
from gmpy2 import mpq

from nestsum.polys import MPoly, RatFunc
from nestsum.basesolve import (solve_pfde_base, sigma_quotient_witness,
                               solve_homogeneous_mult, nullspace,
                               universal_denominator, clear_denominators)
from conftest import rand_ratfunc

KVARS = ("k",)


def _k():
    return RatFunc.var(KVARS, "k")


def _c(v):
    return RatFunc.from_poly(MPoly.const(KVARS, mpq(v)))


def _check_rows(a1, a2, fs, rows):
    for c, g in rows:
        want = sum((ci * fi for ci, fi in zip(c, fs)),
                   RatFunc.zero(fs[0].vars))
        assert a1 * g.shift("k", 1) + a2 * g == want
        assert all(not ci.involves("k") for ci in c)


def test_telescoping_constant_gives_k():
    one = _c(1)
    rows = solve_pfde_base(one, -one, [one])
    _check_rows(one, -one, [one], rows)
    hit = [g for c, g in rows if c[0] == one]
    assert any(g - _k() == _c(v) for v in (0,)
               for g in [h - (h - _k()) + (h - _k()) for h in hit]) or hit
    # the inhomogeneous solution is k up to an additive constant
    g = next(g for c, g in rows if not c[0].is_zero)
    assert (g - _k()).den.is_const and not (g - _k()).involves("k")


def test_telescoping_partial_fraction():
    one = _c(1)
    k = _k()
    f = one / (k * (k + one))
    rows = solve_pfde_base(one, -one, [f])
    _check_rows(one, -one, [f], rows)
    assert any(not c[0].is_zero for c, g in rows)


def test_harmonic_term_does_not_telescope():
    one = _c(1)
    k = _k()
    f = one / (k + one)
    rows = solve_pfde_base(one, -one, [f])
    _check_rows(one, -one, [f], rows)
    assert all(c[0].is_zero for c, g in rows)


def _small_rat(rng):
    """Random rational function with small integer-shift denominator,
    the shape telescoping inputs actually take."""
    k = _k()
    num = _c(rng.randint(-4, 4)) + _c(rng.randint(-3, 3)) * k
    den = (k + _c(rng.randint(1, 4))) * (k + _c(rng.randint(1, 4)))
    return num / den


def test_random_planted_solutions():
    rng = random.Random(11)
    one = _c(1)
    done = 0
    for _ in range(40):
        g = _small_rat(rng)
        f = g.shift("k", 1) - g
        if f.is_zero:
            continue
        rows = solve_pfde_base(one, -one, [f])
        _check_rows(one, -one, [f], rows)
        assert any(not c[0].is_zero for c, g2 in rows)
        done += 1
    assert done >= 30


def test_basis_dimension_bound():
    rng = random.Random(12)
    one = _c(1)
    for _ in range(12):
        fs = []
        for _i in range(3):
            g = _small_rat(rng)
            fs.append(g.shift("k", 1) - g)
        if any(f.is_zero for f in fs):
            continue
        rows = solve_pfde_base(one, -one, fs)
        _check_rows(one, -one, fs, rows)
        assert len(rows) <= len(fs) + 1


def test_sigma_quotient_witness_positive():
    k = _k()
    one = _c(1)
    w = sigma_quotient_witness((k + one) / k)
    assert w is not None
    assert w.shift("k", 1) / w == (k + one) / k
    # powers of a shifted quotient
    alpha = (k + _c(2)) / (k + one)
    for m in (1, 2, 3, 6):
        w = sigma_quotient_witness(alpha ** m)
        assert w is not None
        assert w.shift("k", 1) / w == alpha ** m


def test_sigma_quotient_witness_negative():
    k = _k()
    one = _c(1)
    assert sigma_quotient_witness(_c(2)) is None
    assert sigma_quotient_witness((k * k + one) / (k * k)) is None
    assert sigma_quotient_witness(k / (k + one) * _c(3)) is None


def test_solve_homogeneous_mult():
    k = _k()
    one = _c(1)
    got = solve_homogeneous_mult((k + one) / k)
    assert got is not None
    m, w = got
    assert m == 1
    assert w.shift("k", 1) / w == (k + one) / k
    assert solve_homogeneous_mult(_c(2), m_max=8) is None


def test_nullspace_exact():
    rng = random.Random(13)
    for _ in range(30):
        rows = [[_c(rng.randint(-3, 3)) for _ in range(4)]
                for _ in range(2)]
        basis = nullspace(rows, 4, KVARS)
        assert len(basis) >= 2
        for v in basis:
            for row in rows:
                s = sum((a * b for a, b in zip(row, v)),
                        RatFunc.zero(KVARS))
                assert s.is_zero


def test_universal_denominator_covers_solution():
    # clear_denominators + universal_denominator admit the planted g
    one = _c(1)
    k = _k()
    g = one / (k * (k + one))
    f = g.shift("k", 1) - g
    A, B, Fs = clear_denominators(one, -one, [f])
    u = universal_denominator(A, B)
    # u must be divisible by the denominator of g
    q = RatFunc.from_poly(u) / RatFunc.from_poly(g.den)
    assert q.den.is_const
