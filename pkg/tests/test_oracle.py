import random

import pytest
from gmpy2 import mpq

from nestsum.expressions import parse, Const, Sym, Div, Add
from nestsum.oracle import (SeqEvaluator, eval_elem, eval_elem_symbolic,
                            eval_expr, verify_identity,
                            default_assignments, EvalError)
from nestsum.field import esub
from conftest import harmonic_tower, rand_elem


def test_symbolic_and_numeric_evaluation_agree(htower, rng):
    tw = htower
    ev = SeqEvaluator(tw)
    done = 0
    for _ in range(120):
        e = rand_elem(rng, tw, deg=1)
        n = rng.randint(0, 9)
        try:
            num = ev.eval(e, n)
        except EvalError:
            continue
        sym = eval_elem_symbolic(e, tw, n)
        assert sym.is_const and sym.const_value() == num
        done += 1
    assert done >= 80


def test_oracle_shift_semantics(htower, rng):
    tw = htower
    ev = SeqEvaluator(tw)
    done = 0
    for _ in range(120):
        e = rand_elem(rng, tw, deg=2)
        n = rng.randint(1, 10)
        try:
            want = ev.eval(e, n + 1)
            got = ev.eval(tw.sigma(e), n)
        except EvalError:
            continue
        assert got == want
        done += 1
    assert done >= 80


def test_generator_sequences_are_partial_sums(htower):
    tw = htower
    ev = SeqEvaluator(tw)
    h = tw.gen(1)
    assert ev.eval(h, 0) == 0
    for n in range(1, 8):
        assert ev.eval(h, n) == sum(mpq(1, i) for i in range(1, n + 1))


def test_verify_identity_passes_true_identity():
    lhs = parse("S[1,1](n)")
    rhs = parse("(1/2)*S[1](n)^2 + (1/2)*S[2](n)")
    report = verify_identity(lhs, rhs, rng=(1, 25))
    assert report["pass"] and report["checked"] == 25
    assert report["failures"] == []


def test_verify_identity_fails_with_counterexample():
    report = verify_identity(parse("S[1,1](n)"), parse("S[1](n)^2"),
                             rng=(1, 25))
    assert not report["pass"]
    assert report["failures"][0]["n"] <= 5


def test_verify_skips_reference_side_poles():
    # the reference side is undefined at n = 3; those points are
    # skipped, not failed
    lhs = Div(Const(1), Add(Sym("n"), Const(-3)))
    report = verify_identity(lhs, lhs, rng=(1, 10))
    assert report["pass"]
    assert report["skipped"] == 1 and report["checked"] == 9


def test_verify_fails_on_candidate_only_poles():
    lhs = Const(1)
    rhs = Add(Const(1), Div(Const(0), Add(Sym("n"), Const(-3))))
    report = verify_identity(lhs, rhs, rng=(1, 10))
    assert not report["pass"]
    assert any(f["n"] == 3 for f in report["failures"])


def test_default_assignments_shape():
    asg = default_assignments(["m", "x"])
    assert len(asg) == 2
    ints, rats = asg
    assert all(v.denominator == 1 for v in ints.values())
    assert all(v.denominator != 1 for v in rats.values())
    assert len({ints["m"], ints["x"]}) == 2
    assert default_assignments([]) == [{}]


def test_eval_elem_matches_direct_sum(htower):
    tw = htower
    hh = tw.gen(2)
    for n in range(0, 7):
        want = sum((sum(mpq(1, j) for j in range(1, i + 1)) / i
                    for i in range(1, n + 1)), mpq(0))
        assert eval_elem(hh, tw, n) == want
