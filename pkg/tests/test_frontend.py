"""End-to-end checks of the expression frontend: registering nested
sums as tower elements, translating them back, and the certificate
wrappers."""

import pytest
from gmpy2 import mpq

from nestsum.expressions import (
    parse, to_text, Sym, SumE, HarmonicS, free_symbols)
from nestsum.oracle import eval_expr, eval_elem, EvalError
from nestsum.frontend import (
    Session, FrontendError, simplify, telescope, find_relations)


ROUND_TRIP = [
    "sum(i, 1, n, 1/i)",
    "sum(i, 1, n, 1/(i+1)^2)",
    "sum(i, 0, n, i^2 + 3*i)",
    "sum(i, 1, n, 1/(i*(i+2)))",
    "sum(i, 1, n, S[1](i)/i)",
    "sum(i, 1, n - 1, 1/i)",
    "S[2,1](n)",
    "S[1,1,2](n)",
    "sum(i, 1, n, 2^i/i)",
    "prod(i, 1, n, (i+1)/i)",
]


@pytest.mark.parametrize("text", ROUND_TRIP)
def test_register_to_expr_matches_input_sequence(text):
    expr = parse(text)
    sess = Session()
    rep = sess.register(expr)
    back = sess.to_expr(rep)
    checked = 0
    for n in range(1, 21):
        try:
            want = eval_expr(expr, n)
        except EvalError:
            continue
        assert eval_elem(rep, sess.tower, n) == want
        assert eval_expr(back, n) == want
        checked += 1
    assert checked >= 15


def test_register_rejects_free_inner_symbol():
    sess = Session()
    with pytest.raises(FrontendError):
        sess.register(parse("sum(i, 1, n, 1/(i+y))"))


def test_harmonic_generators_are_reused():
    sess = Session()
    sess.register(parse("S[1](n)"))
    size = len(sess.tower.gens)
    sess.register(parse("sum(i, 1, n, S[1](i)/i)"))
    # the inner S[1] reuses the existing generator
    assert sum(1 for g in sess.tower.gens
               if sess.displays.get(g.name) == HarmonicS((1,), Sym("n"))) == 1
    assert (1,) in sess.harmonics
    rep = sess.harmonic_elem((1,))
    for n in range(1, 11):
        assert eval_elem(rep, sess.tower, n) == eval_expr(parse("S[1](n)"), n)
    assert len(sess.tower.gens) > size


def test_power_sum_display():
    sess = Session()
    rep = sess.register(parse("sum(i, 1, n, S[2,4](i) - S[4,2](i))"))
    back = sess.to_expr(rep)
    # translation uses power-sum notation instead of spelled-out sums
    assert "S[" in to_text(back)
    for n in range(1, 16):
        assert eval_expr(back, n) == eval_elem(rep, sess.tower, n)


def test_refined_mode_depth_not_above_naive():
    text = "sum(i, 1, n, S[1](i)^2/i)"
    ref = Session(mode="refined")
    ref.register(parse(text))
    nai = Session(mode="naive")
    nai.register(parse(text))
    assert max(ref.depth_profile()) <= max(nai.depth_profile())


def test_simplify_certificate_passes():
    cert = simplify(parse("sum(i, 1, n, 1/(i*(i+1)))"), rng=(1, 25))
    assert cert.passed
    assert cert.oracle_report["checked"] == 25
    # a telescoping sum needs no generators at all
    assert len(cert.session.tower.gens) == 0
    assert not free_symbols(cert.result_expr) - {"n"}


def test_simplify_with_parameter():
    cert = simplify(parse("sum(i, 1, n, 1/(i+x))"), params=["x"],
                    rng=(1, 15))
    assert cert.passed
    assert "x" in cert.session.tower.params


def test_telescope_requires_a_sum():
    with pytest.raises(FrontendError):
        telescope(parse("1/(n+1)"))


def test_telescope_accepts_harmonic_shorthand():
    cert = telescope(parse("S[1](n)"))
    assert cert.passed
    assert isinstance(cert.input, HarmonicS)


def test_find_relations_on_complementary_pair():
    certs, sess = find_relations(
        [parse("S[4,2](n)"), parse("S[2,4](n)")], rng=(1, 20))
    assert certs
    assert all(c.passed for c in certs)
    kinds = {c.kind for c in certs}
    assert kinds <= {"relation", "representation"}


def test_session_outcome_tracking():
    sess = Session()
    sess.register(parse("S[1](n)"))
    assert sess._top_outcome == "adjoined"
    sess.register(parse("S[1](n)"))
    assert sess._top_outcome == "expressed"
