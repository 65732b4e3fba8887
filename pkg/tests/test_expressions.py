import pytest
from gmpy2 import mpq

from nestsum.expressions import (parse, to_text, ParseError, Const, Sym,
                                 Add, Mul, Div, Pow, Binom, SumE, ProdE,
                                 HarmonicS, free_symbols, substitute)
from nestsum.oracle import eval_expr

ROUND_TRIP = [
    "S[2,4](n)",
    "S[1](n)",
    "binom(m, k)",
    "x^k",
    "sum(i, 1, n, 1/i^2)",
    "prod(i, 1, n, i/(i + 1))",
    "sum(k, 1, n, sum(i, 1, k, x^(i - 1)*binom(m + i - 1, m))/(k + m))",
    "sum(k, 0, m, S[1](k)*binom(m, k))",
    "(S[6](n) + S[4](n)*S[2](n)) + (-1)*S[4,2](n)",
    "1/(k + 1)^3",
    "2^n + (-1/2)*n",
]


@pytest.mark.parametrize("text", ROUND_TRIP)
def test_parse_to_text_round_trip(text):
    e = parse(text)
    again = parse(to_text(e))
    assert again == e
    assert to_text(again) == to_text(e)


def test_parse_structure():
    e = parse("sum(i,1,n, x^(i-1))")
    assert isinstance(e, SumE)
    assert e.idx == "i" and e.lower == 1
    assert e.upper == Sym("n")
    assert isinstance(e.body, Pow)

    h = parse("S[2,1,1](n)")
    assert isinstance(h, HarmonicS)
    assert tuple(h.indices) == (2, 1, 1)


def test_parse_errors_carry_position():
    for bad in ["sum(i,1,n", "1 +", "S[](n)", "binom(m,)", "3..4"]:
        with pytest.raises(ParseError):
            parse(bad)
    try:
        parse("sum(i,1,n, i @ 2)")
    except ParseError as exc:
        assert "position" in str(exc) or (len(exc.args) > 1
                                          and isinstance(exc.args[1], int))


def test_free_symbols():
    e = parse("sum(i,1,n, x^(i-1)*binom(m+i-1,m))")
    assert free_symbols(e) == {"n", "x", "m"}
    assert free_symbols(parse("S[2](n)")) == {"n"}


def test_substitute():
    e = parse("S[2](n)")
    assert substitute(e, "n", Sym("j")) == parse("S[2](j)")


def test_eval_expr_basics():
    assert eval_expr(parse("sum(i,1,n, i)"), 4, {}) == 10
    assert eval_expr(parse("prod(i,1,n, i)"), 5, {}) == 120
    assert eval_expr(parse("binom(m, k)"), 0, {"m": mpq(5), "k": mpq(2)},
                     outer="j") == 10
    assert eval_expr(parse("S[1](n)"), 3, {}) == mpq(11, 6)
    # nested harmonic convention: outer index bounds the inner sum
    s21 = eval_expr(parse("S[2,1](n)"), 2, {})
    assert s21 == mpq(1) * 1 + mpq(1, 4) * (1 + mpq(1, 2))


def test_eval_expr_parameter_shift():
    e = parse("x^k")
    assert eval_expr(e, 3, {"x": mpq(2)}, outer="k") == 8
