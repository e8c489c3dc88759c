import numpy as np
import pytest

from conecert.errors import ExpressionError
from conecert.expressions import parse_expression, parse_predicate


def test_arithmetic():
    e = parse_expression("2 * t + u ** 2 - 1 / 4")
    assert e(t=1.0, u=3.0) == pytest.approx(2 + 9 - 0.25)


def test_functions():
    e = parse_expression("exp(-u) * abs(t - 0.5) + min(t, u) + max(t, u, 2)")
    assert e(t=0.25, u=0.0) == pytest.approx(1.0 * 0.25 + 0.0 + 2.0)


def test_vectorized():
    e = parse_expression("t * (1 - t) / 2", variables=("t",))
    t = np.linspace(0, 1, 5)
    assert np.allclose(e(t=t), t * (1 - t) / 2)


def test_predicate_conjunction():
    p = parse_predicate("u >= 1.15 and t < 0.5")
    assert bool(p(t=0.25, u=2.0))
    assert not bool(p(t=0.75, u=2.0))
    amp = parse_predicate("(u >= 1.15) & (t < 0.5)")
    assert bool(amp(t=0.25, u=2.0))


def test_predicate_vectorized():
    p = parse_predicate("u < 1.15")
    u = np.array([1.0, 1.15, 2.0])
    assert np.array_equal(p(t=np.zeros(3), u=u), [True, False, False])


def test_unknown_name_rejected():
    with pytest.raises(ExpressionError, match="unknown name"):
        parse_expression("x + 1")


def test_unsupported_syntax_rejected():
    for text in ["__import__('os')", "t if u else 1", "[1,2]", "u or t",
                 "lambda: 1", "t @ u", "sin(t)"]:
        with pytest.raises(ExpressionError):
            parse_expression(text)


def test_chained_comparison_rejected():
    with pytest.raises(ExpressionError, match="chained"):
        parse_predicate("0 <= u < 1")


def test_predicate_expression_mixup():
    with pytest.raises(ExpressionError):
        parse_expression("u < 1")
    with pytest.raises(ExpressionError):
        parse_predicate("u + 1")


def test_roundtrip_text_preserved():
    e = parse_expression("t*(1 - t)/2", variables=("t",))
    assert e.text == "t*(1 - t)/2"
