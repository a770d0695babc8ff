import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualjet.expr import ExprSyntaxError, UnknownIdentifier, parse_expr
from dualjet.fields import FieldDomainError, field_from_expr
from dualjet.jetpoint import BundleShape, JetPoint


def test_sum_of_squares():
    e = parse_expr("p1*p1 + p2*p2")
    assert e.evaluate([0, 0], [], [3.0, 4.0]) == pytest.approx(25.0)
    assert e.to_string() == "p1*p1 + p2*p2"


def test_unbalanced_paren_reports_end_of_input():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("sqrt(p1^2 + p2^2")
    assert info.value.line == 1
    assert info.value.col == len("sqrt(p1^2 + p2^2") + 1


def test_position_on_later_line():
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr("x1 +\n  * x2")
    assert (info.value.line, info.value.col) == (2, 3)


@pytest.mark.parametrize("src", ["q1 + x1", "y1 + p1", "foo(x1)"])
def test_unknown_identifiers(src):
    with pytest.raises(UnknownIdentifier):
        parse_expr(src)


@pytest.mark.parametrize("src", ["x1^x2", "x1^1.5", "x1^-1"])
def test_exponent_must_be_integer_literal(src):
    with pytest.raises(ExprSyntaxError):
        parse_expr(src)


def test_pairing_scalar_for_n1():
    shape = BundleShape(1, 2)
    H = field_from_expr("p1*y1_1", shape)
    u = JetPoint([0.2], [[1.5]], [-2.0])
    assert H.value(u) == pytest.approx(-3.0)
    assert np.allclose(H.gradient(u), [0.0, -2.0, 1.5])


def test_simple_derivatives():
    shape = BundleShape(2, 2)
    u = JetPoint([0.3, 0.1], [[1.0, 2.0]], [0.5, -0.5])
    g = field_from_expr("x1", shape).gradient(u)
    assert np.array_equal(g, np.eye(shape.dim)[0])
    H = field_from_expr("p1^2", shape)
    assert H.hessian(u)[4, 4] == 2.0


def test_domain_error_reports_point():
    H = field_from_expr("sqrt(x1)", BundleShape(1, 2))
    with pytest.raises(FieldDomainError, match="u ="):
        H.value(JetPoint([-1.0], [[1.0]], [1.0]))


def test_shape_check_rejects_out_of_range_index():
    with pytest.raises(Exception):
        field_from_expr("x3 + p1", BundleShape(2, 2))


_atoms = st.sampled_from(["x1", "x2", "p1", "y1_2", "2", "0.5"])


@st.composite
def _exprs(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return draw(_atoms)
    op = draw(st.sampled_from(["+", "-", "*", "^", "f", "neg"]))
    a = draw(_exprs(depth=depth - 1))
    if op == "^":
        return f"({a})^{draw(st.integers(0, 3))}"
    if op == "f":
        return f"{draw(st.sampled_from(['sin', 'cos', 'exp']))}({a})"
    if op == "neg":
        return f"-({a})"
    b = draw(_exprs(depth=depth - 1))
    return f"({a}) {op} ({b})"


@given(_exprs())
def test_printer_round_trip(src):
    e = parse_expr(src)
    e2 = parse_expr(e.to_string())
    assert e2 == e
    x, ys, p = [0.3, -0.7], [[0.2, 0.9]], [1.1, -0.4]
    assert e2.evaluate(x, ys, p) == pytest.approx(e.evaluate(x, ys, p), rel=1e-12, abs=1e-12)
