import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualjet import taylor
from dualjet.expr import parse_expr
from dualjet.fields import ScalarField, field_from_expr
from dualjet.jetpoint import BundleShape, JetPoint


def _poly(terms):
    def f(X):
        out = 0.0
        for c, e in terms:
            t = float(c)
            for i, a in enumerate(e):
                for _ in range(a):
                    t = X[i] * t
            out = t + out
        return out
    return f


def test_cubic_partials_match_symbolic_oracle(frozen):
    o = frozen["poly3"]
    J = _poly(o["terms"])(taylor.Jet.seed(np.array(o["point"]), 3))
    for key, want in o["partials"].items():
        multi = [int(v) for v in key.split(",")] if key else []
        assert J.derivative(multi) == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_elementary_functions_to_fourth_order(frozen):
    o = frozen["elementary"]
    e = parse_expr(o["source"])
    X = taylor.Jet.seed(np.array(o["point"]), 4)
    J = e.evaluate(X)
    for key, want in o["partials"].items():
        multi = [int(v) for v in key.split(",")] if key else []
        assert J.derivative(multi) == pytest.approx(want, rel=1e-10, abs=1e-11)


def test_schwarz_symmetry_and_fd():
    shape = BundleShape(2, 2)
    H = field_from_expr("exp(x1*p2)*sin(y1_1 + p1^2) + log(2 + x2^2*y1_2^2)", shape)
    u = JetPoint([0.3, -0.2], [[0.5, 0.4]], [0.1, 0.7])
    J = H.jet(u, 4)
    for combo in itertools.combinations_with_replacement(range(shape.dim), 3):
        vals = {J.derivative(list(perm)) for perm in itertools.permutations(combo)}
        assert max(vals) - min(vals) <= 1e-9 * max(1.0, max(abs(v) for v in vals))
    g = H.gradient(u)
    h = np.cbrt(np.finfo(float).eps)
    for c in range(shape.dim):
        e = np.zeros(shape.dim)
        e[c] = h
        fd = (H.value(JetPoint.from_flat(shape, u.flat() + e))
              - H.value(JetPoint.from_flat(shape, u.flat() - e))) / (2 * h)
        assert fd == pytest.approx(g[c], rel=1e-5, abs=1e-8)


@given(st.lists(st.floats(-2, 2), min_size=3, max_size=3),
       st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_product_rule(a, b):
    X = taylor.Jet.seed(np.array([0.2, -0.4, 0.9]), 2)
    f = X[0] * a[0] + X[1] * X[2] * a[1] + taylor.sin(X[2]) * a[2]
    g = taylor.exp(X[0] * b[0]) + X[1] * b[1] * X[1] + b[2]
    fg = (f * g).grad().value
    assert np.allclose(fg, f.grad().value * g.value + f.value * g.grad().value, atol=1e-12)


def test_ipow_and_division():
    X = taylor.Jet.seed(np.array([1.3]), 4)
    J = taylor.ipow(X[0], 5) / (X[0] * X[0])
    for j in range(5):
        want = math.perm(3, j) * 1.3 ** (3 - j)
        assert J.derivative([0] * j) == pytest.approx(want, rel=1e-12)


def test_domain_errors():
    with pytest.raises(taylor.DomainError):
        taylor.sqrt(taylor.Jet.seed(np.array([-1.0]), 2)[0])
    with pytest.raises(taylor.DomainError):
        taylor.log(taylor.Jet.seed(np.array([0.0]), 1)[0])


def test_extension_seed_keeps_incoming_jet():
    # derivatives through an extended seed equal those of the direct composition
    X = taylor.Jet.seed(np.array([0.4, 0.1]), 3)
    U = taylor.stack([X[0] * X[1], taylor.sin(X[0])])
    Ub = taylor.extend(U, 4, 3)
    back = taylor.restrict(Ub, 2)
    assert np.allclose(back.c, U.c)


def test_second_order_matches_nested_grads():
    shape = BundleShape(1, 2)
    H = field_from_expr("x1^2*p1^3 + y1_1*sin(p1)", shape)
    u = JetPoint([0.5], [[0.3]], [1.1])
    v, g, h = taylor.second_order(H.jet(u, 2))
    assert np.allclose(g, H.gradient(u))
    assert np.allclose(h, H.hessian(u))
    assert v == pytest.approx(H.value(u))


def test_scalar_field_from_callable_agrees_with_expr():
    shape = BundleShape(2, 3)
    e = field_from_expr("p1*y1_1 + p2*y1_2", shape)
    f = ScalarField(shape, lambda x, ys, p: p[0] * ys[0][0] + p[1] * ys[0][1])
    u = JetPoint([0.1, 0.2], [[0.3, 0.4], [0.5, 0.6]], [0.7, 0.8])
    assert np.allclose(e.hessian(u), f.hessian(u))
