import numpy as np
import pytest

from dualjet import taylor
from dualjet.catalog import build_space
from dualjet.jetpoint import JetPoint, make_rng
from dualjet.legendre import (LagrangeSpace, LegendreError, _anchor_w, canonical_semispray,
                              dual_hamiltonian, dual_lagrangian, eta_closed_form,
                              eta_coefficient_formula, eta_pushforward, legendre_forward,
                              legendre_inverse, phi_star, xi_star)
from dualjet.metric import DegeneracyError, fundamental_tensor
from dualjet.nonlinear import zero_connection


@pytest.fixture(scope="module")
def charged():
    return build_space("electrodynamics", 2, 3, m=1.3, c=0.8, e=0.6)


def _field_b(sp, x):
    return np.array([float(taylor.value(ex.evaluate(np.asarray(x)))) for ex in sp.extras["b"]])


def _w(sp, x, ys):
    return np.asarray(_anchor_w(sp.anchor, sp.shape, np.asarray(x), list(ys), np.zeros(2)), dtype=float)


def test_charged_momentum(charged):
    m, c, e = charged.extras["constants"]
    rng = make_rng(0)
    for _ in range(5):
        x = rng.uniform(-1, 1, 2)
        Y = rng.uniform(-1, 1, (3, 2))
        z = Y[-1] + _w(charged, x, Y[:-1])
        expected = m * c * charged.gamma.value(x) @ z + e / m * _field_b(charged, x)
        assert np.allclose(legendre_forward(charged.lagrangian, x, Y).p, expected, atol=1e-12)


def test_charged_inverse_closed_form(charged):
    m, c, e = charged.extras["constants"]
    for u in charged.sample(make_rng(1), 5):
        gi = np.linalg.inv(charged.gamma.value(u.x))
        expected = gi @ (u.p - e / m * _field_b(charged, u.x)) / (m * c) - _w(charged, u.x, u.y)
        assert np.allclose(legendre_inverse(charged.lagrangian, u), expected, atol=1e-10)
        assert np.allclose(xi_star(charged.H, charged.anchor, u), expected, atol=1e-10)


def test_charged_dual_hamiltonian(charged):
    H = dual_hamiltonian(charged.lagrangian, charged.anchor)
    for u in charged.sample(make_rng(2), 5):
        assert H.value(u) == pytest.approx(charged.H.value(u), rel=1e-9, abs=1e-10)


def test_metric_is_inverse_of_lagrangian_tensor(charged):
    for u in charged.sample(make_rng(3), 5):
        Y = np.vstack([u.y, legendre_inverse(charged.lagrangian, u)])
        a = charged.lagrangian.fundamental_tensor(u.x, Y)
        assert np.abs(fundamental_tensor(charged.H, u).gUp @ a - np.eye(2)).max() < 1e-9


def quartic(n=2, k=2):
    def fn(x, ys):
        z = ys[-1]
        r2 = taylor.einsum("i,i->", z, z)
        return r2 + r2 * r2 * 0.1 + z[0] * ys[0][1] * taylor.sin(x[0]) + z[1] * x[1] * 0.5
    return LagrangeSpace(n, k, fn, name="quartic")


def test_inverse_derivative_is_inverse_tensor():
    L = quartic()
    u = JetPoint([0.3, -0.2], [[0.5, 0.4]], [0.7, -0.6])
    xi = legendre_inverse(L, u)
    h = 1e-6
    fd = np.zeros((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd[:, j] = (legendre_inverse(L, u.replace(p=u.p + e)) - legendre_inverse(L, u.replace(p=u.p - e))) / (2 * h)
    a = L.fundamental_tensor(u.x, np.vstack([u.y, xi]))
    assert np.abs(fd - np.linalg.inv(a)).max() < 1e-7


def test_round_trips():
    L = quartic()
    rng = make_rng(4)
    for _ in range(5):
        x, Y = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, (2, 2))
        u = legendre_forward(L, x, Y)
        assert np.allclose(legendre_inverse(L, u), Y[-1], atol=1e-10)
    H = dual_hamiltonian(L)
    for _ in range(3):
        x, Y = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, (2, 2))
        p = phi_star(H, None, x, Y)
        assert np.allclose(p, L.momentum(x, Y), atol=1e-9)


def test_lagrangian_tensor_is_metric_at_image():
    sp = build_space("cartan_quadratic", 2, 3)
    L = dual_lagrangian(sp.H, sp.anchor)
    for u in sp.sample(make_rng(5), 4):
        Y = np.vstack([u.y, xi_star(sp.H, sp.anchor, u)])
        p = phi_star(sp.H, sp.anchor, u.x, Y)
        assert np.allclose(p, u.p, atol=1e-9)
        g = fundamental_tensor(sp.H, u.replace(p=p))
        assert np.abs(L.fundamental_tensor(u.x, Y) - g.gDown).max() < 1e-8


def test_hamiltonian_tensor_does_not_depend_on_anchor(charged):
    H0 = dual_hamiltonian(charged.lagrangian, zero_connection(charged.shape))
    for u in charged.sample(make_rng(6), 3):
        assert np.allclose(fundamental_tensor(H0, u).gUp, charged.gfield.pair(u).gUp, atol=1e-9)


def test_semispray_closed_form():
    # L = |y2|^2 + (y1_1)^2 y2_1 gives G = (y1_1 y2_1 / 3, 0)
    L = LagrangeSpace(2, 2, lambda x, ys: taylor.einsum("i,i->", ys[1], ys[1]) + ys[0][0] * ys[0][0] * ys[1][0])
    rng = make_rng(7)
    for _ in range(5):
        x, Y = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, (2, 2))
        a = L.fundamental_tensor(x, Y)
        assert np.allclose(a, [[1, 0], [0, 1]])
        G = canonical_semispray(L, x, Y)
        assert np.allclose(G, [Y[0, 0] * Y[1, 0] / 3, 0], atol=1e-13)


def test_three_momentum_routes_agree(charged):
    L = charged.lagrangian
    for u in charged.sample(make_rng(8), 3):
        e = eta_pushforward(L, u)
        scale = max(1.0, np.abs(e).max())
        assert np.abs(eta_coefficient_formula(L, u) - e).max() / scale < 1e-8
        assert np.abs(eta_closed_form(L, u) - e).max() / scale < 1e-8


def test_degenerate_lagrangian():
    L = LagrangeSpace(2, 2, lambda x, ys: ys[1][0] * ys[1][0])
    with pytest.raises(DegeneracyError):
        legendre_forward(L, [0, 0], [[1, 1], [1, 1]])
    with pytest.raises(LegendreError, match="residual trace"):
        legendre_inverse(L, JetPoint([0, 0], [[1, 1]], [1, 1]))
