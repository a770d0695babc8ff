import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualjet.catalog import build_space
from dualjet.fields import field_from_expr
from dualjet.jetpoint import BundleShape, JetPoint, make_rng, random_point
from dualjet.metric import (DegeneracyError, HamiltonMetric, c_mixed_tensor, c_up_tensor,
                            fundamental_tensor, generalized_c_up, reducibility_probe, regular_pair)


@pytest.mark.parametrize("m,c", [(1.0, 1.0), (2.0, 0.5), (0.7, 3.0)])
def test_electrodynamics_metric_is_scaled_inverse_gamma(m, c):
    sp = build_space("electrodynamics", 2, 3, m=m, c=c)
    for u in sp.sample(make_rng(0), 5):
        expected = np.linalg.inv(sp.gamma.value(u.x)) / (m * c)
        assert np.allclose(sp.gfield.pair(u).gUp, expected, rtol=1e-12, atol=1e-14)


def test_cartan_metric_is_the_given_tensor():
    sp = build_space("cartan_quadratic", 2, 3)
    a = sp.extras["a"]
    for u in sp.sample(make_rng(1), 5):
        assert np.allclose(sp.gfield.pair(u).gUp, a(u.x, list(u.y)), rtol=1e-10, atol=1e-12)


def test_quartic_c_tensor():
    shape = BundleShape(2, 2)
    H = field_from_expr("p1^4 + p2^2", shape)
    u = JetPoint([0.1, 0.2], [[1.0, 0.5]], [0.8, 0.3])
    C = c_up_tensor(H, u).components
    assert C[0, 0, 0] == pytest.approx(-6 * 0.8, rel=1e-12)
    mask = np.ones_like(C, dtype=bool)
    mask[0, 0, 0] = False
    assert np.abs(C[mask]).max() < 1e-12


def test_hamilton_c_tensor_is_symmetric_and_reducible():
    sp = build_space("electrodynamics", 2, 3)
    for u in sp.sample(make_rng(2), 5):
        assert reducibility_probe(sp.gfield, u)["reducible"]


def test_optics_is_not_reducible():
    sp = build_space("optics", 2, 3)
    for u in sp.sample(make_rng(3), 20):
        probe = reducibility_probe(sp.gfield, u)
        assert not probe["reducible"] and probe["defect"] > 1e-9


@pytest.mark.parametrize("kind", ["custom_expr", "cartan_quadratic", "electrodynamics"])
def test_mixed_c_tensor_lowers_index(kind):
    sp = build_space(kind, 2, 3)
    for u in sp.sample(make_rng(4), 3):
        g = sp.gfield.pair(u)
        mixed = c_mixed_tensor(sp.gfield, u).components
        lowered = np.einsum("is,sjh->ijh", g.gDown, c_up_tensor(sp.H, u).components)
        assert np.allclose(mixed, lowered, atol=1e-10)


def test_generalized_and_hamilton_c_agree():
    sp = build_space("custom_expr", 2, 3)
    u = sp.sample(make_rng(5), 1)[0]
    assert np.allclose(generalized_c_up(sp.gfield, u).components,
                       c_up_tensor(sp.H, u).components, atol=1e-12)


def test_optics_closed_form_inverse():
    sp = build_space("optics", 2, 3)
    for u in sp.sample(make_rng(6), 20):
        g = sp.gfield.pair(u)
        closed = sp.gfield.closed_form_down(u)
        assert np.abs(closed @ g.gUp - np.eye(2)).max() < 1e-12


def test_optics_vacuum_limit():
    # an enormous index makes 1 - 1/n^2 equal to one in floating point
    sp = build_space("optics", 2, 3, refractive="1e9")
    for u in sp.sample(make_rng(7), 5):
        gi = np.linalg.inv(sp.gamma.value(u.x))
        pch = gi @ u.p
        assert np.allclose(sp.gfield.pair(u).gUp, gi + np.outer(pch, pch), rtol=1e-14, atol=1e-14)


def test_degenerate_hamiltonian_raises():
    shape = BundleShape(2, 2)
    H = field_from_expr("p1^2 + x2*y1_1", shape)
    with pytest.raises(DegeneracyError, match="u ="):
        fundamental_tensor(H, JetPoint([0, 1], [[1, 1]], [1, 1]))


def test_asymmetric_matrix_rejected():
    with pytest.raises(DegeneracyError):
        regular_pair(np.array([[1.0, 0.5], [0.0, 1.0]]))


@given(st.integers(0, 10 ** 6))
def test_pair_is_mutually_inverse(seed):
    sp = build_space("custom_expr", 3, 2, hamiltonian="p1^2 + 2*p2^2 + p3^2 + 0.2*p1*p2*x3 + p3*y1_1")
    u = random_point(sp.shape, make_rng(seed))
    g = HamiltonMetric(sp.H).pair(u)
    assert np.abs(g.gUp @ g.gDown - np.eye(3)).max() < 1e-12
    assert g.signature == (3, 0)
