import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dualjet.catalog import build_space
from dualjet.jetpoint import BundleShape, JetPoint, make_rng
from dualjet.nlinear import NLinearConnection
from dualjet.structures import (StructureError, associated_two_form, contact_structure,
                                dp_wedge_dx, kernel_image, lift_covariant_residuals, matrix_rank,
                                metric_free_contact, n_lift, skew_residual)

KINDS = ["electrodynamics", "cartan_quadratic", "optics", "custom_expr"]


@pytest.mark.parametrize("kind", KINDS)
def test_contact_tensor_algebra(kind):
    sp = build_space(kind, 2, 3)
    for u in sp.sample(make_rng(0), 3):
        F = contact_structure(sp.gfield, sp.connection, u)
        assert F.cubic_residual() < 1e-10
        assert F.rank() == 4
        dk, r, kr, ir = kernel_image(F.F, sp.shape)
        assert (dk, r) == (4, 4) and kr < 1e-10 and ir < 1e-10


@pytest.mark.parametrize("kind", KINDS)
def test_contact_tensor_is_skew_for_the_lift(kind):
    sp = build_space(kind, 2, 3)
    for u in sp.sample(make_rng(1), 3):
        lift = n_lift(sp.gfield, sp.connection, u)
        F = contact_structure(sp.gfield, sp.connection, u).F
        assert lift.off_block_max() == 0.0
        assert skew_residual(lift.G, F) < 1e-10 * max(1.0, np.abs(lift.G).max())


@pytest.mark.parametrize("n,k", [(1, 2), (2, 3), (3, 4)])
def test_metric_free_contact(n, k):
    shape = BundleShape(n, k)
    F = metric_free_contact(shape)
    assert F.cubic_residual() == 0.0
    assert F.rank() == 2 * n


@pytest.mark.parametrize("kind", ["flat", "riemann_prolong", "electrodynamics"])
def test_two_form_is_canonical_where_n_is_symmetric(kind):
    sp = build_space(kind, 2, 3)
    w = dp_wedge_dx(sp.shape)
    used = 0
    for u in sp.sample(make_rng(2), 5):
        N = np.asarray(sp.connection.at(u).Nlow)
        if np.abs(N - N.T).max() > 1e-12 * max(1.0, np.abs(N).max()):
            continue
        used += 1
        assert np.abs(associated_two_form(sp.gfield, sp.connection, u, natural=True) - w).max() < 1e-10
    if kind != "electrodynamics":
        assert used == 5


def test_homogeneous_lift_scales():
    sp = build_space("cartan_quadratic", 2, 3)
    u = sp.sample(make_rng(3), 1)[0]
    plain = n_lift(sp.gfield, sp.connection, u)
    hom = n_lift(sp.gfield, sp.connection, u, homogeneous=True)
    zs = sp.connection.at(u).liouville(list(u.y))
    assert hom.scales[1] == pytest.approx(float(zs[0] @ plain.gDown @ zs[0]))
    assert hom.scales[3] == pytest.approx(float(u.p @ plain.gUp @ u.p))
    assert np.allclose(hom.block(3, 3) * hom.scales[3], plain.block(3, 3))


def test_homogeneous_lift_refuses_vanishing_invariant():
    sp = build_space("flat", 2, 3)
    u = JetPoint([0.1, 0.2], [[1.0, 0.0], [0.0, 0.0]], [1.0, 1.0])
    with pytest.raises(StructureError):
        n_lift(sp.gfield, sp.connection, u, homogeneous=True)


@pytest.mark.parametrize("kind", ["electrodynamics", "optics"])
def test_lift_blocks_are_parallel(kind):
    sp = build_space(kind, 2, 3)
    D = NLinearConnection(sp.gfield, sp.connection)
    u = sp.sample(make_rng(4), 1)[0]
    assert max(lift_covariant_residuals(D, u).values()) < 1e-9


@settings(max_examples=20)
@given(st.integers(1, 6), st.integers(0, 10 ** 6))
def test_rank_of_random_products(r, seed):
    rng = make_rng(seed)
    A = rng.normal(size=(8, r)) @ rng.normal(size=(r, 8))
    assert matrix_rank(A) == r
