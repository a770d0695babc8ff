import numpy as np
import pytest

from dualjet.catalog import DEFAULTS, KINDS, SpaceError, Y1_FLOOR, build_space
from dualjet.expr import ExprError
from dualjet.jetpoint import JetPoint, make_rng


@pytest.mark.parametrize("kind", [k for k in KINDS if k != "custom_expr"])
@pytest.mark.parametrize("n,k", [(1, 2), (2, 3), (3, 4)])
def test_every_kind_builds_and_samples(kind, n, k):
    sp = build_space(kind, n, k)
    assert sp.shape.n == n and sp.shape.k == k
    for u in sp.sample(make_rng(0), 3):
        sp.admissible(u)
        pair = sp.gfield.pair(u)
        if sp.positive_definite:
            assert pair.signature == (n, 0)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_custom_default_is_planar(k):
    sp = build_space("custom_expr", 2, k)
    assert len(sp.sample(make_rng(0), 3)) == 3
    with pytest.raises(ExprError, match="exceeds n = 1"):
        build_space("custom_expr", 1, k)
    # no p3 term: the momentum Hessian is singular everywhere
    with pytest.raises(SpaceError):
        build_space("custom_expr", 3, k).sample(make_rng(0), 1, max_tries=3)


def test_sampling_is_reproducible():
    a = build_space("optics").sample(make_rng(5), 4)
    b = build_space("optics").sample(make_rng(5), 4)
    assert all(np.array_equal(u.flat(), v.flat()) for u, v in zip(a, b))


def test_unknown_kind_and_parameter():
    with pytest.raises(SpaceError, match="unknown space kind"):
        build_space("bogus")
    with pytest.raises(SpaceError, match="unknown parameters"):
        build_space("flat", color="red")


def test_parameter_validation():
    with pytest.raises(SpaceError):
        build_space("electrodynamics", m=-1.0)
    with pytest.raises(SpaceError):
        build_space("cartan_quadratic", c_coef=-2.0)
    with pytest.raises(SpaceError):
        build_space("electrodynamics", gamma="1, x2; 0, 1")
    with pytest.raises(ExprError):
        build_space("custom_expr", hamiltonian="p1^2 + q")


def test_null_section_is_rejected():
    sp = build_space("flat")
    with pytest.raises(SpaceError):
        sp.admissible(JetPoint([1, 2], [[0, 0], [0, 0]], [0, 0]))


def test_cartan_keeps_away_from_vanishing_velocity():
    sp = build_space("cartan_quadratic")
    with pytest.raises(SpaceError):
        sp.admissible(JetPoint([0, 0], [[0.5 * Y1_FLOOR, 0], [1, 1]], [1, 1]))
    for u in sp.sample(make_rng(1), 20):
        assert np.linalg.norm(u.y[0]) > Y1_FLOOR


def test_optics_refractive_domain():
    sp = build_space("optics", refractive="0.5 + 0*p1")
    with pytest.raises(SpaceError, match="could not sample"):
        sp.sample(make_rng(2), 1, max_tries=5)


def test_custom_with_anchor():
    sp = build_space("custom_expr", hamiltonian="p1^2 + p2^2", gamma="default")
    assert sp.anchor is not sp.connection
    assert sp.anchor.gamma is not None


def test_defaults_cover_every_kind():
    assert set(DEFAULTS) == set(KINDS)
