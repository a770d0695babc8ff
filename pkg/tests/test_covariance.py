import numpy as np
import pytest

from dualjet.catalog import build_space
from dualjet.covariance import (fundamental_tensor_covariance, liouville_covariance,
                                prolongation_in_chart, pullback_field, pullback_metric,
                                transform_jets)
from dualjet import taylor
from dualjet.hamilton import canonical_connection
from dualjet.jetpoint import Diffeomorphism, make_rng, transform_point
from dualjet.metric import HamiltonMetric


@pytest.fixture(scope="module")
def chart():
    return Diffeomorphism.random(2, make_rng(11))


def test_pulled_back_field_takes_same_values(chart):
    sp = build_space("custom_expr", 2, 3)
    Ht = pullback_field(sp.H, chart)
    for u in sp.sample(make_rng(0), 5):
        assert Ht.value(transform_point(u, chart)) == pytest.approx(sp.H.value(u), rel=1e-11)


def test_transform_jets_matches_point_map(chart):
    sp = build_space("flat", 2, 3)
    u = sp.sample(make_rng(1), 1)[0]
    J = transform_jets(taylor.Jet.seed(u.flat(), 2), sp.shape, chart)
    assert np.allclose(J.value, transform_point(u, chart).flat(), atol=1e-13)


def test_pulled_back_metric_is_tensorial(chart):
    sp = build_space("riemann_prolong", 2, 3)
    gt = pullback_metric(sp.gamma, chart)
    x = np.array([0.3, -0.2])
    Ji = np.linalg.inv(chart.jacobian(x))
    xt = np.asarray(chart.forward(x))
    assert np.allclose(gt.value(xt), Ji.T @ sp.gamma.value(x) @ Ji, atol=1e-12)


@pytest.mark.parametrize("kind", ["electrodynamics", "cartan_quadratic", "custom_expr"])
def test_fundamental_tensor_covariance(kind, chart):
    sp = build_space(kind, 2, 3)
    new = HamiltonMetric(pullback_field(sp.H, chart))
    for u in sp.sample(make_rng(2), 4):
        assert fundamental_tensor_covariance(sp.gfield, new, chart, u) < 1e-8


def test_liouville_covariance_of_prolongation(chart):
    sp = build_space("riemann_prolong", 2, 4)
    new = prolongation_in_chart(sp.gamma, sp.shape, chart)
    for u in sp.sample(make_rng(3), 4):
        assert liouville_covariance(sp.connection, new, chart, u) < 1e-8


def test_liouville_covariance_of_canonical_connection(chart):
    sp = build_space("electrodynamics", 2, 3)
    new = canonical_connection(pullback_field(sp.H, chart),
                               prolongation_in_chart(sp.gamma, sp.shape, chart))
    for u in sp.sample(make_rng(4), 3):
        assert liouville_covariance(sp.connection, new, chart, u) < 1e-8
