"""Fields and connections carried to another chart, for covariance checks.

A chart change phi on M induces one on the dual bundle.  Pulling a field
back evaluates it at the preimage point, with the preimage computed by the
induced map of phi^-1 on jets.  Derivatives inside that map are taken with
respect to extra seed variables added on top of the incoming jets, so the
result stays exact for any incoming jet, not only identity seeds.
"""

import numpy as np

from . import taylor
from .fields import ScalarField
from .jetpoint import DTensor, transform_dtensor, transform_point, transform_seed
from .nonlinear import ProlongationConnection, RiemannMetric


def _with_seeds(U, m, extra):
    """U re-expressed with ``m`` trailing identity seeds, ``extra`` degrees higher."""
    d = U.d + extra
    Ub = taylor.extend(U, U.nv + m, d)
    c = Ub.c.copy()
    c[:m] += taylor.extra_seed(U.nv, m, d).c
    return taylor.Jet(c, U.nv + m, d)


def transform_jets(U, shape, phi):
    """Image under the chart change of phi of an arbitrary coordinate jet vector U."""
    k = shape.k
    if not taylor.is_jet(U):
        U = taylor.Jet.seed(np.asarray(U, dtype=float), 0)
    Ub = _with_seeds(U, shape.dim, k - 1)
    xt, yts, pt = transform_seed(Ub, shape, phi, offset=U.nv)
    parts = [xt] + yts + [pt]
    d = U.d
    parts = [taylor.restrict(p.truncate(d), U.nv) for p in parts]
    return taylor.Jet(np.concatenate([p.c for p in parts], axis=0), U.nv, d)


def _flat(x, ys, p):
    return taylor.stack([x, *ys, p]).reshape(-1)


def pullback_field(H, phi):
    """H expressed in the chart reached by phi: H~(u~) = H(u) for u~ the image of u."""
    shape = H.shape
    inv = phi.inverted()

    def fn(x, ys, p):
        U = _flat(x, ys, p)
        return H.compose(transform_jets(U, shape, inv) if taylor.is_jet(U)
                         else transform_jets(taylor.Jet.seed(U, 0), shape, inv))

    return ScalarField(shape, fn, name=f"{H.name} in {phi.name} chart", loss=getattr(H, "loss", 0))


def pullback_metric(gamma, phi):
    """gamma~_ij(x~) = (dx/dx~)^a_i gamma_ab(x) (dx/dx~)^b_j with x = phi^-1(x~)."""
    n = gamma.n

    def fn(X):
        if not taylor.is_jet(X):
            X = taylor.Jet.seed(np.asarray(X, dtype=float), 0)
        Xb = _with_seeds(X, n, 1)
        x = phi.inverse(Xb)
        Jinv = taylor.restrict(x.grad(range(X.nv, X.nv + n)), X.nv)  # [a, i] = dx^a/dx~^i
        g = taylor.asjet(gamma.jet_at(taylor.restrict(x.truncate(X.d), X.nv)), Jinv)
        return taylor.einsum("ai,ab,bj->ij", Jinv, g, Jinv)

    return RiemannMetric(n, fn, name=f"{gamma.name} in {phi.name} chart")


def fundamental_tensor_covariance(gfield_old, gfield_new, phi, u):
    """max |g~(u~) - J g(u) J^T| relative to max(1, |g~|)."""
    ut = transform_point(u, phi)
    g_old = DTensor(gfield_old.pair(u).gUp, (("up", "h"), ("up", "h")))
    expected = transform_dtensor(g_old, phi, u).components
    got = gfield_new.pair(ut).gUp
    return float(np.abs(got - expected).max()) / max(1.0, float(np.abs(got).max()))


def liouville_covariance(conn_old, conn_new, phi, u):
    """max over alpha of |z~(alpha)(u~) - J z(alpha)(u)| relative to max(1, |z~|)."""
    ut = transform_point(u, phi)
    z_old = conn_old.at(u).liouville(list(u.y))
    z_new = conn_new.at(ut).liouville(list(ut.y))
    worst = 0.0
    for a, (zo, zn) in enumerate(zip(z_old, z_new)):
        exp = transform_dtensor(DTensor(np.asarray(zo), (("up", "h"),)), phi, u).components
        zn = np.asarray(zn)
        worst = max(worst, float(np.abs(zn - exp).max()) / max(1.0, float(np.abs(zn).max())))
    return worst


def prolongation_in_chart(gamma, shape, phi):
    """Prolongation connection of gamma written in the chart reached by phi."""
    return ProlongationConnection(pullback_metric(gamma, phi), shape)
