"""Canonical dual semispray and nonlinear connection of a Hamiltonian.

An anchor connection on the jet factor (dual coefficients depending on
x and the y's only) turns the p-gradient of H into a top-order velocity:

    xi*^i = 1/2 dH/dp_i - (1/k) sum_a (k - a) M0(a)^i_m y(k-a)^m,

and the momentum component of the semispray is

    eta_i = p_m dz^m/dy(k-1)^i - 1/2 dH/dy(k-1)^i,

with k z^m = k xi^m + sum_a (k - a) M0(a)^m_l y(k-a)^l.  This is the image of
the canonical semispray of the dual Lagrangian under the Legendre map.
"""

from . import taylor
from .fields import split
from .nonlinear import DualSemispray, SemisprayConnection, zero_connection


def anchor_correction(anchor_M, ys, k):
    """w^i = (1/k) sum_a (k - a) M0(a)^i_m y(k-a)^m."""
    acc = None
    for a in range(1, k):
        term = taylor.einsum("ij,j->i", anchor_M[a - 1], ys[k - a - 1]) * float(k - a)
        acc = term if acc is None else acc + term
    return acc * (1.0 / k)


class CanonicalDualSemispray(DualSemispray):
    """Dual semispray built from H and an anchor connection."""

    def __init__(self, H, anchor=None):
        self.H = H
        self.shape = H.shape
        self.anchor = anchor if anchor is not None else zero_connection(H.shape)
        self.name = f"canonical({H.name})"
        # the anchor is evaluated through dual_full, so it costs no orders on seeds
        self.loss = 1 + getattr(H, "loss", 0)

    def jets_at(self, U):
        shape = self.shape
        n, k = shape.n, shape.k
        _, ys, p = split(U, shape)
        dH = self.H.compose(U).grad()
        M0 = [taylor.asjet(m, U) for m in self.anchor.dual_full(U)]
        w = anchor_correction(M0, ys, k)
        xi = dH[k * n:(k + 1) * n] * 0.5 - w
        dw = w.grad(shape.y_vars(k - 1))  # [m, i]
        eta = taylor.einsum("m,mi->i", p, dw) - dH[(k - 1) * n:k * n] * 0.5
        return xi, eta


def canonical_connection(H, anchor=None):
    """Nonlinear connection induced by the canonical dual semispray of H."""
    return SemisprayConnection(CanonicalDualSemispray(H, anchor))
