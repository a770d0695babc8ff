"""Lifted metrics and almost contact tensors on the dual bundle.

Every object is a square matrix of size (k+1)n in the adapted frame of a
nonlinear connection at one point.  Columns hold images of frame vectors,
so ``F[:, A]`` are the adapted components of F(e_A), and bilinear forms
are stored as Gram matrices ``G[A, B] = G(e_A, e_B)``.
"""

from dataclasses import dataclass

import numpy as np

from .jetpoint import NULL_TOL
from .nlinear import full_covariant, metric_down_field, metric_up_field

RANK_RTOL = 1e-8


class StructureError(ValueError):
    """Raised where a structure tensor is undefined."""


def _blk(shape, b):
    n = shape.n
    return slice(b * n, (b + 1) * n)


@dataclass
class FrameBlockMetric:
    shape: object
    G: np.ndarray
    gUp: np.ndarray
    gDown: np.ndarray
    scales: tuple = ()

    def block(self, a, b):
        return self.G[_blk(self.shape, a), _blk(self.shape, b)]

    def off_block_max(self):
        """Largest entry outside the diagonal blocks (zero by construction)."""
        mask = np.ones_like(self.G, dtype=bool)
        for b in range(self.shape.k + 1):
            mask[_blk(self.shape, b), _blk(self.shape, b)] = False
        return float(np.abs(self.G[mask]).max()) if mask.any() else 0.0


@dataclass
class ContactTensor:
    shape: object
    F: np.ndarray

    def cubic_residual(self):
        """max |F^3 + F|."""
        return float(np.abs(self.F @ self.F @ self.F + self.F).max())

    def rank(self):
        return matrix_rank(self.F)


def matrix_rank(A, rtol=RANK_RTOL):
    """Rank from singular values above rtol * sigma_max."""
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int((s > rtol * s[0]).sum())


def n_lift(gfield, conn, u, homogeneous=False):
    """Block metric g_ij on H and each V(a), g^ij on W, in the adapted frame of ``conn``.

    With ``homogeneous=True`` the V(a) blocks are divided by
    K_a^2 = g_ij z(a)^i z(a)^j and the W block by K_0^2 = g^ij p_i p_j, which
    gives a lift of fibre degree 0; points where an invariant vanishes are
    refused.
    """
    shape = gfield.shape
    k = shape.k
    pair = gfield.pair(u)
    G = np.zeros((shape.dim, shape.dim))
    scales = [1.0] * (k + 1)
    if homogeneous:
        loc = conn.at(u)
        zs = loc.liouville(list(u.y))
        for a in range(1, k):
            scales[a] = float(zs[a - 1] @ pair.gDown @ zs[a - 1])
        scales[k] = float(u.p @ pair.gUp @ u.p)
        if min(abs(s) for s in scales[1:]) <= NULL_TOL:
            raise StructureError("a Liouville invariant vanishes at this point")
    for b in range(k):
        G[_blk(shape, b), _blk(shape, b)] = pair.gDown / scales[b]
    G[_blk(shape, k), _blk(shape, k)] = pair.gUp / scales[k]
    return FrameBlockMetric(shape, G, pair.gUp, pair.gDown, tuple(scales))


def contact_structure(gfield, conn, u):
    """F(delta/delta x^i) = -g_ij delta/delta p_j, F(delta/delta p_i) = g^ij delta/delta x^j, 0 on V."""
    shape = gfield.shape
    pair = gfield.pair(u)
    F = np.zeros((shape.dim, shape.dim))
    X, P = _blk(shape, 0), _blk(shape, shape.k)
    F[P, X] = -pair.gDown
    F[X, P] = pair.gUp
    return ContactTensor(shape, F)


def metric_free_contact(shape):
    """F(delta/delta x^i) = -d/dy(k-1)^i, F(d/dy(k-1)^i) = delta/delta x^i, 0 elsewhere."""
    F = np.zeros((shape.dim, shape.dim))
    X, Y = _blk(shape, 0), _blk(shape, shape.k - 1)
    F[Y, X] = -np.eye(shape.n)
    F[X, Y] = np.eye(shape.n)
    return ContactTensor(shape, F)


def skew_residual(G, F):
    """max |G(FX, Y) + G(X, FY)| over frame vectors, i.e. of F^T G + G F."""
    return float(np.abs(F.T @ G + G @ F).max())


def associated_two_form(gfield, conn, u, natural=False):
    """theta(X, Y) = G(FX, Y) as a Gram matrix in the adapted frame.

    With ``natural=True`` the form is returned in natural coordinates,
    theta_nat = Theta^T theta Theta with Theta the adapted coframe.
    """
    G = n_lift(gfield, conn, u).G
    F = contact_structure(gfield, conn, u).F
    theta = F.T @ G
    if not natural:
        return theta
    Th = np.asarray(conn.at(u).coframe(), dtype=float)
    return Th.T @ theta @ Th


def dp_wedge_dx(shape):
    """Gram matrix of dp_i ^ dx^i in natural coordinates (same pattern as delta p ^ dx adapted)."""
    w = np.zeros((shape.dim, shape.dim))
    X, P = _blk(shape, 0), _blk(shape, shape.k)
    w[X, P] = -np.eye(shape.n)
    w[P, X] = np.eye(shape.n)
    return w


def kernel_image(F, shape, rtol=RANK_RTOL):
    """(dim Ker, dim Im, residual of Ker against V, residual of Im against H + W).

    The residuals are the largest components of the SVD kernel basis outside
    the y blocks and of the image basis inside them.
    """
    U, s, Vt = np.linalg.svd(F)
    r = int((s > rtol * s[0]).sum()) if s.size and s[0] > 0 else 0
    ker = Vt[r:].T
    img = U[:, :r]
    ymask = np.zeros(shape.dim, dtype=bool)
    ymask[shape.n:shape.k * shape.n] = True
    ker_res = float(np.abs(ker[~ymask]).max()) if ker.size else 0.0
    img_res = float(np.abs(img[ymask]).max()) if img.size else 0.0
    return ker.shape[1], r, ker_res, img_res


def lift_covariant_residuals(D, u):
    """Covariant derivatives of the lift's blocks (g_ij and g^ij) in every adapted direction."""
    down = full_covariant(D, metric_down_field(D.gfield), u)
    up = full_covariant(D, metric_up_field(D.gfield), u)
    pair = D.gfield.pair(u)
    return {"g_ij": float(np.abs(down).max()) / max(1.0, float(np.abs(pair.gDown).max())),
            "g^ij": float(np.abs(up).max()) / max(1.0, float(np.abs(pair.gUp).max()))}
