"""The canonical metrical N-linear connection, covariant derivatives and curvature.

Connection coefficients are gathered in one array ``Gamma[i, m, A]`` over all
adapted directions A of the dual bundle: H^i_{mh} for A = x^h,
C(a)^i_{mh} for A = y(a)^h and C_m^{ih} for A = p_h.  With this layout
the covariant derivative of a d-tensor in direction A is

    e_A T + sum_up Gamma^i_{sA} T^..s.. - sum_down Gamma^s_{jA} T_..s..

and the curvature of the connection, as an endomorphism, is

    K^i_m(A, B) = e_A Gamma^i_{mB} - e_B Gamma^i_{mA}
                  + Gamma^s_{mB} Gamma^i_{sA} - Gamma^s_{mA} Gamma^i_{sB}
                  - c^C_{AB} Gamma^i_{mC},

where [e_A, e_B] = c^C_{AB} e_C are the frame brackets.
"""

from dataclasses import dataclass

import numpy as np

from . import taylor
from .jetpoint import DTensor
from .metric import HamiltonMetric, c_mixed_jet
from .nonlinear import frame_brackets


def _christoffel_like(gup, D):
    """1/2 g^{is}(D[s,h,j] + D[j,s,h] - D[j,h,s]) laid out as [i, j, h]."""
    low = D.transpose(0, 2, 1) + D.transpose(1, 0, 2) - D.transpose(2, 0, 1)
    return taylor.einsum("is,sjh->ijh", gup, low) * 0.5


def _metric_loss(gfield):
    if isinstance(gfield, HamiltonMetric):
        return 2 + getattr(gfield.H, "loss", 0)
    return getattr(gfield, "loss", 0)


@dataclass
class LocalNLinear:
    shape: object
    gup: object
    gdown: object
    conn: object        # LocalConnection
    H: object           # [i, j, h]
    Cv: list            # per alpha, [i, j, h]
    Cw: object          # [i, j, h] = C_i^{jh}
    Gamma: object       # [i, m, A]

    def values(self):
        v = lambda a: np.array(taylor.value(a), dtype=float)
        return LocalNLinear(self.shape, v(self.gup), v(self.gdown), self.conn.values(),
                            v(self.H), [v(c) for c in self.Cv], v(self.Cw), v(self.Gamma))


class NLinearConnection:
    """Canonical metrical N-linear connection of a metric field and a nonlinear connection."""

    def __init__(self, gfield, conn):
        if gfield.shape != conn.shape:
            raise ValueError("metric and connection live on different bundles")
        self.gfield = gfield
        self.conn = conn
        self.shape = gfield.shape
        self.gloss = _metric_loss(gfield)

    def seed_degree(self, degree):
        """Seed degree giving coefficient jets of the requested degree."""
        return max(degree + 1 + self.gloss, degree + self.conn.loss)

    def local_at(self, U):
        shape = self.shape
        n, k = shape.n, shape.k
        gup = self.gfield.up_jet_at(U)
        gdown = self.gfield.down_jet_at(U)
        loc = self.conn.local_at(U)
        d = min(gup.d - 1, loc.degree)
        dgd = gdown.grad().truncate(d)
        delta = loc.truncate(d).adapted(dgd)  # [a, b, A] = e_A g_ab
        gupd = gup.truncate(d)
        blk = lambda b: delta[:, :, b * n:(b + 1) * n]
        H = _christoffel_like(gupd, blk(0))
        Cv = [_christoffel_like(gupd, blk(a)) for a in range(1, k)]
        Cw = c_mixed_jet(gup, gdown.truncate(gup.d), shape).truncate(d)
        Gamma = taylor.Jet(np.concatenate([H.c] + [c.c for c in Cv] + [Cw.c.transpose(1, 0, 2, 3)],
                                          axis=2), H.nv, d)
        return LocalNLinear(shape, gupd, gdown.truncate(d), loc.truncate(d), H, Cv, Cw, Gamma)

    def local(self, u, degree=0):
        U = taylor.Jet.seed(u.flat(), self.seed_degree(degree))
        loc = self.local_at(U)
        tr = lambda a: a.truncate(degree)
        return LocalNLinear(self.shape, tr(loc.gup), tr(loc.gdown), loc.conn.truncate(degree),
                            tr(loc.H), [tr(c) for c in loc.Cv], tr(loc.Cw), tr(loc.Gamma))

    def at(self, u):
        return self.local(u, 0).values()


def canonical_metrical(gfield, conn, u=None):
    """Canonical metrical connection; numeric coefficients if ``u`` is given."""
    D = NLinearConnection(gfield, conn)
    return D if u is None else D.at(u)


# -- d-tensor fields and covariant derivatives -----------------------------------

class DTensorField:
    """d-tensor field: ``fn(U, loc)`` returns component jets on seed ``U``.

    ``loc`` is the nonlinear connection evaluated on the same seed, for
    fields such as the Liouville d-vectors that depend on it.  ``loss(D)``
    reports the derivative orders the field consumes.
    """

    def __init__(self, slots, fn, loss=0, name="field", uses_connection=False):
        self.slots = tuple(slots)
        self.fn = fn
        self._loss = loss
        self.name = name
        self.uses_connection = uses_connection

    def loss(self, D):
        base = self._loss(D) if callable(self._loss) else self._loss
        return base

    def jets(self, D, u, degree):
        U = taylor.Jet.seed(u.flat(), degree + self.loss(D))
        loc = D.conn.local_at(U) if self.uses_connection else None
        out = self.fn(U, loc)
        return taylor.asjet(out, U).truncate(degree)


def metric_up_field(gfield):
    return DTensorField((("up", "W"), ("up", "W")), lambda U, loc: gfield.up_jet_at(U),
                        loss=_metric_loss(gfield), name="g^ij")


def metric_down_field(gfield):
    return DTensorField((("down", "H"), ("down", "H")), lambda U, loc: gfield.down_jet_at(U),
                        loss=_metric_loss(gfield), name="g_ij")


def p_covector_field(shape):
    n, k = shape.n, shape.k
    return DTensorField((("down", "W"),), lambda U, loc: U[k * n:(k + 1) * n], name="p_i")


def kronecker_field(shape):
    n = shape.n
    return DTensorField((("up", "H"), ("down", "H")), lambda U, loc: taylor.Jet.const(np.eye(n), U.nv, U.d),
                        name="delta")


def liouville_field(shape, alpha):
    n = shape.n

    def fn(U, loc):
        ys = [U[a * n:(a + 1) * n] for a in range(1, shape.k)]
        return loc.liouville(ys)[alpha - 1]

    return DTensorField((("up", f"V{alpha}"),), fn, loss=lambda D: D.conn.loss_dual,
                        name=f"z({alpha})", uses_connection=True)


def covariant_derivative(D, field, direction, u, alpha=None):
    """Covariant derivative of a d-tensor field at u.

    ``direction`` is 'H', 'V' (with ``alpha``) or 'W'; the new slot is
    appended last (down for H and V, up for W).
    """
    shape = D.shape
    n, k = shape.n, shape.k
    full = full_covariant(D, field, u)
    if direction == "H":
        comp, slot = full[..., 0:n], ("down", "H")
    elif direction == "V":
        if alpha is None or not 1 <= alpha <= k - 1:
            raise ValueError("V direction needs 1 <= alpha <= k-1")
        comp, slot = full[..., alpha * n:(alpha + 1) * n], ("down", f"V{alpha}")
    elif direction == "W":
        comp, slot = full[..., k * n:(k + 1) * n], ("up", "W")
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return DTensor(comp, field.slots + (slot,))


def full_covariant(D, field, u):
    """Numeric covariant derivative in every adapted direction: [..., A]."""
    loc = D.at(u)
    T = field.jets(D, u, 1)
    if T.ndim != len(field.slots):
        raise ValueError(f"field {field.name} has rank {T.ndim} but {len(field.slots)} slots")
    E = loc.conn.frame()
    dT = T.grad().value  # [..., c]
    out = np.einsum("AC,...C->...A", E, dT)
    Tv = T.value
    G = loc.Gamma
    r = len(field.slots)
    letters = "abcdefg"[:r]
    for pos, (var, _) in enumerate(field.slots):
        src = letters[:pos] + "s" + letters[pos + 1:]
        if var == "up":
            out = out + np.einsum(f"{letters[pos]}sA,{src}->{letters}A", G, Tv)
        else:
            out = out - np.einsum(f"s{letters[pos]}A,{src}->{letters}A", G, Tv)
    return out


def metricity_residuals(D, u):
    """Max |g^{ij}_{|A}| per direction block (H, V1.., W)."""
    full = full_covariant(D, metric_up_field(D.gfield), u)
    n, k = D.shape.n, D.shape.k
    scale = max(1.0, float(np.abs(D.gfield.up_jet(u, 0).value).max()))
    return {name: float(np.abs(full[..., b * n:(b + 1) * n]).max()) / scale
            for b, name in enumerate(D.shape.block_names())}


def deflection_tensors(D, u):
    """Deflection tensors of the Liouville d-vectors and of p, from their definitions.

    Also returns the closed forms for the p-deflections, where the x-part
    keeps the N_ji term that delta p_i / delta x^j contributes.
    """
    shape = D.shape
    n, k = shape.n, shape.k
    loc = D.at(u)
    out = {}
    for a in range(1, k):
        full = full_covariant(D, liouville_field(shape, a), u)
        out[f"D({a})"] = full[:, 0:n]
        for b in range(1, k):
            out[f"D({a}{b})"] = full[:, b * n:(b + 1) * n]
        out[f"D({a})^"] = full[:, k * n:]
    fullp = full_covariant(D, p_covector_field(shape), u)
    out["Delta"] = fullp[:, 0:n]
    for b in range(1, k):
        out[f"delta({b})"] = fullp[:, b * n:(b + 1) * n]
    out["delta_w"] = fullp[:, k * n:]
    p = u.p
    closed = {"Delta": loc.conn.Nlow.T - np.einsum("h,hij->ij", p, loc.H),
              "delta_w": np.eye(n) - np.einsum("h,ihj->ij", p, loc.Cw)}
    for b in range(1, k):
        closed[f"delta({b})"] = -np.einsum("h,hij->ij", p, loc.Cv[b - 1])
    return out, closed


# -- curvature ---------------------------------------------------------------------

@dataclass
class CurvaturePack:
    shape: object
    K: np.ndarray  # [i, m, A, B]
    R: np.ndarray
    P: list
    Pw: np.ndarray
    S: dict
    Sw: list
    Sfull: np.ndarray


def curvature_endomorphism(D, u):
    """K[i, m, A, B] and the frame brackets at u."""
    loc = D.local(u, 1)
    G = loc.Gamma  # degree 1
    E = loc.conn.frame()  # degree 1
    c = frame_brackets(loc.conn).value  # [A, B, C]
    dG = G.grad().value  # [i, m, B, c]
    Ev = E.value
    Gv = G.value
    eG = np.einsum("Ac,imBc->imAB", Ev, dG)
    K = (eG - eG.transpose(0, 1, 3, 2)
         + np.einsum("smB,isA->imAB", Gv, Gv)
         - np.einsum("smA,isB->imAB", Gv, Gv)
         - np.einsum("ABC,imC->imAB", c, Gv))
    return K, c, loc


def curvature(D, u):
    """Curvature blocks in the index placement R_m^i_{jh} etc. (arrays [m, i, j, h])."""
    shape = D.shape
    n, k = shape.n, shape.k
    K, _, _ = curvature_endomorphism(D, u)
    blk = lambda b: slice(b * n, (b + 1) * n)

    def block(bA, bB):
        # R_m^i_{jh} = K^i_m(A = h, B = j)
        return K[:, :, blk(bA), blk(bB)].transpose(1, 0, 3, 2)

    R = block(0, 0)
    P = [block(a, 0) for a in range(1, k)]
    Pw = block(k, 0)
    S = {(a, b): block(b, a) for a in range(1, k) for b in range(1, k)}
    Sw = [block(k, a) for a in range(1, k)]
    Sfull = block(k, k)
    return CurvaturePack(shape, K, R, P, Pw, S, Sw, Sfull)


def metric_antisymmetry_residual(D, u, K=None):
    """max |g^{sj} K^i_s + g^{is} K^j_s| over all direction pairs."""
    if K is None:
        K, _, _ = curvature_endomorphism(D, u)
    g = D.gfield.up_jet(u, 0).value
    t = np.einsum("sj,isAB->ijAB", g, K)
    res = t + t.transpose(1, 0, 2, 3)
    scale = max(1.0, float(np.abs(t).max()))
    return float(np.abs(res).max()) / scale


def torsion_residuals(D, u):
    loc = D.at(u)
    out = {"T": float(np.abs(loc.H - loc.H.transpose(0, 2, 1)).max()),
           "Sw": float(np.abs(loc.Cw - loc.Cw.transpose(0, 2, 1)).max())}
    for a, c in enumerate(loc.Cv, start=1):
        out[f"S({a})"] = float(np.abs(c - c.transpose(0, 2, 1)).max())
    return out
