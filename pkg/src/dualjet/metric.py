"""Fundamental tensors, their inverses and the associated C-tensors."""

from dataclasses import dataclass

import numpy as np

from . import taylor
from .fields import split, FieldDomainError
from .jetpoint import DTensor, COND_MAX

REGULARITY_RATIO = 1e-10
SYMMETRY_TOL = 1e-12


class DegeneracyError(ValueError):
    pass


@dataclass(frozen=True)
class MetricPair:
    gUp: np.ndarray
    gDown: np.ndarray
    cond: float
    signature: tuple  # (positive, negative) eigenvalue counts


def _point_text(u):
    return np.round(u.flat(), 12).tolist()


def regular_pair(gUp, u=None, what="fundamental tensor"):
    """Validate and invert a symmetric matrix; raises DegeneracyError."""
    gUp = np.asarray(gUp, dtype=float)
    if np.abs(gUp - gUp.T).max() > SYMMETRY_TOL * max(1.0, np.abs(gUp).max()):
        raise DegeneracyError(f"{what} is not symmetric at u = {_point_text(u) if u else '?'}")
    sv = np.linalg.svd(gUp, compute_uv=False)
    cond = np.inf if sv[-1] == 0 else sv[0] / sv[-1]
    if sv[-1] < REGULARITY_RATIO * sv[0] or cond >= COND_MAX:
        where = _point_text(u) if u is not None else "?"
        raise DegeneracyError(f"{what} is degenerate (cond {cond:.3g}) at u = {where}")
    gDown = np.linalg.inv(gUp)
    ev = np.linalg.eigvalsh(0.5 * (gUp + gUp.T))
    sig = (int((ev > 0).sum()), int((ev < 0).sum()))
    return MetricPair(gUp, gDown, float(cond), sig)


class MetricField:
    """Base class: a field of contravariant fundamental tensors g^{ij}(u)."""

    shape = None
    reducible_by_construction = False

    def up_jet(self, u, degree):
        raise NotImplementedError

    def up_jet_at(self, U):
        """g^{ij} on a coordinate seed; degree follows the seed."""
        raise NotImplementedError

    def down_jet(self, u, degree):
        return taylor.inv(self.up_jet(u, degree))

    def down_jet_at(self, U):
        return taylor.inv(self.up_jet_at(U))

    def pair(self, u):
        return regular_pair(self.up_jet(u, 0).value, u)


class HamiltonMetric(MetricField):
    """g^{ij} = 1/2 d^2 H / dp_i dp_j."""

    reducible_by_construction = True

    def __init__(self, H):
        self.H = H
        self.shape = H.shape

    def up_jet(self, u, degree):
        Hj = self.H.jet(u, degree + 2)
        return self._from_h(Hj)

    def up_jet_at(self, U):
        return self._from_h(self.H.compose(U))

    def _from_h(self, Hj):
        pv = self.shape.p_vars
        return Hj.grad(pv).grad(pv) * 0.5


class GeneralizedMetric(MetricField):
    """g^{ij} given directly as a function of (x, ys, p).

    ``up_fn(x, ys, p)`` returns an n x n nested list / array / jet;
    ``down_fn`` optionally supplies a closed-form inverse.
    """

    def __init__(self, shape, up_fn, down_fn=None, name="generalized"):
        self.shape = shape
        self.up_fn = up_fn
        self.down_fn = down_fn
        self.name = name

    def _eval(self, fn, U, u=None):
        try:
            out = fn(*split(U, self.shape))
        except taylor.DomainError as exc:
            raise FieldDomainError(f"{self.name}: {exc}", u) from None
        out = taylor.array(out) if isinstance(out, (list, tuple)) else out
        if not taylor.is_jet(out) and taylor.is_jet(U):
            out = taylor.Jet.const(out, U.nv, U.d)
        return out

    def up_jet(self, u, degree):
        return self._eval(self.up_fn, taylor.Jet.seed(u.flat(), degree), u)

    def up_jet_at(self, U):
        return self._eval(self.up_fn, U)

    def down_jet(self, u, degree):
        if self.down_fn is None:
            return taylor.inv(self.up_jet(u, degree))
        return self._eval(self.down_fn, taylor.Jet.seed(u.flat(), degree), u)

    def down_jet_at(self, U):
        if self.down_fn is None:
            return taylor.inv(self.up_jet_at(U))
        return self._eval(self.down_fn, U)

    def closed_form_down(self, u):
        if self.down_fn is None:
            return None
        return np.asarray(taylor.value(self._eval(self.down_fn, u.flat(), u)), dtype=float)


def fundamental_tensor(H, u):
    """MetricPair of a Hamiltonian at u; raises DegeneracyError when singular."""
    pv = H.shape.p_vars
    hess = H.jet(u, 2).grad(pv).grad(pv).value
    return regular_pair(0.5 * hess, u)


def c_up_tensor(H, u):
    """C^{ijh} = -1/4 d^3 H / dp_i dp_j dp_h."""
    pv = H.shape.p_vars
    c = -0.25 * H.jet(u, 3).grad(pv).grad(pv).grad(pv).value
    return DTensor(c, (("up", "W"),) * 3)


def c_mixed_jet(gup, gdown, shape):
    """C_i^{jh} from jets of g^{ij} and g_{ij}; result loses one degree."""
    dg = gup.grad(shape.p_vars)  # [a, b, c] = d g^{ab} / dp_c
    # bracket[s, j, h] = d^j g^{sh} + d^h g^{js} - d^s g^{jh}
    br = dg.transpose(0, 2, 1) + dg.transpose(1, 0, 2) - dg.transpose(2, 0, 1)
    return taylor.einsum("is,sjh->ijh", gdown, br) * -0.5


def c_mixed_tensor(gfield, u):
    """C_i^{jh} = -1/2 g_{is}(d^j g^{sh} + d^h g^{js} - d^s g^{jh})."""
    gup = gfield.up_jet(u, 1)
    gdown = gfield.down_jet(u, 1)
    c = c_mixed_jet(gup, gdown, gfield.shape).value
    return DTensor(c, (("down", "W"), ("up", "W"), ("up", "W")))


def generalized_c_up(gfield, u):
    """C^{ijh} = -1/2 d^h g^{ij} for a generalized metric."""
    dg = gfield.up_jet(u, 1).grad(gfield.shape.p_vars).value
    return DTensor(-0.5 * dg, (("up", "W"),) * 3)


def reducibility_probe(gfield, u, tol=1e-9):
    """Total-symmetry defect of C^{ijh}; a Hamilton space needs it to vanish."""
    c = generalized_c_up(gfield, u).components
    scale = max(1.0, float(np.abs(c).max()))
    defect = float(np.abs(c - c.transpose(0, 2, 1)).max()) / scale
    return {"defect": defect, "reducible": defect <= tol}


def signature(gUp):
    ev = np.linalg.eigvalsh(0.5 * (gUp + gUp.T))
    return int((ev > 0).sum()), int((ev < 0).sum())
