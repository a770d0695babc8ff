"""Scalar fields on the dual bundle with an exact Taylor derivative oracle."""

import numpy as np

from . import taylor
from .expr import parse_expr, Expr
from .jetpoint import JetPoint, BundleShape, scale_fibers

MAX_DEPTH = 4
HOMOGENEITY_SCALES = (0.5, 2.0, 3.0)
HOMOGENEITY_RTOL = 1e-7


class FieldDomainError(ValueError):
    def __init__(self, message, point=None):
        self.point = point
        where = "" if point is None else f" at u = {np.round(point.flat(), 12).tolist()}"
        super().__init__(f"{message}{where}")


def split(U, shape):
    """Split a flat coordinate vector (array or jet) into (x, [y1..], p)."""
    n, k = shape.n, shape.k
    x = U[0:n]
    ys = [U[a * n:(a + 1) * n] for a in range(1, k)]
    p = U[k * n:(k + 1) * n]
    return x, ys, p


class ScalarField:
    """Smooth function of (x, y(1..k-1), p).

    ``fn(x, ys, p)`` receives length-n sequences of floats or jets and must
    use only arithmetic understood by :mod:`dualjet.taylor`.
    """

    def __init__(self, shape, fn, name="field", loss=0):
        self.shape = shape
        self.fn = fn
        self.name = name
        self.loss = loss  # derivative orders consumed inside fn (anchored fields)

    def __repr__(self):
        return f"ScalarField({self.name!r}, n={self.shape.n}, k={self.shape.k})"

    def _call(self, U, u=None):
        try:
            out = self.fn(*split(U, self.shape))
        except taylor.DomainError as exc:
            raise FieldDomainError(f"{self.name}: {exc}", u) from None
        return out

    def compose(self, U):
        """Evaluate on an arbitrary coordinate jet vector ``U``."""
        out = self._call(U)
        if not taylor.is_jet(out):
            out = taylor.Jet.const(out, U.nv, U.d)
        return out

    def value(self, u):
        if self.loss:
            return float(self.jet(u, 0).value)
        out = self._call(u.flat(), u)
        return float(np.asarray(taylor.value(out)))

    __call__ = value

    def jet(self, u, degree=2):
        if degree > MAX_DEPTH + 2:
            raise ValueError("derivative depth beyond the supported range")
        U = taylor.Jet.seed(u.flat(), degree + self.loss)
        out = self._call(U, u)
        if not taylor.is_jet(out):
            out = taylor.Jet.const(out, U.nv, degree)
        return out.truncate(degree)

    def partial(self, u, multi):
        """Mixed partial in the flat variables listed in ``multi``."""
        return float(self.jet(u, len(multi)).derivative(multi))

    def gradient(self, u):
        return self.jet(u, 1).grad().value

    def hessian(self, u):
        return self.jet(u, 2).grad().grad().value


def field_from_expr(e, shape, name=None):
    if isinstance(e, str):
        e = parse_expr(e)
    if not isinstance(e, Expr):
        raise TypeError("expected an Expr or expression text")
    e.check_shape(shape.n, shape.k)
    return ScalarField(shape, lambda x, ys, p: e.evaluate(x, ys, p), name=name or e.to_string())


# -- Liouville fields and Euler operators ---------------------------------------

def euler_operator(H, u, kind="combined"):
    """Lie derivative of H along y-Liouville, p-Liouville or combined fields.

    kind 'y' -> sum_a a y(a).dH/dy(a); 'p' -> p.dH/dp;
    'combined' -> sum_a a y(a).dH/dy(a) + k p.dH/dp.
    """
    shape = u.shape
    n, k = shape.n, shape.k
    g = H.gradient(u)
    ypart = sum(a * float(u.y[a - 1] @ g[a * n:(a + 1) * n]) for a in range(1, k))
    ppart = float(u.p @ g[k * n:])
    if kind == "y":
        return ypart
    if kind == "p":
        return ppart
    if kind == "combined":
        return ypart + k * ppart
    raise ValueError(f"unknown Euler operator kind {kind!r}")


def _scaled(u, a, kind):
    if kind == "combined":
        return scale_fibers(u, a)
    if kind == "y":
        return JetPoint(u.x, u.y * (a ** np.arange(1, u.k))[:, None], u.p)
    if kind == "p":
        return JetPoint(u.x, u.y, u.p * a)
    raise ValueError(f"unknown Euler operator kind {kind!r}")


def homogeneity_degree(H, u, kind="combined"):
    """Per-point homogeneity degree, or 'inhomogeneous' / 'indeterminate'."""
    h0 = H.value(u)
    if h0 == 0:
        return "indeterminate"
    r = euler_operator(H, u, kind) / h0
    for a in HOMOGENEITY_SCALES:
        target = a ** r * h0
        if abs(H.value(_scaled(u, a, kind)) - target) >= HOMOGENEITY_RTOL * abs(target):
            return "inhomogeneous"
    return r


def liouville(H, u, alpha):
    """Main invariant I^alpha = Gamma^alpha H at u (1 <= alpha <= k-1)."""
    n, k = u.n, u.k
    if not 1 <= alpha <= k - 1:
        raise ValueError("alpha out of range")
    g = H.gradient(u)
    total = 0.0
    for beta in range(1, alpha + 1):
        b = k - alpha + beta - 1
        total += beta * float(u.y[beta - 1] @ g[b * n:(b + 1) * n])
    return total
