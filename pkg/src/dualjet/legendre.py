"""Legendre duality between Lagrangians on the k-jet bundle and Hamiltonians.

Both directions invert a fibre gradient.  For a Lagrangian the fibre
variable is y(k) and p = 1/2 dL/dy(k); for a Hamiltonian with anchor
connection it is p and y(k) + w = 1/2 dH/dp, w the anchor correction.
``fiber_inverse`` solves either equation numerically and, on Taylor jets,
refines the solution by chord steps so the inverse carries derivatives.
"""

from collections import OrderedDict

import numpy as np

from . import taylor
from .fields import ScalarField, split
from .hamilton import anchor_correction
from .jetpoint import BundleShape, JetPoint
from .metric import regular_pair, DegeneracyError
from .nonlinear import zero_connection

NEWTON_TOL = 1e-11
NEWTON_ITERS = 50


class LegendreError(ValueError):
    def __init__(self, message, trace=()):
        self.trace = list(trace)
        super().__init__(f"{message}; residual trace {[float(f'{r:.3e}') for r in self.trace]}")


class LagrangeSpace:
    """Lagrangian L(x, y(1), ..., y(k)) of order k.

    ``fn(x, ys)`` receives ys = [y(1), ..., y(k)].  Internally the function is
    a ScalarField on the same coordinate layout as the dual bundle with the
    last block read as y(k).
    """

    def __init__(self, n, k, fn, name="L", loss=0):
        self.n = n
        self.k = k
        self.fn = fn
        self.name = name
        self.shape = BundleShape(n, k)
        self.field = ScalarField(self.shape, lambda x, ys, yk: fn(x, list(ys) + [yk]), name=name,
                                 loss=loss)

    def flat(self, x, Y):
        return np.concatenate([np.asarray(x, dtype=float).reshape(-1),
                               np.asarray(Y, dtype=float).reshape(-1)])

    def _point(self, x, Y):
        Y = np.asarray(Y, dtype=float).reshape(self.k, self.n)
        return JetPoint(x, Y[:-1], Y[-1])

    def value(self, x, Y):
        return self.field.value(self._point(x, Y))

    def momentum(self, x, Y):
        """p = 1/2 dL/dy(k)."""
        g = self.field.gradient(self._point(x, Y))
        return 0.5 * g[self.k * self.n:]

    def fundamental_tensor(self, x, Y):
        """a_ij = 1/2 d^2 L / dy(k)^i dy(k)^j."""
        yk = self.shape.p_vars
        h = self.field.jet(self._point(x, Y), 2).grad(yk).grad(yk).value
        return 0.5 * h


# -- the fibre inversion ------------------------------------------------------------

def _half_fiber_grad(S, x, ys, w):
    u = JetPoint(x, np.asarray(ys).reshape(-1, len(x)), w)
    jet = S.jet(u, 2)
    fv = S.shape.p_vars
    g = jet.grad(fv)
    return 0.5 * g.value, 0.5 * g.grad(fv).value


def _newton(S, x, ys, target, what):
    """Solve 1/2 dS/dw (x, ys, w) = target for w, seeded at w = 0."""
    n = len(x)
    w = np.zeros(n)
    target = np.asarray(target, dtype=float)
    tol = NEWTON_TOL * max(1.0, float(np.abs(target).max()))
    r, J = _half_fiber_grad(S, x, ys, w)
    r = r - target
    trace = [float(np.abs(r).max())]
    for _ in range(NEWTON_ITERS):
        if trace[-1] < tol:
            return w, J
        try:
            step = np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            raise LegendreError(f"{what}: singular fibre Hessian", trace) from None
        lam = 1.0
        while True:
            w_new = w - lam * step
            r_new, J_new = _half_fiber_grad(S, x, ys, w_new)
            r_new = r_new - target
            if np.abs(r_new).max() < trace[-1] or lam < 1e-6:
                break
            lam *= 0.5
        w, r, J = w_new, r_new, J_new
        trace.append(float(np.abs(r).max()))
    if trace[-1] < tol:
        return w, J
    raise LegendreError(f"{what}: Newton did not converge in {NEWTON_ITERS} iterations", trace)


def _concat(parts):
    if any(taylor.is_jet(p) for p in parts):
        jets = [p for p in parts if taylor.is_jet(p)]
        like = jets[0]
        d = min(j.d for j in jets)
        cs = [taylor.asjet(p, like).truncate(d).c for p in parts]
        return taylor.Jet(np.concatenate(cs, axis=0), like.nv, d)
    return np.concatenate([np.asarray(p, dtype=float).reshape(-1) for p in parts])


def fiber_inverse(S, x, ys, target, what="fibre inverse"):
    """w with 1/2 dS/dw (x, ys, w) = target; jets in, jets out."""
    parts = [x] + list(ys) + [target]
    if not any(taylor.is_jet(p) for p in parts):
        return _newton(S, np.asarray(x, float), [np.asarray(y, float) for y in ys], target, what)[0]
    xv = np.asarray(taylor.value(x), dtype=float)
    ysv = [np.asarray(taylor.value(y), dtype=float) for y in ys]
    tv = np.asarray(taylor.value(target), dtype=float)
    w0, J = _newton(S, xv, ysv, tv, what)
    Ji = np.linalg.inv(J)
    like = next(p for p in parts if taylor.is_jet(p))
    nv = like.nv
    d = min(taylor.asjet(p, like).d for p in [x] + list(ys))
    n = len(xv)
    big = nv + n
    inputs = [taylor.asjet(a, like).truncate(d) for a in [x] + list(ys)]
    # pieces of a coordinate seed are affine, so they extend exactly one degree up
    affine = all(not np.any(a.c[..., taylor.n_monomials(nv, min(1, d)):]) for a in inputs)
    D = d + 1 if affine else d
    xe, *yse = [taylor.extend(a, big, D) for a in inputs]
    E = taylor.extra_seed(nv, n, D)
    dd = D - 1 - getattr(S, "loss", 0)
    if dd < 0:
        raise ValueError(f"{what}: jets too shallow for the requested derivatives")
    target = taylor.asjet(target, like).truncate(min(dd, taylor.asjet(target, like).d))
    dd = target.d
    W = taylor.Jet.const(w0, nv, dd)
    for _ in range(dd + 1):
        val = S.fn(xe, yse, taylor.extend(W, big, D) + E)
        g = taylor.restrict(taylor.asjet(val, xe).grad(list(range(nv, big))), nv) * 0.5
        W = W - taylor.einsum("ij,j->i", Ji, g.truncate(dd) - target)
    return W


# -- Lagrangian side ------------------------------------------------------------------

def legendre_forward(Ls, x, Y):
    """(x, y(1..k)) -> (x, y(1..k-1), p) with p = 1/2 dL/dy(k)."""
    Y = np.asarray(Y, dtype=float).reshape(Ls.k, Ls.n)
    regular_pair(Ls.fundamental_tensor(x, Y), None, what="Lagrangian fundamental tensor")
    return JetPoint(x, Y[:-1], Ls.momentum(x, Y))


def legendre_inverse(Ls, u):
    """y(k) = xi(u) solving 1/2 dL/dy(k) = p."""
    return fiber_inverse(Ls.field, u.x, list(u.y), u.p, what="Legendre inverse")


def xi_jets(Ls, U):
    """Jets of xi on a coordinate seed U of the dual bundle."""
    x, ys, p = split(U, Ls.shape)
    return fiber_inverse(Ls.field, x, ys, p, what="Legendre inverse")


def _anchor_dual(anchor, x, ys, p):
    # anchors live on the jet factor, so the fibre block only fixes the layout
    p = np.asarray(taylor.value(p), dtype=float)
    parts = [x] + list(ys) + [p]
    if any(taylor.is_jet(a) for a in parts):
        return anchor.dual_full(_concat(parts))
    U = taylor.Jet.seed(_concat(parts), max(anchor.loss_dual, 0))
    return [np.asarray(taylor.value(m), dtype=float) for m in anchor.dual_at(U)]


_W_CACHE = OrderedDict()
_W_CACHE_SIZE = 64


def _fingerprint(a):
    if taylor.is_jet(a):
        return ("j", a.nv, a.d, a.c.shape, a.c.tobytes())
    a = np.asarray(a, dtype=float)
    return ("a", a.shape, a.tobytes())


def _anchor_w(anchor, shape, x, ys, p):
    # the inverse maps re-enter here with identical (x, ys) on every iteration;
    # the correction ignores the fibre values, so key on the layout of p only
    key = (id(anchor), shape.n, shape.k, _fingerprint(x),
           tuple(_fingerprint(y) for y in ys), _fingerprint(p)[:-1])
    hit = _W_CACHE.get(key)
    if hit is not None and hit[0] is anchor:
        _W_CACHE.move_to_end(key)
        return hit[1]
    M0 = _anchor_dual(anchor, x, ys, p)
    if any(taylor.is_jet(m) for m in M0) or taylor.is_jet(x):
        like = next(a for a in [x] + M0 if taylor.is_jet(a))
        M0 = [taylor.asjet(m, like) for m in M0]
    w = anchor_correction(M0, list(ys), shape.k)
    _W_CACHE[key] = (anchor, w)
    if len(_W_CACHE) > _W_CACHE_SIZE:
        _W_CACHE.popitem(last=False)
    return w


def dual_hamiltonian(Ls, anchor=None, u=None):
    """H = 2 p.z - L(x, y, xi) as a field (value at ``u`` if given)."""
    shape = Ls.shape
    anchor = anchor if anchor is not None else zero_connection(shape)

    def fn(x, ys, p):
        xi = fiber_inverse(Ls.field, x, ys, p, what="Legendre inverse")
        z = xi + _anchor_w(anchor, shape, x, ys, p)
        return 2.0 * taylor.einsum("i,i->", p, z) - Ls.fn(x, list(ys) + [xi])

    H = ScalarField(shape, fn, name=f"dual({Ls.name})", loss=2 * Ls.field.loss)
    return H if u is None else H.value(u)


def dual_lagrangian(H, anchor=None):
    """L = 2 p.z - H with p solving 1/2 dH/dp = y(k) + w (anchor correction w)."""
    shape = H.shape
    anchor = anchor if anchor is not None else zero_connection(shape)

    def fn(x, ys):
        low, yk = ys[:-1], ys[-1]
        w = _anchor_w(anchor, shape, x, low, yk)
        z = yk + w
        p = fiber_inverse(H, x, low, z, what="dual Legendre inverse")
        return 2.0 * taylor.einsum("i,i->", p, z) - H.fn(x, low, p)

    return LagrangeSpace(shape.n, shape.k, fn, name=f"dual({H.name})",
                         loss=2 * H.loss)


def xi_star(H, anchor, u):
    """xi*(u) = 1/2 dH/dp - w (the inverse Legendre map of a Hamiltonian)."""
    anchor = anchor if anchor is not None else zero_connection(H.shape)
    g = H.gradient(u)
    w = _anchor_w(anchor, H.shape, u.x, list(u.y), u.p)
    return 0.5 * g[H.shape.k * H.shape.n:] - np.asarray(w, dtype=float)


def phi_star(H, anchor, x, Y):
    """Momentum p with xi*(x, y, p) = y(k)."""
    shape = H.shape
    anchor = anchor if anchor is not None else zero_connection(shape)
    Y = np.asarray(Y, dtype=float).reshape(shape.k, shape.n)
    w = _anchor_w(anchor, shape, np.asarray(x, float), list(Y[:-1]), Y[-1])
    return fiber_inverse(H, np.asarray(x, float), list(Y[:-1]), Y[-1] + np.asarray(w, float),
                         what="dual Legendre inverse")


# -- the canonical semispray and its pushforward ------------------------------------

def canonical_semispray(Ls, x, Y):
    """G^i with (k+1) G^i = 1/2 a^{ij} (Gamma(dL/dy(k)_j) - dL/dy(k-1)_j)."""
    n, k = Ls.n, Ls.k
    Y = np.asarray(Y, dtype=float).reshape(k, n)
    u = Ls._point(x, Y)
    jet = Ls.field.jet(u, 2)
    g = jet.grad()  # [c]
    gk = g[k * n:(k + 1) * n].grad().value  # [j, c] = d(dL/dy(k)_j)/dc
    a = 0.5 * gk[:, k * n:]
    pair = regular_pair(a, None, what="Lagrangian fundamental tensor")
    gamma = np.zeros(n)
    for alpha in range(1, k + 1):
        gamma += alpha * gk[:, (alpha - 1) * n:alpha * n] @ Y[alpha - 1]
    rhs = gamma - g.value[(k - 1) * n:k * n]
    return 0.5 * pair.gDown @ rhs / (k + 1)


def eta_pushforward(Ls, u):
    """eta_i = S(phi_i) at xi(u): the Legendre image of the canonical semispray."""
    n, k = Ls.n, Ls.k
    xi = legendre_inverse(Ls, u)
    Y = np.vstack([u.y, xi])
    G = canonical_semispray(Ls, u.x, Y)
    pt = Ls._point(u.x, Y)
    gk = Ls.field.jet(pt, 2).grad()[k * n:(k + 1) * n].grad().value * 0.5  # [i, c] = d phi_i / dc
    out = np.zeros(n)
    for alpha in range(1, k + 1):
        out += alpha * gk[:, (alpha - 1) * n:alpha * n] @ Y[alpha - 1]
    out -= (k + 1) * gk[:, k * n:] @ G
    return out


def eta_coefficient_formula(Ls, u):
    """eta_i = -a_is (sum_a a dxi^s/dy(a-1) y(a) + k dxi^s/dy(k-1) xi + (k+1) G^s)."""
    n, k = Ls.n, Ls.k
    U = taylor.Jet.seed(u.flat(), 1 + Ls.field.loss)
    xi = xi_jets(Ls, U).truncate(1)
    dxi = xi.grad().value  # [s, c]
    xv = xi.value
    Y = np.vstack([u.y, xv])
    G = canonical_semispray(Ls, u.x, Y)
    acc = np.zeros(n)
    for alpha in range(1, k):
        acc += alpha * dxi[:, (alpha - 1) * n:alpha * n] @ u.y[alpha - 1]
    acc += k * dxi[:, (k - 1) * n:k * n] @ xv
    acc += (k + 1) * G
    a = Ls.fundamental_tensor(u.x, Y)
    return -a @ acc


def eta_closed_form(Ls, u):
    """eta_i = 1/2 dL/dy(k-1)_i at y(k) = xi(u)."""
    n, k = Ls.n, Ls.k
    xi = legendre_inverse(Ls, u)
    g = Ls.field.gradient(Ls._point(u.x, np.vstack([u.y, xi])))
    return 0.5 * g[(k - 1) * n:k * n]


def legendre_semispray(Ls):
    """Dual semispray (xi, eta) of a Lagrangian, with numeric coefficient values.

    Only ``values`` is supported; jets of eta would need the canonical
    semispray to higher order, which the Hamilton-side construction provides.
    """
    from .nonlinear import DualSemispray

    def xi_fn(x, ys, p):
        return fiber_inverse(Ls.field, x, ys, p)

    def eta_fn(x, ys, p):
        u = JetPoint(np.asarray(taylor.value(x)), np.asarray([taylor.value(y) for y in ys]),
                     np.asarray(taylor.value(p)))
        return eta_pushforward(Ls, u)

    return DualSemispray(Ls.shape, xi_fn, eta_fn, name=f"legendre({Ls.name})")


__all__ = [
    "LagrangeSpace", "LegendreError", "DegeneracyError", "fiber_inverse", "legendre_forward",
    "legendre_inverse", "xi_jets", "dual_hamiltonian", "dual_lagrangian", "xi_star", "phi_star",
    "canonical_semispray", "eta_pushforward", "eta_coefficient_formula", "eta_closed_form",
    "legendre_semispray",
]
