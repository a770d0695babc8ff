"""Hamilton-Jacobi curves, energies, Jacobi-Ostrogradski momenta, brackets and paths.

Total time derivatives along a curve are computed with univariate Taylor
jets in t: a curve germ (x and its t-derivatives, p and its t-derivatives)
becomes a jet for every coordinate, y(a) = x^(a)/a!, and any function of the
coordinates composed with it is again a t-jet.  Partial derivatives along the
curve come from adding identity seeds for the coordinates as extra jet
variables and dropping them after differentiation.

Integration uses a first-order reduction that holds when H depends on the
jet coordinates through y(1) only: the velocity is the root of
v = 1/2 dH/dp(x, v, p) and (x'', p') solve the linear system obtained by
differentiating that relation and expanding d/dt dH/dy(1) by the chain rule.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import taylor
from .fields import FieldDomainError, ScalarField
from .jetpoint import JetPoint

CONSISTENCY_TOL = 1e-6
ZERMELO_RTOL = 1e-8
VELOCITY_TOL = 1e-13
VELOCITY_ITERS = 50
Y1_ONLY_TOL = 1e-12
CHAINS = ("full", "x-only")


class DynamicsError(ValueError):
    """Raised when a dynamical quantity cannot be formed at the given data."""


class UnsupportedHamiltonian(DynamicsError):
    """The reduced integrator needs H to depend on the jet through y(1) only."""


# -- curve germs -------------------------------------------------------------------

@dataclass
class CurveGerm:
    """Time derivatives at one instant: ``x[j]`` = d^j x/dt^j, ``p[j]`` = d^j p/dt^j."""

    x: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        self.p = np.atleast_2d(np.asarray(self.p, dtype=float))
        if self.x.shape[1] != self.p.shape[1]:
            raise DynamicsError("x and p derivatives have different dimensions")

    @property
    def n(self):
        return self.x.shape[1]

    @property
    def x_depth(self):
        return self.x.shape[0] - 1

    @property
    def p_depth(self):
        return self.p.shape[0] - 1

    def point(self, k):
        """The point of the dual bundle the germ passes through."""
        return JetPoint(self.x[0], self._ys(k), self.p[0])

    def _ys(self, k):
        out = np.zeros((k - 1, self.n))
        for a in range(1, k):
            if a <= self.x_depth:
                out[a - 1] = self.x[a] / math.factorial(a)
        return out

    @staticmethod
    def from_polynomials(xc, pc):
        """Germ of x(t) = sum xc[j] t^j, p(t) = sum pc[j] t^j at t = 0."""
        xc = np.atleast_2d(np.asarray(xc, dtype=float))
        pc = np.atleast_2d(np.asarray(pc, dtype=float))
        fx = np.array([math.factorial(j) for j in range(len(xc))], dtype=float)
        fp = np.array([math.factorial(j) for j in range(len(pc))], dtype=float)
        return CurveGerm(xc * fx[:, None], pc * fp[:, None])


def _tjet(derivs, depth):
    """Univariate t-jet of degree ``depth`` from a stack of derivatives."""
    tab = taylor.tables(1, depth)
    n = derivs.shape[1]
    c = np.zeros((n, taylor.n_monomials(1, depth)))
    for j in range(min(depth, len(derivs) - 1) + 1):
        c[:, tab.index[(j,)]] = derivs[j] / math.factorial(j)
    return taylor.Jet(c, 1, depth)


def curve_jets(shape, germ, depth, chain="full"):
    """Coordinate t-jets of degree ``depth`` along the germ.

    y(a) needs x^(a + depth) and p needs p^(depth); a shallower germ is an
    error.  ``chain='x-only'`` freezes p at its current value.
    """
    n, k = shape.n, shape.k
    if germ.n != n:
        raise DynamicsError("germ dimension does not match the bundle")
    need_x = k - 1 + depth
    if germ.x_depth < need_x:
        raise DynamicsError(f"germ carries x derivatives to order {germ.x_depth}, need {need_x}")
    if chain == "full" and germ.p_depth < depth:
        raise DynamicsError(f"germ carries p derivatives to order {germ.p_depth}, need {depth}")
    blocks = [_tjet(germ.x, depth)]
    for a in range(1, k):
        blocks.append(_tjet(germ.x[a:], depth) * (1.0 / math.factorial(a)))
    blocks.append(_tjet(germ.p if chain == "full" else germ.p[:1], depth))
    return taylor.Jet(np.concatenate([b.c for b in blocks], axis=0), 1, depth)


def along(H, germ, depth, chain="full"):
    """(H, dH/d(x, y)) along the germ as t-jets of degree ``depth``.

    The gradient covers the x block and every y block (k*n entries).
    """
    shape = H.shape
    m = shape.k * shape.n
    d = depth + 1 + getattr(H, "loss", 0)
    # the degree-`depth` Taylor polynomial is itself a curve, so raising it is exact
    Ut = curve_jets(shape, germ, depth, chain)
    Ub = taylor.extend(Ut, 1 + m, d)
    seeds = taylor.extra_seed(1, m, d)
    c = Ub.c.copy()
    c[:m] += seeds.c
    Hj = H.compose(taylor.Jet(c, 1 + m, d))
    grad = taylor.restrict(Hj.grad(range(1, 1 + m)), 1).truncate(depth)
    return taylor.restrict(Hj, 1).truncate(depth), grad


def tderiv(J, j):
    """j-th t-derivative at t = 0 of a univariate jet (array valued)."""
    return np.asarray(J.derivative((0,) * j)) if j else np.asarray(J.value)


# -- invariants, energies, momenta ----------------------------------------------------

@dataclass
class EnergyReport:
    I: np.ndarray
    E: np.ndarray
    zermelo: list
    H: float = 0.0
    drift: float = 0.0


def _y_grad(grad, n, a):
    return grad[a * n:(a + 1) * n]


def main_invariants_along(H, germ, depth, chain="full"):
    """t-jets of I^1..I^(k-1) with I^a = sum_b b y(b).dH/dy(k-a+b-1)."""
    shape = H.shape
    n, k = shape.n, shape.k
    U = curve_jets(shape, germ, depth, chain)
    Hj, grad = along(H, germ, depth, chain)
    out = []
    for a in range(1, k):
        acc = Hj * 0.0
        for b in range(1, a + 1):
            yb = U[b * n:(b + 1) * n]
            acc = acc + taylor.einsum("i,i->", yb, _y_grad(grad, n, k - a + b - 1)) * float(b)
        out.append(acc)
    return Hj, out


def invariants_and_energies(H, germ, chain="full"):
    """Main invariants, energies of orders k-1..1 and Zermelo flags at the germ.

    E^(k-1-s) = sum_{j=s}^{k-2} (-1)^j/(j+1)! d^(j-s)/dt^(j-s) I^(k-1-j),
    minus H when s = 0.  Entry ``E[a-1]`` holds E^a and ``I[a-1]`` holds I^a.
    """
    k = H.shape.k
    depth = max(k - 2, 0)
    Hj, Ij = main_invariants_along(H, germ, depth, chain)
    h = float(Hj.value)
    I = np.array([float(J.value) for J in Ij])
    E = np.zeros(k - 1)
    for s in range(k - 1):
        acc = -h if s == 0 else 0.0
        for j in range(s, k - 1):
            acc += (-1) ** j / math.factorial(j + 1) * float(tderiv(Ij[k - 2 - j], j - s))
        E[k - 2 - s] = acc
    tol = ZERMELO_RTOL * max(abs(h), 1.0)
    flags = [abs(I[a - 1] - (h if a == k - 1 else 0.0)) <= tol for a in range(1, k)]
    return EnergyReport(I, E, flags, H=h)


def jacobi_ostrogradski(H, germ, chain="full"):
    """Momenta p_(a) = sum_{j=a}^{k-1} (-1)^(j-a)/j! d^(j-a)/dt^(j-a) dH/dy(j); shape [k-1, n]."""
    n, k = H.shape.n, H.shape.k
    _, grad = along(H, germ, max(k - 2, 0), chain)
    out = np.zeros((k - 1, n))
    for a in range(1, k):
        for j in range(a, k):
            out[a - 1] += (-1) ** (j - a) / math.factorial(j) * tderiv(_y_grad(grad, n, j), j - a)
    return out


def energy_from_momenta(H, germ, momenta=None):
    """E^(k-1) reassembled as sum_a p_(a).d^a x/dt^a - H."""
    k = H.shape.k
    if momenta is None:
        momenta = jacobi_ostrogradski(H, germ)
    u = germ.point(k)
    return sum(float(momenta[a - 1] @ germ.x[a]) for a in range(1, k)) - H.value(u)


def momentum_identity_residual(H, germ, alpha):
    """dE/dy(a) + a! dp_(a+1)/dt, which vanishes identically along any curve."""
    n, k = H.shape.n, H.shape.k
    _, grad = along(H, germ, max(k - 1, 1))
    pa = np.zeros(n)
    dnext = np.zeros(n)
    for j in range(alpha, k):
        pa += (-1) ** (j - alpha) / math.factorial(j) * tderiv(_y_grad(grad, n, j), j - alpha)
    for j in range(alpha + 1, k):
        dnext += (-1) ** (j - alpha - 1) / math.factorial(j) * tderiv(_y_grad(grad, n, j), j - alpha)
    dE = math.factorial(alpha) * pa - tderiv(_y_grad(grad, n, alpha), 0)
    return dE + math.factorial(alpha) * dnext


# -- Hamilton-Jacobi right-hand side ------------------------------------------------

@dataclass
class HJRhs:
    xdot: np.ndarray
    pdot: np.ndarray
    warnings: list = field(default_factory=list)


def _second_order(H, u):
    """Value, gradient and Hessian of H at a point."""
    return taylor.second_order(H.jet(u, 2))


def _check_y1_only(shape, g, h):
    n, k = shape.n, shape.k
    hi = slice(2 * n, k * n)
    if k > 2 and (np.abs(g[hi]).max() > Y1_ONLY_TOL or np.abs(h[hi]).max() > Y1_ONLY_TOL):
        raise UnsupportedHamiltonian(
            "the reduced integrator needs H independent of y(2)..y(k-1)")


def _closure(shape, g, h, v, chain):
    """Solve for (x'', p') from the differentiated velocity relation and the p equation."""
    n, k = shape.n, shape.k
    X, Y, P = slice(0, n), slice(n, 2 * n), slice(k * n, (k + 1) * n)
    eye = np.eye(n)
    A = np.zeros((2 * n, 2 * n))
    rhs = np.zeros(2 * n)
    A[:n, :n] = eye - 0.5 * h[P, Y]
    A[:n, n:] = -0.5 * h[P, P]
    rhs[:n] = 0.5 * h[P, X] @ v
    A[n:, :n] = -0.5 * h[Y, Y]
    A[n:, n:] = eye - (0.5 * h[Y, P] if chain == "full" else 0.0)
    rhs[n:] = -0.5 * g[X] + 0.5 * h[Y, X] @ v
    try:
        sol = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError:
        raise DynamicsError("singular closure system for (x'', p')") from None
    return sol[:n], sol[n:]


def hj_rhs(H, germ, chain="full"):
    """(dx/dt, dp/dt) of the Hamilton-Jacobi system at a curve germ.

    With a germ deep enough for every d/dt chain (x to order 2k-2, p to
    order k-1) the chains are read off along the germ.  A shallower germ
    (x, dx/dt, p) is closed by differentiating dx/dt = 1/2 dH/dp once,
    which needs H to depend on the jet through y(1) only.
    """
    if chain not in CHAINS:
        raise ValueError(f"chain must be one of {CHAINS}")
    shape = H.shape
    n, k = shape.n, shape.k
    u = germ.point(k)
    warnings = []
    full_depth = germ.x_depth >= 2 * k - 2 and (chain == "x-only" or germ.p_depth >= k - 1)
    if full_depth:
        Hj, grad = along(H, germ, k - 1, chain)
        xdot = 0.5 * H.gradient(u)[k * n:]
        acc = tderiv(grad[:n], 0).copy()
        for a in range(1, k):
            acc += (-1) ** a / math.factorial(a) * tderiv(_y_grad(grad, n, a), a)
        pdot = -0.5 * acc
    else:
        if germ.x_depth < 1:
            raise DynamicsError("the germ must carry dx/dt")
        _, g, h = _second_order(H, u)
        _check_y1_only(shape, g, h)
        xdot = 0.5 * g[k * n:]
        _, pdot = _closure(shape, g, h, germ.x[1], chain)
    if germ.x_depth >= 1:
        gap = float(np.abs(germ.x[1] - xdot).max())
        if gap > CONSISTENCY_TOL:
            warnings.append(f"inconsistent germ: |dx/dt - 1/2 dH/dp| = {gap:.3e}")
    return HJRhs(xdot, pdot, warnings)


# -- reduced first-order system and integration ----------------------------------------

class ReducedHJ:
    """First-order system in (x, p) for Hamiltonians depending on y(1) only."""

    def __init__(self, H, chain="full"):
        if chain not in CHAINS:
            raise ValueError(f"chain must be one of {CHAINS}")
        self.H = H
        self.shape = H.shape
        self.chain = chain
        self._v = None

    def _point(self, x, v, p):
        ys = np.zeros((self.shape.k - 1, self.shape.n))
        ys[0] = v
        return JetPoint(x, ys, p)

    def _solve(self, x, p, guess=None):
        """Root v of v = 1/2 dH/dp(x, v, p) by Newton, with the 2-jet of H there."""
        n, k = self.shape.n, self.shape.k
        v = np.zeros(n) if guess is None else np.array(guess, dtype=float)
        for _ in range(VELOCITY_ITERS):
            _, g, h = _second_order(self.H, self._point(x, v, p))
            F = v - 0.5 * g[k * n:]
            if np.abs(F).max() <= VELOCITY_TOL * max(1.0, np.abs(v).max()):
                return v, g, h
            v = v - np.linalg.solve(np.eye(n) - 0.5 * h[k * n:, n:2 * n], F)
        raise DynamicsError("velocity relation did not converge")

    def velocity(self, x, p, guess=None):
        return self._solve(x, p, guess)[0]

    def derivatives(self, x, p):
        """(v, x'', p') at the state (x, p)."""
        v, g, h = self._solve(x, p, self._v)
        self._v = v
        _check_y1_only(self.shape, g, h)
        a, q = _closure(self.shape, g, h, v, self.chain)
        return v, a, q

    def __call__(self, t, s):
        n = self.shape.n
        v, _, q = self.derivatives(s[:n], s[n:])
        return np.concatenate([v, q])

    def germ(self, x, p):
        """Germ at (x, p), zero-padded past (x'', p').

        H ignores y(2)..y(k-1), so every d/dt chain that would read the padded
        entries multiplies them by a vanishing partial derivative.
        """
        k, n = self.shape.k, self.shape.n
        v, a, q = self.derivatives(x, p)
        xs = np.zeros((max(2 * k - 1, 3), n))
        ps = np.zeros((max(k, 2), n))
        xs[:3] = [x, v, a]
        ps[:2] = [p, q]
        return CurveGerm(xs, ps)

    def energy(self, x, p):
        """E^(k-1) = y(1).dH/dy(1) - H, the energy for y(1)-only Hamiltonians."""
        n = self.shape.n
        v, g, _ = self._solve(x, p, self._v)
        hval = float(self.H.jet(self._point(x, v, p), 0).value)
        return float(v @ g[n:2 * n]) - hval


def rk4_step(f, t, s, h):
    k1 = f(t, s)
    k2 = f(t + 0.5 * h, s + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, s + 0.5 * h * k2)
    k4 = f(t + h, s + h * k3)
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4(f, s0, t1, step):
    """Fixed-step classical RK4; returns (t, states, failure index, message)."""
    if step <= 0 or t1 <= 0:
        raise ValueError("step and t1 must be positive")
    nsteps = int(round(t1 / step))
    if abs(nsteps * step - t1) > 1e-9 * t1:
        nsteps = int(math.ceil(t1 / step))
    ts = [0.0]
    states = [np.array(s0, dtype=float)]
    for i in range(nsteps):
        t = ts[-1]
        h = min(step, t1 - t) if i == nsteps - 1 else step
        try:
            s = rk4_step(f, t, states[-1], h)
            if not np.all(np.isfinite(s)):
                raise DynamicsError("non-finite state")
        except (DynamicsError, FieldDomainError, taylor.DomainError, np.linalg.LinAlgError) as exc:
            return np.array(ts), np.array(states), i + 1, str(exc)
        ts.append(t + h if i < nsteps - 1 else t1)
        states.append(s)
    return np.array(ts), np.array(states), None, ""


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    energy: np.ndarray
    order: int
    method: str
    step: float
    report: EnergyReport = None
    failure_index: int = None
    failure: str = ""

    @property
    def samples(self):
        return [(float(t), x, p) for t, x, p in zip(self.t, self.x, self.p)]

    @property
    def complete(self):
        return self.failure_index is None

    def jet_extension(self):
        """y(a)(t) from divided differences of x(t), for diagnostics only."""
        out = []
        d = self.x
        for a in range(1, self.order):
            d = np.gradient(d, self.t, axis=0, edge_order=2)
            out.append(d / math.factorial(a))
        return out

    def to_csv(self, fh):
        """Columns t, x1..xn, p1..pn, E; values written with 17 significant digits."""
        n = self.x.shape[1]
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"x{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)] + ["E"])
        for t, x, p, e in zip(self.t, self.x, self.p, self.energy):
            w.writerow([f"{v:.17g}" for v in (t, *x, *p, e)])


def integrate_hj(H, x0, p0, t1, step, chain="full"):
    """Classical RK4 on the reduced Hamilton-Jacobi system with an energy report."""
    sys_ = ReducedHJ(H, chain)
    n = H.shape.n
    x0 = np.asarray(x0, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    report = invariants_and_energies(H, sys_.germ(x0, p0), chain)
    ts, states, fail, msg = rk4(sys_, np.concatenate([x0, p0]), t1, step)
    energy = np.array([sys_.energy(s[:n], s[n:]) for s in states])
    report.drift = float(np.abs(energy - energy[0]).max())
    return Trajectory(ts, states[:, :n], states[:, n:], energy, H.shape.k, "rk4", float(step),
                      report, fail, msg)


def drift_ratio(H, x0, p0, t1, step, chain="full"):
    """(drift at step, drift at step/2, their ratio)."""
    a = integrate_hj(H, x0, p0, t1, step, chain).report.drift
    b = integrate_hj(H, x0, p0, t1, step / 2, chain).report.drift
    return a, b, (a / b if b > 0 else math.inf)


TOY_X0 = (1.0, 0.5)
TOY_P0 = (0.5, -1.0)
TOY_RATIO_STEP = 0.025


def coupled_toy(shape, eps=0.5, kappa=1.0, lam=1.0):
    """H = |p|^2 + eps p.y(1) + kappa |x|^2 + lam |x|^4."""
    n = shape.n

    def fn(x, ys, p):
        r2 = sum(x[i] * x[i] for i in range(n))
        return (sum(p[i] * p[i] for i in range(n)) + sum(p[i] * ys[0][i] for i in range(n)) * eps
                + r2 * kappa + r2 * r2 * lam)

    return ScalarField(shape, fn, name=f"coupled(eps={eps}, kappa={kappa}, lam={lam})")


# -- Poisson brackets -----------------------------------------------------------------

def _block(shape, alpha):
    n = shape.n
    return slice(alpha * n, (alpha + 1) * n)


def poisson_bracket(f, g, alpha, u):
    """{f, g}_a = df/dz.dg/dp - df/dp.dg/dz with z = x (a = 0) or y(a)."""
    shape = f.shape
    if not 0 <= alpha <= shape.k - 1:
        raise ValueError("bracket index out of range")
    gf, gg = f.gradient(u), g.gradient(u)
    Z, P = _block(shape, alpha), _block(shape, shape.k)
    return float(gf[Z] @ gg[P] - gf[P] @ gg[Z])


def _partials_on(f, U):
    """Coordinate gradient of f composed with the jet vector U, as a jet of U's degree."""
    N = len(U)
    d = U.d
    Ub = taylor.extend(U, U.nv + N, d + 1)
    c = Ub.c.copy()
    c += taylor.extra_seed(U.nv, N, d + 1).c
    out = f.compose(taylor.Jet(c, U.nv + N, d + 1)).grad(range(U.nv, U.nv + N))
    return taylor.restrict(out, U.nv)


def bracket_field(f, g, alpha):
    """The bracket {f, g}_a as a scalar field, composable to any depth."""
    shape = f.shape
    Z, P = _block(shape, alpha), _block(shape, shape.k)

    def fn(x, ys, p):
        U = taylor.stack([x, *ys, p]).reshape(shape.dim)
        if not taylor.is_jet(U):
            U = taylor.Jet.seed(U, 0)
        df, dg = _partials_on(f, U), _partials_on(g, U)
        return taylor.einsum("i,i->", df[Z], dg[P]) - taylor.einsum("i,i->", df[P], dg[Z])

    loss = max(getattr(f, "loss", 0), getattr(g, "loss", 0))
    return ScalarField(shape, fn, name=f"{{{f.name},{g.name}}}_{alpha}", loss=loss)


def jacobi_residual(f, g, h, alpha, u):
    """{f,{g,h}} + {g,{h,f}} + {h,{f,g}} at u."""
    return (poisson_bracket(f, bracket_field(g, h, alpha), alpha, u)
            + poisson_bracket(g, bracket_field(h, f, alpha), alpha, u)
            + poisson_bracket(h, bracket_field(f, g, alpha), alpha, u))


def sigma0_check(f, g, u):
    """Compare {f,g}_0 with theta_0(X_f, X_g) on y = 0.

    X_f = df/dp d/dx - df/dx d/dp and theta_0 = dp ^ dx.  Returns the
    bracket, theta_0(X_f, X_g) and both residuals {f,g}_0 - theta and
    {f,g}_0 + theta.
    """
    shape = f.shape
    if np.abs(u.y).max() > 0:
        raise DynamicsError("the canonical section needs every y(a) = 0")
    X, P = _block(shape, 0), _block(shape, shape.k)
    gf, gg = f.gradient(u), g.gradient(u)
    Xf_x, Xf_p = gf[P], -gf[X]
    Xg_x, Xg_p = gg[P], -gg[X]
    theta = float(Xf_p @ Xg_x - Xg_p @ Xf_x)
    br = poisson_bracket(f, g, 0, u)
    return br, theta, br - theta, br + theta


# -- autoparallel curves and paths --------------------------------------------------

PATH_KINDS = ("full", "horizontal", "v", "w")


def _omega(Gamma, V):
    """omega^i_m / dt = Gamma^i_{mA} V^A."""
    return np.einsum("imA,A->im", Gamma, V)


def autoparallel_rhs(D, state, kind="full", alpha=None, base=None):
    """Derivatives of an autoparallel curve of the N-linear connection D.

    kind 'full' and 'horizontal': state = (u, V) with V the adapted velocity
    components (dx/dt, delta y(a)/dt, delta p/dt); 'horizontal' keeps only
    the x block.  kind 'v': state = (y(alpha), dy(alpha)/dt) with the rest
    of the point frozen at ``base``.  kind 'w': state = (p, dp/dt) at
    (x0, 0, ..., 0, p) with x0 taken from ``base``.
    """
    shape = D.shape
    n, k, N = shape.n, shape.k, shape.dim
    state = np.asarray(state, dtype=float)
    if kind in ("full", "horizontal"):
        u, V = state[:N], state[N:].copy()
        if kind == "horizontal":
            V[n:] = 0.0
        pt = JetPoint.from_flat(shape, u)
        loc = D.at(pt)
        om = _omega(loc.Gamma, V)
        E = np.array(loc.conn.frame(), dtype=float)
        du = V @ E
        dV = np.empty(N)
        for b in range(k):
            Vb = V[b * n:(b + 1) * n]
            dV[b * n:(b + 1) * n] = -Vb @ om.T
        dV[k * n:] = V[k * n:] @ om
        if kind == "horizontal":
            dV[n:] = 0.0
        return np.concatenate([du, dV])
    if base is None:
        raise DynamicsError("vertical paths need a base point")
    if kind == "v":
        if alpha is None or not 1 <= alpha <= k - 1:
            raise ValueError("v-paths need 1 <= alpha <= k-1")
        y, ydot = state[:n], state[n:]
        pt = base.replace(y=_with_y(base, alpha, y))
        C = D.at(pt).Cv[alpha - 1]
        return np.concatenate([ydot, -np.einsum("isj,s,j->i", C, ydot, ydot)])
    if kind == "w":
        p, pdot = state[:n], state[n:]
        pt = JetPoint(base.x, np.zeros((k - 1, n)), p)
        Cw = D.at(pt).Cw
        return np.concatenate([pdot, np.einsum("ijm,j,m->i", Cw, pdot, pdot)])
    raise ValueError(f"path kind must be one of {PATH_KINDS}")


def _with_y(base, alpha, y):
    ys = np.array(base.y, dtype=float)
    ys[alpha - 1] = y
    return ys


def integrate_path(D, state0, t1, step, kind="full", alpha=None, base=None):
    """RK4 integration of an autoparallel or vertical path; returns (t, states)."""
    f = lambda t, s: autoparallel_rhs(D, s, kind, alpha, base)
    ts, states, fail, msg = rk4(f, state0, t1, step)
    if fail is not None:
        raise DynamicsError(f"path integration failed at step {fail}: {msg}")
    return ts, states
