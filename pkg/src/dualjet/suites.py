"""Verification suites: named checks run over seeded random points.

A check returns its worst residual and the number of points it used; the
runner turns that into a report row.  Every check draws from its own
generator, derived from the seed and the check name, so rows do not
depend on which other checks ran.  Exceptions become failed rows.
"""

import json
import math
import zlib
from dataclasses import dataclass

import numpy as np

from . import taylor
from .covariance import (fundamental_tensor_covariance, liouville_covariance, prolongation_in_chart,
                         pullback_field)
from .dynamics import (CurveGerm, DynamicsError, TOY_P0, TOY_RATIO_STEP, TOY_X0, UnsupportedHamiltonian,
                       bracket_field, energy_from_momenta, integrate_hj, integrate_path,
                       invariants_and_energies, jacobi_residual, momentum_identity_residual,
                       poisson_bracket, sigma0_check, _check_y1_only, _second_order)
from .fields import ScalarField, euler_operator, _scaled
from .hamilton import canonical_connection
from .jetpoint import Diffeomorphism, JetPoint, make_rng
from .legendre import (dual_hamiltonian, dual_lagrangian, eta_closed_form, eta_coefficient_formula,
                       eta_pushforward, legendre_forward, legendre_inverse)
from .metric import HamiltonMetric, fundamental_tensor, reducibility_probe
from .nlinear import (NLinearConnection, deflection_tensors, metric_antisymmetry_residual,
                      metricity_residuals, torsion_residuals)
from .nonlinear import ProlongationConnection, zero_connection
from .structures import (associated_two_form, contact_structure, dp_wedge_dx, kernel_image,
                         lift_covariant_residuals, matrix_rank, metric_free_contact, n_lift,
                         skew_residual)

SCHEMA = "dualjet-report/1"
SUITES = ("metric", "connection", "curvature", "dynamics", "legendre", "structures", "homogeneity",
          "covariance")
SYMMETRY_TOL = 1e-12


@dataclass
class Check:
    name: str
    suite: str
    anchor: str
    tolerance: object
    fn: object
    points: int = 20
    relation: str = "<="
    applies: object = None


@dataclass
class Row:
    check: str
    anchor: str
    space: str
    max_residual: float
    tolerance: object
    relation: str
    passed: bool
    points: int
    seed: int
    error: str = None

    def as_dict(self):
        return {"check": self.check, "anchor": self.anchor, "space": self.space,
                "max_residual": _num(self.max_residual), "tolerance": _num(self.tolerance),
                "relation": self.relation, "passed": self.passed, "points": self.points,
                "seed": self.seed, "error": self.error}


def _num(v):
    if isinstance(v, (list, tuple)):
        return [_num(a) for a in v]
    v = float(v)
    return v if math.isfinite(v) else str(v)


def _passes(value, tol, relation):
    if not math.isfinite(value):
        return False
    if relation == "<=":
        return value <= tol
    if relation == ">":
        return value > tol
    if relation == "within":
        return tol[0] <= value <= tol[1]
    raise ValueError(f"unknown relation {relation!r}")


def _rel(a, b):
    return float(np.abs(np.asarray(a) - np.asarray(b)).max()) / max(1.0, float(np.abs(b).max()))


def _worst(space, rng, count, f):
    pts = space.sample(rng, count)
    return max(float(f(u)) for u in pts), len(pts)


def _nlinear(space):
    if "_D" not in space.extras:
        space.extras["_D"] = NLinearConnection(space.gfield, space.connection)
    return space.extras["_D"]


def _has_H(space):
    return space.H is not None


def _has_prolongation(space):
    return isinstance(space.anchor, ProlongationConnection)


def _y1_only(space):
    if space.H is None:
        return False
    u = space.sample(make_rng(0), 1)[0]
    try:
        _, g, h = _second_order(space.H, u)
        _check_y1_only(space.shape, g, h)
    except UnsupportedHamiltonian:
        return False
    return True


# -- metric ---------------------------------------------------------------------------

def _inverse_pair(space, rng, count):
    def f(u):
        gup = space.gfield.up_jet(u, 0).value
        closed = getattr(space.gfield, "closed_form_down", None)
        gdn = closed(u) if closed is not None else space.gfield.down_jet(u, 0).value
        return np.abs(gup @ gdn - np.eye(space.shape.n)).max()
    return _worst(space, rng, count, f)


def _symmetry(space, rng, count):
    def f(u):
        g = space.gfield.up_jet(u, 0).value
        return np.abs(g - g.T).max()
    return _worst(space, rng, count, f)


def _definite(space, rng, count):
    def f(u):
        ev = np.linalg.eigvalsh(space.gfield.pair(u).gUp)
        return float((ev <= 0).sum())
    return _worst(space, rng, count, f)


def _electro_tensor(space, rng, count):
    m, c, _ = space.extras["constants"]

    def f(u):
        expected = np.linalg.inv(space.gamma.value(u.x)) / (m * c)
        return np.abs(space.gfield.pair(u).gUp - expected).max()
    return _worst(space, rng, count, f)


def _reducibility(space, rng, count):
    # for spaces expected to be non-reducible the smallest defect is reported
    pts = space.sample(rng, count)
    defects = [reducibility_probe(space.gfield, u)["defect"] for u in pts]
    return (min(defects) if space.H is None else max(defects)), len(pts)


# -- connection -----------------------------------------------------------------------

def _frame_duality(space, rng, count):
    def f(u):
        loc = space.connection.at(u)
        E = np.asarray(loc.frame(), dtype=float)
        T = np.asarray(loc.coframe(), dtype=float)
        return np.abs(E @ T.T - np.eye(space.shape.dim)).max()
    return _worst(space, rng, count, f)


def _torsion(space, rng, count):
    D = _nlinear(space)
    return _worst(space, rng, count, lambda u: max(torsion_residuals(D, u).values()))


def _metricity(space, rng, count):
    D = _nlinear(space)
    return _worst(space, rng, count, lambda u: max(metricity_residuals(D, u).values()))


def _deflections(space, rng, count):
    D = _nlinear(space)

    def f(u):
        full, closed = deflection_tensors(D, u)
        return max(_rel(full[key], val) for key, val in closed.items())
    return _worst(space, rng, count, f)


def _christoffel(space, x):
    n = space.shape.n
    X = taylor.Jet.seed(np.asarray(x, dtype=float), 1)
    return np.asarray(space.gamma.christoffel_at(X, list(range(n))).value, dtype=float)


def _electro_coefficients(space, rng, count):
    D = _nlinear(space)
    return _worst(space, rng, count,
                  lambda u: np.abs(D.at(u).H - _christoffel(space, u.x)).max())


def _electro_cw(space, rng, count):
    D = _nlinear(space)
    return _worst(space, rng, count, lambda u: np.abs(D.at(u).Cw).max())


# -- curvature ------------------------------------------------------------------------

def _antisymmetry(space, rng, count):
    D = _nlinear(space)
    return _worst(space, rng, count, lambda u: metric_antisymmetry_residual(D, u))


# -- dynamics ------------------------------------------------------------------------

def _random_germ(shape, rng, scale=0.5):
    k = shape.k
    return CurveGerm(scale * rng.uniform(-1, 1, (2 * k - 1, shape.n)),
                     scale * rng.uniform(-1, 1, (k, shape.n)))


def _admissible_germs(space, rng, count):
    out = []
    while len(out) < count:
        g = _random_germ(space.shape, rng)
        u = g.point(space.shape.k)
        try:
            space.admissible(u)
        except Exception:
            continue
        out.append(g)
    return out


def _reassembly(space, rng, count):
    worst = 0.0
    germs = _admissible_germs(space, rng, count)
    for g in germs:
        rep = invariants_and_energies(space.H, g)
        top = rep.E[-1]
        worst = max(worst, abs(top - energy_from_momenta(space.H, g)) / max(1.0, abs(top)))
    return worst, len(germs)


def _momentum_identity(space, rng, count):
    k = space.shape.k
    germs = _admissible_germs(space, rng, count)
    worst = 0.0
    for g in germs:
        for a in range(1, k - 1):
            worst = max(worst, float(np.abs(momentum_identity_residual(space.H, g, a)).max()))
    return worst, len(germs)


def _zermelo_space(space):
    """Whether the Zermelo flags hold at a probe germ (otherwise energies need not vanish)."""
    if space.H is None:
        return False
    g = _admissible_germs(space, make_rng(0), 1)[0]
    return all(invariants_and_energies(space.H, g).zermelo)


def _zermelo(space, rng, count):
    # energies are checked at the germs where every Zermelo flag holds
    germs = _admissible_germs(space, rng, count)
    worst, used = 0.0, 0
    for g in germs:
        rep = invariants_and_energies(space.H, g)
        if all(rep.zermelo):
            used += 1
            worst = max(worst, float(np.abs(rep.E).max()))
    if not used:
        raise DynamicsError("no sampled germ satisfies the Zermelo conditions")
    return worst, used


def _initial(space, rng):
    n = space.shape.n
    if space.kind == "coupled_toy" and n == 2:
        return np.array(TOY_X0), np.array(TOY_P0)
    u = space.sample(rng, 1)[0]
    return u.x, u.p


def _drift(space, rng, count, t1=1.0, step=1e-3):
    x0, p0 = _initial(space, rng)
    tr = integrate_hj(space.H, x0, p0, t1, step)
    if not tr.complete:
        raise DynamicsError(f"integration stopped at step {tr.failure_index}: {tr.failure}")
    return tr.report.drift, len(tr.t)


def _ratio(space, rng, count, t1=1.0, step=TOY_RATIO_STEP):
    x0, p0 = _initial(space, rng)
    a = integrate_hj(space.H, x0, p0, t1, step).report.drift
    b = integrate_hj(space.H, x0, p0, t1, step / 2).report.drift
    return (a / b if b > 0 else math.inf), 2


def random_polynomial(shape, rng, degree=3, terms=2, scale=0.5):
    """Random polynomial on the dual bundle: constant, linear, quadratic and cubed linear forms."""
    N = shape.dim
    c0 = rng.uniform(-1, 1)
    b = scale * rng.uniform(-1, 1, N)
    A = scale * rng.uniform(-1, 1, (N, N))
    A = 0.5 * (A + A.T)
    L = scale * rng.uniform(-1, 1, (terms, N)) if degree >= 3 else np.zeros((0, N))

    def fn(x, ys, p):
        U = taylor.stack([x, *ys, p]).reshape(N)
        out = taylor.einsum("i,i->", b, U) + taylor.einsum("i,ij,j->", U, A, U) + c0
        for row in L:
            t = taylor.einsum("i,i->", row, U)
            out = out + t * t * t
        return out

    return ScalarField(shape, fn, name="poly")


def _jacobi(space, rng, count, alpha=None):
    shape = space.shape
    alpha = shape.k - 1 if alpha is None else alpha
    worst = 0.0
    for _ in range(count):
        f, g, h = (random_polynomial(shape, rng) for _ in range(3))
        u = JetPoint.from_flat(shape, rng.uniform(-1, 1, shape.dim))
        worst = max(worst, abs(jacobi_residual(f, g, h, alpha, u)))
    return worst, count


def _leibniz(space, rng, count):
    shape = space.shape
    worst = 0.0
    for _ in range(count):
        f, g, h = (random_polynomial(shape, rng) for _ in range(3))
        gh = ScalarField(shape, lambda x, ys, p, g=g, h=h: g.fn(x, ys, p) * h.fn(x, ys, p))
        u = JetPoint.from_flat(shape, rng.uniform(-1, 1, shape.dim))
        for a in range(shape.k):
            lhs = poisson_bracket(f, gh, a, u)
            rhs = poisson_bracket(f, g, a, u) * h.value(u) + g.value(u) * poisson_bracket(f, h, a, u)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return worst, count


def _antisym_bracket(space, rng, count):
    shape = space.shape
    worst = 0.0
    for _ in range(count):
        f, g = random_polynomial(shape, rng), random_polynomial(shape, rng)
        u = JetPoint.from_flat(shape, rng.uniform(-1, 1, shape.dim))
        for a in range(shape.k):
            worst = max(worst, abs(poisson_bracket(f, g, a, u) + poisson_bracket(g, f, a, u)))
    return worst, count


def _sigma0(space, rng, count):
    # the bracket equals theta_0(X_g, X_f) with theta_0 = dp ^ dx
    shape = space.shape
    worst = 0.0
    for _ in range(count):
        f, g = random_polynomial(shape, rng), random_polynomial(shape, rng)
        flat = rng.uniform(-1, 1, shape.dim)
        flat[shape.n:shape.k * shape.n] = 0.0
        u = JetPoint.from_flat(shape, flat)
        br, theta, _, plus = sigma0_check(f, g, u)
        worst = max(worst, abs(plus) / max(1.0, abs(br)))
    return worst, count


def geodesic_rhs(space, s):
    """x'' = -gamma^i_jh x'^j x'^h from the Christoffel symbols of gamma."""
    n = space.shape.n
    x, v = s[:n], s[n:]
    return np.concatenate([v, -np.einsum("ijh,j,h->i", _christoffel(space, x), v, v)])


def _rk4(f, s, step, nsteps):
    out = [s]
    for _ in range(nsteps):
        k1 = f(s)
        k2 = f(s + 0.5 * step * k1)
        k3 = f(s + 0.5 * step * k2)
        k4 = f(s + step * k3)
        s = s + step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(s)
    return np.array(out)


def _horizontal_geodesic(space, rng, count, t1=0.5, step=0.05):
    D = _nlinear(space)
    n, N = space.shape.n, space.shape.dim
    worst = 0.0
    pts = space.sample(rng, count)
    for u in pts:
        v0 = 0.5 * rng.uniform(-1, 1, n)
        V = np.zeros(N)
        V[:n] = v0
        _, states = integrate_path(D, np.concatenate([u.flat(), V]), t1, step, kind="horizontal")
        ref = _rk4(lambda s: geodesic_rhs(space, s), np.concatenate([u.x, v0]), step,
                   len(states) - 1)
        worst = max(worst, float(np.abs(states[:, :n] - ref[:, :n]).max()))
    return worst, len(pts)


def _w_affine(space, rng, count, t1=0.5, step=0.1):
    D = _nlinear(space)
    n = space.shape.n
    worst = 0.0
    pts = space.sample(rng, count)
    for u in pts:
        q = 0.5 * rng.uniform(-1, 1, n)
        ts, states = integrate_path(D, np.concatenate([u.p, q]), t1, step, kind="w", base=u)
        worst = max(worst, float(np.abs(states[:, :n] - (u.p + ts[:, None] * q)).max()))
    return worst, len(pts)


# -- Legendre ------------------------------------------------------------------------

def _lagrangian(space):
    if space.lagrangian is None:
        if "_L" not in space.extras:
            space.extras["_L"] = dual_lagrangian(space.H, space.anchor)
        return space.extras["_L"]
    return space.lagrangian


def _lag_points(space, rng, count):
    """(x, Y) pairs whose Legendre image is admissible."""
    L = _lagrangian(space)
    out = []
    for u in space.sample(rng, count):
        out.append((u, np.vstack([u.y, legendre_inverse(L, u)])))
    return out


def _round_trip(space, rng, count):
    L = _lagrangian(space)
    worst = 0.0
    pairs = _lag_points(space, rng, count)
    for u, Y in pairs:
        # xi(phi(x, Y)) against Y(k), at Y perturbed off the sampled fibre point
        Yp = Y + 0.05 * rng.uniform(-1, 1, Y.shape)
        v = legendre_forward(L, u.x, Yp)
        worst = max(worst, _rel(legendre_inverse(L, v), Yp[-1]))
    return worst, len(pairs)


def _dual_of_dual(space, rng, count):
    L = _lagrangian(space)
    H = space.H
    Hd = dual_hamiltonian(L, space.anchor)
    pts = space.sample(rng, count)
    worst = 0.0
    for u in pts:
        worst = max(worst, abs(Hd.value(u) - H.value(u)) / max(1.0, abs(H.value(u))))
        if space.lagrangian is not None:
            Ld = dual_lagrangian(H, space.anchor)
            Y = np.vstack([u.y, legendre_inverse(L, u)])
            worst = max(worst, abs(Ld.value(u.x, Y) - L.value(u.x, Y)) / max(1.0, abs(L.value(u.x, Y))))
    return worst, len(pts)


def _anchor_independence(space, rng, count):
    L = _lagrangian(space)
    H0 = dual_hamiltonian(L, zero_connection(space.shape))
    H1 = dual_hamiltonian(L, space.anchor)
    return _worst(space, rng, count,
                  lambda u: _rel(fundamental_tensor(H1, u).gUp, fundamental_tensor(H0, u).gUp))


def _eta_routes(space, rng, count):
    L = space.lagrangian

    def f(u):
        e = eta_pushforward(L, u)
        return max(_rel(eta_coefficient_formula(L, u), e), _rel(eta_closed_form(L, u), e))
    return _worst(space, rng, count, f)


# -- structures ----------------------------------------------------------------------

def _contact_cubic(space, rng, count):
    return _worst(space, rng, count,
                  lambda u: contact_structure(space.gfield, space.connection, u).cubic_residual())


def _contact_rank(space, rng, count):
    target = 2 * space.shape.n
    return _worst(space, rng, count,
                  lambda u: abs(contact_structure(space.gfield, space.connection, u).rank() - target))


def _skew(space, rng, count):
    def f(u):
        G = n_lift(space.gfield, space.connection, u).G
        F = contact_structure(space.gfield, space.connection, u).F
        return skew_residual(G, F) / max(1.0, float(np.abs(G).max()))
    return _worst(space, rng, count, f)


def _kernel_image(space, rng, count):
    shape = space.shape

    def f(u):
        F = contact_structure(space.gfield, space.connection, u).F
        dk, r, kr, ir = kernel_image(F, shape)
        return max(abs(dk - (shape.k - 1) * shape.n), abs(r - 2 * shape.n), kr, ir)
    return _worst(space, rng, count, f)


def _two_form(space, rng, count):
    # dp ^ dx is expected only where N_ij is symmetric
    pts = space.sample(rng, count)
    w = dp_wedge_dx(space.shape)
    worst, used = 0.0, 0
    for u in pts:
        N = np.asarray(space.connection.at(u).Nlow, dtype=float)
        if np.abs(N - N.T).max() > SYMMETRY_TOL * max(1.0, float(np.abs(N).max())):
            continue
        used += 1
        theta = associated_two_form(space.gfield, space.connection, u, natural=True)
        worst = max(worst, float(np.abs(theta - w).max()))
    return worst, used


def _metric_free(space, rng, count):
    F = metric_free_contact(space.shape)
    cubic = float(np.abs(F.F @ F.F @ F.F + F.F).max())
    return max(cubic, abs(matrix_rank(F.F) - 2 * space.shape.n)), 1


def _lift_covariant(space, rng, count):
    D = _nlinear(space)
    return _worst(space, rng, count, lambda u: max(lift_covariant_residuals(D, u).values()))


# -- homogeneity ---------------------------------------------------------------------

def _cartan_euler(space, rng, count):
    K = space.extras["K"]
    k = space.shape.k
    return _worst(space, rng, count,
                  lambda u: abs(euler_operator(K, u) - k * K.value(u)) / max(1.0, abs(K.value(u))))


def _cartan_scaling(space, rng, count, scales=(0.5, 2.0, 3.0)):
    K = space.extras["K"]
    k = space.shape.k

    def f(u):
        k0 = K.value(u)
        return max(abs(K.value(_scaled(u, a, "combined")) - a ** k * k0) / abs(a ** k * k0)
                   for a in scales)
    return _worst(space, rng, count, f)


def _p_degree(space):
    u = space.sample(make_rng(0), 1)[0]
    h = space.H.value(u)
    return round(euler_operator(space.H, u, "p") / h) if h else None


def _p_euler(space, rng, count):
    deg = _p_degree(space)
    return _worst(space, rng, count,
                  lambda u: abs(euler_operator(space.H, u, "p") - deg * space.H.value(u))
                  / max(1.0, abs(space.H.value(u))))


def _is_p_homogeneous(space):
    if space.H is None:
        return False
    deg = _p_degree(space)
    if deg is None:
        return False
    u = space.sample(make_rng(1), 1)[0]
    h = space.H.value(u)
    return abs(euler_operator(space.H, u, "p") - deg * h) <= 1e-9 * max(1.0, abs(h))


# -- covariance ----------------------------------------------------------------------

def _chart(space, rng):
    return Diffeomorphism.random(space.shape.n, rng)


def _cov_tensor(space, rng, count):
    phi = _chart(space, rng)
    g_new = HamiltonMetric(pullback_field(space.H, phi))
    return _worst(space, rng, count,
                  lambda u: fundamental_tensor_covariance(space.gfield, g_new, phi, u))


def _cov_liouville(space, rng, count):
    phi = _chart(space, rng)
    anchor_new = prolongation_in_chart(space.gamma, space.shape, phi)
    if space.connection is space.anchor:
        conn_new = anchor_new
    else:
        conn_new = canonical_connection(pullback_field(space.H, phi), anchor_new)
    return _worst(space, rng, count,
                  lambda u: liouville_covariance(space.connection, conn_new, phi, u))


# -- registry ------------------------------------------------------------------------

def _kind(*names):
    return lambda space: space.kind in names


CHECKS = [
    Check("metric.inverse_pair", "metric", "lowered metric inverts g^ij", 1e-12, _inverse_pair, 50),
    Check("metric.symmetry", "metric", "symmetry of g^ij", 1e-12, _symmetry, 50),
    Check("metric.definite", "metric", "positive definite g^ij (count of non-positive eigenvalues)",
          0.0, _definite, 50, applies=lambda s: s.positive_definite),
    Check("metric.electrodynamics_tensor", "metric", "g^ij = gamma^ij / (m c)", 1e-12,
          _electro_tensor, 50, applies=_kind("electrodynamics")),
    Check("metric.reducible", "metric", "total symmetry of C^ijh (reducible to a Hamilton space)",
          1e-9, _reducibility, 20, applies=_has_H),
    Check("metric.non_reducible", "metric",
          "asymmetry of C^ijh (not reducible to a Hamilton space)", 1e-9, _reducibility, 20,
          relation=">", applies=lambda s: s.H is None),
    Check("connection.frame_duality", "connection", "adapted frame and coframe are dual", 1e-12,
          _frame_duality, 20),
    Check("connection.torsion", "connection", "symmetric coefficients of the canonical connection",
          1e-9, _torsion, 20),
    Check("connection.metricity", "connection", "covariant constancy of g^ij in h, v and w directions",
          1e-7, _metricity, 100),
    Check("connection.deflections", "connection", "deflection tensors of p against closed forms",
          1e-9, _deflections, 20),
    Check("connection.electrodynamics_h", "connection", "h-coefficients equal gamma Christoffel symbols",
          1e-9, _electro_coefficients, 20, applies=_kind("electrodynamics")),
    Check("connection.electrodynamics_w", "connection", "w-coefficients C_i^jh vanish", 1e-9,
          _electro_cw, 20, applies=_kind("electrodynamics")),
    Check("curvature.metric_antisymmetry", "curvature", "curvature is g-antisymmetric", 1e-6,
          _antisymmetry, 50),
    Check("dynamics.energy_reassembly", "dynamics", "top energy from Jacobi-Ostrogradski momenta",
          1e-9, _reassembly, 10, applies=_has_H),
    Check("dynamics.momentum_identity", "dynamics", "dE/dy(a) + a! dp_(a+1)/dt = 0", 1e-9,
          _momentum_identity, 10, applies=_has_H),
    Check("dynamics.zermelo_energies", "dynamics", "energies vanish under the Zermelo conditions",
          1e-8, _zermelo, 10, applies=_zermelo_space),
    Check("dynamics.energy_drift", "dynamics", "conservation of the top energy under RK4", 1e-6,
          _drift, 1, applies=_y1_only),
    Check("dynamics.convergence_ratio", "dynamics", "RK4 energy drift ratio under step halving",
          (12.0, 20.0), _ratio, 1, relation="within", applies=_kind("coupled_toy")),
    Check("dynamics.poisson_jacobi", "dynamics", "Jacobi identity of the top Poisson bracket", 1e-9,
          _jacobi, 5),
    Check("dynamics.poisson_leibniz", "dynamics", "Leibniz rule of every Poisson bracket", 1e-12,
          _leibniz, 5),
    Check("dynamics.poisson_antisymmetry", "dynamics", "antisymmetry of every Poisson bracket", 1e-12,
          _antisym_bracket, 5),
    Check("dynamics.sigma0_bracket", "dynamics",
          "bracket of order 0 from the symplectic form dp ^ dx", 1e-12, _sigma0, 5),
    Check("dynamics.horizontal_geodesic", "dynamics", "horizontal paths project to gamma geodesics",
          1e-9, _horizontal_geodesic, 2, applies=lambda s: s.gamma is not None and s.H is not None),
    Check("dynamics.w_path_affine", "dynamics", "w-paths are affine when C_i^jh vanishes", 1e-12,
          _w_affine, 2, applies=_kind("flat", "electrodynamics", "riemann_prolong")),
    Check("legendre.round_trip", "legendre", "inverse Legendre map undoes the Legendre map", 1e-8,
          _round_trip, 10, applies=_has_H),
    Check("legendre.dual_of_dual", "legendre", "dual of the dual returns the original function",
          1e-8, _dual_of_dual, 10, applies=_has_H),
    Check("legendre.anchor_independence", "legendre", "g^ij of the dual Hamiltonian ignores the anchor",
          1e-9, _anchor_independence, 10, applies=_has_H),
    Check("legendre.eta_routes", "legendre", "dual semispray eta by three routes", 1e-8, _eta_routes,
          10, applies=lambda s: s.lagrangian is not None),
    Check("structures.contact_cubic", "structures", "F^3 + F = 0", 1e-10, _contact_cubic, 20),
    Check("structures.contact_rank", "structures", "rank F = 2n", 0.0, _contact_rank, 20),
    Check("structures.metric_skew", "structures", "G(FX, Y) + G(X, FY) = 0", 1e-10, _skew, 20),
    Check("structures.kernel_image", "structures", "Ker F = V and Im F = H + W", 1e-10,
          _kernel_image, 20),
    Check("structures.two_form", "structures", "associated 2-form is dp ^ dx for symmetric N_ij",
          1e-10, _two_form, 20),
    Check("structures.metric_free", "structures", "metric-free F^3 + F = 0 with rank 2n", 1e-12,
          _metric_free, 1),
    Check("structures.lift_covariant", "structures", "lifted metric blocks are covariantly constant",
          1e-9, _lift_covariant, 10),
    Check("homogeneity.cartan_euler", "homogeneity", "Euler operator gives k K", 1e-9, _cartan_euler,
          50, applies=_kind("cartan_quadratic")),
    Check("homogeneity.cartan_scaling", "homogeneity", "K(a-scaled point) = a^k K", 1e-7,
          _cartan_scaling, 50, applies=_kind("cartan_quadratic")),
    Check("homogeneity.p_euler", "homogeneity", "Euler operator in p of a p-homogeneous H", 1e-9,
          _p_euler, 50, applies=_is_p_homogeneous),
    Check("covariance.fundamental_tensor", "covariance", "g^ij transforms as a d-tensor", 1e-8,
          _cov_tensor, 10, applies=_has_H),
    Check("covariance.liouville", "covariance", "z(a) transform as d-vectors", 1e-8, _cov_liouville,
          5, applies=_has_prolongation),
]


def checks_for(suite):
    if suite == "all":
        return list(CHECKS)
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")
    return [c for c in CHECKS if c.suite == suite]


def check_rng(seed, name):
    return make_rng((int(seed) * 1000003 + zlib.crc32(name.encode())) % (2 ** 63))


def run_check(space, check, seed, points=None):
    count = check.points if points is None else max(1, int(points))
    try:
        value, used = check.fn(space, check_rng(seed, check.name), count)
        value = float(value)
        return Row(check.name, check.anchor, space.kind, value, check.tolerance, check.relation,
                   _passes(value, check.tolerance, check.relation), int(used), int(seed))
    except Exception as exc:  # a failing module becomes a failed row
        return Row(check.name, check.anchor, space.kind, math.nan, check.tolerance, check.relation,
                   False, 0, int(seed), error=f"{type(exc).__name__}: {exc}")


def run_suite(space, suite="all", seed=0, points=None):
    """Report rows, sorted by check name, for every applicable check of ``suite``."""
    rows = []
    for check in checks_for(suite):
        try:
            applies = check.applies is None or check.applies(space)
        except Exception as exc:
            rows.append(Row(check.name, check.anchor, space.kind, math.nan, check.tolerance,
                            check.relation, False, 0, int(seed),
                            error=f"{type(exc).__name__}: {exc}"))
            continue
        if applies:
            rows.append(run_check(space, check, seed, points))
    return sorted(rows, key=lambda r: r.check)


def report_document(space, suite, seed, rows, points=None):
    return {"schema": SCHEMA,
            "space": {"kind": space.kind, "n": space.shape.n, "k": space.shape.k,
                      "params": {key: (v if isinstance(v, (int, float, str)) else str(v))
                                 for key, v in sorted(space.params.items())}},
            "suite": suite, "seed": int(seed), "points": points,
            "passed": all(r.passed for r in rows),
            "rows": [r.as_dict() for r in rows]}


def dumps(doc):
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def format_table(rows):
    """Plain-text table of rows."""
    head = f"{'check':36s} {'max residual':>13s} {'rel':>6s} {'tolerance':>17s} {'pts':>4s}  result"
    lines = [head, "-" * len(head)]
    for r in rows:
        tol = (f"[{r.tolerance[0]:g}, {r.tolerance[1]:g}]" if isinstance(r.tolerance, tuple)
               else f"{r.tolerance:.1e}")
        res = f"{r.max_residual:.3e}" if math.isfinite(r.max_residual) else str(r.max_residual)
        verdict = "pass" if r.passed else "FAIL"
        lines.append(f"{r.check:36s} {res:>13s} {r.relation:>6s} {tol:>17s} {r.points:>4d}  {verdict}")
        if r.error:
            lines.append(f"    error: {r.error}")
    return "\n".join(lines)
