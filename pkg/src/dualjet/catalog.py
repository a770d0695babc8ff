"""Built-in spaces: assembled Hamiltonians, metrics and connections.

Every builder takes a shape and a parameter mapping whose expression
entries use the expression language of :mod:`dualjet.expr`.  Matrices are
written row by row, rows separated by ';' and entries by ','.
"""

from dataclasses import dataclass, field

import numpy as np

from . import taylor
from .expr import parse_expr
from .fields import ScalarField, FieldDomainError
from .hamilton import canonical_connection
from .jetpoint import BundleShape, NULL_TOL, random_point
from .legendre import LagrangeSpace, _anchor_w
from .metric import HamiltonMetric, GeneralizedMetric, DegeneracyError
from .nonlinear import RiemannMetric, ProlongationConnection, zero_connection

KINDS = ("flat", "electrodynamics", "cartan_quadratic", "optics", "riemann_prolong", "custom_expr",
         "coupled_toy")

DEFAULTS = {
    "flat": {},
    "electrodynamics": {"gamma": "default", "b": "default", "m": 1.0, "c": 1.0, "e": 1.0},
    "cartan_quadratic": {"c_coef": 0.5, "d_coef": 0.3},
    "optics": {"gamma": "default", "refractive": "sqrt(2 + p1^2 + 0.5*x1^2)", "conformal": "1"},
    "riemann_prolong": {"gamma": "default"},
    "custom_expr": {"hamiltonian": "p1^2 + p2^2 + 0.3*p1*y1_1 + 0.5*(x1^2 + x2^2)"},
    "coupled_toy": {"eps": 0.5, "kappa": 1.0, "lam": 1.0},
}


# Connections of spaces singular at y(1) = 0 grow like |y(1)|^-4 near it;
# sampling keeps |y(1)| above this floor so roundoff stays well below tolerances.
Y1_FLOOR = 0.1


class SpaceError(ValueError):
    pass


@dataclass
class Space:
    kind: str
    shape: BundleShape
    params: dict
    gfield: object
    connection: object
    anchor: object
    H: object = None
    gamma: object = None
    lagrangian: object = None
    extras: dict = field(default_factory=dict)
    positive_definite: bool = False
    needs_y1: bool = False
    y1_floor: float = Y1_FLOOR

    def admissible(self, u):
        """Raise if u lies where the space's formulas are undefined."""
        if not u.off_null_section():
            raise SpaceError("point on the null section")
        if self.needs_y1 and np.linalg.norm(u.y[0]) <= max(self.y1_floor, NULL_TOL):
            raise SpaceError("y(1) vanishes at this point or is below the conditioning floor")
        check = self.extras.get("domain_check")
        if check is not None:
            check(u)
        self.gfield.pair(u)

    def sample(self, rng, count, scale=1.0, max_tries=1000):
        """``count`` admissible random points; rejected draws are skipped."""
        pts = []
        tries = 0
        while len(pts) < count:
            tries += 1
            if tries > max_tries * max(count, 1):
                raise SpaceError("could not sample admissible points")
            u = random_point(self.shape, rng, scale)
            try:
                self.admissible(u)
            except (SpaceError, DegeneracyError, FieldDomainError):
                continue
            pts.append(u)
        return pts


# -- parameter parsing ---------------------------------------------------------

def _matrix_exprs(text, n, allowed=("x",)):
    rows = [r for r in str(text).split(";")]
    if len(rows) != n:
        raise SpaceError(f"matrix needs {n} rows, got {len(rows)}")
    out = []
    for r in rows:
        ents = r.split(",")
        if len(ents) != n:
            raise SpaceError(f"matrix row needs {n} entries, got {len(ents)}")
        out.append([_expr(e, allowed) for e in ents])
    return out


def _expr(src, allowed):
    e = parse_expr(src.strip() if isinstance(src, str) else repr(float(src)))
    for v in e.variables():
        if v.block not in allowed:
            raise SpaceError(f"expression {e.to_string()!r} may only use {', '.join(allowed)} variables")
    return e


def _vector_exprs(text, n, allowed=("x",)):
    ents = str(text).split(",")
    if len(ents) != n:
        raise SpaceError(f"vector needs {n} entries, got {len(ents)}")
    return [_expr(e, allowed) for e in ents]


def _default_gamma(n, preset):
    """'conformal': e^{2 x1} delta; 'default': e^{2 x1}(delta + 0.2 sin(x2) on the off-diagonals)."""
    rows = []
    for i in range(n):
        ents = []
        for j in range(n):
            if i == j:
                ents.append("exp(2*x1)")
            elif preset == "default" and abs(i - j) == 1:
                ents.append(f"0.2*exp(2*x1)*sin(x{n if n > 1 else 1})")
            else:
                ents.append("0")
        rows.append(", ".join(ents))
    return "; ".join(rows)


def _default_b(n):
    return ", ".join(f"0.3*x{(i + 1) % n + 1}" for i in range(n))


def gamma_metric(text, n):
    if text in (None, "default", "conformal"):
        text = _default_gamma(n, text or "default")
    ents = _matrix_exprs(text, n)
    for i in range(n):
        for j in range(i):
            if ents[i][j] != ents[j][i]:
                raise SpaceError("gamma must be symmetric")
    return RiemannMetric(n, lambda x: [[e.evaluate(x) for e in row] for row in ents], name="gamma")


def _eval_vec(exprs, x):
    return taylor.array([e.evaluate(x) for e in exprs])


# -- builders ---------------------------------------------------------------------

def _hamilton_space(kind, shape, params, H, anchor, **kw):
    return Space(kind, shape, params, HamiltonMetric(H), canonical_connection(H, anchor), anchor,
                 H=H, **kw)


def build_flat(shape, params):
    n = shape.n
    H = ScalarField(shape, lambda x, ys, p: sum(p[i] * p[i] for i in range(n)), name="|p|^2")
    return _hamilton_space("flat", shape, params, H, zero_connection(shape), positive_definite=True)


def electrodynamics_hamiltonian(shape, gamma, bexprs, m, c, e):
    """H = (1/mc)(g^ij p_i p_j - (2e/m) g^ij p_i b_j + (e^2/m^2) g^ij b_i b_j)."""

    def fn(x, ys, p):
        gi = taylor.inv(gamma.jet_at(x))
        b = _eval_vec(bexprs, x)
        q = p - b * (e / m)
        return taylor.einsum("i,ij,j->", q, gi, q) * (1.0 / (m * c))

    return ScalarField(shape, fn, name="electrodynamics")


def electrodynamics_lagrangian(shape, gamma, bexprs, m, c, e, anchor):
    """L = mc gamma_ij z^i z^j + (2e/m) b_i z^i with z the anchored top velocity."""

    def fn(x, ys):
        z = ys[-1] + _anchor_w(anchor, shape, x, ys[:-1], ys[-1])
        g = gamma.jet_at(x)
        b = _eval_vec(bexprs, x)
        return taylor.einsum("i,ij,j->", z, g, z) * (m * c) + taylor.einsum("i,i->", b, z) * (2 * e / m)

    return LagrangeSpace(shape.n, shape.k, fn, name="electrodynamics-L")


def build_electrodynamics(shape, params):
    n = shape.n
    m, c, e = (float(params[key]) for key in ("m", "c", "e"))
    if min(m, c) <= 0:
        raise SpaceError("m and c must be positive")
    gamma = gamma_metric(params.get("gamma"), n)
    btext = _default_b(n) if params.get("b") in (None, "default") else params["b"]
    bexprs = _vector_exprs(btext, n)
    H = electrodynamics_hamiltonian(shape, gamma, bexprs, m, c, e)
    anchor = ProlongationConnection(gamma, shape)
    L = electrodynamics_lagrangian(shape, gamma, bexprs, m, c, e, anchor)
    return _hamilton_space("electrodynamics", shape, params, H, anchor, gamma=gamma, lagrangian=L,
                           extras={"b": bexprs, "constants": (m, c, e)}, positive_definite=True)


def cartan_tensor(shape, c_coef, d_coef):
    """0-homogeneous a^{ij}: (1 + |x|^2/4) delta + c y1 y1^T/|y1|^2 (+ d |y2|^2/|y1|^4 delta)."""
    n, k = shape.n, shape.k

    def fn(x, ys):
        y1 = ys[0]
        r2 = taylor.einsum("i,i->", y1, y1)
        base = 1.0 + taylor.einsum("i,i->", x, x) * 0.25
        if k >= 3:
            y2 = ys[1]
            base = base + taylor.einsum("i,i->", y2, y2) * d_coef / (r2 * r2)
        outer = taylor.einsum("i,j->ij", y1, y1) / r2 * c_coef
        eye = np.eye(n)
        return taylor.einsum("ij,->ij", eye, base) + outer if taylor.is_jet(base) else eye * base + outer

    return fn


def build_cartan(shape, params):
    c_coef, d_coef = float(params["c_coef"]), float(params["d_coef"])
    if c_coef <= -1 or d_coef < 0:
        raise SpaceError("cartan_quadratic needs c_coef > -1 and d_coef >= 0")
    a = cartan_tensor(shape, c_coef, d_coef)

    def K2(x, ys, p):
        return taylor.einsum("i,ij,j->", p, a(x, ys), p)

    H = ScalarField(shape, K2, name="K^2")

    def Kfn(x, ys, p):
        return taylor.sqrt(K2(x, ys, p))

    K = ScalarField(shape, Kfn, name="K")
    sp = _hamilton_space("cartan_quadratic", shape, params, H, zero_connection(shape),
                         extras={"K": K, "a": a}, positive_definite=True, needs_y1=True)
    return sp


def build_optics(shape, params):
    n, k = shape.n, shape.k
    gamma = gamma_metric(params.get("gamma"), n)
    nexpr = _expr(params["refractive"], ("x", "y", "p"))
    fexpr = _expr(params.get("conformal", "1"), ("x", "y"))
    fexpr_uses_y = any(v.block == "y" and v.alpha > 1 for v in fexpr.variables())
    if fexpr_uses_y:
        raise SpaceError("the conformal factor may depend on x and y(1) only")

    def parts(x, ys, p):
        f = fexpr.evaluate(x, ys, p)
        gi = taylor.inv(gamma.jet_at(x))
        gam_up = gi * f if not taylor.is_jet(f) else taylor.einsum("ij,->ij", gi, f)
        pch = taylor.einsum("ij,j->i", gam_up, p)
        nn = nexpr.evaluate(x, ys, p)
        sigma = 1.0 - 1.0 / (nn * nn)
        norm2 = taylor.einsum("i,i->", p, pch)
        return gam_up, pch, sigma, norm2

    def up(x, ys, p):
        gam_up, pch, sigma, _ = parts(x, ys, p)
        outer = taylor.einsum("i,j->ij", pch, pch)
        return gam_up + (taylor.einsum("ij,->ij", outer, sigma) if taylor.is_jet(sigma)
                         else outer * sigma)

    def down(x, ys, p):
        gam_up, _, sigma, norm2 = parts(x, ys, p)
        gam_dn = taylor.inv(gam_up)
        a = 1.0 + sigma * norm2
        fac = sigma / a
        outer = taylor.einsum("i,j->ij", p, p)
        return gam_dn - (taylor.einsum("ij,->ij", outer, fac) if taylor.is_jet(fac) else outer * fac)

    def energy(x, ys, p):
        _, _, sigma, norm2 = parts(x, ys, p)
        return (1.0 + sigma * norm2) * norm2

    def domain_check(u):
        val = float(np.asarray(taylor.value(nexpr.evaluate(u.x, list(u.y), u.p))))
        if not val > 1.0:
            raise FieldDomainError(f"refractive index {val:.6g} is not above 1", u)

    g = GeneralizedMetric(shape, up, down, name="optics")
    anchor = ProlongationConnection(gamma, shape)
    E = ScalarField(shape, energy, name="absolute energy")
    return Space("optics", shape, params, g, anchor, anchor, H=None, gamma=gamma,
                 extras={"energy": E, "domain_check": domain_check, "refractive": nexpr,
                         "energy_closed": lambda u: energy(u.x, list(u.y), u.p)},
                 positive_definite=True)


def build_riemann_prolong(shape, params):
    n = shape.n
    gamma = gamma_metric(params.get("gamma"), n)

    def fn(x, ys, p):
        gi = taylor.inv(gamma.jet_at(x))
        return taylor.einsum("i,ij,j->", p, gi, p)

    H = ScalarField(shape, fn, name="gamma^ij p_i p_j")
    conn = ProlongationConnection(gamma, shape)
    return Space("riemann_prolong", shape, params, HamiltonMetric(H), conn, conn, H=H, gamma=gamma,
                 positive_definite=True)


def build_custom(shape, params):
    from .fields import field_from_expr

    H = field_from_expr(params["hamiltonian"], shape, name="custom")
    anchor = zero_connection(shape)
    if params.get("gamma") not in (None, "none"):
        gamma = gamma_metric(params["gamma"], shape.n)
        anchor = ProlongationConnection(gamma, shape)
    return _hamilton_space("custom_expr", shape, params, H, anchor)


def build_coupled_toy(shape, params):
    from .dynamics import coupled_toy

    H = coupled_toy(shape, *(float(params[key]) for key in ("eps", "kappa", "lam")))
    return _hamilton_space("coupled_toy", shape, params, H, zero_connection(shape))


BUILDERS = {
    "flat": build_flat,
    "electrodynamics": build_electrodynamics,
    "cartan_quadratic": build_cartan,
    "optics": build_optics,
    "riemann_prolong": build_riemann_prolong,
    "custom_expr": build_custom,
    "coupled_toy": build_coupled_toy,
}


def build_space(kind, n=2, k=3, **params):
    """Assemble a catalog space; unspecified parameters take their defaults."""
    if kind not in BUILDERS:
        raise SpaceError(f"unknown space kind {kind!r}; choose from {', '.join(KINDS)}")
    shape = BundleShape(int(n), int(k))
    merged = dict(DEFAULTS[kind])
    unknown = set(params) - set(merged) - {"gamma"}
    if unknown:
        raise SpaceError(f"unknown parameters for {kind}: {', '.join(sorted(unknown))}")
    merged.update({key: v for key, v in params.items() if v is not None})
    return BUILDERS[kind](shape, merged)
