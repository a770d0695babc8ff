"""Nonlinear connections on the dual k-bundle.

Coefficient matrices are stored ``[upper, lower]``: ``N[a][i, j]`` is
N(a)^i_j, ``M[a][i, j]`` is M(a)^i_j and ``Nlow[i, j]`` is N_ij.  Lists are
0-based, so ``N[0]`` holds N(1).

Connections are fields: ``local_at(U)`` evaluates their coefficient jets on a
coordinate seed ``U``; each class declares how many derivative orders it
consumes (``loss``) so callers can seed deep enough.
"""

from dataclasses import dataclass

import numpy as np

from . import taylor
from .fields import split
from .jetpoint import JetPoint
from .metric import regular_pair


def _mm(a, b):
    return taylor.einsum("ij,jk->ik", a, b)


def dual_from_primal(N):
    """M(a) = N(a) + sum_{b<a} M(b) N(a-b)."""
    M = []
    for a in range(len(N)):
        acc = N[a]
        for b in range(a):
            acc = acc + _mm(M[b], N[a - b - 1])
        M.append(acc)
    return M


def primal_from_dual(M):
    """N(a) = M(a) - sum_{b<a} M(b) N(a-b)."""
    N = []
    for a in range(len(M)):
        acc = M[a]
        for b in range(a):
            acc = acc - _mm(M[b], N[a - b - 1])
        N.append(acc)
    return N


@dataclass
class LocalConnection:
    """Coefficients of a nonlinear connection about one point (jets or arrays)."""

    shape: object
    M: list
    N: list
    Nlow: object

    @property
    def degree(self):
        items = self.M + self.N + [self.Nlow]
        ds = [it.d for it in items if taylor.is_jet(it)]
        return min(ds) if ds else None

    def truncate(self, d):
        tr = lambda a: a.truncate(d) if taylor.is_jet(a) else a
        return LocalConnection(self.shape, [tr(a) for a in self.M], [tr(a) for a in self.N],
                               tr(self.Nlow))

    def values(self):
        v = lambda a: np.array(taylor.value(a), dtype=float)
        return LocalConnection(self.shape, [v(a) for a in self.M], [v(a) for a in self.N],
                               v(self.Nlow))

    # -- adapted frame -----------------------------------------------------
    def frame(self):
        """E[A, c]: natural components c of the adapted basis vector A."""
        return _assemble(self, self._frame_blocks())

    def coframe(self):
        """Theta[A, c]: natural components c of the adapted covector A."""
        return _assemble(self, self._coframe_blocks())

    def _frame_blocks(self):
        n, k = self.shape.n, self.shape.k
        blocks = []
        # delta/delta x^i = d_x - N(a)^j_i d_{y(a) j} + N_ij d_{p_j}
        for a in range(1, k):
            blocks.append((0, a, -1.0, self.N[a - 1], True))
        blocks.append((0, k, 1.0, self.Nlow, False))
        # delta/delta y(a)^i = d - sum_b N(b)^j_i d_{y(a+b) j}
        for a in range(1, k):
            for b in range(1, k - a):
                blocks.append((a, a + b, -1.0, self.N[b - 1], True))
        return blocks

    def _coframe_blocks(self):
        n, k = self.shape.n, self.shape.k
        blocks = []
        # delta y(a)^i = dy(a)^i + sum_b M(b)^i_j dy(a-b)^j
        for a in range(1, k):
            for b in range(1, a + 1):
                blocks.append((a, a - b, 1.0, self.M[b - 1], False))
        # delta p_i = dp_i - N_ji dx^j
        blocks.append((k, 0, -1.0, self.Nlow, True))
        return blocks

    # -- adapted derivatives -----------------------------------------------
    def adapted(self, grad):
        """Adapted derivatives from a natural gradient (last shape axis = m)."""
        E = self.frame()
        if not taylor.is_jet(grad):
            return np.einsum("AC,...C->...A", np.asarray(taylor.value(E)), grad)
        lead = "abdefg"[: grad.ndim - 1]
        return taylor.einsum(f"AC,{lead}C->{lead}A", E, grad)

    def liouville(self, ys):
        """Liouville d-vectors z(1)..z(k-1) for y-values ``ys`` (arrays or jets)."""
        out = []
        for a in range(1, self.shape.k):
            acc = ys[a - 1] * float(a)
            for b in range(1, a):
                acc = acc + taylor.einsum("ij,j->i", self.M[a - b - 1], ys[b - 1]) * float(b)
            out.append(acc * (1.0 / a))
        return out


def _assemble(loc, blocks):
    n, k = loc.shape.n, loc.shape.k
    m = (k + 1) * n
    items = loc.M + loc.N + [loc.Nlow]
    jets = [it for it in items if taylor.is_jet(it)]
    if jets:
        nv, d = jets[0].nv, min(j.d for j in jets)
        size = taylor.n_monomials(nv, d)
        c = np.zeros((m, m, size))
        c[np.arange(m), np.arange(m), 0] = 1.0
        for rb, cb, sign, mat, transpose in blocks:
            mc = taylor.asjet(mat, jets[0]).truncate(d).c
            if transpose:
                mc = mc.transpose(1, 0, 2)
            c[rb * n:(rb + 1) * n, cb * n:(cb + 1) * n, :] += sign * mc
        return taylor.Jet(c, nv, d)
    E = np.eye(m)
    for rb, cb, sign, mat, transpose in blocks:
        mat = np.asarray(mat, dtype=float)
        E[rb * n:(rb + 1) * n, cb * n:(cb + 1) * n] += sign * (mat.T if transpose else mat)
    return E


# In the frame rows for x, entry [x_i, y(a)_j] = -N(a)^j_i, hence the transpose
# flag: the stored matrix is [j, i].  For delta p_i the entry [p_i, x_j] is
# -N_ji, again a transpose of the stored [i, j] layout.


def frame_brackets(loc):
    """Structure coefficients c[A, B, C] with [e_A, e_B] = c[A, B, C] e_C.

    Computed from the natural components of the frame fields; the jet degree
    of the result is one below that of ``loc``.
    """
    E = loc.frame()
    Th = loc.coframe().truncate(E.d - 1)
    dE = E.grad()  # [B, c, d] = d_d E[B, c]
    EE = taylor.einsum("Ad,Bcd->ABc", E, dE)
    br = EE - EE.transpose(1, 0, 2)
    return taylor.einsum("ABc,Cc->ABC", br, Th)


# -- connection fields ---------------------------------------------------------

class NonlinearConnection:
    shape = None
    loss = 0       # derivative orders consumed by the full coefficient set
    loss_dual = 0  # orders consumed by the dual coefficients alone

    def local_at(self, U):
        raise NotImplementedError

    def dual_at(self, U):
        return self.local_at(U).M

    def dual_full(self, U):
        """Dual coefficients at the full degree of an affine seed ``U``.

        An affine seed is re-expressed exactly at a higher degree first, so
        the derivatives the dual coefficients consume cost nothing.
        """
        if not taylor.is_jet(U) or not self.loss_dual or not taylor.is_affine(U):
            return self.dual_at(U)
        M = self.dual_at(taylor.raise_affine(U, U.d + self.loss_dual))
        return [taylor.asjet(m, U).truncate(U.d) if taylor.is_jet(m) else m for m in M]

    def local(self, u, degree=0):
        U = taylor.Jet.seed(u.flat(), degree + self.loss)
        return self.local_at(U).truncate(degree)

    def at(self, u):
        return self.local(u, 0).values()


class FunctionalConnection(NonlinearConnection):
    """Coefficients given by a callable of (x, ys, p).

    ``fn`` returns ``(mats, Nlow)`` where ``mats`` lists k-1 matrices that are
    primal N(a) (``kind='primal'``) or dual M(a) (``kind='dual'``).
    """

    def __init__(self, shape, fn, kind="primal", name="functional"):
        if kind not in ("primal", "dual"):
            raise ValueError("kind must be 'primal' or 'dual'")
        self.shape = shape
        self.fn = fn
        self.kind = kind
        self.name = name

    def local_at(self, U):
        mats, Nlow = self.fn(*split(U, self.shape))
        lift = lambda a: taylor.asjet(taylor.array(a) if isinstance(a, (list, tuple)) else a, U)
        mats = [lift(a) for a in mats]
        Nlow = lift(Nlow)
        if len(mats) != self.shape.k - 1:
            raise ValueError(f"expected {self.shape.k - 1} coefficient matrices")
        if self.kind == "primal":
            return LocalConnection(self.shape, dual_from_primal(mats), mats, Nlow)
        return LocalConnection(self.shape, mats, primal_from_dual(mats), Nlow)


def zero_connection(shape):
    n = shape.n
    z = np.zeros((n, n))
    return FunctionalConnection(shape, lambda x, ys, p: ([z] * (shape.k - 1), z), name="zero")


class DualSemispray:
    """Dual k-semispray given by callables xi(x, ys, p) and eta(x, ys, p)."""

    loss = 0

    def __init__(self, shape, xi, eta, name="semispray"):
        self.shape = shape
        self.xi = xi
        self.eta = eta
        self.name = name

    def jets_at(self, U):
        x, ys, p = split(U, self.shape)
        lift = lambda a: taylor.asjet(taylor.array(a) if isinstance(a, (list, tuple)) else a, U)
        return lift(self.xi(x, ys, p)), lift(self.eta(x, ys, p))

    def values(self, u):
        xi, eta = self.jets_at(taylor.Jet.seed(u.flat(), self.loss))
        return np.asarray(taylor.value(xi)), np.asarray(taylor.value(eta))


class SemisprayConnection(NonlinearConnection):
    """M(a)^i_j = -d xi^i / d y(k-a)^j and N_ij = delta eta_i / delta y(1)^j."""

    def __init__(self, S):
        self.S = S
        self.shape = S.shape
        self.loss = S.loss + 1
        self.loss_dual = S.loss + 1

    def local_at(self, U):
        shape = self.shape
        k = shape.k
        xi, eta = self.S.jets_at(U)
        dxi = xi.grad()
        n = shape.n
        M = [-dxi[:, (k - a) * n:(k - a + 1) * n] for a in range(1, k)]
        N = primal_from_dual(M)
        deta = eta.grad()  # [i, c]
        # delta/delta y(1)^j = d_{y(1) j} - sum_b N(b)^l_j d_{y(1+b) l}
        Nlow = deta[:, n:2 * n]
        for b in range(1, k - 1):
            Nlow = Nlow - taylor.einsum("il,lj->ij", deta[:, (1 + b) * n:(2 + b) * n], N[b - 1])
        return LocalConnection(shape, M, N, Nlow)


def connection_from_semispray(S, u=None):
    """Connection field induced by a dual semispray; numeric values if ``u`` given."""
    conn = SemisprayConnection(S)
    return conn if u is None else conn.at(u)


# -- Riemannian prolongation ---------------------------------------------------

class RiemannMetric:
    """Metric gamma_ij(x) on M; ``fn(x)`` returns an n x n nested list or array."""

    def __init__(self, n, fn, name="gamma"):
        self.n = n
        self.fn = fn
        self.name = name

    def jet_at(self, X):
        out = self.fn(X)
        out = taylor.array(out) if isinstance(out, (list, tuple)) else out
        if taylor.is_jet(X):
            out = taylor.asjet(out, X)
        return out

    def value(self, x):
        return np.asarray(taylor.value(self.jet_at(np.asarray(x, dtype=float))), dtype=float)

    def christoffel_at(self, U, x_vars):
        """gamma^i_{jm} from a seed; loses one degree."""
        g = self.jet_at(U[x_vars[0]:x_vars[-1] + 1])
        gi = taylor.inv(g.truncate(g.d - 1))
        dg = g.grad(x_vars)  # [s, m, j] = d_j g_sm
        # lower[s, j, m] = d_j g_sm + d_m g_js - d_s g_jm
        low = dg.transpose(0, 2, 1) + dg.transpose(1, 0, 2) - dg.transpose(2, 0, 1)
        return taylor.einsum("is,sjm->ijm", gi, low) * 0.5


def prolongation_dual(gamma, U, shape):
    """Dual coefficients M(1..k-1) from the Christoffel symbols of gamma."""
    n, k = shape.n, shape.k
    x_vars = shape.x_vars
    chris = gamma.christoffel_at(U, x_vars)
    ys = [U[a * n:(a + 1) * n] for a in range(1, k)]
    M1 = taylor.einsum("ijm,m->ij", chris, ys[0])
    M = [M1]
    for a in range(2, k):
        prev = M[-1]
        dprev = prev.grad()
        acc = None
        for b in range(1, a + 1):
            # Gamma = sum_b b y(b) d/dy(b-1)
            blk = dprev[:, :, (b - 1) * n:b * n]
            term = taylor.einsum("ijl,l->ij", blk, ys[b - 1]) * float(b)
            acc = term if acc is None else acc + term
        acc = acc + _mm(M1, prev)
        M.append(acc * (1.0 / a))
    return M


class ProlongationConnection(NonlinearConnection):
    """Dual coefficients prolonged from gamma; N_ij = (d M(1)^h_j / d y(1)^i) p_h."""

    def __init__(self, gamma, shape):
        self.gamma = gamma
        self.shape = shape
        self.loss_dual = shape.k - 1
        self.loss = max(shape.k - 1, 2)

    def dual_at(self, U):
        return prolongation_dual(self.gamma, U, self.shape)

    def local_at(self, U):
        n, k = self.shape.n, self.shape.k
        M = self.dual_at(U)
        N = primal_from_dual(M)
        p = U[k * n:(k + 1) * n]
        dM1 = M[0].grad(self.shape.y_vars(1))  # [h, j, i] = d M1^h_j / d y1^i
        Nlow = taylor.einsum("hji,h->ij", dM1, p)
        return LocalConnection(self.shape, M, N, Nlow)


def prolong_riemann(gamma, u):
    """Numeric dual coefficients M(1..k-1) at ``u``."""
    shape = u.shape
    vals = gamma.value(u.x)
    regular_pair(vals, u, what="base metric")
    U = taylor.Jet.seed(u.flat(), shape.k - 1)
    return [np.array(M.value) for M in prolongation_dual(gamma, U, shape)]


# -- numeric conveniences --------------------------------------------------------

def adapted_derivative(N, f, u):
    """(delta f/delta x, delta f/delta y(a), d f/dp) of a scalar field at u."""
    shape = u.shape
    n, k = shape.n, shape.k
    loc = N.at(u)
    g = f.gradient(u)
    d = loc.adapted(g)
    return d[:n], d[n:k * n].reshape(k - 1, n), d[k * n:]


def liouville_d_vectors(N, u):
    loc = N.at(u)
    return [np.asarray(z) for z in loc.liouville(list(u.y))]
