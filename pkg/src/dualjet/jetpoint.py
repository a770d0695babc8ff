"""Points of the dual k-bundle, fibre scalings and chart changes.

Coordinates are stored flat as ``u[block * n + i]`` with block 0 = x,
blocks 1..k-1 = y(1)..y(k-1) and block k = p.
"""

from dataclasses import dataclass, field

import numpy as np

from . import taylor

NULL_TOL = 1e-12
COND_MAX = 1e12


class ConditioningError(ValueError):
    pass


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class BundleShape:
    n: int
    k: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ShapeError(f"n must be a positive integer, got {self.n}")
        if int(self.k) != self.k or self.k < 2:
            raise ShapeError(f"order k must be an integer >= 2, got {self.k}")

    @property
    def dim(self):
        return (self.k + 1) * self.n

    def var(self, block, i):
        return block * self.n + i

    def block(self, b):
        """Flat variable indices of block ``b`` (0 = x, k = p)."""
        return list(range(b * self.n, (b + 1) * self.n))

    @property
    def x_vars(self):
        return self.block(0)

    def y_vars(self, alpha):
        return self.block(alpha)

    @property
    def p_vars(self):
        return self.block(self.k)

    def block_names(self):
        return ["H"] + [f"V{a}" for a in range(1, self.k)] + ["W"]


@dataclass(frozen=True)
class JetPoint:
    x: np.ndarray
    y: np.ndarray  # (k-1, n); y[a-1] holds y(a)
    p: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        n = x.shape[0]
        y = np.array(self.y, dtype=float).reshape(-1, n)
        p = np.array(self.p, dtype=float).reshape(-1)
        if p.shape[0] != n:
            raise ShapeError("x and p must have the same length")
        if y.shape[0] < 1:
            raise ShapeError("order k >= 2 needs at least one y block")
        for arr in (x, y, p):
            if not np.all(np.isfinite(arr)):
                raise ValueError("jet point entries must be finite")
            arr.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "p", p)

    @property
    def shape(self):
        return BundleShape(self.x.shape[0], self.y.shape[0] + 1)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def k(self):
        return self.y.shape[0] + 1

    def flat(self):
        return np.concatenate([self.x, self.y.reshape(-1), self.p])

    @staticmethod
    def from_flat(shape, u):
        u = np.asarray(u, dtype=float)
        n, k = shape.n, shape.k
        if u.shape != (shape.dim,):
            raise ShapeError(f"expected {shape.dim} coordinates, got {u.shape}")
        return JetPoint(u[:n], u[n:k * n].reshape(k - 1, n), u[k * n:])

    def off_null_section(self, tol=NULL_TOL):
        return max(np.abs(self.y).max(), np.abs(self.p).max()) > tol

    def replace(self, x=None, y=None, p=None):
        return JetPoint(self.x if x is None else x, self.y if y is None else y,
                        self.p if p is None else p)


@dataclass(frozen=True)
class DTensor:
    """Distinguished tensor components with slot metadata.

    ``slots`` is a tuple of ``(variance, block)`` pairs, variance in
    {'up', 'down'}, block in {'H', 'V1', ..., 'W'}.
    """

    components: np.ndarray
    slots: tuple = field(default=())

    def __post_init__(self):
        comp = np.asarray(self.components, dtype=float)
        slots = tuple(tuple(s) for s in self.slots)
        if comp.ndim != len(slots):
            raise ShapeError(f"rank {comp.ndim} does not match {len(slots)} slots")
        if comp.ndim and len(set(comp.shape)) != 1:
            raise ShapeError("all d-tensor slots must have the same dimension")
        for var, _ in slots:
            if var not in ("up", "down"):
                raise ShapeError(f"bad variance {var!r}")
        object.__setattr__(self, "components", comp)
        object.__setattr__(self, "slots", slots)

    @property
    def rank(self):
        return len(self.slots)


# -- scaling -----------------------------------------------------------------

def scale_fibers(u, a):
    """Fibre homothety y(a) -> a^alpha y(a), p -> a^k p."""
    if not np.isfinite(a) or a <= 0:
        raise ValueError(f"scaling factor must be positive, got {a}")
    k = u.k
    powers = a ** np.arange(1, k)
    return JetPoint(u.x, u.y * powers[:, None], u.p * a ** k)


# -- diffeomorphisms -------------------------------------------------------------

def _as_vector(out):
    if taylor.is_jet(out):
        return out
    if isinstance(out, (list, tuple)):
        return taylor.stack(list(out))
    return np.asarray(out, dtype=float)


class Diffeomorphism:
    """Chart change on M given by ``forward`` and ``inverse`` callables.

    Both callables take a length-n sequence (floats or jets) and return a
    length-n sequence built from arithmetic the Taylor engine understands.
    """

    def __init__(self, n, forward, inverse, name="custom"):
        self.n = n
        self._forward = forward
        self._inverse = inverse
        self.name = name

    def forward(self, x):
        return _as_vector(self._forward(x))

    def inverse(self, x):
        return _as_vector(self._inverse(x))

    def inverted(self):
        return Diffeomorphism(self.n, self._inverse, self._forward, name=f"inverse({self.name})")

    def jacobian(self, x, inverse=False):
        s = taylor.Jet.seed(np.asarray(x, dtype=float), 1)
        f = self.inverse(s) if inverse else self.forward(s)
        return f.grad().value

    @staticmethod
    def identity(n):
        f = lambda x: [x[i] for i in range(n)]
        return Diffeomorphism(n, f, f, name="identity")

    @staticmethod
    def linear(A, b=None):
        A = np.asarray(A, dtype=float)
        n = A.shape[0]
        b = np.zeros(n) if b is None else np.asarray(b, dtype=float)
        Ai = np.linalg.inv(A)

        def fwd(x):
            return [sum(A[i, j] * x[j] for j in range(n)) + b[i] for i in range(n)]

        def inv(x):
            return [sum(Ai[i, j] * (x[j] - b[j]) for j in range(n)) for i in range(n)]

        return Diffeomorphism(n, fwd, inv, name="linear")

    @staticmethod
    def random(n, rng, strength=0.3):
        """Linear map composed with a triangular nonlinear shear.

        The shear x_i + sum_{j>i} (c_ij x_j^2 + s_ij sin x_j) has an explicit
        inverse by back substitution.
        """
        A = np.eye(n) + strength * rng.uniform(-1, 1, (n, n))
        while abs(np.linalg.det(A)) < 0.2:
            A = np.eye(n) + strength * rng.uniform(-1, 1, (n, n))
        b = strength * rng.uniform(-1, 1, n)
        c = np.triu(strength * rng.uniform(-1, 1, (n, n)), 1)
        s = np.triu(strength * rng.uniform(-1, 1, (n, n)), 1)
        Ai = np.linalg.inv(A)

        def shear(x, i):
            out = 0.0
            for j in range(i + 1, n):
                out = out + c[i, j] * x[j] * x[j] + s[i, j] * taylor.sin(x[j])
            return out

        def fwd(x):
            t = [x[i] + shear(x, i) for i in range(n)]
            return [sum(A[i, j] * t[j] for j in range(n)) + b[i] for i in range(n)]

        def inv(xt):
            z = [sum(Ai[i, j] * (xt[j] - b[j]) for j in range(n)) for i in range(n)]
            x = [None] * n
            for i in range(n - 1, -1, -1):
                x[i] = z[i] - shear(x, i)
            return x

        return Diffeomorphism(n, fwd, inv, name="random-shear")


def _check_jacobian(J, x):
    sv = np.linalg.svd(J, compute_uv=False)
    if sv[-1] == 0 or sv[0] / sv[-1] > COND_MAX:
        raise ConditioningError(f"singular chart Jacobian at x = {np.asarray(x).tolist()}")


def transform_seed(U, shape, phi, offset=0):
    """Apply the induced chart change to identity jets ``U`` of a point.

    The coordinates must be seeded by the jet variables ``offset``,
    ``offset + 1``, ... (derivatives are taken with respect to them).
    Returns jets ``(xt, [yt1..], pt)``; the degree of yt(a) drops by a and
    that of pt by one.
    """
    n, k = shape.n, shape.k
    shift = lambda idx: [offset + v for v in idx]
    x = U[0:n]
    ys = [U[a * n:(a + 1) * n] for a in range(1, k)]
    p = U[k * n:(k + 1) * n]
    prev = phi.forward(x)
    xt = prev
    yts = []
    for alpha in range(1, k):
        acc = None
        for beta in range(1, alpha + 1):
            dprev = prev.grad(shift(shape.block(beta - 1)))
            term = taylor.einsum("ij,j->i", dprev, ys[beta - 1]) * float(beta)
            acc = term if acc is None else acc + term
        prev = acc * (1.0 / alpha)
        yts.append(prev)
    J = xt.grad(shift(shape.x_vars))
    pt = taylor.einsum("ji,j->i", taylor.inv(J), p)
    return xt, yts, pt


def transform_point(u, phi):
    """Image of ``u`` under the chart change induced by ``phi``."""
    shape = u.shape
    J = phi.jacobian(u.x)
    _check_jacobian(J, u.x)
    U = taylor.Jet.seed(u.flat(), shape.k - 1)
    xt, yts, pt = transform_seed(U, shape, phi)
    yv = np.array([y.value for y in yts]).reshape(shape.k - 1, shape.n)
    return JetPoint(xt.value, yv, pt.value)


def transform_dtensor(T, phi, u):
    """Transform d-tensor components from the chart at ``u`` to the image chart."""
    n = u.n
    if T.rank and T.components.shape[0] != n:
        raise ShapeError(f"d-tensor dimension {T.components.shape[0]} does not match n = {n}")
    J = phi.jacobian(u.x)
    _check_jacobian(J, u.x)
    Ji = np.linalg.inv(J)  # dx/dxt
    comp = T.components
    for slot, (var, _) in enumerate(T.slots):
        if var == "up":
            comp = np.moveaxis(np.tensordot(J, comp, axes=([1], [slot])), 0, slot)
        else:
            comp = np.moveaxis(np.tensordot(Ji, comp, axes=([0], [slot])), 0, slot)
    return DTensor(comp, T.slots)


# -- sampling ------------------------------------------------------------------

def make_rng(seed):
    """Counter-based generator so every run is reproducible from the seed."""
    return np.random.Generator(np.random.Philox(int(seed)))


def random_point(shape, rng, scale=1.0):
    while True:
        u = JetPoint.from_flat(shape, scale * rng.uniform(-1.0, 1.0, shape.dim))
        if u.off_null_section():
            return u
