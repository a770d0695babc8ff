"""Truncated multivariate Taylor arithmetic.

A ``Jet`` stores the Taylor coefficients of an array-valued function about a
base point, in the displacement variables ``du_0 .. du_{nv-1}``, truncated at
total degree ``d``.  Coefficients live on the last axis, ordered by monomial
degree, so truncating to a lower degree is a prefix slice.

The coefficient of a monomial ``prod du_v^e_v`` is the Taylor coefficient, i.e.
the mixed partial derivative divided by ``prod e_v!``.
"""

import itertools
import math
from functools import lru_cache

import numpy as np


class DomainError(ValueError):
    """Elementary function evaluated outside its domain."""


class _Tables:
    """Monomial bookkeeping for ``nv`` variables up to degree ``d``."""

    def __init__(self, nv, d):
        self.nv = nv
        self.d = d
        exps = [tuple([0] * nv)]
        sizes = [1]
        for deg in range(1, d + 1):
            for combo in itertools.combinations_with_replacement(range(nv), deg):
                e = [0] * nv
                for v in combo:
                    e[v] += 1
                exps.append(tuple(e))
            sizes.append(len(exps))
        self.sizes = sizes
        self.size = sizes[-1]
        self.exps = np.array(exps, dtype=np.int64).reshape(len(exps), nv)
        self.degree = self.exps.sum(axis=1)
        self.index = {e: i for i, e in enumerate(exps)}
        self.fact = np.array([math.prod(math.factorial(a) for a in e) for e in exps], dtype=float)

        # derivative maps: monomial m (e_v > 0) -> m / du_v with factor e_v
        self.deriv = []
        for v in range(nv):
            src, dst, fac = [], [], []
            for i, e in enumerate(exps):
                if e[v] > 0 and self.degree[i] <= d:
                    f = list(e)
                    f[v] -= 1
                    src.append(i)
                    dst.append(self.index[tuple(f)])
                    fac.append(float(e[v]))
            self.deriv.append((np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64),
                               np.array(fac)))

        # product pairs (i, j) -> k grouped by k
        I, J = [], []
        starts = []
        for k, e in enumerate(exps):
            starts.append(len(I))
            for a in itertools.product(*[range(x + 1) for x in e]):
                b = tuple(x - y for x, y in zip(e, a))
                I.append(self.index[a])
                J.append(self.index[b])
        self.I = np.array(I, dtype=np.int64)
        self.J = np.array(J, dtype=np.int64)
        self.starts = np.array(starts, dtype=np.int64)


@lru_cache(maxsize=None)
def tables(nv, d):
    return _Tables(nv, d)


def n_monomials(nv, d):
    return math.comb(nv + d, d)


def _is_jet(a):
    return isinstance(a, Jet)


class Jet:
    """Array-valued truncated Taylor polynomial in ``nv`` variables."""

    __slots__ = ("c", "nv", "d")
    __array_ufunc__ = None

    def __init__(self, c, nv, d):
        self.c = c
        self.nv = nv
        self.d = d

    # -- construction -------------------------------------------------
    @staticmethod
    def const(value, nv, d):
        value = np.asarray(value, dtype=float)
        c = np.zeros(value.shape + (n_monomials(nv, d),))
        c[..., 0] = value
        return Jet(c, nv, d)

    @staticmethod
    def seed(point, d):
        """Identity jets of the coordinates about ``point``."""
        point = np.asarray(point, dtype=float)
        nv = point.shape[0]
        c = np.zeros((nv, n_monomials(nv, d)))
        c[:, 0] = point
        if d > 0:
            c[np.arange(nv), 1 + np.arange(nv)] = 1.0
        return Jet(c, nv, d)

    def lift(self, value):
        """Constant jet compatible with self."""
        return Jet.const(value, self.nv, self.d)

    # -- basic properties ---------------------------------------------
    @property
    def shape(self):
        return self.c.shape[:-1]

    @property
    def ndim(self):
        return self.c.ndim - 1

    @property
    def value(self):
        return self.c[..., 0]

    def __len__(self):
        return self.c.shape[0]

    def __repr__(self):
        return f"Jet(shape={self.shape}, nv={self.nv}, d={self.d})"

    def truncate(self, d):
        if d > self.d:
            raise ValueError(f"cannot raise jet degree {self.d} to {d}")
        if d == self.d:
            return self
        return Jet(self.c[..., : n_monomials(self.nv, d)], self.nv, d)

    def copy(self):
        return Jet(self.c.copy(), self.nv, self.d)

    # -- indexing / reshaping -----------------------------------------
    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        return Jet(self.c[key + (slice(None),)], self.nv, self.d)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return Jet(self.c.reshape(tuple(shape) + (self.c.shape[-1],)), self.nv, self.d)

    def transpose(self, *axes):
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        elif len(axes) == 1 and isinstance(axes[0], tuple):
            axes = axes[0]
        return Jet(self.c.transpose(tuple(axes) + (self.ndim,)), self.nv, self.d)

    @property
    def T(self):
        return self.transpose()

    def swapaxes(self, a, b):
        a = a % self.ndim
        b = b % self.ndim
        return Jet(np.swapaxes(self.c, a, b), self.nv, self.d)

    def sum(self, axis=None):
        if axis is None:
            axis = tuple(range(self.ndim))
        if isinstance(axis, int):
            axis = (axis,)
        axis = tuple(a % self.ndim for a in axis)
        return Jet(self.c.sum(axis=axis), self.nv, self.d)

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other):
        if _is_jet(other):
            if other.nv != self.nv:
                raise ValueError("jets over different variable sets")
            d = min(self.d, other.d)
            return self.truncate(d), other.truncate(d)
        return self, None

    def __add__(self, other):
        a, b = self._coerce(other)
        if b is not None:
            return Jet(a.c + b.c, a.nv, a.d)
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(a.shape, other.shape)
        c = np.array(np.broadcast_to(a.c, shape + (a.c.shape[-1],)))
        c[..., 0] += other
        return Jet(c, a.nv, a.d)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.nv, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if b is not None:
            return _mul(a, b)
        other = np.asarray(other, dtype=float)
        return Jet(a.c * other[..., None], a.nv, a.d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if _is_jet(other):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        if isinstance(n, (int, np.integer)):
            return ipow(self, int(n))
        raise TypeError("jets support integer powers only; use exp/log")

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    # -- calculus -----------------------------------------------------
    def diff(self, v):
        """Partial derivative in variable ``v``; lowers the degree by one."""
        if self.d == 0:
            raise ValueError("cannot differentiate a degree-0 jet")
        t = tables(self.nv, self.d)
        src, dst, fac = t.deriv[v]
        out = np.zeros(self.shape + (n_monomials(self.nv, self.d - 1),))
        out[..., dst] = self.c[..., src] * fac
        return Jet(out, self.nv, self.d - 1)

    def grad(self, variables=None):
        """Stack of partials along a new trailing shape axis."""
        if variables is None:
            variables = range(self.nv)
        variables = list(variables)
        if self.d == 0:
            raise ValueError("cannot differentiate a degree-0 jet")
        t = tables(self.nv, self.d)
        m1 = n_monomials(self.nv, self.d - 1)
        out = np.zeros(self.shape + (len(variables), m1))
        for a, v in enumerate(variables):
            src, dst, fac = t.deriv[v]
            out[..., a, dst] = self.c[..., src] * fac
        return Jet(out, self.nv, self.d - 1)

    def derivative(self, multi):
        """Numeric mixed partial at the base point; ``multi`` lists variables."""
        e = [0] * self.nv
        for v in multi:
            e[v] += 1
        if sum(e) > self.d:
            raise ValueError("derivative order exceeds jet degree")
        t = tables(self.nv, self.d)
        i = t.index[tuple(e)]
        return self.c[..., i] * t.fact[i]

    # -- elementary functions -----------------------------------------
    def _series(self, coefs):
        # Horner in the nilpotent part eps = self - value
        eps = Jet(self.c.copy(), self.nv, self.d)
        eps.c[..., 0] = 0.0
        res = Jet.const(coefs[-1], self.nv, self.d)
        for r in range(len(coefs) - 2, -1, -1):
            res = _mul(res, eps) + coefs[r]
        return res

    def reciprocal(self):
        a0 = self.value
        if np.any(a0 == 0):
            raise DomainError("division by zero")
        coefs = [(-1.0) ** r * a0 ** (-r - 1) for r in range(self.d + 1)]
        return self._series(coefs)

    def sqrt(self):
        a0 = self.value
        if np.any(a0 < 0) or (self.d > 0 and np.any(a0 == 0)):
            raise DomainError("sqrt of a nonpositive argument")
        coefs = [_binom_half(r) * a0 ** (0.5 - r) for r in range(self.d + 1)]
        return self._series(coefs)

    def exp(self):
        e0 = np.exp(self.value)
        return self._series([e0 / math.factorial(r) for r in range(self.d + 1)])

    def log(self):
        a0 = self.value
        if np.any(a0 <= 0):
            raise DomainError("log of a nonpositive argument")
        coefs = [np.log(a0)] + [(-1.0) ** (r + 1) / (r * a0 ** r) for r in range(1, self.d + 1)]
        return self._series(coefs)

    def sin(self):
        s, c = np.sin(self.value), np.cos(self.value)
        cyc = [s, c, -s, -c]
        return self._series([cyc[r % 4] / math.factorial(r) for r in range(self.d + 1)])

    def cos(self):
        s, c = np.sin(self.value), np.cos(self.value)
        cyc = [c, -s, -c, s]
        return self._series([cyc[r % 4] / math.factorial(r) for r in range(self.d + 1)])


def _binom_half(r):
    out = 1.0
    for j in range(r):
        out *= (0.5 - j) / (j + 1)
    return out


def _mul(a, b):
    t = tables(a.nv, a.d)
    prod = a.c[..., t.I] * b.c[..., t.J]
    return Jet(np.add.reduceat(prod, t.starts, axis=-1), a.nv, a.d)


def ipow(a, n):
    if n < 0:
        return ipow(a, -n).reciprocal() if _is_jet(a) else 1.0 / ipow(a, -n)
    if not _is_jet(a):
        return np.asarray(a, dtype=float) ** n
    result = None
    base = a
    while n:
        if n & 1:
            result = base if result is None else _mul(result, base)
        n >>= 1
        if n:
            base = _mul(base, base)
    return a.lift(np.ones(a.shape)) if result is None else result


# -- contractions --------------------------------------------------------

def _free_letter(subs):
    for ch in "ZYXWVUTSRQPONMLK":
        if ch not in subs:
            return ch
    raise ValueError("no free einsum letter")


def einsum(subs, *ops):
    """Einstein summation over any mix of jets and plain arrays.

    Operands are folded left to right, so only pairwise products are formed.
    """
    lhs, rhs = subs.replace(" ", "").split("->")
    terms = lhs.split(",")
    if len(terms) != len(ops):
        raise ValueError("operand count mismatch")
    if len(ops) == 1:
        a = ops[0]
        if _is_jet(a):
            z = _free_letter(subs)
            return Jet(np.einsum(f"{terms[0]}{z}->{rhs}{z}", a.c), a.nv, a.d)
        return np.einsum(subs, a)
    acc, acc_t = ops[0], terms[0]
    for k in range(1, len(ops)):
        nxt_t = terms[k]
        if k == len(ops) - 1:
            out_t = rhs
        else:
            later = set("".join(terms[k + 1:]) + rhs)
            seen = []
            for ch in acc_t + nxt_t:
                if ch in later and ch not in seen:
                    seen.append(ch)
            out_t = "".join(seen)
        acc = _einsum2(f"{acc_t},{nxt_t}->{out_t}", acc, ops[k])
        acc_t = out_t
    return acc


def _einsum2(subs, a, b):
    z = _free_letter(subs)
    lhs, rhs = subs.split("->")
    ta, tb = lhs.split(",")
    ja, jb = _is_jet(a), _is_jet(b)
    if ja and jb:
        a, b = a._coerce(b)
        t = tables(a.nv, a.d)
        prod = np.einsum(f"{ta}{z},{tb}{z}->{rhs}{z}", a.c[..., t.I], b.c[..., t.J])
        return Jet(np.add.reduceat(prod, t.starts, axis=-1), a.nv, a.d)
    if ja:
        return Jet(np.einsum(f"{ta}{z},{tb}->{rhs}{z}", a.c, np.asarray(b, dtype=float)), a.nv, a.d)
    if jb:
        return Jet(np.einsum(f"{ta},{tb}{z}->{rhs}{z}", np.asarray(a, dtype=float), b.c), b.nv, b.d)
    return np.einsum(subs, a, b)


def matmul(a, b):
    na = a.ndim if _is_jet(a) else np.ndim(a)
    nb = b.ndim if _is_jet(b) else np.ndim(b)
    sa = "ij"[2 - na:] if na <= 2 else None
    sb = "jk"[:nb] if nb <= 2 else None
    if sa is None or sb is None:
        raise ValueError("matmul supports vectors and matrices only")
    out = (sa[:-1] if na == 2 else "") + (sb[1:] if nb == 2 else "")
    return einsum(f"{sa},{sb}->{out}", a, b)


def inv(A):
    """Inverse of a square matrix (jet or array)."""
    if not _is_jet(A):
        return np.linalg.inv(A)
    A0 = A.value
    inv0 = np.linalg.inv(A0)
    n = A0.shape[0]
    E = einsum("ij,jk->ik", inv0, A - A0)
    eye = np.eye(n)
    S = A.lift(eye)
    for _ in range(A.d):
        S = -einsum("ij,jk->ik", E, S) + eye
    return einsum("ij,jk->ik", S, inv0)


def solve(A, b):
    return matmul(inv(A), b)


# -- dispatching helpers ---------------------------------------------------

def asjet(value, like):
    if _is_jet(value):
        return value
    return Jet.const(value, like.nv, like.d)


def stack(items, axis=0):
    """Stack floats, arrays and jets; returns a jet if any item is one."""
    items = list(items)
    jets = [it for it in items if _is_jet(it)]
    if not jets:
        return np.stack([np.asarray(it, dtype=float) for it in items], axis=axis)
    d = min(j.d for j in jets)
    nv = jets[0].nv
    cs = []
    for it in items:
        if _is_jet(it):
            cs.append(it.truncate(d).c)
        else:
            cs.append(Jet.const(it, nv, d).c)
    shape = np.broadcast_shapes(*[c.shape for c in cs])
    cs = [np.broadcast_to(c, shape) for c in cs]
    if axis < 0:
        axis = axis + len(shape)
    return Jet(np.stack(cs, axis=axis), nv, d)


def array(nested):
    """Build an array (or jet) from a nested list of scalars and scalar jets."""
    if isinstance(nested, (list, tuple)):
        return stack([array(it) for it in nested], axis=0)
    return nested


def value(a):
    return a.value if _is_jet(a) else np.asarray(a, dtype=float)


def _float_guard(name, ok, a):
    if not np.all(ok):
        raise DomainError(f"{name} of an invalid argument {np.asarray(a)!r}")


def sqrt(a):
    if _is_jet(a):
        return a.sqrt()
    _float_guard("sqrt", np.asarray(a) >= 0, a)
    return np.sqrt(a)


def exp(a):
    return a.exp() if _is_jet(a) else np.exp(a)


def log(a):
    if _is_jet(a):
        return a.log()
    _float_guard("log", np.asarray(a) > 0, a)
    return np.log(a)


def sin(a):
    return a.sin() if _is_jet(a) else np.sin(a)


def cos(a):
    return a.cos() if _is_jet(a) else np.cos(a)


def is_jet(a):
    return _is_jet(a)


# -- changing the variable set -----------------------------------------------

@lru_cache(maxsize=None)
def _embed_map(nv, d, nv_big, d_big):
    small = tables(nv, d)
    big = tables(nv_big, d_big)
    pad = (0,) * (nv_big - nv)
    return np.array([big.index[tuple(e) + pad] for e in small.exps.tolist()], dtype=np.int64)


def extend(J, nv_big, d_big):
    """Re-express ``J`` in ``nv_big`` >= nv variables; the extra ones come last.

    Coefficients above the original degree are zero, which is exact for the
    lower-degree part only.
    """
    d = min(J.d, d_big)
    J = J.truncate(d)
    c = np.zeros(J.shape + (n_monomials(nv_big, d_big),))
    c[..., _embed_map(J.nv, d, nv_big, d_big)] = J.c
    return Jet(c, nv_big, d_big)


def restrict(J, nv):
    """Set every variable past the first ``nv`` to zero."""
    idx = _embed_map(nv, J.d, J.nv, J.d)
    return Jet(J.c[..., idx], nv, J.d)


def extra_seed(nv, m, d, values=None):
    """Identity jets of the ``m`` trailing variables of an (nv + m)-variable space."""
    base = np.zeros(nv + m)
    if values is not None:
        base[nv:] = values
    return Jet.seed(base, d)[nv:]


def is_affine(J):
    """True when no coefficient above degree one is nonzero."""
    return J.d <= 1 or not np.any(J.c[..., J.nv + 1:])


def raise_affine(J, d):
    """Same affine jet carried at degree ``d`` (exact because it is affine)."""
    if not is_affine(J):
        raise ValueError("only affine jets can be raised in degree")
    c = np.zeros(J.shape + (n_monomials(J.nv, d),))
    m = min(J.c.shape[-1], J.nv + 1, c.shape[-1])
    c[..., :m] = J.c[..., :m]
    return Jet(c, J.nv, d)


@lru_cache(maxsize=None)
def _hessian_map(nv):
    t = tables(nv, 2)
    rows, cols, idx, fac = [], [], [], []
    for i in range(nv):
        for j in range(i, nv):
            e = [0] * nv
            e[i] += 1
            e[j] += 1
            rows.append(i)
            cols.append(j)
            idx.append(t.index[tuple(e)])
            fac.append(2.0 if i == j else 1.0)
    return np.array(rows), np.array(cols), np.array(idx), np.array(fac)


def second_order(J):
    """(value, gradient, Hessian) at the base point of a scalar jet of degree >= 2."""
    J = J.truncate(2)
    if J.d < 2 or J.ndim != 0:
        raise ValueError("second_order needs a scalar jet of degree at least 2")
    nv = J.nv
    rows, cols, idx, fac = _hessian_map(nv)
    h = np.zeros((nv, nv))
    h[rows, cols] = J.c[idx] * fac
    h[cols, rows] = h[rows, cols]
    return float(J.c[0]), J.c[1:nv + 1].copy(), h
