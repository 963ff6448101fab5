"""Matrices and column vectors over a backend algebra.

``MatrixElement.data`` has shape ``(n, n) + core`` and ``AlgebraVector.data``
has shape ``(n,) + core``; every product goes through the batched kernels of
:mod:`projmod.algebra`, so no Python loop runs over entries.
"""
from __future__ import annotations

import numpy as np

from . import algebra as alg
from .algebra import AlgebraElement, Automorphism, BackendConfig, Derivation
from .errors import BackendMismatch, BadDimension, NotInvertible


def _freeze(a):
    a.flags.writeable = False
    return a


def _check_data(cfg: BackendConfig, data: np.ndarray, lead: int):
    core = data.shape[lead:]
    if len(core) != cfg.core_ndim:
        raise ValueError(f"bad core shape {core}")
    if cfg.fourier:
        if len(set(core)) != 1 or core[0] % 2 != 1:
            raise ValueError("Fourier data must be a centred odd cube")
    elif core != (cfg.dim, cfg.dim):
        raise ValueError("matrix backend core shape mismatch")


class MatrixElement:
    """Element of ``M_n(A)``; immutable."""

    __slots__ = ("backend", "data")

    def __init__(self, backend: BackendConfig, data):
        data = np.array(data, dtype=complex)
        if data.ndim < 2 or data.shape[0] != data.shape[1]:
            raise BadDimension("matrix data must start with (n, n)")
        _check_data(backend, data, 2)
        data = alg.canonical(backend, data)
        object.__setattr__(self, "backend", backend)
        object.__setattr__(self, "data", _freeze(data))

    def __setattr__(self, name, value):
        raise AttributeError("MatrixElement is immutable")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def degree(self) -> int:
        return alg.degree_of(self.backend, self.data)

    # constructors
    @classmethod
    def identity(cls, backend, n):
        data = np.zeros((n, n) + alg.core_shape(backend, 0), dtype=complex)
        u = alg.unit_array(backend)
        for i in range(n):
            data[i, i] = u
        return cls(backend, data)

    @classmethod
    def zero(cls, backend, n):
        return cls(backend, np.zeros((n, n) + alg.core_shape(backend, 0), dtype=complex))

    @classmethod
    def constant(cls, backend, M):
        """Matrix of scalars ``M[i, j] * 1``."""
        M = np.asarray(M, dtype=complex)
        u = alg.unit_array(backend)
        return cls(backend, M[(...,) + (None,) * u.ndim] * u)

    @classmethod
    def unit(cls, backend, n, i, j):
        M = np.zeros((n, n))
        M[i, j] = 1.0
        return cls.constant(backend, M)

    @classmethod
    def from_entries(cls, rows):
        rows = [list(r) for r in rows]
        cfg = rows[0][0].backend
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise BadDimension("entries must form a square array")
        if any(e.backend != cfg for r in rows for e in r):
            raise BackendMismatch("entries live on different backends")
        deg = max(e.degree for r in rows for e in r)
        data = np.stack([np.stack([alg.pad(cfg, e.data, deg) for e in r]) for r in rows])
        return cls(cfg, data)

    @classmethod
    def diag(cls, elems):
        elems = list(elems)
        cfg = elems[0].backend
        zero = AlgebraElement.zero(cfg)
        return cls.from_entries(
            [[e if i == j else zero for j in range(len(elems))] for i, e in enumerate(elems)]
        )

    def entry(self, i, j) -> AlgebraElement:
        return AlgebraElement(self.backend, self.data[i, j])

    def entries(self):
        return [[self.entry(i, j) for j in range(self.n)] for i in range(self.n)]

    # arithmetic
    def _check(self, other):
        if other.backend != self.backend:
            raise BackendMismatch("matrices live on different backends")
        if other.n != self.n:
            raise BadDimension(f"size mismatch {self.n} vs {other.n}")

    def __add__(self, other):
        if not isinstance(other, MatrixElement):
            other = MatrixElement.identity(self.backend, self.n) * other
        return mat_add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return MatrixElement(self.backend, -self.data)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, MatrixElement):
            return mat_mul(self, other)
        if isinstance(other, AlgebraVector):
            return mat_vec(self, other)
        if isinstance(other, AlgebraElement):
            return mat_right_scalar(self, other)
        return mat_scale(self, other)

    __matmul__ = __mul__

    def __rmul__(self, c):
        if isinstance(c, AlgebraElement):
            return mat_left_scalar(c, self)
        return mat_scale(self, c)

    def norm(self) -> float:
        return mat_norm(self)

    def adjoint(self) -> "MatrixElement":
        return MatrixElement(
            self.backend, np.swapaxes(alg.adjoint(self.backend, self.data), 0, 1)
        )

    def truncate(self, band: int) -> "MatrixElement":
        return MatrixElement(self.backend, alg.truncate(self.backend, self.data, band))

    def column(self, j) -> "AlgebraVector":
        return AlgebraVector(self.backend, self.data[:, j])

    def to_dense(self) -> np.ndarray:
        """Matrix backend only: the ``(n m) x (n m)`` complex matrix."""
        if self.backend.fourier:
            raise BackendMismatch("dense view exists only on the matrix backend")
        n, m = self.n, self.backend.dim
        return self.data.transpose(0, 2, 1, 3).reshape(n * m, n * m)

    @classmethod
    def from_dense(cls, backend, M, n):
        m = backend.dim
        return cls(backend, np.asarray(M).reshape(n, m, n, m).transpose(0, 2, 1, 3))

    def __repr__(self):
        return f"MatrixElement(n={self.n}, {self.backend.kind}, degree={self.degree}, norm={self.norm():.3g})"


class AlgebraVector:
    """Column vector in ``A^n``; ``A`` acts on the right."""

    __slots__ = ("backend", "data")

    def __init__(self, backend: BackendConfig, data):
        data = np.array(data, dtype=complex)
        if data.ndim < 1:
            raise BadDimension("vector data must start with (n,)")
        _check_data(backend, data, 1)
        data = alg.canonical(backend, data)
        object.__setattr__(self, "backend", backend)
        object.__setattr__(self, "data", _freeze(data))

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraVector is immutable")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @classmethod
    def from_elements(cls, elems):
        elems = list(elems)
        cfg = elems[0].backend
        if any(e.backend != cfg for e in elems):
            raise BackendMismatch("entries live on different backends")
        deg = max(e.degree for e in elems)
        return cls(cfg, np.stack([alg.pad(cfg, e.data, deg) for e in elems]))

    @classmethod
    def basis(cls, backend, n, i):
        data = np.zeros((n,) + alg.core_shape(backend, 0), dtype=complex)
        data[i] = alg.unit_array(backend)
        return cls(backend, data)

    def entry(self, i) -> AlgebraElement:
        return AlgebraElement(self.backend, self.data[i])

    def entries(self):
        return [self.entry(i) for i in range(self.n)]

    def _combine(self, other, sign):
        if other.backend != self.backend:
            raise BackendMismatch("vectors live on different backends")
        if other.n != self.n:
            raise BadDimension("vector length mismatch")
        a, b = alg.align(self.backend, self.data, other.data)
        return a + sign * b

    def __add__(self, other):
        return type(self)._rebuild(self, self._combine(other, 1))

    def __sub__(self, other):
        return type(self)._rebuild(self, self._combine(other, -1))

    def __neg__(self):
        return type(self)._rebuild(self, -self.data)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return vec_right_mul(self, other)
        return type(self)._rebuild(self, self.data * complex(other))

    def __rmul__(self, c):
        return type(self)._rebuild(self, self.data * complex(c))

    def _rebuild(self, data):
        return AlgebraVector(self.backend, data)

    def norm(self) -> float:
        return float(alg.entry_norms(self.backend, self.data).sum())

    def plain(self) -> "AlgebraVector":
        return AlgebraVector(self.backend, self.data)

    def __repr__(self):
        return f"AlgebraVector(n={self.n}, {self.backend.kind}, norm={self.norm():.3g})"


# ---------------------------------------------------------------------------
# operations


def mat_add(X: MatrixElement, Y: MatrixElement) -> MatrixElement:
    X._check(Y)
    a, b = alg.align(X.backend, X.data, Y.data)
    return MatrixElement(X.backend, a + b)


def mat_scale(X: MatrixElement, c) -> MatrixElement:
    return MatrixElement(X.backend, X.data * complex(c))


def mat_mul(X: MatrixElement, Y: MatrixElement) -> MatrixElement:
    X._check(Y)
    return MatrixElement(X.backend, alg.product(X.backend, X.data, Y.data, ("ik", "kj", "ij")))


def mat_vec(X: MatrixElement, v: AlgebraVector) -> AlgebraVector:
    if X.backend != v.backend:
        raise BackendMismatch("matrix and vector live on different backends")
    if X.n != v.n:
        raise BadDimension("matrix/vector size mismatch")
    return AlgebraVector(X.backend, alg.product(X.backend, X.data, v.data, ("ik", "k", "i")))


def mat_right_scalar(X: MatrixElement, a: AlgebraElement) -> MatrixElement:
    if X.backend != a.backend:
        raise BackendMismatch("matrix and scalar live on different backends")
    return MatrixElement(X.backend, alg.product(X.backend, X.data, a.data, ("ij", "", "ij")))


def mat_left_scalar(a: AlgebraElement, X: MatrixElement) -> MatrixElement:
    if X.backend != a.backend:
        raise BackendMismatch("matrix and scalar live on different backends")
    return MatrixElement(X.backend, alg.product(X.backend, a.data, X.data, ("", "ij", "ij")))


def vec_right_mul(v: AlgebraVector, a: AlgebraElement) -> AlgebraVector:
    if v.backend != a.backend:
        raise BackendMismatch("vector and scalar live on different backends")
    return v._rebuild(alg.product(v.backend, v.data, a.data, ("i", "", "i")))


def mat_norm(X: MatrixElement) -> float:
    """Max row sum of entry norms (submultiplicative for the l1 surrogate)."""
    return float(alg.entry_norms(X.backend, X.data).sum(axis=1).max())


def mat_invert(X: MatrixElement) -> MatrixElement:
    """Residual-verified inverse in ``M_n(A)``; raises :class:`NotInvertible`."""
    cfg = X.backend
    if cfg.commutative:
        Y = MatrixElement(cfg, alg.grid_inverse(cfg, X.data, X.n))
    elif cfg.fourier:
        Y = MatrixElement(cfg, alg.newton_schulz_inverse(cfg, X.data, X.n))
    else:
        Y = MatrixElement.from_dense(cfg, _dense_inverse(X.to_dense()), X.n)
    one = MatrixElement.identity(cfg, X.n)
    res = max(mat_norm(X * Y - one), mat_norm(Y * X - one))
    if res > cfg.tol:
        raise NotInvertible(f"inverse residual {res:.3e} exceeds tol {cfg.tol:.1e}")
    return Y


def _dense_inverse(M):
    try:
        s = np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NotInvertible(str(exc)) from exc
    if s[-1] <= 1e-13 * max(s[0], 1.0):
        raise NotInvertible(f"smallest singular value {s[-1]:.3e}")
    return np.linalg.inv(M)


def mat_apply_derivation(D: Derivation, X: MatrixElement) -> MatrixElement:
    if D.backend != X.backend:
        raise BackendMismatch("derivation and matrix live on different backends")
    return MatrixElement(X.backend, alg.derive_array(D, X.data, "ij"))


def vec_apply_derivation(D: Derivation, v: AlgebraVector) -> AlgebraVector:
    if D.backend != v.backend:
        raise BackendMismatch("derivation and vector live on different backends")
    return AlgebraVector(v.backend, alg.derive_array(D, v.data, "i"))


def mat_apply_automorphism(psi: Automorphism, X: MatrixElement) -> MatrixElement:
    if psi.backend != X.backend:
        raise BackendMismatch("automorphism and matrix live on different backends")
    return MatrixElement(X.backend, alg.automorph_array(psi, X.data, "ij"))


def vec_apply_automorphism(psi: Automorphism, v: AlgebraVector) -> AlgebraVector:
    if psi.backend != v.backend:
        raise BackendMismatch("automorphism and vector live on different backends")
    return AlgebraVector(v.backend, alg.automorph_array(psi, v.data, "i"))


def commutator(X: MatrixElement, Y: MatrixElement) -> MatrixElement:
    return X * Y - Y * X


def embed_tilde(X: MatrixElement, N: int) -> MatrixElement:
    """Top-left block embedding ``M_n(A) -> M_N(A)``, zeros elsewhere."""
    if N < X.n:
        raise BadDimension(f"cannot embed size {X.n} into {N}")
    data = np.zeros((N, N) + X.data.shape[2:], dtype=complex)
    data[: X.n, : X.n] = X.data
    return MatrixElement(X.backend, data)


def top_left(X: MatrixElement, n: int) -> MatrixElement:
    """Left inverse of :func:`embed_tilde`."""
    if n > X.n:
        raise BadDimension(f"block size {n} exceeds {X.n}")
    return MatrixElement(X.backend, X.data[:n, :n])


def block(rows) -> MatrixElement:
    """Assemble a block matrix from equally sized square blocks."""
    rows = [list(r) for r in rows]
    cfg = rows[0][0].backend
    deg = max(b.degree for r in rows for b in r)
    padded = [[alg.pad(cfg, b.data, deg) for b in r] for r in rows]
    return MatrixElement(cfg, np.concatenate([np.concatenate(r, axis=1) for r in padded], axis=0))


def embed_vector(v: AlgebraVector, N: int) -> AlgebraVector:
    if N < v.n:
        raise BadDimension(f"cannot embed length {v.n} into {N}")
    data = np.zeros((N,) + v.data.shape[1:], dtype=complex)
    data[: v.n] = v.data
    return AlgebraVector(v.backend, data)
