"""Concrete continuous inverse algebras.

Three backends are provided:

``torus``
    Band-limited Fourier series on the d-torus.  An element is a dense,
    centred coefficient array of shape ``(2D+1,)*d`` where ``D`` is its
    current degree (the largest ``|k|_inf`` carried).
``nctorus``
    The smooth noncommutative 2-torus.  Same storage, product twisted by
    ``e_k e_l = exp(2 pi i theta k_2 l_1) e_{k+l}``.
``matrix``
    Dense complex ``d x d`` matrices; used as an exact finite oracle.

All kernels here operate on arrays carrying extra leading *batch* axes so
that :mod:`projmod.matrix` can reuse them for ``M_n(A)`` without Python
loops over entries.  Batch layouts are described by einsum letter strings
(``""`` for a single element, ``"ij"`` for a matrix, ``"i"`` for a vector).

Degree handling: products are exact and their degree is the sum of the
input degrees; a product whose degree would exceed ``max_degree`` raises
:class:`DegreeOverflow`.  Canonical pruning drops outer frequency
shells whose coefficients all lie below ``1e-15`` of the largest modulus
and, for results extending past the working band ``max_degree // 2``, a
tail beyond that band whose total l1 mass is below ``TAIL_EPS`` of the
element's norm.  Nothing of
non-negligible size is ever discarded outside the residual-verified
iterative solvers (inversion, idempotent retraction).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft as sfft

from .errors import BackendMismatch, DegreeOverflow, NotInvertible, UnknownDerivation

KINDS = ("torus", "nctorus", "matrix")

PRUNE_REL = 1e-15
TAIL_EPS = 1e-14
NS_MAX_ITER = 200


@dataclass(frozen=True)
class BackendConfig:
    kind: str
    dim: int
    theta: float = 0.0
    degree: int = 8
    max_degree: int | None = None
    tol: float = 1e-9

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.kind == "nctorus" and self.dim != 2:
            raise ValueError("the noncommutative torus is two-dimensional")
        if self.kind != "nctorus":
            object.__setattr__(self, "theta", 0.0)
        if self.degree < 1:
            raise ValueError("degree must be positive")
        if self.max_degree is None:
            object.__setattr__(self, "max_degree", 8 * self.degree)
        if self.max_degree < 2 * self.degree:
            raise ValueError("max_degree must be at least 2 * degree")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    @property
    def fourier(self) -> bool:
        return self.kind != "matrix"

    @property
    def commutative(self) -> bool:
        return self.kind == "torus"

    @property
    def core_ndim(self) -> int:
        return self.dim if self.fourier else 2

    @property
    def working_band(self) -> int:
        return self.max_degree // 2

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "theta": self.theta,
            "degree": self.degree,
            "max_degree": self.max_degree,
            "tol": self.tol,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BackendConfig":
        return cls(
            kind=d["kind"],
            dim=int(d["dim"]),
            theta=float(d.get("theta", 0.0)),
            degree=int(d.get("degree", 8)),
            max_degree=d.get("max_degree"),
            tol=float(d.get("tol", 1e-9)),
        )


# ---------------------------------------------------------------------------
# array kernels


def core_shape(cfg: BackendConfig, degree: int = 0) -> tuple:
    if cfg.fourier:
        return (2 * degree + 1,) * cfg.dim
    return (cfg.dim, cfg.dim)


def degree_of(cfg: BackendConfig, data: np.ndarray) -> int:
    if not cfg.fourier:
        return 0
    return (data.shape[-1] - 1) // 2


def unit_array(cfg: BackendConfig) -> np.ndarray:
    if cfg.fourier:
        out = np.zeros(core_shape(cfg, 0), dtype=complex)
        out[(0,) * cfg.dim] = 1.0
        return out
    return np.eye(cfg.dim, dtype=complex)


@lru_cache(maxsize=64)
def _kgrid(dim: int, degree: int) -> tuple:
    """Integer frequency arrays, one per axis, for a centred block."""
    ks = np.arange(-degree, degree + 1)
    return tuple(np.meshgrid(*([ks] * dim), indexing="ij"))


@lru_cache(maxsize=64)
def _kinf(dim: int, degree: int) -> np.ndarray:
    grids = _kgrid(dim, degree)
    out = np.abs(grids[0])
    for g in grids[1:]:
        out = np.maximum(out, np.abs(g))
    return out


def pad(cfg: BackendConfig, data: np.ndarray, degree: int) -> np.ndarray:
    """Embed a Fourier block into a larger centred block."""
    cur = degree_of(cfg, data)
    if not cfg.fourier or cur == degree:
        return data
    if degree < cur:
        raise ValueError("pad cannot shrink; use truncate")
    w = degree - cur
    widths = [(0, 0)] * (data.ndim - cfg.dim) + [(w, w)] * cfg.dim
    return np.pad(data, widths)


def truncate(cfg: BackendConfig, data: np.ndarray, band: int) -> np.ndarray:
    """Drop every mode with ``|k|_inf > band`` (explicit, lossy)."""
    cur = degree_of(cfg, data)
    if not cfg.fourier or cur <= band:
        return data
    cut = cur - band
    sl = (Ellipsis,) + (slice(cut, cut + 2 * band + 1),) * cfg.dim
    return np.ascontiguousarray(data[sl])


def align(cfg: BackendConfig, a: np.ndarray, b: np.ndarray):
    if not cfg.fourier:
        return a, b
    d = max(degree_of(cfg, a), degree_of(cfg, b))
    return pad(cfg, a, d), pad(cfg, b, d)


def canonical(cfg: BackendConfig, data: np.ndarray) -> np.ndarray:
    """Canonical pruning; see the module docstring.

    Only whole outer shells below the threshold are dropped; small interior
    coefficients are kept since zeroing them raises the rounding floor.
    """
    if not cfg.fourier:
        return data
    mags = np.abs(data)
    top = mags.max() if mags.size else 0.0
    if top == 0.0:
        return np.zeros(data.shape[:-cfg.dim] + core_shape(cfg, 0), dtype=complex)
    cur = degree_of(cfg, data)
    kinf = _kinf(cfg.dim, cur)
    batch_axes = tuple(range(data.ndim - cfg.dim))
    level = mags.max(axis=batch_axes) if batch_axes else mags
    need = int(kinf[level >= PRUNE_REL * top].max())
    data = truncate(cfg, data, need)
    band = cfg.working_band
    if need > band:
        kinf = _kinf(cfg.dim, need)
        mags = np.abs(data)
        tail = mags[..., kinf > band].sum()
        if tail <= TAIL_EPS * mags.sum():
            data = truncate(cfg, data, band)
    return data


def _fast_len(n: int) -> int:
    return sfft.next_fast_len(n, real=False)


def product(cfg: BackendConfig, A: np.ndarray, B: np.ndarray, subs: tuple) -> np.ndarray:
    """Bilinear product of batched elements.

    ``subs = (sa, sb, sc)`` are einsum letter strings for the batch axes of
    ``A``, ``B`` and the result, e.g. ``("ik", "kj", "ij")`` for a matrix
    product over the algebra.
    """
    sa, sb, sc = subs
    if not cfg.fourier:
        return np.einsum(f"{sa}ab,{sb}bc->{sc}ac", A, B)
    da, db = degree_of(cfg, A), degree_of(cfg, B)
    deg = da + db
    if deg > cfg.max_degree:
        raise DegreeOverflow(
            f"product degree {deg} exceeds max_degree {cfg.max_degree}"
        )
    if cfg.kind == "torus":
        out = _torus_product(cfg, A, B, subs, deg)
    else:
        out = _nctorus_product(cfg, A, B, subs, deg)
    return canonical(cfg, out)


def _torus_product(cfg, A, B, subs, deg):
    sa, sb, sc = subs
    d = cfg.dim
    L = _fast_len(2 * deg + 1)
    axes_a = tuple(range(A.ndim - d, A.ndim))
    axes_b = tuple(range(B.ndim - d, B.ndim))
    FA = sfft.fftn(A, s=(L,) * d, axes=axes_a)
    FB = sfft.fftn(B, s=(L,) * d, axes=axes_b)
    FA = FA.reshape(FA.shape[: A.ndim - d] + (-1,))
    FB = FB.reshape(FB.shape[: B.ndim - d] + (-1,))
    FC = np.einsum(f"{sa}z,{sb}z->{sc}z", FA, FB)
    FC = FC.reshape(FC.shape[:-1] + (L,) * d)
    C = sfft.ifftn(FC, axes=tuple(range(FC.ndim - d, FC.ndim)))
    sl = (Ellipsis,) + (slice(0, 2 * deg + 1),) * d
    return C[sl]


def _nctorus_product(cfg, A, B, subs, deg):
    # c[m] = sum_{k+l=m} a[k] b[l] exp(2 pi i theta k2 l1); exact along
    # axis 2 by shifting, FFT convolution along axis 1.
    sa, sb, sc = subs
    da, db = degree_of(cfg, A), degree_of(cfg, B)
    L = _fast_len(2 * deg + 1)
    FA = sfft.fft(A, n=L, axis=-2)
    l1 = np.arange(-db, db + 1)
    batch_c = None
    out = None
    for i2 in range(2 * da + 1):
        k2 = i2 - da
        if not np.any(A[..., i2]):
            continue
        phase = np.exp(2j * np.pi * cfg.theta * k2 * l1)[:, None]
        FB = sfft.fft(B * phase, n=L, axis=-2)
        term = np.einsum(f"{sa}x,{sb}xy->{sc}xy", FA[..., i2], FB)
        if out is None:
            batch_c = term.shape[:-2]
            out = np.zeros(batch_c + (L, 2 * deg + 1), dtype=complex)
        out[..., i2 : i2 + 2 * db + 1] += term
    if out is None:
        shape = np.einsum(
            f"{sa},{sb}->{sc}",
            np.zeros(A.shape[: A.ndim - 2]),
            np.zeros(B.shape[: B.ndim - 2]),
        ).shape
        return np.zeros(shape + (2 * deg + 1,) * 2, dtype=complex)
    C = sfft.ifft(out, axis=-2)
    return C[..., : 2 * deg + 1, :]


def adjoint(cfg: BackendConfig, A: np.ndarray) -> np.ndarray:
    """Entrywise involution (no transposition of batch axes)."""
    if not cfg.fourier:
        return np.conj(np.swapaxes(A, -1, -2))
    d = cfg.dim
    axes = tuple(range(A.ndim - d, A.ndim))
    out = np.conj(np.flip(A, axis=axes))
    if cfg.kind == "nctorus":
        # e_k^* = exp(2 pi i theta k1 k2) e_{-k}; after the flip index k holds
        # the coefficient of e_{-k}, so the phase uses (-k1)(-k2) = k1 k2.
        k1, k2 = _kgrid(2, degree_of(cfg, A))
        out = out * np.exp(2j * np.pi * cfg.theta * k1 * k2)
    return out


def entry_norms(cfg: BackendConfig, A: np.ndarray) -> np.ndarray:
    """Norm of every element in a batch: l1 of coefficients, or spectral."""
    if cfg.fourier:
        d = cfg.dim
        return np.abs(A).sum(axis=tuple(range(A.ndim - d, A.ndim)))
    return np.linalg.norm(A, ord=2, axis=(-2, -1))


def phase_multiplier(cfg: BackendConfig, degree: int, weights) -> np.ndarray:
    """``sum_j w_j k_j`` on a centred frequency block."""
    grids = _kgrid(cfg.dim, degree)
    out = np.zeros(grids[0].shape)
    for w, g in zip(weights, grids):
        if w:
            out = out + w * g
    return out


def grid_values(cfg: BackendConfig, A: np.ndarray, L: int) -> np.ndarray:
    """Evaluate band-limited functions at ``x_j = j / L`` on every axis."""
    d = cfg.dim
    deg = degree_of(cfg, A)
    if 2 * deg + 1 > L:
        raise ValueError("grid too coarse for this degree")
    ks = np.arange(-deg, deg + 1) % L
    buf = np.zeros(A.shape[: A.ndim - d] + (L,) * d, dtype=complex)
    idx = (Ellipsis,) + np.ix_(*([ks] * d))
    buf[idx] = A
    axes = tuple(range(buf.ndim - d, buf.ndim))
    return sfft.ifftn(buf, axes=axes) * (L**d)


def from_grid_values(cfg: BackendConfig, vals: np.ndarray, band: int) -> np.ndarray:
    """Fourier coefficients with ``|k|_inf <= band`` of grid samples."""
    d = cfg.dim
    L = vals.shape[-1]
    axes = tuple(range(vals.ndim - d, vals.ndim))
    F = sfft.fftn(vals, axes=axes) / (L**d)
    band = min(band, (L - 1) // 2)
    ks = np.arange(-band, band + 1) % L
    return F[(Ellipsis,) + np.ix_(*([ks] * d))]


def grid_inverse(cfg: BackendConfig, A: np.ndarray, n: int | None) -> np.ndarray:
    """Pointwise inversion on a uniform grid (commutative torus only).

    ``n`` is the matrix size for batches of shape ``(n, n) + core``, or
    ``None`` for a single element.  The result keeps modes up to the working
    band; the grid has ``4 * band + 1`` points per axis.
    """
    band = cfg.working_band
    d = cfg.dim
    L = max(4 * band + 1, 2 * degree_of(cfg, A) + 1)
    vals = grid_values(cfg, A, L)
    if n is None:
        smallest = np.abs(vals).min()
        if smallest < cfg.tol:
            raise NotInvertible(f"grid minimum modulus {smallest:.3e} below tol")
        inv = 1.0 / vals
    else:
        v = np.moveaxis(vals.reshape((n, n, -1)), -1, 0)
        smallest = np.linalg.svd(v, compute_uv=False)[:, -1].min()
        if smallest < cfg.tol:
            raise NotInvertible(f"grid minimum singular value {smallest:.3e} below tol")
        inv = np.moveaxis(np.linalg.inv(v), 0, -1).reshape((n, n) + (L,) * d)
    return canonical(cfg, from_grid_values(cfg, inv, band))


def _unit_batch(cfg, n):
    if n is None:
        return unit_array(cfg)
    eye = np.zeros((n, n) + core_shape(cfg, 0), dtype=complex)
    u = unit_array(cfg)
    for i in range(n):
        eye[i, i] = u
    return eye


def _batch_norm(cfg, A, n):
    norms = entry_norms(cfg, A)
    if n is None:
        return float(norms)
    return float(norms.sum(axis=1).max())


def newton_schulz_inverse(cfg: BackendConfig, A: np.ndarray, n: int | None,
                          max_iter: int = NS_MAX_ITER) -> np.ndarray:
    """Newton-Schulz iteration ``X <- X (2 - A X)`` seeded by a scaled adjoint.

    Iterates are truncated to the working band; the returned inverse is only
    trusted after the caller's residual check.
    """
    subs = ("", "", "") if n is None else ("ik", "kj", "ij")
    if n is None:
        star = adjoint(cfg, A)
        scale = _batch_norm(cfg, A, None) ** 2
    else:
        star = np.swapaxes(adjoint(cfg, A), 0, 1)
        norms = entry_norms(cfg, A)
        scale = float(norms.sum(axis=1).max() * norms.sum(axis=0).max())
    if scale == 0.0:
        raise NotInvertible("zero element")
    band = cfg.working_band
    one = _unit_batch(cfg, n)
    X = truncate(cfg, star / scale, band)
    best = math.inf
    stalled = 0
    for _ in range(max_iter):
        AX = product(cfg, A, X, subs)
        R, AX = align(cfg, one if not cfg.fourier else pad(cfg, one, degree_of(cfg, AX)), AX)
        R = R - AX
        res = _batch_norm(cfg, R, n)
        if not np.isfinite(res) or res > 1e12:
            raise NotInvertible("Newton-Schulz iteration diverged")
        if res < 0.5 * best:
            stalled = 0
        else:
            stalled += 1
        best = min(best, res)
        if res <= cfg.tol and stalled >= 1:
            break
        if stalled >= 8:
            break
        R = truncate(cfg, R, band)
        XR = product(cfg, X, R, subs)
        X, XR = align(cfg, X, XR)
        X = truncate(cfg, X + XR, band)
    if best > cfg.tol:
        raise NotInvertible(f"Newton-Schulz residual stalled at {best:.3e}")
    return canonical(cfg, X)


# ---------------------------------------------------------------------------
# elements


class AlgebraElement:
    """Immutable element of a backend algebra."""

    __slots__ = ("backend", "data")

    def __init__(self, backend: BackendConfig, data):
        data = np.array(data, dtype=complex)
        if data.shape[-backend.core_ndim:] != data.shape or data.ndim != backend.core_ndim:
            raise ValueError(f"bad element shape {data.shape}")
        if backend.fourier:
            if len(set(data.shape)) != 1 or data.shape[0] % 2 != 1:
                raise ValueError("Fourier data must be a centred odd cube")
            data = canonical(backend, data)
        elif data.shape != (backend.dim, backend.dim):
            raise ValueError(f"matrix backend expects shape {(backend.dim,) * 2}")
        data.flags.writeable = False
        object.__setattr__(self, "backend", backend)
        object.__setattr__(self, "data", data)

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraElement is immutable")

    # constructors
    @classmethod
    def unit(cls, backend):
        return cls(backend, unit_array(backend))

    @classmethod
    def zero(cls, backend):
        return cls(backend, np.zeros(core_shape(backend, 0), dtype=complex))

    @classmethod
    def scalar(cls, backend, c):
        return cls(backend, c * unit_array(backend))

    @classmethod
    def mode(cls, backend, k, coeff=1.0):
        """The character ``e_k`` (Fourier backends)."""
        if not backend.fourier:
            raise BackendMismatch("modes exist only on Fourier backends")
        k = tuple(int(x) for x in k)
        if len(k) != backend.dim:
            raise ValueError("multi-index has wrong length")
        deg = max(abs(x) for x in k)
        data = np.zeros(core_shape(backend, deg), dtype=complex)
        data[tuple(x + deg for x in k)] = coeff
        return cls(backend, data)

    @classmethod
    def from_coeffs(cls, backend, coeffs: dict):
        if not coeffs:
            return cls.zero(backend)
        deg = max(max(abs(x) for x in k) for k in coeffs)
        data = np.zeros(core_shape(backend, deg), dtype=complex)
        for k, c in coeffs.items():
            data[tuple(x + deg for x in k)] += c
        return cls(backend, data)

    # accessors
    @property
    def degree(self) -> int:
        return degree_of(self.backend, self.data)

    def coeff(self, k) -> complex:
        deg = self.degree
        if max(abs(x) for x in k) > deg:
            return 0j
        return complex(self.data[tuple(x + deg for x in k)])

    def coeffs(self) -> dict:
        """Nonzero coefficients keyed by multi-index (Fourier backends)."""
        deg = self.degree
        out = {}
        for idx in zip(*np.nonzero(self.data)):
            out[tuple(int(i) - deg for i in idx)] = complex(self.data[idx])
        return out

    def norm(self) -> float:
        return alg_norm(self)

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(self.backend, adjoint(self.backend, self.data))

    def truncate(self, band: int) -> "AlgebraElement":
        return AlgebraElement(self.backend, truncate(self.backend, self.data, band))

    # arithmetic
    def _check(self, other):
        if not isinstance(other, AlgebraElement):
            return False
        if other.backend != self.backend:
            raise BackendMismatch("elements live on different backends")
        return True

    def __add__(self, other):
        if not self._check(other):
            other = AlgebraElement.scalar(self.backend, other)
        a, b = align(self.backend, self.data, other.data)
        return AlgebraElement(self.backend, a + b)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement(self.backend, -self.data)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if self._check(other):
            return alg_mul(self, other)
        return AlgebraElement(self.backend, self.data * complex(other))

    def __rmul__(self, other):
        return AlgebraElement(self.backend, self.data * complex(other))

    def __truediv__(self, c):
        return AlgebraElement(self.backend, self.data / complex(c))

    def __repr__(self):
        if self.backend.fourier:
            return f"AlgebraElement({self.backend.kind}, degree={self.degree}, norm={self.norm():.3g})"
        return f"AlgebraElement(matrix, {self.data!r})"


def _same(a: AlgebraElement, b: AlgebraElement):
    if a.backend != b.backend:
        raise BackendMismatch("elements live on different backends")


def alg_mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    _same(a, b)
    return AlgebraElement(a.backend, product(a.backend, a.data, b.data, ("", "", "")))


def alg_norm(a: AlgebraElement) -> float:
    return float(entry_norms(a.backend, a.data))


def alg_invert(a: AlgebraElement) -> AlgebraElement:
    """Residual-verified inverse; raises :class:`NotInvertible`."""
    cfg = a.backend
    if cfg.commutative:
        data = grid_inverse(cfg, a.data, None)
    elif cfg.fourier:
        data = newton_schulz_inverse(cfg, a.data, None)
    else:
        data = _dense_inverse(a.data)
    b = AlgebraElement(cfg, data)
    one = AlgebraElement.unit(cfg)
    res = max(alg_norm(a * b - one), alg_norm(b * a - one))
    if res > cfg.tol:
        raise NotInvertible(f"inverse residual {res:.3e} exceeds tol {cfg.tol:.1e}")
    return b


def _dense_inverse(M):
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] <= 1e-13 * max(s[0], 1.0):
        raise NotInvertible(f"smallest singular value {s[-1]:.3e}")
    return np.linalg.inv(M)


def commutator(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a * b - b * a


# ---------------------------------------------------------------------------
# derivations and automorphisms


@dataclass(frozen=True, eq=False)
class Derivation:
    """``sum_j w_j delta_j + ad(c)`` with ``ad(c)(b) = c b - b c``.

    ``delta_j`` multiplies the coefficient at ``k`` by ``2 pi i k_j``; it is
    the generator of the translation flow.  The matrix backend only has the
    inner part.
    """

    backend: BackendConfig
    weights: tuple = ()
    inner: AlgebraElement | None = None

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if w and len(w) != self.backend.dim:
            raise ValueError("weights must have one entry per torus direction")
        if any(w) and not self.backend.fourier:
            raise UnknownDerivation("the matrix backend has no basis derivations")
        if not any(w):
            w = ()
        object.__setattr__(self, "weights", w)
        if self.inner is not None:
            _same(self.inner, AlgebraElement.unit(self.backend))
            if self.backend.commutative or self.inner.norm() == 0.0:
                object.__setattr__(self, "inner", None)

    @classmethod
    def basis(cls, backend, j):
        if not backend.fourier:
            raise UnknownDerivation("the matrix backend has no basis derivations")
        w = [0.0] * backend.dim
        w[j] = 1.0
        return cls(backend, tuple(w))

    @classmethod
    def ad(cls, a: AlgebraElement):
        return cls(a.backend, (), a)

    @classmethod
    def zero(cls, backend):
        return cls(backend)

    def weight_vector(self) -> np.ndarray:
        return np.array(self.weights) if self.weights else np.zeros(self.backend.dim)

    def is_zero(self) -> bool:
        return not self.weights and self.inner is None

    def __add__(self, other: "Derivation"):
        w = self.weight_vector() + other.weight_vector() if self.backend.fourier else ()
        inner = _add_opt(self.inner, other.inner)
        return Derivation(self.backend, tuple(w), inner)

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        c = float(c)
        w = tuple(self.weight_vector() * c) if self.backend.fourier else ()
        inner = None if self.inner is None else self.inner * c
        return Derivation(self.backend, w, inner)

    __rmul__ = __mul__

    def __call__(self, a: AlgebraElement) -> AlgebraElement:
        return apply_derivation(self, a)

    def bracket(self, other: "Derivation") -> "Derivation":
        """``[D, D'] = D D' - D' D``; basis parts commute."""
        terms = []
        if other.inner is not None and self.weights:
            terms.append(Derivation(self.backend, self.weights)(other.inner))
        if self.inner is not None and other.weights:
            terms.append(-Derivation(self.backend, other.weights)(self.inner))
        if self.inner is not None and other.inner is not None:
            terms.append(commutator(self.inner, other.inner))
        inner = None
        for t in terms:
            inner = _add_opt(inner, t)
        return Derivation(self.backend, (), inner)

    def __repr__(self):
        parts = [f"{w:g}*delta_{j + 1}" for j, w in enumerate(self.weights) if w]
        if self.inner is not None:
            parts.append("ad(c)")
        return "Derivation(" + (" + ".join(parts) or "0") + ")"


def _add_opt(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def derive_array(D: Derivation, A: np.ndarray, batch: str) -> np.ndarray:
    """Apply ``D`` entrywise to a batched array."""
    cfg = D.backend
    out = np.zeros_like(A)
    if D.weights:
        deg = degree_of(cfg, A)
        out = A * (2j * np.pi * phase_multiplier(cfg, deg, D.weights))
    if D.inner is not None:
        c = D.inner.data
        left = product(cfg, c, A, ("", batch, batch))
        right = product(cfg, A, c, (batch, "", batch))
        left, right = align(cfg, left, right)
        comm = left - right
        out, comm = align(cfg, out, comm)
        out = out + comm
    return canonical(cfg, out)


def apply_derivation(D: Derivation, a: AlgebraElement) -> AlgebraElement:
    _same(a, AlgebraElement.unit(D.backend))
    return AlgebraElement(a.backend, derive_array(D, a.data, ""))


@dataclass(frozen=True, eq=False)
class Automorphism:
    """``a -> u tau_v(a) u^{-1}``: a translation followed by an inner part.

    This normal form is closed under composition and inversion, so it also
    covers composition lists of translations and inner automorphisms.
    """

    backend: BackendConfig
    shift: tuple = ()
    u: AlgebraElement | None = None
    u_inv: AlgebraElement | None = None

    def __post_init__(self):
        v = tuple(float(x) for x in self.shift)
        if v and len(v) != self.backend.dim:
            raise ValueError("translation vector has wrong length")
        if any(v) and not self.backend.fourier:
            raise BackendMismatch("the matrix backend has no translations")
        if not any(v):
            v = ()
        object.__setattr__(self, "shift", v)
        if (self.u is None) != (self.u_inv is None):
            raise ValueError("inner part needs both u and u^-1")

    @classmethod
    def identity(cls, backend):
        return cls(backend)

    @classmethod
    def translation(cls, backend, v):
        return cls(backend, tuple(v))

    @classmethod
    def inner(cls, u: AlgebraElement, u_inv: AlgebraElement | None = None):
        if u_inv is None:
            u_inv = alg_invert(u)
        return cls(u.backend, (), u, u_inv)

    def is_identity(self) -> bool:
        return not self.shift and self.u is None

    def translation_vector(self) -> np.ndarray:
        return np.array(self.shift) if self.shift else np.zeros(self.backend.dim)

    def compose(self, other: "Automorphism") -> "Automorphism":
        """``self o other``."""
        if other.u is None:
            u, u_inv = self.u, self.u_inv
        else:
            tu = _translate(self.backend, self.shift, other.u)
            tui = _translate(self.backend, self.shift, other.u_inv)
            u = tu if self.u is None else self.u * tu
            u_inv = tui if self.u_inv is None else tui * self.u_inv
        v = tuple(self.translation_vector() + other.translation_vector()) if self.backend.fourier else ()
        return Automorphism(self.backend, v, u, u_inv)

    def __matmul__(self, other):
        return self.compose(other)

    def inverse(self) -> "Automorphism":
        v = tuple(-self.translation_vector()) if self.backend.fourier else ()
        if self.u is None:
            return Automorphism(self.backend, v)
        return Automorphism(
            self.backend,
            v,
            _translate(self.backend, v, self.u_inv),
            _translate(self.backend, v, self.u),
        )

    def __call__(self, a: AlgebraElement) -> AlgebraElement:
        return apply_automorphism(self, a)

    def __repr__(self):
        bits = []
        if self.shift:
            bits.append("tau" + str(tuple(round(x, 6) for x in self.shift)))
        if self.u is not None:
            bits.append("inner")
        return "Automorphism(" + (" o ".join(bits) or "id") + ")"


def _translate(cfg, v, a: AlgebraElement) -> AlgebraElement:
    if not v:
        return a
    return AlgebraElement(cfg, translate_array(cfg, v, a.data))


def translate_array(cfg: BackendConfig, v, A: np.ndarray) -> np.ndarray:
    if not v or not any(v):
        return A
    deg = degree_of(cfg, A)
    return A * np.exp(2j * np.pi * phase_multiplier(cfg, deg, v))


def automorph_array(psi: Automorphism, A: np.ndarray, batch: str) -> np.ndarray:
    """Apply ``psi`` entrywise to a batched array."""
    cfg = psi.backend
    out = translate_array(cfg, psi.shift, A)
    if psi.u is not None:
        out = product(cfg, psi.u.data, out, ("", batch, batch))
        out = product(cfg, out, psi.u_inv.data, (batch, "", batch))
    return out


def apply_automorphism(psi: Automorphism, a: AlgebraElement) -> AlgebraElement:
    _same(a, AlgebraElement.unit(psi.backend))
    return AlgebraElement(a.backend, automorph_array(psi, a.data, ""))
