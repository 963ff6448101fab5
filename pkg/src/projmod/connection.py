"""Connections on ``E = p A^n`` evaluated on a finite basis of derivations.

A connection is stored as its offset ``alpha`` from the Levi-Civita
connection ``s -> p (D.s)``; ``alpha`` is a corner matrix per declared basis
derivation and is extended linearly.  A derivation whose component outside
the basis span is inner gets ``alpha = 0`` on that component.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import algebra as alg
from .algebra import AlgebraElement, Derivation
from .matrix import (
    AlgebraVector,
    MatrixElement,
    commutator,
    mat_apply_derivation,
    vec_apply_derivation,
)
from .idempotent import Idempotent
from .module import ModuleHom, ModuleVector, ProjectiveModule, end_algebra_invert
from .errors import BackendMismatch, IdentityViolation, NotInModule, UnknownDerivation

GAMMA_TOL = 1e-10
BASIS_TOL = 1e-10


def default_basis(backend):
    if not backend.fourier:
        raise UnknownDerivation("the matrix backend needs an explicit derivation basis")
    return tuple(Derivation.basis(backend, j) for j in range(backend.dim))


# ---------------------------------------------------------------------------
# gamma(D)


def gamma_identity_residuals(D: Derivation, idem: Idempotent) -> dict:
    p = idem.p
    Dp = mat_apply_derivation(D, p)
    g = (2 * p - 1) * Dp
    q = idem.complement()
    return {
        "commutator": (commutator(p, g) - Dp).norm(),
        "p_Dp_p": (p * Dp * p).norm(),
        "q_Dp_q": (q * Dp * q).norm(),
    }


def gamma_of_derivation(D: Derivation, idem: Idempotent, check: bool = True,
                        tol: float = GAMMA_TOL) -> MatrixElement:
    """``gamma(D) = (2p - 1)(D.p)``, with ``[p, gamma(D)] = D.p``."""
    p = idem.p
    Dp = mat_apply_derivation(D, p)
    g = (2 * p - 1) * Dp
    if check:
        q = idem.complement()
        res = max(
            (commutator(p, g) - Dp).norm(),
            (p * Dp * p).norm(),
            (q * Dp * q).norm(),
        )
        if res > tol:
            raise IdentityViolation(f"gamma(D) identities fail with residual {res:.3e}")
    return g


# ---------------------------------------------------------------------------
# operators


@dataclass(frozen=True, eq=False)
class DerivativeEndomorphism:
    """Operator ``s -> M s + D.s`` on ``A^n`` paired with the derivation ``D``."""

    matrix: MatrixElement
    derivation: Derivation

    @property
    def backend(self):
        return self.matrix.backend

    @classmethod
    def corner(cls, M: MatrixElement):
        return cls(M, Derivation.zero(M.backend))

    @classmethod
    def right_mult(cls, a: AlgebraElement, n: int):
        """``rho_E(a)`` paired with ``-ad a``: ``a s - [a, s] = s a``."""
        return cls(MatrixElement.identity(a.backend, n) * a, -Derivation.ad(a))

    def __call__(self, s: AlgebraVector):
        out = self.matrix * s.plain()
        if not self.derivation.is_zero():
            out = out + vec_apply_derivation(self.derivation, s.plain())
        if isinstance(s, ModuleVector):
            return ModuleVector(s.module, out.data, check=False)
        return out

    def __add__(self, other: "DerivativeEndomorphism"):
        return DerivativeEndomorphism(self.matrix + other.matrix, self.derivation + other.derivation)

    def __neg__(self):
        return DerivativeEndomorphism(-self.matrix, -self.derivation)

    def __sub__(self, other):
        return self + (-other)


def op_commutator(A, B, s):
    """``[A, B] s`` for operators given as callables."""
    return A(B(s)) - B(A(s))


@dataclass(frozen=True)
class DendReport:
    relation_residual: float
    membership_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.relation_residual <= self.tol and self.membership_residual <= self.tol


def dend_check(phi, D: Derivation, E: ProjectiveModule, generators, vectors,
               tol: float | None = None) -> DendReport:
    """Max residual of ``[phi, rho_E(a)] s = s.(D.a)`` over generators and
    test vectors, plus the membership residual ``||(1-p) phi(s)||``."""
    tol = E.backend.tol if tol is None else tol
    rel = 0.0
    mem = 0.0
    q = E.idem.complement()
    for s in vectors:
        phis = phi(s)
        mem = max(mem, (q * phis.plain()).norm())
        for a in generators:
            lhs = phi(s * a) - phis * a
            rel = max(rel, (lhs - s * D(a)).norm())
    return DendReport(rel, mem, tol)


def inner_pair_residual(a: AlgebraElement, E: ProjectiveModule, generators, vectors) -> float:
    """``(rho_E(a), -ad a)`` satisfies the derivative-endomorphism relation."""
    phi = DerivativeEndomorphism.right_mult(a, E.n)
    return dend_check(phi, -Derivation.ad(a), E, generators, vectors).relation_residual


# ---------------------------------------------------------------------------
# connections


def _deriv_coords(D: Derivation, degree: int) -> np.ndarray:
    cfg = D.backend
    w = D.weight_vector() if cfg.fourier else np.zeros(0)
    if D.inner is None:
        c = np.zeros(alg.core_shape(cfg, degree), dtype=complex)
    else:
        c = np.array(alg.pad(cfg, D.inner.data, degree)) if cfg.fourier else np.array(D.inner.data)
    # the inner part only matters modulo scalars
    if cfg.fourier:
        c[(degree,) * cfg.dim] = 0.0
    else:
        c = c - np.trace(c) / cfg.dim * np.eye(cfg.dim)
    c = c.ravel()
    return np.concatenate([w, c.real, c.imag])


def decompose(D: Derivation, basis) -> tuple:
    """Real coefficients ``lam`` with ``D - sum lam_i B_i`` inner.

    Raises :class:`UnknownDerivation` when the leftover has a non-inner part.
    """
    basis = tuple(basis)
    if not basis:
        lam = np.zeros(0)
        if D.weights:
            raise UnknownDerivation("derivation is not in the span of the declared basis")
        return lam
    degs = [B.inner.degree for B in basis if B.inner is not None]
    if D.inner is not None:
        degs.append(D.inner.degree)
    deg = max(degs, default=0)
    cols = np.stack([_deriv_coords(B, deg) for B in basis], axis=1)
    target = _deriv_coords(D, deg)
    lam, *_ = np.linalg.lstsq(cols, target, rcond=None)
    left = target - cols @ lam
    d = len(D.weight_vector()) if D.backend.fourier else 0
    scale = max(1.0, float(np.abs(target).max()))
    if np.abs(left[:d]).max(initial=0.0) > BASIS_TOL * scale:
        raise UnknownDerivation("derivation has a non-inner part outside the declared basis")
    return lam


@dataclass(frozen=True, eq=False)
class Connection:
    """``nabla_D s = p (D.s) + alpha(D) s``."""

    module: ProjectiveModule
    basis: tuple
    alpha: tuple

    def __post_init__(self):
        if len(self.basis) != len(self.alpha):
            raise ValueError("one alpha value per basis derivation")
        cfg = self.module.backend
        for B in self.basis:
            if B.backend != cfg:
                raise BackendMismatch("basis derivation on a different backend")
        p = self.module.p
        for a in self.alpha:
            r = max((p * a - a).norm(), (a * p - a).norm())
            if r > cfg.tol:
                raise NotInModule(f"alpha value violates the corner constraint ({r:.3e})")

    @classmethod
    def levi_civita(cls, E: ProjectiveModule, basis=None):
        basis = default_basis(E.backend) if basis is None else tuple(basis)
        zero = MatrixElement.zero(E.backend, E.n)
        return cls(E, basis, tuple(zero for _ in basis))

    @classmethod
    def with_alpha(cls, E: ProjectiveModule, alpha, basis=None):
        basis = default_basis(E.backend) if basis is None else tuple(basis)
        return cls(E, basis, tuple(alpha))

    def one_form(self, D: Derivation) -> MatrixElement:
        lam = decompose(D, self.basis)
        out = MatrixElement.zero(self.module.backend, self.module.n)
        for c, a in zip(lam, self.alpha):
            if c:
                out = out + a * float(c)
        return out

    def operator(self, D: Derivation) -> DerivativeEndomorphism:
        """``nabla_D`` as ``(gamma(D) + alpha(D), D)``; valid on ``E``."""
        g = gamma_of_derivation(D, self.module.idem, check=False)
        return DerivativeEndomorphism(g + self.one_form(D), D)

    def __call__(self, D, s):
        return covariant_derivative(self, D, s)


def covariant_derivative(C: Connection, D: Derivation, s: AlgebraVector) -> ModuleVector:
    """``p (D.s) + alpha(D) s``."""
    p = C.module.p
    out = p * vec_apply_derivation(D, s.plain()) + C.one_form(D) * s.plain()
    return ModuleVector(C.module, out.data, check=False)


def covariant_derivative_gamma(C: Connection, D: Derivation, s: AlgebraVector) -> ModuleVector:
    """Same value via ``gamma(D) s + D.s + alpha(D) s``."""
    return C.operator(D)(ModuleVector(C.module, s.data, check=False))


def gauge_transform(C: Connection, g: ModuleHom, vectors=None,
                    tol: float | None = None) -> Connection:
    """``alpha' = delta(g) + g^{-1} alpha g`` with ``delta(g)(D) = g^{-1}(D.g) p``.

    When test vectors are given the result is checked against
    ``nabla'(s) = g^{-1} nabla(g s)``.
    """
    E = C.module
    tol = E.backend.tol if tol is None else tol
    g_inv = end_algebra_invert(g).x
    p = E.p
    alpha = []
    for B, a in zip(C.basis, C.alpha):
        delta = g_inv * mat_apply_derivation(B, g.x) * p
        alpha.append(delta + g_inv * a * g.x)
    Cg = Connection(E, C.basis, tuple(alpha))
    if vectors:
        r = gauge_identity_residual(C, Cg, g.x, g_inv, vectors)
        if r > tol:
            raise IdentityViolation(f"gauge identity residual {r:.3e} exceeds {tol:.1e}")
    return Cg


def gauge_identity_residual(C: Connection, Cg: Connection, g: MatrixElement,
                            g_inv: MatrixElement, vectors) -> float:
    r = 0.0
    for s in vectors:
        for B in C.basis:
            lhs = covariant_derivative(Cg, B, s)
            rhs = g_inv * covariant_derivative(C, B, g * s.plain()).plain()
            r = max(r, (lhs.plain() - rhs).norm())
    return r


def alpha_distance(C1: Connection, C2: Connection) -> float:
    return max((a - b).norm() for a, b in zip(C1.alpha, C2.alpha))


@dataclass(frozen=True)
class CovCoordReport:
    max_commutator: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_commutator <= self.tol


def covariant_coordinate(a: AlgebraElement, C: Connection):
    """``rho^(a) = rho_E(a) + nabla_{ad a}`` as a callable on vectors."""
    D = Derivation.ad(a)

    def rho_hat(s):
        out = s.plain() * a + covariant_derivative(C, D, s).plain()
        return ModuleVector(C.module, out.data, check=False)

    return rho_hat


def covariant_coordinate_report(a: AlgebraElement, C: Connection, generators, vectors,
                                tol: float | None = None) -> CovCoordReport:
    """Max ``||[rho^(a), rho_E(b)] s||`` over generators ``b`` and vectors."""
    tol = C.module.backend.tol if tol is None else tol
    rho_hat = covariant_coordinate(a, C)
    worst = 0.0
    for s in vectors:
        rs = rho_hat(s)
        for b in generators:
            worst = max(worst, (rho_hat(s * b) - rs * b).norm())
    return CovCoordReport(worst, tol)


def materialize(op, E: ProjectiveModule) -> MatrixElement:
    """Matrix ``F`` with ``F s = op(s)`` for an A-linear ``op`` on ``E``,
    assembled column by column from the images of ``p e_i``; ``F = F p``."""
    cols = [op(v).plain().data for v in E.generators()]
    cfg = E.backend
    deg = max(alg.degree_of(cfg, c) for c in cols)
    data = np.stack([alg.pad(cfg, c, deg) for c in cols], axis=1)
    return MatrixElement(cfg, data)


@dataclass(frozen=True)
class CurvatureReport:
    F: MatrixElement
    linearity_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.linearity_residual <= self.tol


def curvature(C: Connection, i: int, j: int, generators, vectors,
              tol: float | None = None) -> CurvatureReport:
    """``F = [nabla_i, nabla_j] - nabla_{[D_i, D_j]}`` with an A-linearity check."""
    tol = C.module.backend.tol if tol is None else tol
    Di, Dj = C.basis[i], C.basis[j]
    Dij = Di.bracket(Dj)

    def F(s):
        a = covariant_derivative(C, Di, covariant_derivative(C, Dj, s))
        b = covariant_derivative(C, Dj, covariant_derivative(C, Di, s))
        return a - b - covariant_derivative(C, Dij, s)

    worst = 0.0
    for s in vectors:
        Fs = F(s)
        for a in generators:
            worst = max(worst, (F(s * a) - Fs * a).norm())
    return CurvatureReport(materialize(F, C.module), worst, tol)
