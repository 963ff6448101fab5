"""Finitely generated projective right modules ``E = p A^n``.

``A`` acts on the right: ``rho_E(a) s = s.a``.  Operators compose as
``rho(a) rho(b) = rho(b a)`` (an antihomomorphism), a convention the
formulas in :mod:`projmod.connection` and :mod:`projmod.extension` rely on.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement, Automorphism
from .matrix import (
    AlgebraVector,
    MatrixElement,
    embed_tilde,
    embed_vector,
    mat_apply_automorphism,
    vec_apply_automorphism,
)
from .idempotent import Idempotent, corner_invert, retract_idempotent
from .errors import BackendMismatch, BadDimension, NotIdempotent, NotInModule


class ProjectiveModule:
    __slots__ = ("idem",)

    def __init__(self, idem: Idempotent):
        object.__setattr__(self, "idem", idem)

    def __setattr__(self, name, value):
        raise AttributeError("ProjectiveModule is immutable")

    @classmethod
    def free(cls, backend, n: int):
        return cls(Idempotent(MatrixElement.identity(backend, n)))

    @property
    def p(self) -> MatrixElement:
        return self.idem.p

    @property
    def n(self) -> int:
        return self.idem.n

    @property
    def backend(self):
        return self.idem.backend

    def membership_residual(self, v: AlgebraVector) -> float:
        return (self.p * v.plain() - v.plain()).norm()

    def generators(self):
        """The images ``p e_i`` of the standard basis; they generate ``E``."""
        return [project_vector(self, AlgebraVector.basis(self.backend, self.n, i)) for i in range(self.n)]

    def identity_hom(self) -> "ModuleHom":
        return ModuleHom(self, self, self.p)

    def padded(self, N: int) -> "ProjectiveModule":
        """The same module presented by ``p~`` in ``M_N(A)``."""
        return ProjectiveModule(Idempotent(embed_tilde(self.p, N)))

    def __repr__(self):
        return f"ProjectiveModule(n={self.n}, {self.backend.kind})"


class ModuleVector(AlgebraVector):
    """Vector ``s`` with ``p s = s``."""

    __slots__ = ("module",)

    def __init__(self, module: ProjectiveModule, data, check: bool = True):
        super().__init__(module.backend, data)
        if self.n != module.n:
            raise BadDimension("vector length does not match module")
        object.__setattr__(self, "module", module)
        if check:
            r = module.membership_residual(self)
            if r > module.backend.tol:
                raise NotInModule(f"||p s - s|| = {r:.3e} exceeds tol")

    def _rebuild(self, data):
        return ModuleVector(self.module, data, check=False)

    def __repr__(self):
        return f"ModuleVector(n={self.n}, {self.backend.kind}, norm={self.norm():.3g})"


def project_vector(E: ProjectiveModule, v: AlgebraVector) -> ModuleVector:
    """Canonical surjection ``A^n -> p A^n``."""
    if v.backend != E.backend:
        raise BackendMismatch("vector and module live on different backends")
    return ModuleVector(E, (E.p * v.plain()).data, check=False)


def module_act(s: ModuleVector, a: AlgebraElement) -> ModuleVector:
    """Right action ``s.a``."""
    return s * a


class ModuleHom:
    """``lambda_x: p A^n -> q A^n`` with ``q x = x = x p``."""

    __slots__ = ("source", "target", "x")

    def __init__(self, source: ProjectiveModule, target: ProjectiveModule, x: MatrixElement,
                 tol: float | None = None):
        if source.n != target.n or x.n != source.n:
            raise BadDimension("homs are square after padding to a common size")
        tol = x.backend.tol if tol is None else tol
        r = max((target.p * x - x).norm(), (x * source.p - x).norm())
        if r > tol:
            raise NotInModule(f"corner constraint residual {r:.3e} exceeds tol")
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "x", x)

    def __setattr__(self, name, value):
        raise AttributeError("ModuleHom is immutable")

    @classmethod
    def from_matrix(cls, source, target, x: MatrixElement):
        """Corner-project an arbitrary matrix: ``q x p``."""
        return cls(source, target, target.p * x * source.p)

    def __call__(self, s):
        return hom_apply(self, s)

    def compose(self, other: "ModuleHom") -> "ModuleHom":
        """``self o other``."""
        return ModuleHom(other.source, self.target, self.x * other.x)

    def __repr__(self):
        return f"ModuleHom(n={self.x.n}, {self.x.backend.kind})"


def hom_apply(h: ModuleHom, s: ModuleVector) -> ModuleVector:
    if s.n != h.x.n:
        raise BadDimension("vector length does not match hom")
    if h.x.backend != s.backend:
        raise BackendMismatch("hom and vector live on different backends")
    return ModuleVector(h.target, (h.x * s.plain()).data, check=False)


def end_algebra_invert(h: ModuleHom) -> ModuleHom:
    """Inverse in ``End_A(E)``, computed in the corner algebra."""
    if h.source is not h.target and not np.array_equal(h.source.p.data, h.target.p.data):
        raise BadDimension("only endomorphisms can be inverted in End_A(E)")
    return ModuleHom(h.source, h.source, corner_invert(h.x, h.source.idem))


def pad_hom(h: ModuleHom, N: int) -> ModuleHom:
    return ModuleHom(h.source.padded(N), h.target.padded(N), embed_tilde(h.x, N))


def pad_vector(E_padded: ProjectiveModule, s: AlgebraVector) -> ModuleVector:
    return ModuleVector(E_padded, embed_vector(s.plain(), E_padded.n).data)


@dataclass(frozen=True)
class Intertwiner:
    """``Phi = psi^(n)``, carrying ``p' A^n`` onto ``p A^n`` with
    ``Phi(s.a) = Phi(s).psi(a)``."""

    psi: Automorphism
    source: ProjectiveModule
    target: ProjectiveModule

    def __call__(self, s: AlgebraVector) -> ModuleVector:
        return ModuleVector(self.target, vec_apply_automorphism(self.psi, s.plain()).data, check=False)

    def semilinearity_residual(self, s: ModuleVector, a: AlgebraElement) -> float:
        """``||Phi(s.psi^{-1}(a)) - Phi(s).a||``."""
        lhs = self(s * self.psi.inverse()(a))
        rhs = self(s) * a
        return (lhs - rhs).norm()


def twist_module(E: ProjectiveModule, psi: Automorphism):
    """``E^psi`` presented as ``M_n(psi^{-1})(p) A^n`` plus its intertwiner."""
    if psi.backend != E.backend:
        raise BackendMismatch("automorphism and module live on different backends")
    if psi.is_identity():
        return E, Intertwiner(psi, E, E)
    p1 = mat_apply_automorphism(psi.inverse(), E.p)
    try:
        idem = Idempotent(p1)
    except NotIdempotent:
        idem = retract_idempotent(p1)
    E1 = ProjectiveModule(idem)
    return E1, Intertwiner(psi, E1, E)
