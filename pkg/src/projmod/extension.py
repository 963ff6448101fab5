"""Lift data for a group acting on ``A`` and the matching Lie-algebra extension.

Group side: for ``g`` near the identity, ``gamma(g)`` conjugates ``g*p`` back
to ``p``; ``S_E(g) s = gamma(g) (g# s)`` is then a ``g``-semilinear
automorphism of ``E``, and

    omega(g, g') = p gamma(g) (g*gamma(g')) gamma(gg')^{-1} p
    (n, g)(n', g') = (n S(g)(n') omega(g, g'), g g')
    S(g)(phi) = gamma(g) (g*phi) gamma(g)^{-1}

Lie side: ``t1se(x) s = gdot(x) s + x.s`` with ``gdot(x) = (2p - 1)(x.p)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement, Automorphism, Derivation, alg_invert
from .matrix import (
    AlgebraVector,
    MatrixElement,
    commutator,
    mat_apply_automorphism,
    mat_apply_derivation,
    vec_apply_automorphism,
)
from .idempotent import (
    Idempotent,
    SimilarityWitness,
    normalize_iso_pair,
    similarity_witness,
    stabilize_conjugator,
)
from .module import ModuleVector, ProjectiveModule
from .connection import DerivativeEndomorphism, materialize
from .errors import BackendMismatch

GroupElement = Automorphism


def _group_key(g: Automorphism):
    u = None if g.u is None else g.u.data.tobytes()
    return (tuple(round(x, 15) for x in g.shift), u)


def group_act_matrix(g: Automorphism, X: MatrixElement) -> MatrixElement:
    """``g * X = M_n(mu(g))(X)``."""
    return mat_apply_automorphism(g, X)


@dataclass(frozen=True, eq=False)
class Lift:
    """``S_E(g)``: the semilinear automorphism ``s -> gamma(g) (g# s)``."""

    g: Automorphism
    module: ProjectiveModule
    gamma: MatrixElement
    gamma_inv: MatrixElement
    residual: float

    def __call__(self, s: AlgebraVector) -> ModuleVector:
        out = self.gamma * vec_apply_automorphism(self.g, s.plain())
        return ModuleVector(self.module, out.data, check=False)

    def conj(self, phi: MatrixElement) -> MatrixElement:
        """``S(g)(phi) = gamma(g) (g*phi) gamma(g)^{-1}``."""
        return self.gamma * group_act_matrix(self.g, phi) * self.gamma_inv

    def semilinearity_residual(self, s: ModuleVector, a: AlgebraElement) -> float:
        """``||S(s.a) - S(s).(g.a)||``."""
        return (self(s * a) - self(s) * self.g(a)).norm()

    def membership_residual(self, s: ModuleVector) -> float:
        return self.module.membership_residual(self(s))


def gamma_group(g: Automorphism, idem: Idempotent) -> SimilarityWitness:
    """``gamma(g) = p (g*p) + (1-p)(1 - g*p)`` with its inverse.

    Raises :class:`NotInNeighborhood` when ``g*p`` is too far from ``p``.
    """
    if g.backend != idem.backend:
        raise BackendMismatch("group element and idempotent live on different backends")
    if g.is_identity():
        one = MatrixElement.identity(idem.backend, idem.n)
        return SimilarityWitness(one, one, idem, idem, 0.0)
    gp = Idempotent(group_act_matrix(g, idem.p), tol=max(idem.backend.tol, 10 * idem.residual))
    return similarity_witness(idem, gp)


def stabilized_gamma(g: Automorphism, idem: Idempotent, x: MatrixElement, y: MatrixElement):
    """Conjugator in ``M_2n(A)`` taking ``(g*p)~`` to ``p~`` from a supplied
    isomorphism pair ``x y = g*p``, ``y x = p`` (no search is attempted)."""
    gp = Idempotent(group_act_matrix(g, idem.p))
    x1, y1 = normalize_iso_pair(x, y, idem, gp)
    return stabilize_conjugator(x1, y1, idem, gp)


class LiftCache:
    """Memoizes ``gamma(g)`` for one module; group elements are compared by
    their normal form (translation vector and inner part)."""

    def __init__(self, E: ProjectiveModule):
        self.module = E
        self._lifts = {}

    def lift(self, g: Automorphism) -> Lift:
        key = _group_key(g)
        if key not in self._lifts:
            w = gamma_group(g, self.module.idem)
            self._lifts[key] = Lift(g, self.module, w.s, w.s_inv, w.residual)
        return self._lifts[key]


def lift(g: Automorphism, E: ProjectiveModule) -> Lift:
    w = gamma_group(g, E.idem)
    return Lift(g, E, w.s, w.s_inv, w.residual)


def lift_apply(g: Automorphism, E: ProjectiveModule, s: AlgebraVector) -> ModuleVector:
    return lift(g, E)(s)


def cocycle_omega(g: Automorphism, h: Automorphism, E: ProjectiveModule,
                  cache: LiftCache | None = None) -> MatrixElement:
    """``omega(g, h) = p gamma(g) (g*gamma(h)) gamma(gh)^{-1} p``."""
    cache = cache or LiftCache(E)
    Lg, Lh, Lgh = cache.lift(g), cache.lift(h), cache.lift(g.compose(h))
    p = E.p
    W = Lg.gamma * group_act_matrix(g, Lh.gamma) * Lgh.gamma_inv
    return p * W * p


def extension_multiply(a, b, E: ProjectiveModule, cache: LiftCache | None = None):
    """``(n, g)(n', g') = (n S(g)(n') omega(g, g'), g g')``."""
    cache = cache or LiftCache(E)
    n1, g1 = a
    n2, g2 = b
    Lg = cache.lift(g1)
    n = n1 * Lg.conj(n2) * cocycle_omega(g1, g2, E, cache)
    return n, g1.compose(g2)


def crossed_hom(psi: Automorphism, a: AlgebraElement, E: ProjectiveModule | None = None,
                a_inv: AlgebraElement | None = None) -> AlgebraElement:
    """Multiplier ``m(a) = a psi(a)^{-1}``.

    The crossed homomorphism sends ``a`` to ``rho_E(psi(a) a^{-1})^{-1}``.
    Since ``rho`` reverses products, ``rho(b)^{-1} = rho(b^{-1})`` and
    ``(psi(a) a^{-1})^{-1} = a psi(a)^{-1}``, so the operator is
    ``rho_E(m(a))``.  With ``f(a) = rho(m(a))`` and the action of ``a`` on
    ``GL_A(E)`` given by conjugation with ``rho(a)``, the crossed law
    ``f(ab) = f(a) rho(a) f(b) rho(a)^{-1}`` becomes
    ``m(ab) = a m(b) a^{-1} m(a)``.
    """
    if psi.is_identity():
        return AlgebraElement.unit(a.backend)
    return a * alg_invert(psi(a))


def crossed_law_residual(psi: Automorphism, a: AlgebraElement, b: AlgebraElement) -> float:
    """``||m(ab) - a m(b) a^{-1} m(a)||``."""
    lhs = crossed_hom(psi, a * b)
    rhs = a * crossed_hom(psi, b) * alg_invert(a) * crossed_hom(psi, a)
    return (lhs - rhs).norm()


# ---------------------------------------------------------------------------
# Lie side


def gamma_dot(x: Derivation, E: ProjectiveModule) -> MatrixElement:
    p = E.p
    return (2 * p - 1) * mat_apply_derivation(x, p)


def t1se(x: Derivation, E: ProjectiveModule) -> DerivativeEndomorphism:
    """``s -> gdot(x) s + x.s``."""
    return DerivativeEndomorphism(gamma_dot(x, E), x)


def ds_apply(x: Derivation, phi: MatrixElement, E: ProjectiveModule) -> MatrixElement:
    """``p ([gdot(x), phi] + x.phi) p``."""
    p = E.p
    return p * (commutator(gamma_dot(x, E), phi) + mat_apply_derivation(x, phi)) * p


def domega_operator(x: Derivation, y: Derivation, E: ProjectiveModule):
    Tx, Ty, Txy = t1se(x, E), t1se(y, E), t1se(x.bracket(y), E)

    def op(s):
        return Tx(Ty(s)) - Ty(Tx(s)) - Txy(s)

    return op


def domega(x: Derivation, y: Derivation, E: ProjectiveModule) -> MatrixElement:
    """``[t1se(x), t1se(y)] - t1se([x, y])`` as a corner matrix."""
    F = materialize(domega_operator(x, y, E), E)
    p = E.p
    return p * F * p


def linearity_residual(op, generators, vectors) -> float:
    """``max ||op(s.a) - op(s).a||``."""
    worst = 0.0
    for s in vectors:
        os = op(s)
        for a in generators:
            worst = max(worst, (op(s * a) - os * a).norm())
    return worst


@dataclass(frozen=True, eq=False)
class ExtensionElement:
    """Pair ``(phi, x)``: corner endomorphism and derivation."""

    phi: MatrixElement
    x: Derivation

    def __add__(self, other):
        return ExtensionElement(self.phi + other.phi, self.x + other.x)

    def __sub__(self, other):
        return ExtensionElement(self.phi - other.phi, self.x - other.x)

    def operator(self, E: ProjectiveModule) -> DerivativeEndomorphism:
        """Image under ``Gamma``: ``phi + t1se(x)``."""
        return DerivativeEndomorphism(self.phi + gamma_dot(self.x, E), self.x)

    def norm(self) -> float:
        r = self.phi.norm()
        if self.x.inner is not None:
            r += self.x.inner.norm()
        if self.x.backend.fourier:
            r += float(np.abs(self.x.weight_vector()).sum())
        return r


def hat_bracket(u: ExtensionElement, v: ExtensionElement, E: ProjectiveModule) -> ExtensionElement:
    corner = (
        commutator(u.phi, v.phi)
        + ds_apply(u.x, v.phi, E)
        - ds_apply(v.x, u.phi, E)
        + domega(u.x, v.x, E)
    )
    return ExtensionElement(corner, u.x.bracket(v.x))


def bracket_preservation_residual(u: ExtensionElement, v: ExtensionElement,
                                  E: ProjectiveModule, vectors) -> float:
    """``||[Gamma u, Gamma v] s - Gamma([u, v]) s||`` over test vectors."""
    Gu, Gv = u.operator(E), v.operator(E)
    Gw = hat_bracket(u, v, E).operator(E)
    worst = 0.0
    for s in vectors:
        lhs = Gu(Gv(s)) - Gv(Gu(s))
        worst = max(worst, (lhs - Gw(s)).norm())
    return worst


def jacobi_residual(u, v, w, E: ProjectiveModule) -> float:
    total = (
        hat_bracket(u, hat_bracket(v, w, E), E)
        + hat_bracket(v, hat_bracket(w, u, E), E)
        + hat_bracket(w, hat_bracket(u, v, E), E)
    )
    return total.norm()
