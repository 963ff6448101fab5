"""Idempotents in ``M_n(A)``: retraction, similarity witnesses, path lifting,
corner inversion and the stabilization conjugator for isomorphic modules."""
from __future__ import annotations

from dataclasses import dataclass

from .matrix import MatrixElement, block, embed_tilde, mat_invert
from .errors import (
    NoConvergence,
    NotAnIsoPair,
    NotIdempotent,
    NotInNeighborhood,
    NotInvertible,
    NotInvertibleInCorner,
)

RETRACT_TARGET = 1e-12
RETRACT_MAX_ITER = 50
WITNESS_COND_MAX = 1e8
ISO_LOOSE_TOL = 1e-6
INVOLUTION_TOL = 1e-12


def idempotent_residual(p: MatrixElement) -> float:
    return (p * p - p).norm()


def is_idempotent(p: MatrixElement, tol: float | None = None):
    """Return ``(flag, residual)`` with residual ``||p^2 - p||``."""
    tol = p.backend.tol if tol is None else tol
    r = idempotent_residual(p)
    return r <= tol, r


class Idempotent:
    """A matrix ``p`` with ``||p^2 - p|| <= tol``, checked on construction."""

    __slots__ = ("p", "residual")

    def __init__(self, p: MatrixElement, tol: float | None = None, residual: float | None = None):
        tol = p.backend.tol if tol is None else tol
        r = idempotent_residual(p) if residual is None else residual
        if r > tol:
            raise NotIdempotent(f"||p^2 - p|| = {r:.3e} exceeds {tol:.1e}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "residual", r)

    def __setattr__(self, name, value):
        raise AttributeError("Idempotent is immutable")

    @property
    def n(self) -> int:
        return self.p.n

    @property
    def backend(self):
        return self.p.backend

    def complement(self) -> MatrixElement:
        return MatrixElement.identity(self.backend, self.n) - self.p

    def __repr__(self):
        return f"Idempotent(n={self.n}, {self.backend.kind}, residual={self.residual:.2e})"


def retract_idempotent(p0: MatrixElement, target: float = RETRACT_TARGET,
                       max_iter: int = RETRACT_MAX_ITER) -> Idempotent:
    """Cubic retraction ``p <- 3p^2 - 2p^3`` onto the nearest idempotent.

    Iterates are truncated to the working band.  After reaching ``target``
    the iteration keeps polishing while the residual still halves.
    """
    cfg = p0.backend
    band = cfg.working_band
    p = p0.truncate(band)
    res = idempotent_residual(p)
    if res >= 0.25:
        raise NoConvergence(f"initial residual {res:.3e} is outside the retraction basin (< 1/4)")
    best = res
    stalled = 0
    for _ in range(max_iter):
        if res <= target and (stalled >= 1 or res == 0.0):
            break
        p2 = (p * p).truncate(band)
        p_new = (3 * p2 - 2 * (p2 * p)).truncate(band)
        res_new = idempotent_residual(p_new)
        if res_new < 0.5 * best:
            stalled = 0
        else:
            stalled += 1
        if res_new <= best:
            p, res = p_new, res_new
            best = res
        if stalled >= 3:
            break
    if res > target:
        raise NoConvergence(f"retraction stalled at residual {res:.3e} (target {target:.1e})")
    return Idempotent(p, tol=max(target, cfg.tol), residual=res)


@dataclass(frozen=True)
class SimilarityWitness:
    """Invertible ``s`` with ``s q s^{-1} = p`` (``source`` q, ``target`` p)."""

    s: MatrixElement
    s_inv: MatrixElement
    source: Idempotent
    target: Idempotent
    residual: float


def _conj_residual(s, s_inv, q: Idempotent, p: Idempotent) -> float:
    return (s * q.p * s_inv - p.p).norm()


def similarity_witness(p: Idempotent, q: Idempotent) -> SimilarityWitness:
    """Witness ``s = pq + (1-p)(1-q)`` conjugating ``q`` to ``p``."""
    if p.n != q.n:
        raise NotInNeighborhood("idempotents have different sizes")
    cfg = p.backend
    s = p.p * q.p + p.complement() * q.complement()
    try:
        s_inv = mat_invert(s)
    except NotInvertible as exc:
        raise NotInNeighborhood(f"witness is not invertible: {exc}") from exc
    cond = s.norm() * s_inv.norm()
    if cond > WITNESS_COND_MAX:
        raise NotInNeighborhood(f"witness condition estimate {cond:.3e} exceeds {WITNESS_COND_MAX:.0e}")
    r = _conj_residual(s, s_inv, q, p)
    if r > cfg.tol:
        raise NotInNeighborhood(f"witness conjugation residual {r:.3e} exceeds tol")
    return SimilarityWitness(s, s_inv, q, p, r)


def path_conjugator(path) -> SimilarityWitness:
    """Compose stepwise witnesses along a path of idempotents.

    Returns a witness ``g`` with ``g path[0] g^{-1} = path[-1]``.  A failing
    step raises :class:`NotInNeighborhood` carrying its 1-based index.
    """
    path = list(path)
    if not path:
        raise ValueError("empty path")
    cfg = path[0].backend
    n = path[0].n
    g = MatrixElement.identity(cfg, n)
    g_inv = g
    for i in range(1, len(path)):
        try:
            w = similarity_witness(path[i], path[i - 1])
        except NotInNeighborhood as exc:
            raise NotInNeighborhood(f"step {i}: {exc}", step=i) from exc
        g = w.s * g
        g_inv = g_inv * w.s_inv
    steps = max(len(path) - 1, 1)
    r = _conj_residual(g, g_inv, path[0], path[-1])
    if r > cfg.tol * steps:
        raise NotInNeighborhood(f"composed conjugation residual {r:.3e} too large", step=len(path) - 1)
    return SimilarityWitness(g, g_inv, path[0], path[-1], r)


def corner_residual(a: MatrixElement, p: Idempotent) -> float:
    return max((p.p * a - a).norm(), (a * p.p - a).norm())


def corner_invert(a: MatrixElement, p: Idempotent) -> MatrixElement:
    """Inverse in ``p M_n(A) p`` via ``(a + 1 - p)^{-1} - (1 - p)``."""
    cfg = a.backend
    if corner_residual(a, p) > cfg.tol:
        raise NotInvertibleInCorner("element is not in the corner p M_n(A) p")
    comp = p.complement()
    try:
        b = mat_invert(a + comp) - comp
    except NotInvertible as exc:
        raise NotInvertibleInCorner(str(exc)) from exc
    r = max((a * b - p.p).norm(), (b * a - p.p).norm())
    if r > cfg.tol:
        raise NotInvertibleInCorner(f"corner inverse residual {r:.3e} exceeds tol")
    return b


def normalize_iso_pair(x: MatrixElement, y: MatrixElement, p: Idempotent, q: Idempotent):
    """Project an approximate isomorphism pair into ``qM p`` and ``pM q``."""
    cfg = x.backend
    r0 = max((x * y - q.p).norm(), (y * x - p.p).norm())
    if r0 > ISO_LOOSE_TOL:
        raise NotAnIsoPair(f"xy - q, yx - p residual {r0:.3e} exceeds {ISO_LOOSE_TOL:.0e}")
    x1 = q.p * x * p.p
    y1 = p.p * y * q.p
    r = max((x1 * y1 - q.p).norm(), (y1 * x1 - p.p).norm())
    if r > cfg.tol:
        raise NotAnIsoPair(f"normalized pair residual {r:.3e} exceeds tol")
    return x1, y1


def iso_pair_from_conjugator(g: SimilarityWitness):
    """``x = g p`` and ``y = g^{-1}`` for ``g p g^{-1} = q``."""
    return g.s * g.source.p, g.s_inv


@dataclass(frozen=True)
class Stabilization:
    alpha: MatrixElement
    beta: MatrixElement
    z: MatrixElement
    z_inv: MatrixElement
    p_tilde: MatrixElement
    q_tilde: MatrixElement
    alpha_residual: float
    beta_residual: float
    residual: float


def stabilize_conjugator(x: MatrixElement, y: MatrixElement, p: Idempotent, q: Idempotent,
                         involution_tol: float = INVOLUTION_TOL) -> Stabilization:
    """Conjugator ``z = beta alpha`` in ``M_2n(A)`` with ``z q~ z^{-1} = p~``.

    ``alpha = [[1-q, x], [y, 1-p]]`` and ``beta = [[1-p, p], [p, 1-p]]`` are
    involutions, so ``z^{-1} = alpha beta``.
    """
    cfg = x.backend
    n = p.n
    one2 = MatrixElement.identity(cfg, 2 * n)
    alpha = block([[q.complement(), x], [y, p.complement()]])
    beta = block([[p.complement(), p.p], [p.p, p.complement()]])
    ra = (alpha * alpha - one2).norm()
    rb = (beta * beta - one2).norm()
    if max(ra, rb) > involution_tol:
        raise NotAnIsoPair(f"alpha^2, beta^2 residuals {ra:.3e}, {rb:.3e} exceed {involution_tol:.0e}")
    z = beta * alpha
    z_inv = alpha * beta
    pt = embed_tilde(p.p, 2 * n)
    qt = embed_tilde(q.p, 2 * n)
    r = (z * qt * z_inv - pt).norm()
    if r > cfg.tol:
        raise NotAnIsoPair(f"z q~ z^-1 - p~ residual {r:.3e} exceeds tol")
    return Stabilization(alpha, beta, z, z_inv, pt, qt, ra, rb, r)
