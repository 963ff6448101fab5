"""Example generators: the Bott idempotent and seeded random elements."""
from __future__ import annotations

import numpy as np

from . import algebra as alg
from .algebra import AlgebraElement, BackendConfig
from .matrix import AlgebraVector, MatrixElement
from .idempotent import Idempotent, retract_idempotent
from .errors import NoConvergence

# tuned so the unit vector field has a fast-decaying spectrum and |d| >= 1.1
BOTT_MU = 1.75
BOTT_NU = -0.35
BOTT_A = 1.25
BOTT_B = -0.5
BOTT_GRID = 128


def bott_field(k: int, x, y):
    """Degree-k map of the torus to R^3 avoiding the origin."""
    cx, sx = np.cos(2 * np.pi * k * x), np.sin(2 * np.pi * k * x)
    cy, sy = np.cos(2 * np.pi * y), np.sin(2 * np.pi * y)
    d1 = sx * (1 + BOTT_B * cy)
    d2 = -sy * (1 + BOTT_B * cx)
    d3 = BOTT_MU + BOTT_A * (cx + cy) + BOTT_NU * cx * cy
    return d1, d2, d3


def bott_grid_values(k: int, L: int) -> np.ndarray:
    """``p = (1 + n.sigma) / 2`` sampled on an ``L x L`` grid, shape (2,2,L,L)."""
    t = np.arange(L) / L
    x, y = np.meshgrid(t, t, indexing="ij")
    d1, d2, d3 = bott_field(k, x, y)
    r = np.sqrt(d1**2 + d2**2 + d3**2)
    n1, n2, n3 = d1 / r, d2 / r, d3 / r
    return 0.5 * np.array(
        [[1 + n3, n1 - 1j * n2], [n1 + 1j * n2, 1 - n3]], dtype=complex
    )


def torus_config(degree: int = 8, max_degree: int | None = None, tol: float = 1e-9) -> BackendConfig:
    return BackendConfig("torus", 2, degree=degree, max_degree=max_degree, tol=tol)


def gen_bott(k: int = 1, N: int = 8, max_degree: int | None = None, tol: float = 1e-9,
             backend: BackendConfig | None = None) -> Idempotent:
    """Bott idempotent of degree ``k`` on the 2-torus, band-limited to ``N``
    and retracted onto ``Idem(M_2(A))``."""
    if N < 1:
        raise ValueError("band must be positive")
    cfg = backend or torus_config(N, max_degree, tol)
    if k == 0:
        return Idempotent(MatrixElement.constant(cfg, np.diag([1.0, 0.0])))
    L = max(BOTT_GRID, 4 * cfg.working_band + 1)
    coeffs = alg.from_grid_values(cfg, bott_grid_values(k, L), N)
    try:
        return retract_idempotent(MatrixElement(cfg, coeffs))
    except NoConvergence as exc:
        raise NoConvergence(
            f"band N={N} (max_degree {cfg.max_degree}) too small for Bott degree {k}: {exc}; "
            f"minimum viable N is about {min_viable_band(k)}"
        ) from exc


def min_viable_band(k: int) -> int:
    """Smallest ``N`` (with default max_degree ``8N``) at which retraction converges."""
    for N in range(1, 64):
        cfg = torus_config(N)
        L = max(BOTT_GRID, 4 * cfg.working_band + 1)
        coeffs = alg.from_grid_values(cfg, bott_grid_values(k, L), N)
        try:
            retract_idempotent(MatrixElement(cfg, coeffs))
            return N
        except NoConvergence:
            continue
    return -1


# ---------------------------------------------------------------------------
# random elements


def random_element(cfg: BackendConfig, rng: np.random.Generator, band: int = 3,
                   norm: float = 1.0, decay: float = 0.3) -> AlgebraElement:
    """Random element with coefficients damped by ``decay**|k|_1``, scaled to ``norm``."""
    data = _random_core(cfg, rng, (), band, decay)
    a = AlgebraElement(cfg, data)
    return a * (norm / a.norm())


def _random_core(cfg, rng, lead, band, decay):
    shape = lead + alg.core_shape(cfg, band)
    data = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    if cfg.fourier:
        grids = alg._kgrid(cfg.dim, band)
        damp = decay ** sum(np.abs(g) for g in grids)
        data = data * damp
    return data


def random_matrix(cfg: BackendConfig, rng, n: int, band: int = 3, norm: float = 1.0,
                  decay: float = 0.3) -> MatrixElement:
    X = MatrixElement(cfg, _random_core(cfg, rng, (n, n), band, decay))
    return X * (norm / X.norm())


def random_vector(cfg: BackendConfig, rng, n: int, band: int = 3, norm: float = 1.0,
                  decay: float = 0.3) -> AlgebraVector:
    v = AlgebraVector(cfg, _random_core(cfg, rng, (n,), band, decay))
    return v * (norm / v.norm())


def random_invertible(cfg: BackendConfig, rng, band: int = 3, size: float = 0.3) -> AlgebraElement:
    """``c (1 + h)`` with ``||h|| = size < 1`` and a random unimodular ``c``."""
    h = random_element(cfg, rng, band, norm=size)
    c = np.exp(2j * np.pi * rng.random())
    return (1 + h) * c


def random_idempotent_dense(m: int, rank: int, rng) -> np.ndarray:
    """Non-orthogonal rank-``rank`` idempotent in ``M_m(C)``."""
    while True:
        S = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        if np.linalg.cond(S) < 20:
            break
    D = np.diag([1.0] * rank + [0.0] * (m - rank))
    return S @ D @ np.linalg.inv(S)


def matrix_oracle_idempotent(cfg: BackendConfig, rng, n: int = 2) -> Idempotent:
    """Random idempotent in ``M_n(M_m(C))`` (matrix backend, ``m = cfg.dim``)."""
    m = cfg.dim
    P = random_idempotent_dense(n * m, (n * m) // 2, rng)
    return Idempotent(MatrixElement.from_dense(cfg, P, n))
