import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from projmod.algebra import (
    AlgebraElement,
    Automorphism,
    BackendConfig,
    Derivation,
    alg_invert,
    alg_mul,
    alg_norm,
    apply_automorphism,
    apply_derivation,
)
from projmod.errors import BackendMismatch, DegreeOverflow, NotInvertible, UnknownDerivation
from projmod.generators import random_element, random_invertible


def cos1(cfg, c0=0.0):
    return AlgebraElement.from_coeffs(cfg, {(0,): c0, (1,): 0.5, (-1,): 0.5})


# -- config ------------------------------------------------------------------

def test_config_defaults_and_invariants():
    cfg = BackendConfig("torus", 2, theta=0.3, degree=4)
    assert cfg.max_degree == 32 and cfg.working_band == 16
    assert cfg.theta == 0.0  # ignored off the noncommutative torus
    with pytest.raises(ValueError):
        BackendConfig("torus", 2, degree=8, max_degree=10)
    with pytest.raises(ValueError):
        BackendConfig("nctorus", 3)
    with pytest.raises(ValueError):
        BackendConfig("sphere", 2)


def test_config_round_trip():
    cfg = BackendConfig("nctorus", 2, theta=0.25, degree=5, max_degree=30, tol=1e-8)
    assert BackendConfig.from_dict(cfg.to_dict()) == cfg


# -- products ----------------------------------------------------------------

def test_unit_law(torus2, rng):
    a = random_element(torus2, rng)
    one = AlgebraElement.unit(torus2)
    assert (one * a - a).norm() == pytest.approx(0.0, abs=1e-15)
    assert (a * one - a).norm() == pytest.approx(0.0, abs=1e-15)


def test_modes_convolve(torus1):
    e1 = AlgebraElement.mode(torus1, (1,))
    e2 = AlgebraElement.mode(torus1, (2,))
    prod = alg_mul(e1, e2)
    assert prod.degree == 3
    assert (prod - AlgebraElement.mode(torus1, (3,))).norm() < 1e-15


def test_nctorus_phase(nctorus):
    u = AlgebraElement.mode(nctorus, (1, 0))
    v = AlgebraElement.mode(nctorus, (0, 1))
    uv, vu = (u * v).coeff((1, 1)), (v * u).coeff((1, 1))
    assert abs(vu / uv - np.exp(2j * np.pi * nctorus.theta)) < 1e-14


def test_nctorus_modes_are_unitary(nctorus):
    for k in [(1, 0), (0, 1), (2, -3)]:
        e = AlgebraElement.mode(nctorus, k)
        one = AlgebraElement.unit(nctorus)
        assert (e.adjoint() * e - one).norm() < 1e-14
        assert (e * e.adjoint() - one).norm() < 1e-14


@pytest.mark.parametrize("kind", ["torus", "nctorus", "matrix"])
def test_associativity_distributivity(kind, rng):
    cfg = {"torus": BackendConfig("torus", 2, degree=8),
           "nctorus": BackendConfig("nctorus", 2, theta=0.37, degree=8),
           "matrix": BackendConfig("matrix", 4)}[kind]
    a, b, c = (random_element(cfg, rng) for _ in range(3))
    assert ((a * b) * c - a * (b * c)).norm() <= 1e-12
    assert (a * (b + c) - (a * b + a * c)).norm() <= 1e-12


def test_adjoint_reverses_products(nctorus, rng):
    a, b = random_element(nctorus, rng), random_element(nctorus, rng)
    assert ((a * b).adjoint() - b.adjoint() * a.adjoint()).norm() < 1e-13


def test_degree_overflow():
    cfg = BackendConfig("torus", 1, degree=2, max_degree=4)
    e3 = AlgebraElement.mode(cfg, (3,))
    e2 = AlgebraElement.mode(cfg, (2,))
    assert (AlgebraElement.mode(cfg, (2,)) * e2).degree == 4
    with pytest.raises(DegreeOverflow):
        e3 * e2


def test_backend_mismatch(torus1, torus2):
    with pytest.raises(BackendMismatch):
        AlgebraElement.unit(torus1) * AlgebraElement.unit(torus2)


def test_canonical_pruning_drops_negligible_shells(torus1):
    a = AlgebraElement.from_coeffs(torus1, {(0,): 1.0, (5,): 1e-17})
    assert a.degree == 0


# -- norms -------------------------------------------------------------------

def test_norm_examples(torus1, torus2):
    assert alg_norm(AlgebraElement.zero(torus1)) == 0.0
    assert alg_norm(AlgebraElement.mode(torus2, (3, -1))) == pytest.approx(1.0)
    assert alg_norm(cos1(torus1, 2.0)) == pytest.approx(3.0)


def test_norm_submultiplicative(nctorus, rng):
    for _ in range(10):
        a, b = random_element(nctorus, rng), random_element(nctorus, rng)
        assert (a * b).norm() <= a.norm() * b.norm() * (1 + 1e-12)


def test_matrix_norm_is_spectral(mat3):
    M = np.diag([3.0, -1.0, 0.5])
    assert alg_norm(AlgebraElement(mat3, M)) == pytest.approx(3.0)


# -- inversion ---------------------------------------------------------------

def test_invert_unit(torus2, nctorus, mat3):
    for cfg in (torus2, nctorus, mat3):
        one = AlgebraElement.unit(cfg)
        assert (alg_invert(one) - one).norm() < 1e-14


def test_invert_two_plus_cos(torus1):
    f = cos1(torus1, 2.0)
    g = alg_invert(f)
    assert (f * g - 1).norm() <= 1e-9
    # grid oracle: values of g match 1/f pointwise
    x = np.linspace(0, 1, 7)
    vals = sum(c * np.exp(2j * np.pi * k[0] * x) for k, c in g.coeffs().items())
    assert np.allclose(vals, 1 / (2 + np.cos(2 * np.pi * x)), atol=1e-12)


def test_invert_vanishing_function(torus1):
    with pytest.raises(NotInvertible):
        alg_invert(cos1(torus1))


@pytest.mark.parametrize("kind", ["nctorus", "matrix"])
def test_newton_schulz_and_dense_inverse(kind, rng):
    cfg = BackendConfig(kind, 2 if kind == "nctorus" else 3, theta=0.61, degree=6)
    for _ in range(5):
        a = random_invertible(cfg, rng, size=0.5)
        b = alg_invert(a)
        one = AlgebraElement.unit(cfg)
        assert (a * b - one).norm() <= cfg.tol
        assert (b * a - one).norm() <= cfg.tol
        assert (alg_invert(b) - a).norm() <= 1e-9


def test_nctorus_noninvertible(nctorus):
    # 1 + e_(1,0) has spectrum touching 0 (unitary with full circle spectrum)
    a = AlgebraElement.unit(nctorus) + AlgebraElement.mode(nctorus, (1, 0))
    with pytest.raises(NotInvertible):
        alg_invert(a)


def test_matrix_singular(mat3):
    with pytest.raises(NotInvertible):
        alg_invert(AlgebraElement(mat3, np.diag([1.0, 1.0, 0.0])))


# -- derivations -------------------------------------------------------------

def test_derivation_kills_unit(nctorus, rng):
    D = Derivation.basis(nctorus, 0) + Derivation.ad(random_element(nctorus, rng))
    assert apply_derivation(D, AlgebraElement.unit(nctorus)).norm() < 1e-14


def test_basis_derivation_on_mode(torus2):
    e = AlgebraElement.mode(torus2, (1, 0))
    d = apply_derivation(Derivation.basis(torus2, 0), e)
    assert abs(d.coeff((1, 0)) - 2j * np.pi) < 1e-14
    assert apply_derivation(Derivation.basis(torus2, 1), e).norm() == 0.0


@pytest.mark.parametrize("kind", ["torus", "nctorus", "matrix"])
def test_leibniz(kind, rng):
    cfg = BackendConfig(kind, 2 if kind != "matrix" else 3, theta=0.61, degree=3)
    c = random_element(cfg, rng)
    D = Derivation.ad(c) if kind == "matrix" else Derivation(cfg, (0.7, -1.3), c)
    for _ in range(5):
        a, b = random_element(cfg, rng), random_element(cfg, rng)
        assert (D(a * b) - D(a) * b - a * D(b)).norm() <= 1e-10


def test_inner_derivation_vanishes_on_commutative_torus(torus2, rng):
    D = Derivation.ad(random_element(torus2, rng))
    assert D.is_zero()


def test_derivation_bracket_formula(nctorus, rng):
    c1, c2 = random_element(nctorus, rng), random_element(nctorus, rng)
    D1 = Derivation(nctorus, (1.0, 0.5), c1)
    D2 = Derivation(nctorus, (-0.2, 2.0), c2)
    B = D1.bracket(D2)
    for _ in range(3):
        a = random_element(nctorus, rng)
        direct = D1(D2(a)) - D2(D1(a))
        assert (B(a) - direct).norm() < 1e-11


def test_matrix_backend_has_no_basis_derivations(mat3):
    with pytest.raises(UnknownDerivation):
        Derivation.basis(mat3, 0)


# -- automorphisms -----------------------------------------------------------

def test_translation_examples(torus2, rng):
    a = random_element(torus2, rng)
    assert (Automorphism.translation(torus2, (0.0, 0.0))(a) - a).norm() == 0.0
    v = (0.13, -0.4)
    e = AlgebraElement.mode(torus2, (2, 1))
    t = apply_automorphism(Automorphism.translation(torus2, v), e)
    assert abs(t.coeff((2, 1)) - np.exp(2j * np.pi * (2 * v[0] + v[1]))) < 1e-14
    w = (0.3, 0.2)
    tv, tw = Automorphism.translation(torus2, v), Automorphism.translation(torus2, w)
    tvw = Automorphism.translation(torus2, (v[0] + w[0], v[1] + w[1]))
    assert (tv(tw(a)) - tvw(a)).norm() < 1e-13


@pytest.mark.parametrize("kind", ["torus", "nctorus", "matrix"])
def test_automorphisms_multiplicative(kind, rng):
    cfg = BackendConfig(kind, 2 if kind != "matrix" else 3, theta=0.61, degree=8)
    u = random_invertible(cfg, rng)
    psi = Automorphism.inner(u)
    if cfg.fourier:
        psi = Automorphism.translation(cfg, (0.1, 0.27)).compose(psi)
    one = AlgebraElement.unit(cfg)
    assert (psi(one) - one).norm() < 1e-10
    for _ in range(3):
        a, b = random_element(cfg, rng), random_element(cfg, rng)
        assert (psi(a * b) - psi(a) * psi(b)).norm() <= 1e-10


def test_automorphism_composition_and_inverse(nctorus, rng):
    u1, u2 = random_invertible(nctorus, rng), random_invertible(nctorus, rng)
    f = Automorphism.translation(nctorus, (0.2, 0.1)).compose(Automorphism.inner(u1))
    g = Automorphism.inner(u2).compose(Automorphism.translation(nctorus, (-0.05, 0.3)))
    a = random_element(nctorus, rng)
    assert ((f @ g)(a) - f(g(a))).norm() < 1e-12
    assert (f.inverse()(f(a)) - a).norm() < 1e-12


def test_translation_generator_matches_basis_derivations(torus2, rng):
    a = random_element(torus2, rng)
    v = np.array([0.3, -0.8])
    h = 1e-5
    fd = (Automorphism.translation(torus2, tuple(h * v))(a)
          - Automorphism.translation(torus2, tuple(-h * v))(a)) / (2 * h)
    D = Derivation(torus2, tuple(v))
    assert (fd - D(a)).norm() <= 1e-6


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), theta=st.floats(0.0, 1.0))
def test_nctorus_associativity_property(seed, theta):
    cfg = BackendConfig("nctorus", 2, theta=theta, degree=4)
    rng = np.random.default_rng(seed)
    a, b, c = (random_element(cfg, rng, band=2) for _ in range(3))
    assert ((a * b) * c - a * (b * c)).norm() <= 1e-12
