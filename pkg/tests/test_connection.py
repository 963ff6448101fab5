import numpy as np
import pytest

from projmod.algebra import Derivation
from projmod.matrix import MatrixElement, commutator, mat_apply_derivation
from projmod.module import ModuleHom, ProjectiveModule, project_vector
from projmod.connection import (
    Connection,
    DerivativeEndomorphism,
    covariant_coordinate_report,
    covariant_derivative,
    covariant_derivative_gamma,
    curvature,
    decompose,
    default_basis,
    dend_check,
    gamma_identity_residuals,
    gamma_of_derivation,
    gauge_identity_residual,
    gauge_transform,
    alpha_distance,
    inner_pair_residual,
)
from projmod.errors import NotInModule, UnknownDerivation
from projmod.generators import random_element, random_matrix, random_vector


def vectors(E, rng, count=3):
    return [project_vector(E, random_vector(E.backend, rng, E.n)) for _ in range(count)]


def test_gamma_identities_on_bott(bott):
    for D in default_basis(bott.backend):
        res = gamma_identity_residuals(D, bott)
        assert max(res.values()) <= 1e-10
        g = gamma_of_derivation(D, bott)
        assert (commutator(bott.p, g) - mat_apply_derivation(D, bott.p)).norm() <= 1e-10


def test_gamma_constant_idempotent_is_zero(torus2):
    from projmod.idempotent import Idempotent
    idem = Idempotent(MatrixElement.constant(torus2, np.diag([1.0, 0.0])))
    for D in default_basis(torus2):
        assert gamma_of_derivation(D, idem).norm() == 0.0


def test_levi_civita_leibniz_and_membership(bott_module, rng):
    E = bott_module
    C = Connection.levi_civita(E)
    q = E.idem.complement()
    for s in vectors(E, rng):
        a = random_element(E.backend, rng)
        for D in C.basis:
            nds = covariant_derivative(C, D, s)
            assert (q * nds.plain()).norm() <= 1e-10
            lhs = covariant_derivative(C, D, s * a)
            assert (lhs - nds * a - s * D(a)).norm() <= 1e-9
            assert (nds - covariant_derivative_gamma(C, D, s)).norm() <= 1e-10


def test_free_module_levi_civita_is_plain_derivative(nctorus, rng):
    F = ProjectiveModule.free(nctorus, 2)
    C = Connection.levi_civita(F)
    from projmod.matrix import vec_apply_derivation
    s = project_vector(F, random_vector(nctorus, rng, 2))
    D = C.basis[1]
    assert (covariant_derivative(C, D, s).plain() - vec_apply_derivation(D, s.plain())).norm() <= 1e-13


def test_derivative_endomorphism_relation(bott_module, rng):
    E = bott_module
    gens = [random_element(E.backend, rng) for _ in range(3)]
    vecs = vectors(E, rng)
    for D in default_basis(E.backend):
        phi = DerivativeEndomorphism(gamma_of_derivation(D, E.idem), D)
        rep = dend_check(phi, D, E, gens, vecs)
        assert rep.passed
    # a corner matrix alone is A-linear, so it satisfies the relation for D = 0
    M = E.p * random_matrix(E.backend, rng, 2) * E.p
    assert dend_check(DerivativeEndomorphism.corner(M), Derivation.zero(E.backend), E, gens, vecs).passed
    # but not for a nonzero D
    assert not dend_check(DerivativeEndomorphism.corner(M), C_basis(E)[0], E, gens, vecs).passed


def C_basis(E):
    return default_basis(E.backend)


def test_inner_pair(nctorus, rng):
    F = ProjectiveModule.free(nctorus, 2)
    a = random_element(nctorus, rng)
    phi = DerivativeEndomorphism.right_mult(a, 2)
    s = vectors(F, rng, 1)[0]
    assert (phi(s) - s * a).norm() <= 1e-13
    gens = [random_element(nctorus, rng) for _ in range(3)]
    assert inner_pair_residual(a, F, gens, vectors(F, rng)) <= 1e-10


def test_decompose(nctorus, rng):
    D1, D2 = default_basis(nctorus)
    lam = decompose(D1 * 2.0 + D2 * -0.5 + Derivation.ad(random_element(nctorus, rng)), (D1, D2))
    assert np.allclose(lam, [2.0, -0.5])
    with pytest.raises(UnknownDerivation):
        decompose(D2, (D1,))


def test_matrix_backend_needs_basis(mat3):
    with pytest.raises(UnknownDerivation):
        default_basis(mat3)


def test_alpha_corner_constraint(bott_module, rng):
    with pytest.raises(NotInModule):
        Connection.with_alpha(bott_module, [random_matrix(bott_module.backend, rng, 2)] * 2)


def random_connection(E, rng):
    p = E.p
    return Connection.with_alpha(E, [p * random_matrix(E.backend, rng, 2, norm=0.5) * p for _ in range(2)])


def corner_unit(E, rng):
    return ModuleHom(E, E, E.p + E.p * random_matrix(E.backend, rng, 2, norm=0.1) * E.p)


def test_gauge_identity_element(bott_module, rng):
    C = random_connection(bott_module, rng)
    Cg = gauge_transform(C, bott_module.identity_hom())
    assert alpha_distance(C, Cg) <= 1e-10


def test_gauge_identity_and_right_action(bott_module, rng):
    E = bott_module
    C = random_connection(E, rng)
    vecs = vectors(E, rng, 2)
    g, h = corner_unit(E, rng), corner_unit(E, rng)
    Cg = gauge_transform(C, g, vectors=vecs)
    from projmod.module import end_algebra_invert
    assert gauge_identity_residual(C, Cg, g.x, end_algebra_invert(g).x, vecs) <= 1e-8
    assert alpha_distance(gauge_transform(Cg, h), gauge_transform(C, g.compose(h))) <= 1e-8


def test_covariant_coordinates_commute(nctorus, rng):
    F = ProjectiveModule.free(nctorus, 1)
    C = Connection.levi_civita(F)
    gens = [random_element(nctorus, rng, band=2) for _ in range(2)]
    vecs = vectors(F, rng, 2)
    for a in gens:
        assert covariant_coordinate_report(a, C, gens, vecs).passed


def test_covariant_coordinate_ignores_alpha_on_inner(nctorus, rng):
    # inner derivations have zero basis coordinates, so alpha never enters

    F = ProjectiveModule.free(nctorus, 1)
    alpha = [random_matrix(nctorus, rng, 1, norm=0.5) for _ in range(2)]
    C = Connection.with_alpha(F, alpha)
    gens = [random_element(nctorus, rng, band=2) for _ in range(2)]
    rep = covariant_coordinate_report(gens[0], C, gens, vectors(F, rng, 2))
    assert rep.passed


def test_bott_curvature_formula(bott_module, rng):
    E = bott_module
    C = Connection.levi_civita(E)
    gens = [random_element(E.backend, rng) for _ in range(2)]
    rep = curvature(C, 0, 1, gens, vectors(E, rng, 2))
    assert rep.passed
    p = E.p
    d1, d2 = (mat_apply_derivation(D, p) for D in C.basis)
    expected = p * (d1 * d2 - d2 * d1) * p
    assert (rep.F * p - expected).norm() <= 1e-8
    # the Bott line bundle is not flat
    assert expected.norm() > 1e-2


def test_free_levi_civita_is_flat(torus2, rng):
    F = ProjectiveModule.free(torus2, 2)
    C = Connection.levi_civita(F)
    rep = curvature(C, 0, 1, [random_element(torus2, rng)], vectors(F, rng, 2))
    assert rep.F.norm() <= 1e-10
