"""Acceptance scenarios over the Bott module on the 2-torus, the
noncommutative torus, and an exact dense matrix oracle ``A = M_3(C)``."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import product as iproduct

import numpy as np
from scipy.linalg import expm

from .algebra import AlgebraElement, Automorphism, BackendConfig, Derivation
from .matrix import MatrixElement, mat_apply_automorphism, mat_invert
from .idempotent import (
    Idempotent,
    corner_invert,
    iso_pair_from_conjugator,
    normalize_iso_pair,
    path_conjugator,
    retract_idempotent,
    similarity_witness,
    stabilize_conjugator,
)
from .module import ModuleHom, ProjectiveModule, end_algebra_invert, project_vector
from .connection import (
    Connection,
    alpha_distance,
    covariant_coordinate_report,
    covariant_derivative,
    covariant_derivative_gamma,
    gamma_identity_residuals,
    gauge_identity_residual,
    gauge_transform,
)
from .extension import (
    ExtensionElement,
    LiftCache,
    bracket_preservation_residual,
    cocycle_omega,
    crossed_law_residual,
    domega,
    domega_operator,
    extension_multiply,
    jacobi_residual,
    linearity_residual,
)
from .generators import (
    gen_bott,
    matrix_oracle_idempotent,
    random_element,
    random_invertible,
    random_matrix,
    random_vector,
)

SCENARIOS = (
    "prop11", "corner", "stabilize", "lemma44", "gauge",
    "covcoord", "cocycle", "bracket", "crossed", "oracle",
)
ORACLE_TOL = 1e-10
NC_THETA = 0.6180339887


@dataclass
class Record:
    name: str
    ref: str
    samples: int
    max_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tol)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "ref": self.ref,
            "samples": self.samples,
            "max_residual": float(self.max_residual),
            "tol": self.tol,
            "pass": self.passed,
        }


@dataclass
class ScenarioReport:
    scenario: str
    backend: dict
    seed: int
    records: list = field(default_factory=list)
    wall_ms: float | None = None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def record(self, name, ref, samples, residual, tol):
        self.records.append(Record(name, ref, samples, float(residual), tol))

    def to_dict(self) -> dict:
        out = {
            "scenario": self.scenario,
            "backend": self.backend,
            "seed": self.seed,
            "records": [r.to_dict() for r in sorted(self.records, key=lambda r: r.name)],
            "pass": self.passed,
        }
        if self.wall_ms is not None:
            out["wall_ms"] = round(self.wall_ms, 1)
        return out


# ---------------------------------------------------------------------------
# fixtures


class Fixture:
    """Everything a suite needs for one backend."""

    kind: str
    cfg: BackendConfig
    idem: Idempotent
    basis: tuple

    def tol(self, value: float) -> float:
        return value

    @property
    def module(self) -> ProjectiveModule:
        return ProjectiveModule(self.idem)

    def rand_matrix(self, rng, norm):
        return random_matrix(self.cfg, rng, self.idem.n, norm=norm)

    def rand_corner_unit(self, rng, norm=0.1):
        """``p + p h p`` with ``||h|| = norm``."""
        p = self.idem.p
        return p + p * self.rand_matrix(rng, norm) * p

    def rand_vectors(self, rng, count):
        E = self.module
        return [project_vector(E, random_vector(self.cfg, rng, E.n)) for _ in range(count)]

    def rand_scalars(self, rng, count):
        return [random_element(self.cfg, rng) for _ in range(count)]

    def rand_invertible(self, rng):
        return random_invertible(self.cfg, rng)

    def rand_derivation(self, rng):
        lam = rng.standard_normal(len(self.basis))
        out = Derivation.zero(self.cfg)
        for c, B in zip(lam, self.basis):
            out = out + B * float(c)
        return out


class TorusFixture(Fixture):
    """Bott idempotent (degree 1) on the 2-torus, band 8, cap 64."""

    kind = "torus"

    def __init__(self, degree=8, max_degree=64, tol=1e-9):
        self.idem = gen_bott(1, degree, max_degree, tol)
        self.cfg = self.idem.backend
        self.basis = tuple(Derivation.basis(self.cfg, j) for j in range(2))
        self.translations = [(0.05, 0.0), (0.0, 0.07), (0.03, 0.04)]

    def group_elements(self):
        return [Automorphism.translation(self.cfg, v) for v in self.translations]

    def path_automorphism(self, t):
        return Automorphism.translation(self.cfg, (0.1 * t, 0.0))

    def crossed_automorphism(self):
        return Automorphism.translation(self.cfg, (0.03, 0.04))

    def covcoord_setup(self):
        cfg = BackendConfig("nctorus", 2, theta=NC_THETA, degree=6)
        gens = [AlgebraElement.mode(cfg, k) for k in [(1, 0), (-1, 0), (0, 1), (0, -1)]]
        E = ProjectiveModule.free(cfg, 1)
        return cfg, E, Connection.levi_civita(E), gens

    def free_setup(self):
        return ProjectiveModule.free(self.cfg, 2), self.basis


class MatrixFixture(Fixture):
    """Exact oracle: ``A = M_3(C)``, a random non-orthogonal idempotent in
    ``M_2(A)``, inner derivations and inner automorphisms."""

    kind = "matrix"

    def __init__(self, seed=0, tol=ORACLE_TOL):
        rng = np.random.default_rng(10_000 + seed)
        self.cfg = BackendConfig("matrix", 3, tol=tol)
        self.idem = matrix_oracle_idempotent(self.cfg, rng)
        X = [self._rand_gen(rng) for _ in range(2)]
        self.generators = X
        self.basis = tuple(Derivation.ad(AlgebraElement(self.cfg, x)) for x in X)
        self.path_gen = self._rand_gen(rng) * 0.5
        self.group_gens = [self._rand_gen(rng) * s for s in (0.05, 0.07, 0.05)]

    @staticmethod
    def _rand_gen(rng):
        Z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        return Z / np.linalg.norm(Z, 2)

    def tol(self, value):
        return min(value, ORACLE_TOL)

    def _inner(self, X):
        u = AlgebraElement(self.cfg, expm(X))
        return Automorphism.inner(u, AlgebraElement(self.cfg, expm(-X)))

    def group_elements(self):
        return [self._inner(X) for X in self.group_gens]

    def path_automorphism(self, t):
        return self._inner(t * self.path_gen)

    def crossed_automorphism(self):
        return self.group_elements()[2]

    def covcoord_setup(self):
        E = ProjectiveModule.free(self.cfg, 1)
        rng = np.random.default_rng(20_000)
        alpha = [random_matrix(self.cfg, rng, 1, norm=0.5) for _ in self.basis]
        C = Connection.with_alpha(E, alpha, self.basis)
        gens = [random_element(self.cfg, rng) for _ in range(4)]
        return self.cfg, E, C, gens

    def free_setup(self):
        return ProjectiveModule.free(self.cfg, 2), self.basis


# ---------------------------------------------------------------------------
# suites


def suite_similarity(fx: Fixture, rep: ScenarioReport, rng, samples=100):
    p = fx.idem
    one = MatrixElement.identity(fx.cfg, p.n)
    worst_conj = worst_comm = 0.0
    for _ in range(samples):
        h = fx.rand_matrix(rng, 0.1 * rng.uniform(0.2, 1.0))
        u = one + h
        q = retract_idempotent(u * p.p * mat_invert(u))
        w = similarity_witness(p, q)
        worst_conj = max(worst_conj, w.residual)
        worst_comm = max(worst_comm, (w.s * q.p - p.p * w.s).norm())
    rep.record("witness_conjugates_q_to_p", "similarity witness s q s^-1 = p",
               samples, worst_conj, fx.tol(1e-8))
    rep.record("witness_intertwines", "s q = p s for s = pq + (1-p)(1-q)",
               samples, worst_comm, fx.tol(1e-12))


def suite_corner(fx: Fixture, rep: ScenarioReport, rng, samples=100):
    p = fx.idem
    worst_inv = worst_double = 0.0
    for _ in range(samples):
        c = np.exp(2j * np.pi * rng.random()) * rng.uniform(0.5, 2.0)
        a = fx.rand_corner_unit(rng, 0.1) * c
        b = corner_invert(a, p)
        worst_inv = max(worst_inv, (a * b - p.p).norm(), (b * a - p.p).norm())
        worst_double = max(worst_double, (corner_invert(b, p) - a).norm())
    rep.record("corner_inverse", "a b = b a = p in the corner algebra", samples, worst_inv, fx.tol(1e-8))
    rep.record("corner_double_inverse", "inverting twice returns a", samples, worst_double, fx.tol(1e-8))


def stabilize_pipeline(fx: Fixture, steps=32):
    p = fx.idem
    path = [p] + [
        retract_idempotent(mat_apply_automorphism(fx.path_automorphism(i / steps), p.p))
        for i in range(1, steps + 1)
    ]
    g = path_conjugator(path)
    q = path[-1]
    x, y = iso_pair_from_conjugator(g)
    x1, y1 = normalize_iso_pair(x, y, p, q)
    return g, stabilize_conjugator(x1, y1, p, q)


def suite_stabilize(fx: Fixture, rep: ScenarioReport, rng, steps=32):
    g, st = stabilize_pipeline(fx, steps)
    rep.record("path_conjugator", "composed witnesses carry p to its translate",
               steps, g.residual, fx.tol(fx.cfg.tol * steps))
    rep.record("alpha_involution", "alpha^2 = 1", 1, st.alpha_residual, fx.tol(1e-12))
    rep.record("beta_involution", "beta^2 = 1", 1, st.beta_residual, fx.tol(1e-12))
    rep.record("stabilized_conjugation", "z q~ z^-1 = p~", 1, st.residual, fx.tol(1e-7))


def suite_levi_civita(fx: Fixture, rep: ScenarioReport, rng, samples=20):
    E = fx.module
    C = Connection.levi_civita(E, fx.basis)
    vecs = fx.rand_vectors(rng, samples)
    scal = fx.rand_scalars(rng, samples)
    q = fx.idem.complement()
    comm = mem = leib = forms = 0.0
    for D in fx.basis:
        comm = max(comm, gamma_identity_residuals(D, fx.idem)["commutator"])
        for s, a in zip(vecs, scal):
            nds = covariant_derivative(C, D, s)
            mem = max(mem, (q * nds.plain()).norm())
            lhs = covariant_derivative(C, D, s * a)
            leib = max(leib, (lhs - nds * a - s * D(a)).norm())
            forms = max(forms, (nds - covariant_derivative_gamma(C, D, s)).norm())
    n = len(fx.basis)
    rep.record("gamma_commutator", "[p, gamma(D)] = D.p", n, comm, fx.tol(1e-10))
    rep.record("nabla_preserves_module", "(1-p) nabla_D s = 0", n * samples, mem, fx.tol(1e-9))
    rep.record("nabla_leibniz", "nabla_D(s.a) = nabla_D(s).a + s.(D.a)", n * samples, leib, fx.tol(1e-9))
    rep.record("nabla_two_formulas", "p(D.s) = gamma(D)s + D.s on E", n * samples, forms, fx.tol(1e-10))


def suite_gauge(fx: Fixture, rep: ScenarioReport, rng, samples=20, vectors=3):
    E = fx.module
    p = fx.idem.p
    alpha = [p * fx.rand_matrix(rng, 0.5) * p for _ in fx.basis]
    C = Connection.with_alpha(E, alpha, fx.basis)
    vecs = fx.rand_vectors(rng, vectors)
    gs = [ModuleHom(E, E, fx.rand_corner_unit(rng, 0.1)) for _ in range(samples)]
    ident = right = 0.0
    for i, g in enumerate(gs):
        Cg = gauge_transform(C, g)
        g_inv = end_algebra_invert(g).x
        ident = max(ident, gauge_identity_residual(C, Cg, g.x, g_inv, vecs))
        h = gs[(i + 1) % samples]
        right = max(right, alpha_distance(gauge_transform(Cg, h), gauge_transform(C, g.compose(h))))
    rep.record("gauge_identity", "nabla'(s) = g^-1 nabla(g s)", samples, ident, fx.tol(1e-8))
    rep.record("gauge_right_action", "(nabla^g)^h = nabla^(gh)", samples, right, fx.tol(1e-8))
    # fixed point: alpha = delta(h), g = h^-1 c h with constant c
    F, basis = fx.free_setup()
    one = MatrixElement.identity(fx.cfg, 2)
    hm = one + random_matrix(fx.cfg, rng, 2, norm=0.2)
    hm_inv = mat_invert(hm)
    C0 = Connection.levi_civita(F, basis)
    Ch = gauge_transform(C0, ModuleHom(F, F, hm))
    c = MatrixElement.constant(fx.cfg, np.array([[2.0, 0.5j], [0.3, 1.0]]))
    gfix = ModuleHom(F, F, hm_inv * c * hm)
    fixed = alpha_distance(gauge_transform(Ch, gfix), Ch)
    rep.record("gauge_fixed_point", "delta(g) = alpha - Ad(g^-1) alpha fixes alpha", 1, fixed, fx.tol(1e-10))


def suite_covcoord(fx: Fixture, rep: ScenarioReport, rng, vectors=3):
    cfg, E, C, gens = fx.covcoord_setup()
    vecs = [project_vector(E, random_vector(cfg, rng, E.n)) for _ in range(vectors)]
    worst = 0.0
    for a in gens:
        worst = max(worst, covariant_coordinate_report(a, C, gens, vecs).max_commutator)
    rep.record("covariant_coordinate_commutes", "[rho^(a), rho(b)] = 0",
               len(gens) ** 2 * vectors, worst, fx.tol(1e-9))


def suite_cocycle(fx: Fixture, rep: ScenarioReport, rng, vectors=3):
    E = fx.module
    p = fx.idem.p
    cache = LiftCache(E)
    gs = fx.group_elements()
    ns = [fx.rand_corner_unit(rng, 0.1) for _ in gs]
    elems = list(zip(ns, gs))
    one = Automorphism.identity(fx.cfg)
    assoc = fsys = 0.0
    count = 0
    for a, b, c in iproduct(elems, repeat=3):
        left = extension_multiply(extension_multiply(a, b, E, cache), c, E, cache)
        right = extension_multiply(a, extension_multiply(b, c, E, cache), E, cache)
        assoc = max(assoc, (left[0] - right[0]).norm())
        g1, g2, g3 = a[1], b[1], c[1]
        lhs = cocycle_omega(g1, g2, E, cache) * cocycle_omega(g1.compose(g2), g3, E, cache)
        rhs = cache.lift(g1).conj(cocycle_omega(g2, g3, E, cache)) * cocycle_omega(g1, g2.compose(g3), E, cache)
        fsys = max(fsys, (lhs - rhs).norm())
        count += 1
    vecs = fx.rand_vectors(rng, vectors)
    scal = fx.rand_scalars(rng, vectors)
    semi = mem = 0.0
    lifts = [cache.lift(g) for g in gs] + [cache.lift(g.compose(h)) for g in gs for h in gs]
    for L in lifts:
        for s, a in zip(vecs, scal):
            semi = max(semi, L.semilinearity_residual(s, a))
            mem = max(mem, L.membership_residual(s))
    norm = max(
        max((cocycle_omega(g, one, E, cache) - p).norm(), (cocycle_omega(one, g, E, cache) - p).norm())
        for g in gs
    )
    rep.record("extension_associativity", "(ab)c = a(bc) for the twisted product", count, assoc, fx.tol(1e-8))
    rep.record("factor_system", "omega(g,h) omega(gh,k) = S(g)(omega(h,k)) omega(g,hk)", count, fsys, fx.tol(1e-8))
    rep.record("lift_semilinearity", "S(g)(s.a) = S(g)(s).(g.a)", len(lifts) * vectors, semi, fx.tol(1e-9))
    rep.record("lift_membership", "S(g) preserves E", len(lifts) * vectors, mem, fx.tol(1e-9))
    rep.record("omega_normalized", "omega(g,1) = omega(1,g) = p", len(gs), norm, fx.tol(1e-12))


def suite_bracket(fx: Fixture, rep: ScenarioReport, rng, samples=20, vectors=2):
    E = fx.module
    p = fx.idem.p

    def rand_ext():
        return ExtensionElement(p * fx.rand_matrix(rng, 1.0) * p, fx.rand_derivation(rng))

    vecs = fx.rand_vectors(rng, vectors)
    scal = fx.rand_scalars(rng, 3)
    pres = jac = lin = anti = 0.0
    for _ in range(samples):
        u, v = rand_ext(), rand_ext()
        pres = max(pres, bracket_preservation_residual(u, v, E, vecs))
    for _ in range(samples):
        jac = max(jac, jacobi_residual(rand_ext(), rand_ext(), rand_ext(), E))
    for _ in range(5):
        x, y = fx.rand_derivation(rng), fx.rand_derivation(rng)
        lin = max(lin, linearity_residual(domega_operator(x, y, E), scal, vecs))
        anti = max(anti, (domega(x, y, E) + domega(y, x, E)).norm())
    rep.record("bracket_preservation", "[Gamma u, Gamma v] = Gamma [u, v]", samples, pres, fx.tol(1e-8))
    rep.record("jacobi", "cyclic sum of hat brackets vanishes", samples, jac, fx.tol(1e-7))
    rep.record("domega_linearity", "Domega(x, y) commutes with rho_E", 5, lin, fx.tol(1e-8))
    rep.record("domega_antisymmetry", "Domega(x, y) + Domega(y, x) = 0", 5, anti, fx.tol(1e-12))


def suite_crossed(fx: Fixture, rep: ScenarioReport, rng, samples=50):
    psi = fx.crossed_automorphism()
    worst = 0.0
    for _ in range(samples):
        a, b = fx.rand_invertible(rng), fx.rand_invertible(rng)
        worst = max(worst, crossed_law_residual(psi, a, b))
    rep.record("crossed_law", "m(ab) = a m(b) a^-1 m(a)", samples, worst, fx.tol(1e-10))


SUITES = {
    "prop11": suite_similarity,
    "corner": suite_corner,
    "stabilize": suite_stabilize,
    "lemma44": suite_levi_civita,
    "gauge": suite_gauge,
    "covcoord": suite_covcoord,
    "cocycle": suite_cocycle,
    "bracket": suite_bracket,
    "crossed": suite_crossed,
}


_FIXTURES = {}


def get_fixture(kind: str = "torus", seed: int = 0) -> Fixture:
    key = (kind, seed if kind == "matrix" else 0)
    if key not in _FIXTURES:
        if kind == "torus":
            _FIXTURES[key] = TorusFixture()
        elif kind == "matrix":
            _FIXTURES[key] = MatrixFixture(seed)
        else:
            raise ValueError(f"scenarios run on the torus or matrix backend, not {kind!r}")
    return _FIXTURES[key]


def run_scenario(name: str, backend: str = "torus", seed: int = 0, timing: bool = False) -> ScenarioReport:
    """Run one named suite; ``oracle`` runs every suite on the matrix backend."""
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    t0 = time.perf_counter()
    if name == "oracle":
        fx = get_fixture("matrix", seed)
        rep = ScenarioReport(name, fx.cfg.to_dict(), seed)
        for sub, fn in SUITES.items():
            part = ScenarioReport(sub, rep.backend, seed)
            fn(fx, part, np.random.default_rng(seed))
            for r in part.records:
                r.name = f"{sub}.{r.name}"
                rep.records.append(r)
    else:
        fx = get_fixture(backend, seed)
        rep = ScenarioReport(name, fx.cfg.to_dict(), seed)
        SUITES[name](fx, rep, np.random.default_rng(seed))
    if timing:
        rep.wall_ms = (time.perf_counter() - t0) * 1e3
    return rep
