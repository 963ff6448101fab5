"""``projmod`` command-line front end.  Exit status is 0 iff every check passes."""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io
from .algebra import Automorphism, BackendConfig, Derivation
from .matrix import mat_apply_automorphism
from .idempotent import (
    Idempotent,
    is_idempotent,
    path_conjugator,
    retract_idempotent,
    similarity_witness,
)
from .module import ModuleHom, ProjectiveModule, end_algebra_invert, project_vector
from .connection import (
    Connection,
    covariant_coordinate_report,
    covariant_derivative,
    covariant_derivative_gamma,
    curvature,
    dend_check,
    gamma_identity_residuals,
    gauge_identity_residual,
    gauge_transform,
    inner_pair_residual,
)
from .extension import (
    ExtensionElement,
    LiftCache,
    bracket_preservation_residual,
    cocycle_omega,
    crossed_law_residual,
    extension_multiply,
    jacobi_residual,
)
from .generators import (
    gen_bott,
    random_element,
    random_invertible,
    random_matrix,
    random_vector,
)
from .scenarios import SCENARIOS, run_scenario
from .errors import ProjmodError


GLOBAL_DEFAULTS = {
    "backend": "torus",
    "dim": 2,
    "theta": 0.6180339887,
    "degree": 8,
    "max_degree": None,
    "tol": 1e-9,
    "seed": 0,
    "inp": None,
    "out": None,
    "json": False,
}


def _common(parser, suppress):
    # leaf parsers suppress defaults so flags given before the subcommand survive
    def dflt(name):
        return argparse.SUPPRESS if suppress else GLOBAL_DEFAULTS[name]

    g = parser.add_argument_group("global options")
    g.add_argument("--backend", choices=["torus", "nctorus", "matrix"], default=dflt("backend"))
    g.add_argument("--dim", type=int, default=dflt("dim"))
    g.add_argument("--theta", type=float, default=dflt("theta"))
    g.add_argument("--degree", type=int, default=dflt("degree"))
    g.add_argument("--max-degree", type=int, default=dflt("max_degree"))
    g.add_argument("--tol", type=float, default=dflt("tol"))
    g.add_argument("--seed", type=int, default=dflt("seed"))
    g.add_argument("--in", dest="inp", default=dflt("inp"))
    g.add_argument("--out", default=dflt("out"))
    g.add_argument("--json", action="store_true", default=dflt("json"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="projmod", description=__doc__)
    _common(parser, suppress=False)
    leaf = argparse.ArgumentParser(add_help=False)
    _common(leaf, suppress=True)
    sub = parser.add_subparsers(dest="group", required=True)

    idem = sub.add_parser("idem", help="idempotent checks").add_subparsers(dest="action", required=True)
    idem.add_parser("check", parents=[leaf], help="report ||p^2 - p||")
    idem.add_parser("retract", parents=[leaf], help="cubic retraction onto Idem")
    sp = idem.add_parser("similar", parents=[leaf], help="witness conjugating --in (q) to --target (p)")
    sp.add_argument("--target", required=True)
    sp = idem.add_parser("path", parents=[leaf], help="conjugator along translates of the Bott idempotent")
    sp.add_argument("--bott", type=int, default=1)
    sp.add_argument("--shift", default="0.1,0")
    sp.add_argument("--steps", type=int, default=32)

    conn = sub.add_parser("conn", help="connections").add_subparsers(dest="action", required=True)
    for name, hlp in [
        ("levi", "Levi-Civita identities"),
        ("gauge", "gauge identity for random corner g"),
        ("covcoord", "covariant coordinates on a free module"),
        ("dend", "derivative-endomorphism relation"),
        ("curv", "curvature and its A-linearity"),
    ]:
        sp = conn.add_parser(name, parents=[leaf], help=hlp)
        sp.add_argument("--samples", type=int, default=5)

    ext = sub.add_parser("ext", help="extension data").add_subparsers(dest="action", required=True)
    for name in ["cocycle", "assoc", "crossed", "bracket", "jacobi"]:
        sp = ext.add_parser(name, parents=[leaf])
        sp.add_argument("--module", default=None, help="module JSON file (default: Bott idempotent)")
        sp.add_argument("--translations", default="0.05,0;0,0.07;0.03,0.04")
        sp.add_argument("--samples", type=int, default=5)

    gen = sub.add_parser("gen", help="example generators").add_subparsers(dest="action", required=True)
    sp = gen.add_parser("bott", parents=[leaf])
    sp.add_argument("--k", type=int, default=1)
    sp = gen.add_parser("element", parents=[leaf])
    sp.add_argument("--band", type=int, default=3)
    sp = gen.add_parser("matrix", parents=[leaf])
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--band", type=int, default=3)

    sp = sub.add_parser("scenario", parents=[leaf], help="run an acceptance suite")
    sp.add_argument("name", choices=SCENARIOS)
    sp.add_argument("--timing", action="store_true")
    return parser


def _config(args) -> BackendConfig:
    dim = args.dim
    if args.backend == "matrix" and dim == 2:
        dim = 3
    return BackendConfig(args.backend, dim, args.theta, args.degree, args.max_degree, args.tol)


def _report(test, samples, residual, tol):
    return {"test": test, "samples": samples, "max_residual": float(residual), "tol": tol,
            "pass": bool(residual <= tol)}


def _module(args, path=None) -> ProjectiveModule:
    path = path or args.inp
    if path:
        return io.module_from_json(io.read_json(path))
    if args.backend == "torus":
        return ProjectiveModule(gen_bott(1, args.degree, args.max_degree, args.tol))
    return ProjectiveModule.free(_config(args), 1 if args.backend == "nctorus" else 2)


def _basis(E):
    cfg = E.backend
    if cfg.fourier:
        return tuple(Derivation.basis(cfg, j) for j in range(cfg.dim))
    rng = np.random.default_rng(1)
    return tuple(Derivation.ad(random_element(cfg, rng)) for _ in range(2))


def _vectors(E, rng, count):
    return [project_vector(E, random_vector(E.backend, rng, E.n)) for _ in range(count)]


def _cmd_idem(args):
    if args.action == "path":
        P = gen_bott(args.bott, args.degree, args.max_degree, args.tol)
        v = np.array([float(x) for x in args.shift.split(",")])
        path = [P] + [
            retract_idempotent(mat_apply_automorphism(
                Automorphism.translation(P.backend, tuple(v * i / args.steps)), P.p))
            for i in range(1, args.steps + 1)
        ]
        w = path_conjugator(path)
        if args.out:
            io.write_json(io.matrix_to_json(w.s), args.out)
        return _report("path_conjugator", args.steps, w.residual, args.tol * args.steps)
    if not args.inp:
        raise SystemExit("--in is required")
    X = io.matrix_from_json(io.read_json(args.inp))
    if args.action == "check":
        ok, r = is_idempotent(X, args.tol)
        return _report("idempotent", 1, r, args.tol)
    if args.action == "retract":
        P = retract_idempotent(X)
        if args.out:
            io.write_json(io.idempotent_to_json(P), args.out)
        return _report("retract", 1, P.residual, 1e-12)
    q = Idempotent(X)
    p = io.idempotent_from_json(io.read_json(args.target))
    w = similarity_witness(p, q)
    if args.out:
        io.write_json(io.matrix_to_json(w.s), args.out)
    return _report("similarity_witness", 1, w.residual, args.tol)


def _cmd_conn(args):
    rng = np.random.default_rng(args.seed)
    if args.action == "covcoord":
        cfg = _config(args)
        E = ProjectiveModule.free(cfg, 1)
        C = Connection.levi_civita(E, _basis(E))
        gens = [random_element(cfg, rng) for _ in range(4)]
        vecs = _vectors(E, rng, args.samples)
        worst = max(covariant_coordinate_report(a, C, gens, vecs).max_commutator for a in gens)
        return _report("covariant_coordinate", len(gens) ** 2 * args.samples, worst, args.tol)
    E = _module(args)
    basis = _basis(E)
    vecs = _vectors(E, rng, args.samples)
    gens = [random_element(E.backend, rng) for _ in range(3)]
    C = Connection.levi_civita(E, basis)
    if args.action == "levi":
        r = 0.0
        for D in basis:
            r = max(r, gamma_identity_residuals(D, E.idem)["commutator"])
            for s in vecs:
                r = max(r, (covariant_derivative(C, D, s) - covariant_derivative_gamma(C, D, s)).norm())
        return _report("levi_civita", len(basis) * args.samples, r, args.tol)
    if args.action == "gauge":
        p = E.p
        alpha = [p * random_matrix(E.backend, rng, E.n, norm=0.5) * p for _ in basis]
        Ca = Connection.with_alpha(E, alpha, basis)
        g = ModuleHom(E, E, p + p * random_matrix(E.backend, rng, E.n, norm=0.1) * p)
        Cg = gauge_transform(Ca, g)
        r = gauge_identity_residual(Ca, Cg, g.x, end_algebra_invert(g).x, vecs)
        return _report("gauge", args.samples, r, args.tol)
    if args.action == "dend":
        r = 0.0
        for D in basis:
            rep = dend_check(C.operator(D), D, E, gens, vecs, args.tol)
            r = max(r, rep.relation_residual, rep.membership_residual)
        for a in gens:
            r = max(r, inner_pair_residual(a, E, gens, vecs))
        return _report("dend", len(basis) * args.samples, r, args.tol)
    rep = curvature(C, 0, 1, gens, vecs, args.tol)
    if args.out:
        io.write_json(io.matrix_to_json(rep.F), args.out)
    return _report("curvature_linearity", args.samples, rep.linearity_residual, args.tol)


def _parse_translations(text):
    return [tuple(float(x) for x in part.split(",")) for part in text.split(";") if part.strip()]


def _cmd_ext(args):
    rng = np.random.default_rng(args.seed)
    E = _module(args, args.module or args.inp)
    cfg = E.backend
    p = E.p
    if cfg.fourier:
        gs = [Automorphism.translation(cfg, v) for v in _parse_translations(args.translations)]
    else:
        gs = [Automorphism.inner(random_invertible(cfg, rng, size=0.05)) for _ in range(3)]
    cache = LiftCache(E)
    vecs = _vectors(E, rng, args.samples)
    gens = [random_element(cfg, rng) for _ in range(3)]
    if args.action == "cocycle":
        one = Automorphism.identity(cfg)
        r = max(max((cocycle_omega(g, one, E, cache) - p).norm(),
                    (cocycle_omega(one, g, E, cache) - p).norm()) for g in gs)
        for g in gs:
            L = cache.lift(g)
            r = max(r, max(L.semilinearity_residual(s, a) for s in vecs for a in gens))
        return _report("cocycle", len(gs), r, args.tol)
    if args.action == "assoc":
        elems = [(p + p * random_matrix(cfg, rng, E.n, norm=0.1) * p, g) for g in gs]
        r = 0.0
        count = 0
        for a in elems:
            for b in elems:
                for c in elems:
                    left = extension_multiply(extension_multiply(a, b, E, cache), c, E, cache)
                    right = extension_multiply(a, extension_multiply(b, c, E, cache), E, cache)
                    r = max(r, (left[0] - right[0]).norm())
                    count += 1
        return _report("assoc", count, r, max(args.tol, 1e-8))
    if args.action == "crossed":
        psi = gs[-1]
        r = max(crossed_law_residual(psi, random_invertible(cfg, rng), random_invertible(cfg, rng))
                for _ in range(args.samples))
        return _report("crossed", args.samples, r, min(args.tol, 1e-10))
    basis = _basis(E)

    def rand_ext():
        lam = rng.standard_normal(len(basis))
        x = Derivation.zero(cfg)
        for c, B in zip(lam, basis):
            x = x + B * float(c)
        return ExtensionElement(p * random_matrix(cfg, rng, E.n) * p, x)

    if args.action == "bracket":
        r = max(bracket_preservation_residual(rand_ext(), rand_ext(), E, vecs[:2])
                for _ in range(args.samples))
        return _report("bracket", args.samples, r, max(args.tol, 1e-8))
    r = max(jacobi_residual(rand_ext(), rand_ext(), rand_ext(), E) for _ in range(args.samples))
    return _report("jacobi", args.samples, r, max(args.tol, 1e-7))


def _cmd_gen(args):
    rng = np.random.default_rng(args.seed)
    if args.action == "bott":
        P = gen_bott(args.k, args.degree, args.max_degree, args.tol)
        obj = io.idempotent_to_json(P)
    elif args.action == "element":
        obj = io.element_to_json(random_element(_config(args), rng, args.band))
    else:
        obj = io.matrix_to_json(random_matrix(_config(args), rng, args.n, args.band))
    io.write_json(obj, args.out)
    return None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.group == "idem":
            result = _cmd_idem(args)
        elif args.group == "conn":
            result = _cmd_conn(args)
        elif args.group == "ext":
            result = _cmd_ext(args)
        elif args.group == "gen":
            return _cmd_gen(args) or 0
        else:
            rep = run_scenario(args.name, "matrix" if args.backend == "matrix" else "torus",
                               args.seed, args.timing)
            io.write_json(rep.to_dict(), args.out)
            if args.out and not args.json:
                print(f"{rep.scenario}: {'pass' if rep.passed else 'FAIL'}")
            return 0 if rep.passed else 1
    except ProjmodError as exc:
        step = getattr(exc, "step", None)
        where = f" (step {step})" if step else ""
        print(f"projmod: {type(exc).__name__}{where}: {exc}", file=sys.stderr)
        return 2
    if args.json or not args.out:
        print(io.dumps(result))
    else:
        print(f"{result['test']}: {'pass' if result['pass'] else 'FAIL'} "
              f"(max residual {result['max_residual']:.3e})")
    return 0 if result["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
