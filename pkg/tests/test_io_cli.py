import json
import subprocess
import sys

import pytest

from projmod import io
from projmod.algebra import AlgebraElement, BackendConfig, Derivation
from projmod.cli import main
from projmod.connection import Connection
from projmod.generators import random_element, random_matrix
from projmod.module import project_vector
from projmod.generators import random_vector


@pytest.mark.parametrize("kind", ["torus", "nctorus", "matrix"])
def test_element_round_trip(kind, rng):
    cfg = BackendConfig(kind, 2 if kind != "matrix" else 3, theta=0.3, degree=6)
    a = random_element(cfg, rng)
    text = io.dumps(io.element_to_json(a))
    b = io.element_from_json(json.loads(text))
    assert b.backend == cfg
    assert (a - b).norm() == 0.0


def test_element_json_shape(torus2):
    d = io.element_to_json(AlgebraElement.mode(torus2, (1, -2)) * (2 + 1j))
    assert d["coeffs"] == [{"k": [1, -2], "re": 2.0, "im": 1.0}]
    assert d["backend"]["kind"] == "torus"


def test_matrix_and_idempotent_round_trip(bott, rng):
    X = random_matrix(bott.backend, rng, 2)
    Y = io.matrix_from_json(json.loads(io.dumps(io.matrix_to_json(X))))
    assert (X - Y).norm() == 0.0
    P = io.idempotent_from_json(io.idempotent_to_json(bott))
    assert (P.p - bott.p).norm() == 0.0


def test_module_vector_connection_round_trip(bott_module, rng):
    E = bott_module
    E2 = io.module_from_json(io.module_to_json(E))
    assert (E2.p - E.p).norm() == 0.0
    s = project_vector(E, random_vector(E.backend, rng, 2))
    s2 = io.vector_from_json(io.vector_to_json(s), module=E2)
    assert (s - s2).norm() == 0.0
    p = E.p
    C = Connection.with_alpha(E, [p * random_matrix(E.backend, rng, 2) * p for _ in range(2)])
    C2 = io.connection_from_json(json.loads(io.dumps(io.connection_to_json(C))))
    for a, b in zip(C.alpha, C2.alpha):
        assert (a - b).norm() == 0.0
    assert [B.weights for B in C2.basis] == [B.weights for B in C.basis]


def test_derivation_round_trip(nctorus, rng):
    D = Derivation(nctorus, (0.5, -1.0), random_element(nctorus, rng))
    D2 = io.derivation_from_json(io.derivation_to_json(D), nctorus)
    a = random_element(nctorus, rng)
    assert (D(a) - D2(a)).norm() == 0.0


def test_bad_matrix_shape(torus2):
    with pytest.raises(ValueError):
        io.matrix_from_json({"n": 2, "backend": torus2.to_dict(), "entries": [[{"coeffs": []}]]})


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


def test_cli_gen_check_retract(tmp_path, capsys):
    bott = tmp_path / "bott.json"
    assert run(["gen", "bott", "--out", str(bott)], capsys)[0] == 0
    code, out = run(["idem", "check", "--in", str(bott), "--json"], capsys)
    assert code == 0 and json.loads(out.out)["pass"]
    half = tmp_path / "half.json"
    cfg = BackendConfig("torus", 2)
    from projmod.matrix import MatrixElement
    io.write_json(io.matrix_to_json(MatrixElement.identity(cfg, 2) * 0.5), str(half))
    code, out = run(["idem", "check", "--in", str(half)], capsys)
    assert code == 1
    code, out = run(["idem", "retract", "--in", str(half)], capsys)
    assert code == 2 and "NoConvergence" in out.err


def test_cli_similar(tmp_path, capsys):
    bott = tmp_path / "bott.json"
    run(["gen", "bott", "--out", str(bott)], capsys)
    code, out = run(["idem", "similar", "--in", str(bott), "--target", str(bott)], capsys)
    assert code == 0
    assert json.loads(out.out)["max_residual"] <= 1e-12


def test_cli_path_far_jump_exit_code(capsys):
    code, out = run(["idem", "path", "--shift", "0.5,0.5", "--steps", "1"], capsys)
    assert code == 2 and "NotInNeighborhood" in out.err


@pytest.mark.parametrize("argv", [
    ["conn", "levi", "--samples", "2"],
    ["conn", "covcoord", "--backend", "nctorus", "--degree", "6", "--samples", "2"],
    ["ext", "crossed", "--backend", "nctorus", "--samples", "3"],
    ["ext", "cocycle", "--samples", "2"],
])
def test_cli_checks_pass(argv, capsys):
    code, out = run(argv, capsys)
    assert code == 0, out.err
    assert json.loads(out.out)["pass"]


def test_cli_global_flags_after_subcommand(capsys):
    a = run(["--seed", "3", "gen", "element", "--band", "2"], capsys)[1].out
    b = run(["gen", "element", "--band", "2", "--seed", "3"], capsys)[1].out
    assert a == b


def test_cli_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["scenario", "nope"])
    assert info.value.code == 2


def test_scenario_report_deterministic(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        subprocess.run([sys.executable, "-m", "projmod.cli", "scenario", "crossed",
                        "--backend", "matrix", "--out", str(path)], check=True, capture_output=True)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    rep = json.loads(outs[0])
    assert rep["pass"] and "wall_ms" not in rep
    assert set(rep["records"][0]) == {"name", "ref", "samples", "max_residual", "tol", "pass"}
