"""JSON formats for elements, matrices, idempotents, modules, vectors and
connections.  Floats are written with ``repr`` precision so files
round-trip exactly."""
from __future__ import annotations

import json

import numpy as np

from . import algebra as alg
from .algebra import AlgebraElement, BackendConfig, Derivation
from .matrix import AlgebraVector, MatrixElement
from .idempotent import Idempotent
from .module import ModuleVector, ProjectiveModule
from .connection import Connection, default_basis


def _cnum(z) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def _element_body(cfg: BackendConfig, data: np.ndarray) -> dict:
    if cfg.fourier:
        deg = alg.degree_of(cfg, data)
        coeffs = []
        for idx in zip(*np.nonzero(data)):
            k = [int(i) - deg for i in idx]
            coeffs.append({"k": k, **_cnum(data[idx])})
        return {"coeffs": coeffs}
    return {"entries": [[_cnum(z) for z in row] for row in data]}


def _element_data(cfg: BackendConfig, body: dict) -> np.ndarray:
    if cfg.fourier:
        coeffs = body.get("coeffs", [])
        deg = max((max(abs(x) for x in c["k"]) for c in coeffs), default=0)
        data = np.zeros(alg.core_shape(cfg, deg), dtype=complex)
        for c in coeffs:
            if len(c["k"]) != cfg.dim:
                raise ValueError(f"multi-index {c['k']} has wrong length")
            data[tuple(x + deg for x in c["k"])] += complex(c["re"], c["im"])
        return data
    rows = body["entries"]
    return np.array([[complex(z["re"], z["im"]) for z in row] for row in rows])


def element_to_json(a: AlgebraElement) -> dict:
    return {"backend": a.backend.to_dict(), **_element_body(a.backend, a.data)}


def element_from_json(d: dict, backend: BackendConfig | None = None) -> AlgebraElement:
    cfg = BackendConfig.from_dict(d["backend"]) if "backend" in d else backend
    if cfg is None:
        raise ValueError("element file carries no backend")
    return AlgebraElement(cfg, _element_data(cfg, d))


def _stack(cfg, arrays):
    if cfg.fourier:
        deg = max(alg.degree_of(cfg, a) for a in arrays)
        arrays = [alg.pad(cfg, a, deg) for a in arrays]
    return np.stack(arrays)


def matrix_to_json(X: MatrixElement) -> dict:
    cfg = X.backend
    return {
        "n": X.n,
        "backend": cfg.to_dict(),
        "entries": [[_element_body(cfg, X.data[i, j]) for j in range(X.n)] for i in range(X.n)],
    }


def matrix_from_json(d: dict, backend: BackendConfig | None = None) -> MatrixElement:
    cfg = BackendConfig.from_dict(d["backend"]) if "backend" in d else backend
    if cfg is None:
        raise ValueError("matrix file carries no backend")
    n = int(d["n"])
    rows = d["entries"]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError("entries do not form an n x n array")
    cells = [_element_data(cfg, e) for r in rows for e in r]
    data = _stack(cfg, cells)
    return MatrixElement(cfg, data.reshape((n, n) + data.shape[1:]))


def idempotent_to_json(P: Idempotent) -> dict:
    return {**matrix_to_json(P.p), "residual": P.residual}


def idempotent_from_json(d: dict, backend=None) -> Idempotent:
    return Idempotent(matrix_from_json(d, backend))


def module_to_json(E: ProjectiveModule) -> dict:
    return {"n": E.n, "p": matrix_to_json(E.p), "backend": E.backend.to_dict()}


def module_from_json(d: dict) -> ProjectiveModule:
    cfg = BackendConfig.from_dict(d["backend"]) if "backend" in d else None
    return ProjectiveModule(Idempotent(matrix_from_json(d["p"], cfg)))


def vector_to_json(v: AlgebraVector) -> dict:
    cfg = v.backend
    return {"backend": cfg.to_dict(), "v": [_element_body(cfg, v.data[i]) for i in range(v.n)]}


def vector_from_json(d: dict, module: ProjectiveModule | None = None, backend=None):
    cfg = BackendConfig.from_dict(d["backend"]) if "backend" in d else backend
    if cfg is None and module is not None:
        cfg = module.backend
    if cfg is None:
        raise ValueError("vector file carries no backend")
    data = _stack(cfg, [_element_data(cfg, e) for e in d["v"]])
    if module is not None:
        return ModuleVector(module, data)
    return AlgebraVector(cfg, data)


def derivation_to_json(D: Derivation) -> dict:
    out = {"weights": list(D.weights)}
    if D.inner is not None:
        out["inner"] = _element_body(D.backend, D.inner.data)
    return out


def derivation_from_json(d: dict, cfg: BackendConfig) -> Derivation:
    inner = AlgebraElement(cfg, _element_data(cfg, d["inner"])) if "inner" in d else None
    return Derivation(cfg, tuple(d.get("weights", ())), inner)


def connection_to_json(C: Connection) -> dict:
    return {
        "module": module_to_json(C.module),
        "basis": {f"D{i + 1}": derivation_to_json(B) for i, B in enumerate(C.basis)},
        "alpha": {f"D{i + 1}": matrix_to_json(a) for i, a in enumerate(C.alpha)},
    }


def connection_from_json(d: dict) -> Connection:
    E = module_from_json(d["module"])
    cfg = E.backend
    labels = sorted(d["alpha"], key=lambda s: int(s[1:]))
    if "basis" in d:
        basis = tuple(derivation_from_json(d["basis"][k], cfg) for k in labels)
    else:
        basis = default_basis(cfg)
    alpha = tuple(matrix_from_json(d["alpha"][k], cfg) for k in labels)
    return Connection(E, basis, alpha)


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def write_json(obj: dict, path: str | None):
    text = dumps(obj)
    if path is None or path == "-":
        print(text)
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def read_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)
