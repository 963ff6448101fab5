"""Numerical toolkit for projective modules over continuous inverse algebras."""
from .algebra import AlgebraElement, Automorphism, BackendConfig, Derivation
from .matrix import AlgebraVector, MatrixElement
from .idempotent import Idempotent, path_conjugator, retract_idempotent, similarity_witness
from .module import ModuleHom, ModuleVector, ProjectiveModule
from .connection import Connection
from .generators import gen_bott
from .scenarios import run_scenario

__all__ = [
    "AlgebraElement", "Automorphism", "BackendConfig", "Derivation",
    "AlgebraVector", "MatrixElement",
    "Idempotent", "path_conjugator", "retract_idempotent", "similarity_witness",
    "ModuleHom", "ModuleVector", "ProjectiveModule",
    "Connection", "gen_bott", "run_scenario",
]
