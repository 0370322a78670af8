"""Built-in models, theories and proof scripts, shipped as data files.

Models are the four independence tables plus a few small reference
algebras; theories are ``.eq`` files; proofs are JSON script collections.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from ..models import Model, loads_model
from ..proofs import ProofScript, dumps_scripts, loads_scripts
from ..terms import Theory, parse_theory

MODEL_FILES = {
    "TABLE1": "table1.model",
    "TABLE2": "table2.model",
    "TABLE3": "table3.model",
    "TABLE4": "table4.model",
    "POINT": "point.model",
    "Z2": "z2.model",
    "Z3": "z3.model",
    "BAND2x2": "band2x2.model",
}

THEORY_FILES = {
    "QUASIGROUP": "quasigroup.eq",
    "LOOP_EXTRA": "loop_extra.eq",
    "RECT_AXIOMS": "rect_axioms.eq",
    "RECT_LOOP": "rect_loop.eq",
    "KRAPEZ": "krapez.eq",
    "KRAPEZ8": "krapez8.eq",
    "LEFT_ZERO": "left_zero.eq",
    "RIGHT_ZERO": "right_zero.eq",
}

# F3, F5 and F8 are the mirror images of F1+F2, F4 and F7.
PROOF_FILES = {
    "F1": "f1_tmp.proof.json",
    "F2": "f2_k5_k8.proof.json",
    "F3": "f3_k10_k9.proof.json",
    "F4": "f4_k7.proof.json",
    "F5": "f5_k11.proof.json",
    "F6": "f6_k13.proof.json",
    "F7": "f7_k6_k14.proof.json",
    "F8": "f8_k12_k15.proof.json",
}
MIRROR_SOURCES = {"F3": ("F1", "F2"), "F5": ("F4",), "F8": ("F7",)}

# Dependency order of the proof collection over the six rectangular axioms.
PROOF_ORDER = ("F7", "F8", "F1", "F2", "F3", "F4", "F5", "F6")


def read_text(filename: str) -> str:
    return resources.files(__package__).joinpath(filename).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def model(name: str) -> Model:
    return loads_model(read_text(MODEL_FILES[name]))


@lru_cache(maxsize=None)
def theory(name: str) -> Theory:
    return parse_theory(read_text(THEORY_FILES[name]))


@lru_cache(maxsize=None)
def proof(name: str) -> tuple:
    return tuple(loads_scripts(read_text(PROOF_FILES[name])))


def proof_collection() -> list[ProofScript]:
    return [s for name in PROOF_ORDER for s in proof(name)]


def names() -> list[str]:
    return [*MODEL_FILES, *THEORY_FILES, *PROOF_FILES, "PROOFS"]


def emit(name: str) -> str:
    """The exact text of a fixture, as shipped."""
    for table in (MODEL_FILES, THEORY_FILES, PROOF_FILES):
        if name in table:
            return read_text(table[name])
    if name == "PROOFS":
        return dumps_scripts(proof_collection())
    raise KeyError(name)


def kind(name: str) -> str:
    if name in MODEL_FILES:
        return "model"
    if name in THEORY_FILES:
        return "theory"
    if name in PROOF_FILES or name == "PROOFS":
        return "proof"
    raise KeyError(name)


@dataclass(frozen=True)
class Catalogue:
    models: dict
    theories: dict
    proofs: dict


def fixtures() -> Catalogue:
    return Catalogue(
        models={n: model(n) for n in MODEL_FILES},
        theories={n: theory(n) for n in THEORY_FILES},
        proofs={n: proof(n) for n in PROOF_FILES},
    )
