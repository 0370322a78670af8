"""Equational reasoning for algebras with a product and two divisions.

Terms and identities over {*, \\, /}, finite models given by Cayley tables,
a finite model finder for countermodels, and a rewrite-proof checker.
"""

from .errors import (
    AmbiguityError,
    MagmaLabError,
    ModelFormatError,
    ParseError,
    ProofError,
    SearchLimitExceeded,
)
from .models import (
    Model,
    Verdict,
    direct_product,
    dual_model,
    eval_term,
    is_loop,
    is_quasigroup,
    is_rectangular_band,
    satisfies,
    satisfies_theory,
)
from .proofs import ProofScript, ProofStep, Registry, check_collection, check_script, check_step, mirror_script
from .search import (
    IndependenceReport,
    SearchConfig,
    enumerate_models,
    find_model,
    find_witness,
    independence_report,
)
from .terms import (
    App,
    Direction,
    Identity,
    Operator,
    Theory,
    Var,
    format_term,
    match_at,
    mirror_identity,
    mirror_term,
    parse_identity,
    parse_term,
    parse_theory,
    rewrite_at,
    substitute,
)

__version__ = "0.1.0"

__all__ = [
    "AmbiguityError",
    "MagmaLabError",
    "ModelFormatError",
    "ParseError",
    "ProofError",
    "SearchLimitExceeded",
    "Model",
    "Verdict",
    "direct_product",
    "dual_model",
    "eval_term",
    "is_loop",
    "is_quasigroup",
    "is_rectangular_band",
    "satisfies",
    "satisfies_theory",
    "IndependenceReport",
    "SearchConfig",
    "enumerate_models",
    "find_model",
    "find_witness",
    "independence_report",
    "App",
    "Direction",
    "Identity",
    "Operator",
    "Theory",
    "Var",
    "format_term",
    "match_at",
    "mirror_identity",
    "mirror_term",
    "parse_identity",
    "parse_term",
    "parse_theory",
    "rewrite_at",
    "substitute",
    "ProofScript",
    "ProofStep",
    "Registry",
    "check_collection",
    "check_script",
    "check_step",
    "mirror_script",
]

