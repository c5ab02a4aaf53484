"""Thermal equilibrium states on the extended enveloping algebra of sl(2, C).

The package builds the algebra as a normal-ordering rewrite system, realizes
its lowest-weight modules as truncated matrices, constructs and evaluates
covariant KMS states (vacuum, Gibbs, mixtures over a spectral measure), and
recovers the measure back from Cartan data or sampled characteristic
functionals.
"""

from .algebra import (
    AlgebraElement,
    H,
    N,
    X,
    Y,
    apply_automorphism,
    commutator,
    from_swn_basis,
    involution,
    multiply,
    reduce_word,
    to_swn_basis,
)
from .funcspace import FunctionExpr
from .grammar import ParseError, format_element, format_function, parse_element, parse_function
from .recovery import IllPosed, NotExtendable, RecoveryResult, chi_fit, ladder_peel
from .reps import TruncatedRep, build_rep, ladder_diagonal, relation_residuals, represent, scalar_product_weights
from .states import (
    CartanMeasure,
    ConvergenceError,
    SpectralMeasure,
    StateSpec,
    cartan_moment,
    cartan_restriction,
    chi_closed_form,
    eval_kms_recursion,
    eval_trace,
    ladder_depth,
    load_state,
    save_state,
    state_from_dict,
    state_to_dict,
)
from .verify import KmsReport, gram_psd_check, kms_check, support_positivity_check

__version__ = "0.1.0"

__all__ = [
    "AlgebraElement",
    "CartanMeasure",
    "ConvergenceError",
    "FunctionExpr",
    "H",
    "IllPosed",
    "KmsReport",
    "N",
    "NotExtendable",
    "ParseError",
    "RecoveryResult",
    "SpectralMeasure",
    "StateSpec",
    "TruncatedRep",
    "X",
    "Y",
    "apply_automorphism",
    "build_rep",
    "cartan_moment",
    "cartan_restriction",
    "chi_closed_form",
    "chi_fit",
    "commutator",
    "eval_kms_recursion",
    "eval_trace",
    "format_element",
    "format_function",
    "from_swn_basis",
    "gram_psd_check",
    "involution",
    "kms_check",
    "ladder_depth",
    "ladder_diagonal",
    "ladder_peel",
    "load_state",
    "multiply",
    "parse_element",
    "parse_function",
    "reduce_word",
    "relation_residuals",
    "represent",
    "save_state",
    "scalar_product_weights",
    "state_from_dict",
    "state_to_dict",
    "support_positivity_check",
    "to_swn_basis",
]
