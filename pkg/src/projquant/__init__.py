"""Exact projectively equivariant quantization, flat and curved."""
from .cartancurved import (
    CartanData,
    HEquivarianceError,
    LiftedFunction,
    ProjConnection,
    commutator_defect,
    equivariance_defect,
    normal_cartan,
    pullback_connection,
    pullback_symbol,
    quantize_curved,
    quantize_curved_apply,
    weyl_equivalent,
)
from .casimir import CriticalityReport, casimir_direct, criticality, curly_casimir, n_operator, tree_family
from .estimators import CurvedQuantizer, FlatQuantizer, parse_rep
from .flatcalc import PolyOperator, PolySymbol, PolyVectorField, gamma, gamma_apply, gamma_oracle, principal_symbol, proj_vector_field
from .liecore import GradedElement, bracket, build_dual_bases, killing
from .quantflat import (
    CriticalPairError,
    brute_force_failure_set,
    brute_force_quantization,
    check_symbol_preservation,
    flat_table,
    lift,
    quantize_flat,
    verify_equivariance,
)
from .repspace import FiberSpace, RepSpec, casimir_blocks, density, shift_delta, with_shift

__version__ = "0.1.0"

__all__ = [
    "CartanData",
    "CriticalPairError",
    "CriticalityReport",
    "CurvedQuantizer",
    "FiberSpace",
    "FlatQuantizer",
    "GradedElement",
    "HEquivarianceError",
    "LiftedFunction",
    "PolyOperator",
    "PolySymbol",
    "PolyVectorField",
    "ProjConnection",
    "RepSpec",
    "bracket",
    "brute_force_failure_set",
    "brute_force_quantization",
    "build_dual_bases",
    "casimir_blocks",
    "casimir_direct",
    "check_symbol_preservation",
    "commutator_defect",
    "criticality",
    "curly_casimir",
    "density",
    "equivariance_defect",
    "flat_table",
    "gamma",
    "gamma_apply",
    "gamma_oracle",
    "killing",
    "lift",
    "n_operator",
    "normal_cartan",
    "parse_rep",
    "principal_symbol",
    "proj_vector_field",
    "pullback_connection",
    "pullback_symbol",
    "quantize_curved",
    "quantize_curved_apply",
    "quantize_flat",
    "shift_delta",
    "tree_family",
    "verify_equivariance",
    "weyl_equivalent",
    "with_shift",
]
