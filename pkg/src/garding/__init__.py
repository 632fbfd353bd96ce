"""Global pseudo-differential calculus on T^n and SU(2), with a numerical
verification harness for the subelliptic sharp lower-bound inequality."""

__version__ = "0.1.0"

from .groups import DualIndex, QuadratureRule, SU2Group, TorusGroup, make_group
from .harmonic import (
    FourierCoefficients,
    forward_transform,
    inverse_transform,
    plancherel_norm,
)
from .symbols import Symbol, SymbolClassParams, sublaplacian_symbol
from .quantize import OperatorMatrix, aop_from_amplitude, op_from_symbol
from .weights import WeightFunction, build_weight
from .friedrichs import friedrichs_amplitude, friedrichs_operator, positivity_check
from .harness import exponent_table, garding_verify, remainder_bounds, sharpness_probe

__all__ = [
    "__version__",
    "DualIndex", "QuadratureRule", "SU2Group", "TorusGroup", "make_group",
    "FourierCoefficients", "forward_transform", "inverse_transform",
    "plancherel_norm",
    "Symbol", "SymbolClassParams", "sublaplacian_symbol",
    "OperatorMatrix", "aop_from_amplitude", "op_from_symbol",
    "WeightFunction", "build_weight",
    "friedrichs_amplitude", "friedrichs_operator", "positivity_check",
    "exponent_table", "garding_verify", "remainder_bounds", "sharpness_probe",
]
