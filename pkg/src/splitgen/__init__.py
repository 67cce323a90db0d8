"""Fourth-order splitting coefficients with extended-linear structure."""
from .error_kernel import (
    Arrangement,
    ErrorCoefficients,
    PrefixSums,
    SplitCoefficients,
    classify_order,
    delta_g,
    error_coefficients,
    g_sum,
    prefix_suffix_sums,
)
from .extended_linear import (
    DomainError,
    ExtendedLinearParams,
    FamilySpec,
    linear_from_t,
    make_family,
    named_set,
    position_from_v,
    positivity_report,
    velocity_from_t,
)

__all__ = [
    "Arrangement",
    "ErrorCoefficients",
    "PrefixSums",
    "SplitCoefficients",
    "classify_order",
    "delta_g",
    "error_coefficients",
    "g_sum",
    "prefix_suffix_sums",
    "DomainError",
    "ExtendedLinearParams",
    "FamilySpec",
    "linear_from_t",
    "make_family",
    "named_set",
    "position_from_v",
    "positivity_report",
    "velocity_from_t",
]

__version__ = "0.1.0"
