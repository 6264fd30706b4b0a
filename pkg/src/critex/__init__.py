"""Critical nonexistence exponents for fractional evolution operators.

The package combines an exact rational exponent engine (lower envelopes of
scaling lines), numerical fractional Laplacians on polynomially decaying
profiles, smooth cutoff families with compactly supported primitives, and a
periodic pseudo-spectral solver used as a desk-scale blow-up probe.
"""

__version__ = "0.1.0"

from .exact import ExtendedRational, format_rational, parse_rational
from .operator_model import (
    DataProfile,
    DataSpec,
    OperatorSpec,
    OperatorTerm,
    OperatorValidationError,
    check_sign_condition,
    fractional_part_s,
    index_set_I,
    parse_operator,
    serialize_operator,
    weight_exponent_q,
)
from .exponent_engine import (
    Envelope,
    EnvelopeLine,
    ExponentReport,
    brute_force_pc,
    classify,
    critical_exponent,
    g_eval,
    h_eval,
    lower_envelope,
)

__all__ = [
    "ExtendedRational",
    "parse_rational",
    "format_rational",
    "OperatorTerm",
    "OperatorSpec",
    "DataProfile",
    "DataSpec",
    "OperatorValidationError",
    "parse_operator",
    "serialize_operator",
    "fractional_part_s",
    "weight_exponent_q",
    "index_set_I",
    "check_sign_condition",
    "EnvelopeLine",
    "Envelope",
    "ExponentReport",
    "lower_envelope",
    "g_eval",
    "h_eval",
    "critical_exponent",
    "brute_force_pc",
    "classify",
    "__version__",
]
