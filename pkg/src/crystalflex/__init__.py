"""First-order flex analysis of periodic bar-joint (crystal) frameworks."""
from .framework import (
    CrystalFramework,
    EdgeDecl,
    InvalidFrameworkError,
    Joint,
    ValidationReport,
    bar_vector,
    gallery,
    supercell,
    validate,
)
from .transfer import (
    flexible_lattice_matrix,
    periodic_rigidity_matrix,
    rank_thresholds,
    supercell_rank_identity,
    transfer_function,
)
from .spectrum import geometric_spectrum, is_spectrum_finite, rum_rational_scan, rum_scan
from .flexes import (
    FperFlex,
    PGFlex,
    WindowField,
    check_flex_window,
    difference_reduce,
    factor_periodic_flexes,
    flex_space_dimension,
    fper_flex_space,
    pg_flex_space,
    rigid_motion_flexes,
    rigidity_verdict,
)
from .io import parse_framework, serialize_framework

__version__ = "0.1.0"

__all__ = [
    "CrystalFramework",
    "EdgeDecl",
    "InvalidFrameworkError",
    "Joint",
    "ValidationReport",
    "bar_vector",
    "gallery",
    "supercell",
    "validate",
    "flexible_lattice_matrix",
    "periodic_rigidity_matrix",
    "rank_thresholds",
    "supercell_rank_identity",
    "transfer_function",
    "geometric_spectrum",
    "is_spectrum_finite",
    "rum_rational_scan",
    "rum_scan",
    "FperFlex",
    "PGFlex",
    "WindowField",
    "check_flex_window",
    "difference_reduce",
    "factor_periodic_flexes",
    "flex_space_dimension",
    "fper_flex_space",
    "pg_flex_space",
    "rigid_motion_flexes",
    "rigidity_verdict",
    "parse_framework",
    "serialize_framework",
]
