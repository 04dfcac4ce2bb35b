"""Exact machine check of the negative-momentum progress certificate."""

from .model import Certificate, Term, load_certificate
from .symbolic import (
    CANONICAL,
    GRID,
    Coord,
    GridPoint,
    SymExpr,
    expand_co_coercivity,
    expand_smoothness,
    expand_term,
    progress_lhs,
    successor_coordinates,
)
from .verify import (
    IdentityResult,
    IntervalPsdResult,
    VerificationReport,
    assemble_residual,
    check_residual,
    verify_certificate,
    verify_charpoly_tables,
    verify_identity,
    verify_psd_on_interval,
    verify_q_bounds,
)

__all__ = [
    "CANONICAL",
    "GRID",
    "Certificate",
    "Coord",
    "GridPoint",
    "IdentityResult",
    "IntervalPsdResult",
    "SymExpr",
    "Term",
    "VerificationReport",
    "assemble_residual",
    "check_residual",
    "expand_co_coercivity",
    "expand_smoothness",
    "expand_term",
    "load_certificate",
    "progress_lhs",
    "successor_coordinates",
    "verify_certificate",
    "verify_charpoly_tables",
    "verify_identity",
    "verify_psd_on_interval",
    "verify_q_bounds",
]
