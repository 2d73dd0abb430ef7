"""Exact conditional Poisson statistics, P-recurrences and reaction-network checks."""

from .crn import (
    ReactionNetwork,
    analyze,
    complex_balance_residuals,
    conservation_matrix,
    key_lemma_residual,
    load_network,
    parse_network,
    sscme_residual,
)
from .genfun import ConditionalLaw, ConstraintMatrix, f0, stats, two_row_f0
from .guess import guess_system, minimal_fit
from .recurrence import Box, PRecurrence, RecurrenceSystem, march, verify

__all__ = [
    "Box",
    "ConditionalLaw",
    "ConstraintMatrix",
    "PRecurrence",
    "ReactionNetwork",
    "RecurrenceSystem",
    "analyze",
    "complex_balance_residuals",
    "conservation_matrix",
    "f0",
    "guess_system",
    "key_lemma_residual",
    "load_network",
    "march",
    "minimal_fit",
    "parse_network",
    "sscme_residual",
    "stats",
    "two_row_f0",
    "verify",
]
