"""
Weakest-precondition calculus for SmpSL programs.
"""

from .models import RowFormula, row_variables
from .services import WeakestPrecondition, wp_program, wp_command, cond_semantics, select_semantics

__all__ = [
    'RowFormula',
    'row_variables',
    'WeakestPrecondition',
    'wp_program',
    'wp_command',
    'cond_semantics',
    'select_semantics',
]
