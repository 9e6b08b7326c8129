"""
Model-cardinality bounds from 1-type counting and witness closures.
"""

from .models import OneType, BoundReport, ClosureOutcome
from .services import (
    enumerate_one_types, count_one_types, is_feasible, compute_bound, type_atoms, type_vocabulary,
    refine_closure, count_feasible_types, closure_report, solver_bound,
)

__all__ = [
    'OneType',
    'BoundReport',
    'ClosureOutcome',
    'enumerate_one_types',
    'count_one_types',
    'is_feasible',
    'compute_bound',
    'type_atoms',
    'type_vocabulary',
    'refine_closure',
    'count_feasible_types',
    'closure_report',
    'solver_bound',
]
