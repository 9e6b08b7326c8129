"""
SAT backends, the size schedule and the finite-satisfiability decision procedure.
"""

from .models import SatResult, Schedule, FiniteSatResult, SAT, UNSAT, TIMEOUT
from .cdcl import CdclSolver, solve_cdcl
from .services import sat, schedule, decide_finite_sat, decode_model, check_assignment, parse_solver_output

__all__ = [
    'SatResult',
    'Schedule',
    'FiniteSatResult',
    'SAT',
    'UNSAT',
    'TIMEOUT',
    'CdclSolver',
    'solve_cdcl',
    'sat',
    'schedule',
    'decide_finite_sat',
    'decode_model',
    'check_assignment',
    'parse_solver_output',
]
