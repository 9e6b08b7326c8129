"""
Executable semantics of SmpSL programs over finite database states.
"""

from .models import DbState, ExecResult, TripleCheck
from .services import eval_select, run, check_triple_bruteforce, dump_state, load_state

__all__ = [
    'DbState',
    'ExecResult',
    'TripleCheck',
    'eval_select',
    'run',
    'check_triple_bruteforce',
    'dump_state',
    'load_state',
]
