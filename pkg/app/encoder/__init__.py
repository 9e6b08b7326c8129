"""
CNF encoding of SSNF sentences, DIMACS interchange and SMT-LIB export.
"""

from .models import VarMap, CnfInstance, Term, EQUALITY
from .services import relativize_uni, encode, assignment_to_structure
from .closure import encode_closure, closure_structure, initial_terms
from .dimacs import to_dimacs, parse_dimacs
from .smtlib import to_smtlib

__all__ = [
    'VarMap',
    'CnfInstance',
    'Term',
    'EQUALITY',
    'relativize_uni',
    'encode',
    'assignment_to_structure',
    'encode_closure',
    'closure_structure',
    'initial_terms',
    'to_dimacs',
    'parse_dimacs',
    'to_smtlib',
]
