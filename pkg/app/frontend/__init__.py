"""
Readers for schemas, SmpSL programs and specification files.
"""

from .parser import parse_schema, parse_program, parse_formula, parse_spec
from .services import load_case, load_manifest, schema_from_vocabulary

__all__ = [
    'parse_schema',
    'parse_program',
    'parse_formula',
    'parse_spec',
    'load_case',
    'load_manifest',
    'schema_from_vocabulary',
]
