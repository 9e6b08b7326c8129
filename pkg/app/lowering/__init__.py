"""
Lowering of many-sorted verification conditions to one-sorted FO².
"""

from .models import LoweringMap
from .services import (
    normalize_attribute_order, apply_attribute_order, witness_outer_existentials, to_two_vars, expand_bounded,
    eliminate_constants, decode_structure, lower,
)

__all__ = [
    'LoweringMap',
    'normalize_attribute_order',
    'apply_attribute_order',
    'witness_outer_existentials',
    'to_two_vars',
    'expand_bounded',
    'eliminate_constants',
    'decode_structure',
    'lower',
]
