"""
Skolemized Scott normal form.
"""

from .models import SsnfSentence
from .services import (
    to_ssnf, ssnf_cardinality_check, ssnf_model_sizes, skolem_expansion, swap_variables, ssnf_to_text,
)

__all__ = [
    'SsnfSentence',
    'to_ssnf',
    'ssnf_cardinality_check',
    'ssnf_model_sizes',
    'skolem_expansion',
    'swap_variables',
    'ssnf_to_text',
]
