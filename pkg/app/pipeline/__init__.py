"""
Verification pipeline: VC generation, decision, counterexample reporting, inflation.
"""

from .models import Verdict, VerifyOptions, VcBundle, VALID, INVALID, TIMEOUT
from .services import generate_vc, prepare_vc, verify_case, verify, inflate, dump_artifacts

__all__ = [
    'Verdict',
    'VerifyOptions',
    'VcBundle',
    'VALID',
    'INVALID',
    'TIMEOUT',
    'generate_vc',
    'prepare_vc',
    'verify_case',
    'verify',
    'inflate',
    'dump_artifacts',
]
