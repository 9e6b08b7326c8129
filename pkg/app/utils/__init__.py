"""
Shared helpers: stage timing decorators and structure rendering/serialization.

Commonly used names are re-exported so callers can write
`from app.utils import stage, render_structure`.
"""

from .decorators import stage, stage_timer
from .helpers import (
    render_structure,
    structure_frames,
    structure_to_dict,
    structure_to_json,
    structure_from_json,
    format_seconds,
    fresh_name,
)

__all__ = [
    'stage',
    'stage_timer',
    'render_structure',
    'structure_frames',
    'structure_to_dict',
    'structure_to_json',
    'structure_from_json',
    'format_seconds',
    'fresh_name',
]
