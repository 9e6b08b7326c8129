import json
import logging

import pandas as pd

from app.logic.models import DOM, Structure

logger = logging.getLogger(__name__)


# --- Structure rendering ---

def _sort_key(row):
    """Unbounded elements (ints) sort before bounded element names (strings)."""
    return tuple((1, v) if isinstance(v, str) else (0, v) for v in row)


def structure_frames(structure, schema=None):
    """
    One pandas DataFrame per table, a row per tuple in canonical order.

    Args:
        structure (Structure): The structure to tabulate.
        schema (SchemaDecl, optional): Supplies column names; otherwise columns are numbered.

    Returns:
        dict: table name -> DataFrame.
    """
    frames = {}
    for name in sorted(structure.vocabulary.relations):
        arity = structure.vocabulary.arity(name)
        if schema is not None and name in schema.tables:
            columns = list(schema.tables[name].attribute_names)
        else:
            columns = [f"#{i}" for i in range(1, arity + 1)]
        rows = sorted(structure.relations.get(name, ()), key=_sort_key)
        frames[name] = pd.DataFrame(rows, columns=columns)
    return frames


def render_structure(structure, schema=None):
    """
    Human-readable dump of a structure: its universe size, each table as a
    pandas table (ghost tables labelled) and the constants.

    Args:
        structure (Structure): The state to render.
        schema (SchemaDecl, optional): For column names and ghost labels.

    Returns:
        str: Multi-line text.
    """
    ghosts = schema.ghost_names if schema is not None else set()
    lines = [f"universe: {{{', '.join(str(e) for e in structure.carrier(DOM))}}}"]
    for name, frame in structure_frames(structure, schema).items():
        label = f"{name} (ghost)" if name in ghosts else name
        if frame.empty:
            lines.append(f"{label}: empty")
        else:
            lines.append(f"{label}:")
            lines.append(frame.to_string(index=False))
    if structure.constants:
        lines.append("constants:")
        for name in sorted(structure.constants):
            suffix = " (ghost)" if name in ghosts else ""
            lines.append(f"  {name} = {structure.constants[name]}{suffix}")
    return "\n".join(lines)


# --- Structure dumps ---

def structure_to_dict(structure, exited=None):
    data = {
        'size': structure.size,
        'tables': {name: [list(row) for row in sorted(rows, key=_sort_key)]
                   for name, rows in structure.relations.items()},
        'constants': dict(structure.constants),
    }
    if exited is not None:
        data['exited'] = bool(exited)
    return data


def structure_to_json(structure, exited=None):
    """Canonical JSON text of a structure (sorted keys, rows in canonical order)."""
    return json.dumps(structure_to_dict(structure, exited), sort_keys=True, indent=2)


def structure_from_json(text, vocabulary):
    """
    Reads a dump written by `structure_to_json`.

    Args:
        text (str): The JSON text.
        vocabulary (Vocabulary): Symbols the dump must interpret.

    Returns:
        tuple: (Structure, exited flag or None).

    Raises:
        SortError: When rows or constants do not fit the vocabulary.
    """
    data = json.loads(text)
    relations = {name: [tuple(row) for row in rows] for name, rows in data.get('tables', {}).items()}
    structure = Structure.build(vocabulary, int(data['size']), relations, data.get('constants', {}))
    return structure, data.get('exited')


# --- Misc ---

def format_seconds(seconds):
    """'0.042s', '3.10s', '2m05s'."""
    if seconds is None:
        return '-'
    if seconds < 1:
        return f"{seconds:.3f}s"
    if seconds < 60:
        return f"{seconds:.2f}s"
    minutes, rest = divmod(int(round(seconds)), 60)
    return f"{minutes}m{rest:02d}s"


def fresh_name(base, taken):
    """`base` itself when free, else the first of `base_2`, `base_3`, ... not in `taken`."""
    candidate, k = base, 1
    while candidate in taken:
        k += 1
        candidate = f"{base}_{k}"
    return candidate
