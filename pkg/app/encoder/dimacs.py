"""
DIMACS CNF reading and writing.

Besides the standard `p cnf` header and 0-terminated clauses, the text
carries comment lines that make an external model decodable:

    c universe N
    c map ID RELATION E1 [E2]
    c group TAG COUNT
"""

from app.errors import EncodingError
from app.encoder.models import VarMap, CnfInstance


def to_dimacs(cnf):
    """Canonical DIMACS text of `cnf` (map and group comments first)."""
    lines = [f"c universe {cnf.varmap.n}"]
    for var, rel, row in cnf.varmap.relation_vars():
        lines.append(f"c map {var} {rel} {' '.join(str(e) for e in row)}")
    for tag, count in cnf.groups:
        lines.append(f"c group {tag} {count}")
    lines.append(f"p cnf {cnf.num_vars} {cnf.num_clauses}")
    for clause in cnf.clauses:
        lines.append(' '.join(str(lit) for lit in clause + [0]))
    return '\n'.join(lines) + '\n'


def parse_dimacs(text):
    """
    Parses DIMACS text, restoring the variable map from `c map` comments.

    Variables without a map comment are kept as anonymous placeholders.

    Raises:
        EncodingError: On a missing or malformed header, or a clause count mismatch.
    """
    n = 0
    mapped, groups = {}, []
    header = None
    clauses, current = [], []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith('c'):
            parts = line.split()
            if len(parts) >= 3 and parts[1] == 'universe':
                n = int(parts[2])
            elif len(parts) >= 5 and parts[1] == 'map':
                mapped[int(parts[2])] = (parts[3], tuple(int(e) for e in parts[4:]))
            elif len(parts) == 4 and parts[1] == 'group':
                groups.append((parts[2], int(parts[3])))
            continue
        if line.startswith('p'):
            parts = line.split()
            if len(parts) != 4 or parts[1] != 'cnf':
                raise EncodingError(f"malformed header at line {number}: {line!r}")
            header = (int(parts[2]), int(parts[3]))
            continue
        if header is None:
            raise EncodingError(f"clause before the 'p cnf' header at line {number}")
        for token in line.split():
            lit = int(token)
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                if abs(lit) > header[0]:
                    raise EncodingError(f"literal {lit} exceeds {header[0]} variables at line {number}")
                current.append(lit)
    if header is None:
        raise EncodingError("missing 'p cnf' header")
    if current:
        clauses.append(current)
    if len(clauses) != header[1]:
        raise EncodingError(f"header announces {header[1]} clauses, found {len(clauses)}")

    varmap = VarMap(n)
    for var in range(1, header[0] + 1):
        if var in mapped:
            rel, row = mapped[var]
            varmap.var(('v', rel, row))
        else:
            varmap.var(('anon', var))
    return CnfInstance(header[0], clauses, varmap, groups)


__all__ = ['to_dimacs', 'parse_dimacs']
