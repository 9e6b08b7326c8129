from dataclasses import dataclass
from typing import FrozenSet, Optional

from app.logic.models import Structure


@dataclass(frozen=True)
class DbState:
    """
    A database state: tables and constants of a state schema, plus the exit flag.

    Attributes:
        structure (Structure): Interpretation of every table and constant.
        exited (bool): True once an `exit` command fired.
    """
    structure: Structure
    exited: bool = False

    def table(self, name):
        return self.structure.relations[name]

    def constant(self, name):
        return self.structure.constants[name]

    def with_table(self, name, rows):
        return DbState(self.structure.with_relations({name: rows}), self.exited)

    def with_constants(self, values):
        return DbState(self.structure.with_constants(values), self.exited)

    def exit(self):
        return DbState(self.structure, True)


@dataclass(frozen=True)
class ExecResult:
    """
    Every final state reachable by one run.

    Attributes:
        finals (frozenset): Final DbState objects (several only through CHOOSE).
        empty_choose (bool): Some path executed a CHOOSE on an empty table.
    """
    finals: FrozenSet[DbState]
    empty_choose: bool = False

    @property
    def is_deterministic(self):
        return len(self.finals) == 1


@dataclass(frozen=True)
class TripleCheck:
    """
    Outcome of checking a Hoare triple by enumeration.

    Attributes:
        holds (bool): No enumerated initial state violates the triple.
        witness (DbState or None): First violating initial state in enumeration order.
        violating (DbState or None): A final state of the witness that breaks the postcondition.
        states_checked (int): Initial states that satisfied the precondition.
        max_unbounded (int): Largest unbounded carrier enumerated.
    """
    holds: bool
    witness: Optional[DbState] = None
    violating: Optional[DbState] = None
    states_checked: int = 0
    max_unbounded: int = 0

    @property
    def status(self):
        return 'valid' if self.holds else 'invalid'
