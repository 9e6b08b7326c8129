from dataclasses import dataclass
from typing import Tuple

from app.logic.models import Var, AtomTemplate


def row_variables(sorts, prefix='v'):
    """v1..vn with the given per-column sorts."""
    return tuple(Var(f"{prefix}{i}", sort) for i, sort in enumerate(sorts, start=1))


@dataclass(frozen=True)
class RowFormula:
    """
    A formula describing a set of rows.

    Attributes:
        formula (Formula): Free variables are among `variables`.
        variables (tuple): v1..vn, one per column, sorted like the columns.
        table (str): The table (or query) the rows belong to.
    """
    formula: object
    variables: Tuple[Var, ...]
    table: str = ''

    @property
    def arity(self):
        return len(self.variables)

    def template(self):
        return AtomTemplate(self.variables, self.formula)

    def at(self, args):
        """The formula with the row variables replaced by `args`."""
        return self.template().instantiate(tuple(args))
