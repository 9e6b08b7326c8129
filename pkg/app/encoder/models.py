from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

EQUALITY = '='

TAGS = ('eq', 'select', 'forall-exists', 'tseitin', 'assert', 'block')


@dataclass(frozen=True)
class Term:
    """
    A ground term of a witness closure.

    Attributes:
        symbol (str): A constant name, the seed '*', or the F_i relation
            whose witness this term is.
        parent (Term, optional): The term being witnessed, for F_i terms.
    """
    symbol: str
    parent: Optional['Term'] = None

    @property
    def depth(self):
        return 0 if self.parent is None else self.parent.depth + 1

    def __str__(self):
        return self.symbol if self.parent is None else f"{self.symbol}({self.parent})"


class VarMap:
    """
    Propositional variables of the encoding, numbered densely from 1.

    Relation variables are keyed ('v', relation, elements) with `elements` a
    tuple of one or two universe elements; the reified equality uses the
    relation name '='. Tseitin variables are keyed ('u', node, l1, l2).

    Args:
        n (int): Universe size of the encoding.
    """

    def __init__(self, n):
        self.n = n
        self.ids = {}
        self.keys = [None]

    def var(self, key):
        found = self.ids.get(key)
        if found is None:
            found = len(self.keys)
            self.ids[key] = found
            self.keys.append(key)
        return found

    def relation(self, rel, *elements):
        return self.var(('v', rel, tuple(elements)))

    def equality(self, l1, l2):
        return self.relation(EQUALITY, l1, l2)

    def sub(self, node, l1, l2):
        return self.var(('u', node, l1, l2))

    def key(self, var):
        return self.keys[var]

    @property
    def num_vars(self):
        return len(self.keys) - 1

    def relation_vars(self):
        """(id, relation, elements) for every relation variable, in id order."""
        return [(i, key[1], key[2]) for i, key in enumerate(self.keys) if key is not None and key[0] == 'v']

    def __len__(self):
        return self.num_vars


@dataclass
class CnfInstance:
    """
    A CNF formula with the bookkeeping needed to decode its models.

    Attributes:
        num_vars (int): Highest variable id.
        clauses (list): Lists of non-zero integer literals.
        varmap (VarMap): Meaning of the variables.
        groups (list): (tag, clause count) in clause order; tags are taken
            from `TAGS`.
        projection (list): Variables whose values are enumerated when
            counting models up to everything else.
    """
    num_vars: int
    clauses: List[List[int]]
    varmap: VarMap
    groups: List[Tuple[str, int]] = field(default_factory=list)
    projection: List[int] = field(default_factory=list)

    def block(self, assignment):
        """Adds a clause excluding the projection of `assignment`; False when there is nothing to project."""
        if not self.projection:
            return False
        self.clauses.append([-v if assignment.get(v, False) else v for v in self.projection])
        self.groups.append(('block', 1))
        return True

    @property
    def num_clauses(self):
        return len(self.clauses)

    def group_sizes(self) -> Dict[str, int]:
        sizes = {}
        for tag, count in self.groups:
            sizes[tag] = sizes.get(tag, 0) + count
        return sizes

    def clauses_tagged(self, tag):
        start = 0
        found = []
        for group, count in self.groups:
            if group == tag:
                found.extend(self.clauses[start:start + count])
            start += count
        return found
