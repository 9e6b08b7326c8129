from dataclasses import dataclass
from typing import FrozenSet, Tuple

from app.logic.models import DOM, Var, Eq, Structure, Vocabulary, conj, neg

X = Var('x', DOM)

ENUMERATED = 'enumerated'
COUNTED = 'counted'
CLOSED_FORM = 'closed-form'
REFUTED = 'refuted'
MODEL = 'model'
OPEN = 'open'
METHODS = (ENUMERATED, COUNTED, CLOSED_FORM, REFUTED, MODEL)


@dataclass(frozen=True)
class OneType:
    """
    A 1-type: one truth value for every atom over x and the constants.

    Attributes:
        vocabulary (Vocabulary): Unbounded relations (arity <= 2) and constants.
        literals (frozenset): (atom, truth value) pairs.
    """
    vocabulary: Vocabulary
    literals: FrozenSet[Tuple[object, bool]]

    def value(self, atom):
        for candidate, truth in self.literals:
            if candidate == atom:
                return truth
        raise KeyError(atom)

    @property
    def positive(self):
        return frozenset(atom for atom, truth in self.literals if truth)

    @property
    def is_constant(self):
        """True when the type says x equals some constant."""
        return any(isinstance(atom, Eq) and X in (atom.left, atom.right) for atom in self.positive)

    def to_formula(self):
        return conj(*(atom if truth else neg(atom) for atom, truth in sorted(self.literals, key=repr)))

    def induced_structure(self):
        """
        The structure whose elements are the equality classes of x and the constants.

        x's class is element 1. Returns None when the literals contradict the
        congruence that their equalities imply.
        """
        terms = ['x'] + sorted(self.vocabulary.constants)
        parent = {t: t for t in terms}

        def find(t):
            while parent[t] != t:
                parent[t] = parent[parent[t]]
                t = parent[t]
            return t

        equalities = [(atom, truth) for atom, truth in self.literals if isinstance(atom, Eq)]
        for atom, truth in equalities:
            if truth:
                parent[find(atom.left.name)] = find(atom.right.name)
        for atom, truth in equalities:
            if not truth and find(atom.left.name) == find(atom.right.name):
                return None

        element = {}
        for t in terms:
            element.setdefault(find(t), len(element) + 1)
        value = {t: element[find(t)] for t in terms}

        facts, seen = {name: set() for name in self.vocabulary.relations}, {}
        for atom, truth in self.literals:
            if isinstance(atom, Eq):
                continue
            row = tuple(value[t.name] for t in atom.args)
            if seen.setdefault((atom.rel, row), truth) != truth:
                return None
            if truth:
                facts[atom.rel].add(row)
        constants = {name: value[name] for name in self.vocabulary.constants}
        return Structure.build(self.vocabulary, len(element), relations=facts, constants=constants)


@dataclass(frozen=True)
class BoundReport:
    """
    The cardinality bound of an SSNF sentence and how it was obtained.

    Attributes:
        m (int): Number of ∀∃ conjuncts.
        num_constants (int): Number of constants.
        total_types (int): Number of 1-types.
        infeasible_types (int): Non-constant types left out of the count.
        feasible_nonconstant_types (int): Types with x distinct from every
            constant that the count keeps.
        bnd (int): The bound; 0 when the sentence was refuted outright.
        exact (bool): False when the closed-form unpruned count was used.
        method (str): One of `METHODS`: types enumerated one by one, counted
            with the SAT solver, taken from the closed form, or a witness
            closure that refuted the sentence or closed into a model of `bnd`
            elements.
        closure_terms (int): Terms of the last witness closure, if one ran.
    """
    m: int
    num_constants: int
    total_types: int
    infeasible_types: int
    feasible_nonconstant_types: int
    bnd: int
    exact: bool = True
    method: str = 'enumerated'
    closure_terms: int = 0

    @property
    def refuted(self):
        return self.method == REFUTED

    def to_dict(self):
        return {
            'm': self.m,
            'num_constants': self.num_constants,
            'total_types': self.total_types,
            'infeasible_types': self.infeasible_types,
            'feasible_nonconstant_types': self.feasible_nonconstant_types,
            'bnd': self.bnd,
            'exact': self.exact,
            'method': self.method,
            'closure_terms': self.closure_terms,
        }


@dataclass(frozen=True)
class ClosureOutcome:
    """
    Where growing a witness closure stopped.

    Attributes:
        status (str): 'refuted' (no model exists), 'model' (`structure` is
            a model) or 'open' (the term limit was reached first).
        terms (tuple): The closure terms of the last round.
        structure (Structure): The model, for 'model'.
        rounds (int): SAT calls made.
    """
    status: str
    terms: Tuple[object, ...] = ()
    structure: object = None
    rounds: int = 0
