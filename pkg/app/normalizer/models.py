from dataclasses import dataclass
from typing import Optional, Tuple

from app.logic.models import DOM, Var, Atom, Vocabulary, conj, implies, forall, Exists

X = Var('x', DOM)
Y = Var('y', DOM)


@dataclass(frozen=True)
class SsnfSentence:
    """
    A sentence in Skolemized Scott normal form:

        ∀x∀y (α ∧ ⋀ F_i(x,y) → β_i) ∧ ⋀ ∀x∃y F_i(x,y)

    Attributes:
        alpha (Formula): Quantifier-free ∀∀ matrix over x and y.
        exist_parts (tuple): (F_i, β_i) pairs; β_i is quantifier-free.
        constants (tuple): Constants of the sentence (fresh ones included).
        auxiliary (tuple): Unary relations E_i introduced for inner quantifiers.
        vocabulary (Vocabulary): Every symbol of the sentence.
        universe_relation (str, optional): The unary relation the sentence is
            relativized to, once `relativize_uni` has run.
    """
    alpha: object
    exist_parts: Tuple[Tuple[str, object], ...] = ()
    constants: Tuple[object, ...] = ()
    auxiliary: Tuple[str, ...] = ()
    vocabulary: Vocabulary = Vocabulary()
    universe_relation: Optional[str] = None

    @property
    def m(self):
        return len(self.exist_parts)

    @property
    def skolem_relations(self):
        return tuple(name for name, _ in self.exist_parts)

    @property
    def matrix(self):
        """α ∧ ⋀ (F_i(x,y) → β_i): the body of the ∀∀ conjunct."""
        return conj(self.alpha, *(implies(Atom(name, (X, Y)), beta) for name, beta in self.exist_parts))

    def to_formula(self):
        return conj(forall([X, Y], self.matrix),
                    *(forall([X], Exists(Y, Atom(name, (X, Y)))) for name, _ in self.exist_parts))
