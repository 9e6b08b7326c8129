from dataclasses import dataclass, field, replace
from typing import FrozenSet, Mapping, Tuple

from app.logic.models import Vocabulary


@dataclass(frozen=True)
class LoweringMap:
    """
    How a lowered FO² vocabulary relates to the original many-sorted one.

    Attributes:
        vocabulary (Vocabulary): The original vocabulary.
        permutations (dict): table -> original column indices, unbounded columns first.
        table_split (dict): split relation name -> (table, bounded values in column order).
        selectors (dict): selector relation name -> (bounded constant, element).
        propositional (frozenset): Unary relations standing for 0-ary facts
            (constant over the universe).
        const_relations (dict): unbounded constant -> singleton relation U_c.
        witnesses (dict): constant -> the outermost existential variable it
            replaced.
    """
    vocabulary: Vocabulary = field(default_factory=Vocabulary)
    permutations: Mapping[str, Tuple[int, ...]] = field(default_factory=dict)
    table_split: Mapping[str, Tuple[str, Tuple[str, ...]]] = field(default_factory=dict)
    selectors: Mapping[str, Tuple[str, str]] = field(default_factory=dict)
    propositional: FrozenSet[str] = frozenset()
    const_relations: Mapping[str, str] = field(default_factory=dict)
    witnesses: Mapping[str, str] = field(default_factory=dict)

    def split_name(self, table, values):
        for name, key in self.table_split.items():
            if key == (table, tuple(values)):
                return name
        return None

    def with_const_relations(self, const_relations):
        merged = dict(self.const_relations)
        merged.update(const_relations)
        return replace(self, const_relations=merged)

    def to_dict(self):
        return {
            'permutations': {t: list(p) for t, p in sorted(self.permutations.items())},
            'table_split': {n: [t, list(v)] for n, (t, v) in sorted(self.table_split.items())},
            'selectors': {n: list(k) for n, k in sorted(self.selectors.items())},
            'propositional': sorted(self.propositional),
            'const_relations': dict(sorted(self.const_relations.items())),
            'witnesses': dict(sorted(self.witnesses.items())),
        }
