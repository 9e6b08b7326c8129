"""
Sorted first-order syntax and finite structures.

Everything here is an immutable value: formulas are frozen dataclasses with
structural equality and a cached hash, so identical subformulas can be shared
(the CNF encoder relies on this for its Tseitin variables).
"""

from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple

from app.errors import SortError, ArityError

UNBOUNDED_SORT_NAME = 'dom'


@dataclass(frozen=True)
class Sort:
    """
    A sort of the many-sorted signature.

    Attributes:
        name (str): Sort name; 'dom' is reserved for the unbounded sort.
        size (int or None): Cardinality of a bounded sort, None for the unbounded one.
        elements (tuple): Canonical element names of a bounded sort, in declaration order.
    """
    name: str
    size: Optional[int] = None
    elements: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.size is None:
            if self.elements:
                raise SortError(f"unbounded sort '{self.name}' cannot enumerate elements")
            return
        if self.size < 1:
            raise SortError(f"bounded sort '{self.name}' must have size >= 1, got {self.size}")
        if len(self.elements) != self.size:
            raise SortError(f"bounded sort '{self.name}' declares {self.size} elements but names {len(self.elements)}")
        if len(set(self.elements)) != len(self.elements):
            raise SortError(f"bounded sort '{self.name}' repeats an element name")

    @classmethod
    def unbounded(cls):
        return cls(UNBOUNDED_SORT_NAME)

    @classmethod
    def bounded(cls, name, size=None, elements=None):
        """
        Builds a bounded sort, auto-naming elements that were not listed.

        `bounded('codes', 3, ['nil'])` yields elements ('nil', 'codes_2', 'codes_3').
        """
        named = list(elements or [])
        if size is None:
            size = len(named)
        if len(named) > size:
            raise SortError(f"bounded sort '{name}' lists {len(named)} elements but has size {size}")
        index = len(named) + 1
        while len(named) < size:
            candidate = f"{name}_{index}"
            index += 1
            if candidate not in named:
                named.append(candidate)
        return cls(name, size, tuple(named))

    @property
    def is_bounded(self):
        return self.size is not None

    def __str__(self):
        return self.name


DOM = Sort.unbounded()


@dataclass(frozen=True)
class Vocabulary:
    """
    Relation and constant names with their sorts.

    Attributes:
        relations (dict): relation name -> tuple of per-position sorts.
        constants (dict): constant name -> sort.
    """
    relations: Mapping[str, Tuple[Sort, ...]] = field(default_factory=dict)
    constants: Mapping[str, Sort] = field(default_factory=dict)

    def __post_init__(self):
        for name, sorts in self.relations.items():
            if len(sorts) < 1:
                raise ArityError(f"relation '{name}' must have arity >= 1")
        clash = set(self.relations) & set(self.constants)
        if clash:
            raise SortError(f"names used both as relation and constant: {', '.join(sorted(clash))}")

    def __hash__(self):
        return hash((tuple(sorted(self.relations.items())), tuple(sorted(self.constants.items()))))

    def arity(self, rel):
        return len(self.relations[rel])

    def sorts(self):
        """All sorts mentioned by relations or constants (the unbounded sort always included)."""
        found = {DOM.name: DOM}
        for sorts in self.relations.values():
            for sort in sorts:
                found.setdefault(sort.name, sort)
        for sort in self.constants.values():
            found.setdefault(sort.name, sort)
        return found

    def with_relations(self, extra):
        merged = dict(self.relations)
        merged.update(extra)
        return Vocabulary(merged, dict(self.constants))

    def with_constants(self, extra):
        merged = dict(self.constants)
        merged.update(extra)
        return Vocabulary(dict(self.relations), merged)

    def merge(self, other):
        return self.with_relations(other.relations).with_constants(other.constants)

    def restrict(self, relations=None, constants=None):
        """Sub-vocabulary keeping only the named relations and constants."""
        rels = {name: s for name, s in self.relations.items() if relations is None or name in relations}
        consts = {name: s for name, s in self.constants.items() if constants is None or name in constants}
        return Vocabulary(rels, consts)


# --- Terms ---

@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort = DOM

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    """A constant symbol, or an element literal when `name` is an element of a bounded `sort`."""
    name: str
    sort: Sort = DOM

    @property
    def is_literal(self):
        return self.sort.is_bounded and self.name in self.sort.elements

    def __str__(self):
        return self.name


def is_literal(term):
    return isinstance(term, Const) and term.is_literal


# --- Formulas ---

def _cached_hash(self):
    try:
        return self._hash
    except AttributeError:
        value = hash((type(self).__name__,) + tuple(getattr(self, name) for name in self.__dataclass_fields__))
        object.__setattr__(self, '_hash', value)
        return value


class Formula:
    """Base class of formula nodes."""

    def __and__(self, other):
        return conj(self, other)

    def __or__(self, other):
        return disj(self, other)

    def __invert__(self):
        return neg(self)


@dataclass(frozen=True, eq=True)
class TrueF(Formula):
    __hash__ = _cached_hash


@dataclass(frozen=True, eq=True)
class FalseF(Formula):
    __hash__ = _cached_hash


@dataclass(frozen=True, eq=True)
class Atom(Formula):
    rel: str
    args: Tuple[object, ...]
    __hash__ = _cached_hash


@dataclass(frozen=True, eq=True)
class Eq(Formula):
    left: object
    right: object
    __hash__ = _cached_hash


@dataclass(frozen=True, eq=True)
class Not(Formula):
    arg: Formula
    __hash__ = _cached_hash


@dataclass(frozen=True, eq=True)
class And(Formula):
    args: Tuple[Formula, ...]
    __hash__ = _cached_hash


@dataclass(frozen=True, eq=True)
class Or(Formula):
    args: Tuple[Formula, ...]
    __hash__ = _cached_hash


@dataclass(frozen=True, eq=True)
class Implies(Formula):
    left: Formula
    right: Formula
    __hash__ = _cached_hash


@dataclass(frozen=True, eq=True)
class Iff(Formula):
    left: Formula
    right: Formula
    __hash__ = _cached_hash


@dataclass(frozen=True, eq=True)
class Forall(Formula):
    var: Var
    body: Formula
    __hash__ = _cached_hash

    @property
    def sort(self):
        return self.var.sort


@dataclass(frozen=True, eq=True)
class Exists(Formula):
    var: Var
    body: Formula
    __hash__ = _cached_hash

    @property
    def sort(self):
        return self.var.sort


TRUE = TrueF()
FALSE = FalseF()

QUANTIFIERS = (Forall, Exists)


def conj(*parts):
    """Conjunction that flattens nested conjunctions and folds TRUE/FALSE."""
    args = []
    for part in parts:
        if isinstance(part, TrueF):
            continue
        if isinstance(part, FalseF):
            return FALSE
        if isinstance(part, And):
            args.extend(part.args)
        else:
            args.append(part)
    if not args:
        return TRUE
    if len(args) == 1:
        return args[0]
    return And(tuple(args))


def disj(*parts):
    """Disjunction that flattens nested disjunctions and folds TRUE/FALSE."""
    args = []
    for part in parts:
        if isinstance(part, FalseF):
            continue
        if isinstance(part, TrueF):
            return TRUE
        if isinstance(part, Or):
            args.extend(part.args)
        else:
            args.append(part)
    if not args:
        return FALSE
    if len(args) == 1:
        return args[0]
    return Or(tuple(args))


def neg(f):
    if isinstance(f, TrueF):
        return FALSE
    if isinstance(f, FalseF):
        return TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def implies(left, right):
    if isinstance(left, TrueF):
        return right
    if isinstance(left, FalseF) or isinstance(right, TrueF):
        return TRUE
    return Implies(left, right)


def iff(left, right):
    if isinstance(left, TrueF):
        return right
    if isinstance(right, TrueF):
        return left
    return Iff(left, right)


def forall(variables, body):
    """Universally closes `body` over `variables` (outermost first)."""
    if isinstance(variables, Var):
        variables = [variables]
    for var in reversed(list(variables)):
        body = Forall(var, body)
    return body


def exists(variables, body):
    if isinstance(variables, Var):
        variables = [variables]
    for var in reversed(list(variables)):
        body = Exists(var, body)
    return body


def equals(left, right):
    """Equality with literal folding: two distinct element literals are FALSE."""
    if is_literal(left) and is_literal(right):
        return TRUE if left.name == right.name else FALSE
    if left == right:
        return TRUE
    return Eq(left, right)


# --- Templates ---

@dataclass(frozen=True)
class AtomTemplate:
    """
    A formula with placeholder variables standing for an atom's arguments.

    `instantiate(args)` substitutes the actual arguments for the placeholders,
    avoiding capture of variables bound inside `body`.
    """
    params: Tuple[Var, ...]
    body: Formula

    @property
    def arity(self):
        return len(self.params)

    def instantiate(self, args):
        from app.logic.services import substitute_terms
        if len(args) != len(self.params):
            raise ArityError(f"template expects {len(self.params)} arguments, got {len(args)}")
        return substitute_terms(self.body, {p.name: a for p, a in zip(self.params, args)})


# --- Structures ---

@dataclass(frozen=True)
class Structure:
    """
    A finite many-sorted structure.

    Attributes:
        vocabulary (Vocabulary): Symbols interpreted by the structure.
        universe (dict): sort name -> carrier tuple; the unbounded carrier is (1, ..., n).
        relations (dict): relation name -> frozenset of tuples.
        constants (dict): constant name -> element.
    """
    vocabulary: Vocabulary
    universe: Mapping[str, tuple]
    relations: Mapping[str, frozenset]
    constants: Mapping[str, object]

    def __hash__(self):
        return hash((tuple(sorted((k, tuple(sorted(v, key=repr))) for k, v in self.relations.items())),
                     tuple(sorted(self.constants.items(), key=repr)), self.size))

    @classmethod
    def build(cls, vocabulary, n, relations=None, constants=None, validate=True):
        """
        Creates a structure whose unbounded carrier is {1..n}.

        Relations that are not given are empty; every constant must be given.
        """
        universe = {name: (tuple(range(1, n + 1)) if not sort.is_bounded else sort.elements)
                    for name, sort in vocabulary.sorts().items()}
        rels = {name: frozenset() for name in vocabulary.relations}
        for name, tuples in (relations or {}).items():
            rels[name] = frozenset(tuple(t) for t in tuples)
        structure = cls(vocabulary, universe, rels, dict(constants or {}))
        if validate:
            structure.validate()
        return structure

    @property
    def size(self):
        return len(self.universe.get(DOM.name, ()))

    def carrier(self, sort):
        if sort.is_bounded:
            return sort.elements
        return self.universe[DOM.name]

    def validate(self):
        """Checks that tuples respect sorts and every constant is interpreted."""
        for name, sorts in self.vocabulary.relations.items():
            for row in self.relations.get(name, ()):
                if len(row) != len(sorts):
                    raise ArityError(f"tuple {row} of '{name}' has arity {len(row)}, expected {len(sorts)}")
                for value, sort in zip(row, sorts):
                    if value not in self.carrier(sort):
                        raise SortError(f"value {value!r} of '{name}' is not in sort '{sort.name}'")
        for name, sort in self.vocabulary.constants.items():
            if name not in self.constants:
                raise SortError(f"constant '{name}' is not interpreted")
            if self.constants[name] not in self.carrier(sort):
                raise SortError(f"constant '{name}' = {self.constants[name]!r} is not in sort '{sort.name}'")
        return self

    def with_relations(self, updates):
        rels = dict(self.relations)
        rels.update({name: frozenset(tuple(t) for t in tuples) for name, tuples in updates.items()})
        return Structure(self.vocabulary, self.universe, rels, self.constants)

    def with_constants(self, updates):
        consts = dict(self.constants)
        consts.update(updates)
        return Structure(self.vocabulary, self.universe, self.relations, consts)

    def reduct(self, vocabulary):
        """Forgets every symbol outside `vocabulary`."""
        rels = {name: self.relations.get(name, frozenset()) for name in vocabulary.relations}
        consts = {name: self.constants[name] for name in vocabulary.constants if name in self.constants}
        universe = dict(self.universe)
        for name, sort in vocabulary.sorts().items():
            universe.setdefault(name, self.carrier(sort))
        return Structure(vocabulary, universe, rels, consts)

    def rename_elements(self, mapping):
        """
        Applies a bijection to the unbounded carrier and renumbers it to {1..n}.

        `mapping` sends old unbounded elements to new ones; bounded elements are kept.
        """
        unbounded = set(self.universe[DOM.name])

        def move(value):
            return mapping[value] if value in unbounded and not isinstance(value, str) else value

        rels = {name: frozenset(tuple(move(v) for v in row) for row in rows) for name, rows in self.relations.items()}
        consts = {name: move(value) for name, value in self.constants.items()}
        universe = dict(self.universe)
        universe[DOM.name] = tuple(sorted(move(v) for v in self.universe[DOM.name]))
        return Structure(self.vocabulary, universe, rels, consts)

    def restrict(self, elements):
        """
        Substructure on the given unbounded elements, renumbered to {1..k} in ascending order.

        Constants pointing outside the kept elements are dropped.
        """
        kept = sorted(set(elements))
        renumber = {old: new for new, old in enumerate(kept, start=1)}
        unbounded = set(self.universe[DOM.name])

        def inside(row):
            return all(v in renumber or v not in unbounded or isinstance(v, str) for v in row)

        def move(value):
            return renumber[value] if value in renumber and not isinstance(value, str) else value

        rels = {name: frozenset(tuple(move(v) for v in row) for row in rows if inside(row))
                for name, rows in self.relations.items()}
        consts = {name: move(value) for name, value in self.constants.items()
                  if isinstance(value, str) or value in renumber}
        universe = dict(self.universe)
        universe[DOM.name] = tuple(range(1, len(kept) + 1))
        return Structure(self.vocabulary, universe, rels, consts)
