"""
From many-sorted FO²_BD verification conditions to one-sorted FO².

The passes run in this order:

1. `witness_outer_existentials` turns unbounded existentials outside every
   universal quantifier into fresh constants. A CHOOSE target substituted
   into a postcondition with nested x/y scopes only fits in two variables
   this way.
2. `to_two_vars` renames the unbounded variables to x and y.
3. `expand_bounded` unrolls bounded quantifiers, splits every table by the
   values of its bounded columns, and turns bounded symbolic constants into
   selector relations.
4. `eliminate_constants` replaces each unbounded constant c by a singleton
   relation U_c.

`decode_structure` maps a model of the lowered sentence back to the
original vocabulary.
"""

import itertools
import logging
from dataclasses import replace

from app.errors import LoweringError
from app.logic.models import (
    DOM, Var, Const, TrueF, FalseF, Atom, Eq, Not, And, Or, Implies, Iff, Forall, Exists,
    TRUE, FALSE, Structure, Vocabulary, QUANTIFIERS,
    conj, disj, neg, implies, iff, forall, equals,
)
from app.logic.services import (
    free_variables, vocabulary_of, subformulas, map_atoms, constants_of, all_variable_names, substitute_terms,
    TWO_VARIABLES,
)
from app.lowering.models import LoweringMap
from app.utils.helpers import fresh_name

logger = logging.getLogger(__name__)

X = Var('x', DOM)
Y = Var('y', DOM)


# --- Attribute order ---

def normalize_attribute_order(vocabulary):
    """
    Moves the unbounded columns of every relation to the front.

    Args:
        vocabulary (Vocabulary or SchemaDecl): Relations with per-column sorts.

    Returns:
        tuple: (reordered Vocabulary, dict relation -> permutation), where a
        permutation lists the original column indices in their new order.
    """
    if not isinstance(vocabulary, Vocabulary):
        vocabulary = vocabulary.vocabulary()
    relations, permutations = {}, {}
    for name, sorts in vocabulary.relations.items():
        order = ([i for i, s in enumerate(sorts) if not s.is_bounded]
                 + [i for i, s in enumerate(sorts) if s.is_bounded])
        permutations[name] = tuple(order)
        relations[name] = tuple(sorts[i] for i in order)
    return Vocabulary(relations, dict(vocabulary.constants)), permutations


def apply_attribute_order(f, permutations):
    """Reorders the arguments of every atom according to `permutations`."""

    def reorder(leaf):
        if isinstance(leaf, Atom) and leaf.rel in permutations:
            return Atom(leaf.rel, tuple(leaf.args[i] for i in permutations[leaf.rel]))
        return leaf

    return map_atoms(f, reorder)


# --- Outer existentials ---

class _OuterWitnesses:
    """Replaces unbounded existentials in scope of no universal quantifier by fresh constants."""

    def __init__(self, taken):
        self.taken = set(taken)
        self.witnesses = {}

    def rewrite(self, f, positive=True):
        if isinstance(f, Not):
            return Not(self.rewrite(f.arg, not positive))
        if isinstance(f, And):
            return And(tuple(self.rewrite(a, positive) for a in f.args))
        if isinstance(f, Or):
            return Or(tuple(self.rewrite(a, positive) for a in f.args))
        if isinstance(f, Implies):
            return Implies(self.rewrite(f.left, not positive), self.rewrite(f.right, positive))
        if isinstance(f, QUANTIFIERS) and isinstance(f, Exists) == positive:
            if f.var.sort.is_bounded:
                return type(f)(f.var, self.rewrite(f.body, positive))
            name = _unique(f"c_{f.var.name}", self.taken)
            self.witnesses[name] = f.var.name
            return self.rewrite(substitute_terms(f.body, {f.var.name: Const(name, f.var.sort)}), positive)
        return f


def witness_outer_existentials(f, vocabulary=None):
    """
    Witnesses every outermost existential of the unbounded sort by a fresh constant.

    An existential counts as outermost when only connectives and other
    existentials (∀ under a negation included) lie above it; bounded ones
    stay but are looked through. The result is satisfiable exactly when `f`
    is, and its models are models of `f`.

    Returns:
        tuple: (sentence, dict fresh constant -> variable it replaced).
    """
    taken = set(all_variable_names(f))
    taken |= {node.rel for node in subformulas(f) if isinstance(node, Atom)}
    taken |= {c.name for c in constants_of(f)}
    if vocabulary is not None:
        taken |= set(vocabulary.relations) | set(vocabulary.constants)
    rewriter = _OuterWitnesses(taken)
    result = rewriter.rewrite(f)
    if rewriter.witnesses:
        logger.debug(f"witnessed {len(rewriter.witnesses)} outer existentials")
    return result, rewriter.witnesses


# --- Two variables ---

def _dom_names(f):
    return {v.name for v in free_variables(f) if not v.sort.is_bounded}


class _TwoVariableRenamer:
    def __init__(self):
        self.bounded_count = 0

    def term(self, t, env):
        if isinstance(t, Var):
            return env.get(t.name, t)
        return t

    def rename(self, f, env):
        if isinstance(f, Atom):
            return Atom(f.rel, tuple(self.term(t, env) for t in f.args))
        if isinstance(f, Eq):
            return Eq(self.term(f.left, env), self.term(f.right, env))
        if isinstance(f, Not):
            return Not(self.rename(f.arg, env))
        if isinstance(f, And):
            return And(tuple(self.rename(a, env) for a in f.args))
        if isinstance(f, Or):
            return Or(tuple(self.rename(a, env) for a in f.args))
        if isinstance(f, Implies):
            return Implies(self.rename(f.left, env), self.rename(f.right, env))
        if isinstance(f, Iff):
            return Iff(self.rename(f.left, env), self.rename(f.right, env))
        if isinstance(f, QUANTIFIERS):
            var = f.var
            if var.sort.is_bounded:
                if var.name in TWO_VARIABLES:
                    self.bounded_count += 1
                    target = Var(f"{var.sort.name}_{self.bounded_count}", var.sort)
                else:
                    target = var
            else:
                outer = {env[n].name if n in env else n for n in _dom_names(f.body) if n != var.name}
                free = [name for name in TWO_VARIABLES if name not in outer]
                if not free:
                    raise LoweringError(
                        f"variable '{var.name}' needs a third unbounded variable next to {', '.join(sorted(outer))}")
                target = Var(var.name if var.name in free else free[0], DOM)
            inner = dict(env)
            inner[var.name] = target
            return type(f)(target, self.rename(f.body, inner))
        return f


def to_two_vars(f):
    """
    Renames the unbounded-sort variables of `f` to x and y.

    Each unbounded quantifier takes whichever of x/y is not used by the other
    unbounded variables free in its scope. Bounded variables keep their names
    unless they are called x or y.

    Raises:
        LoweringError: When some quantifier has two other unbounded variables
            free in its scope, or an unbounded variable other than x/y is free.
    """
    loose = sorted(n for n in _dom_names(f) if n not in TWO_VARIABLES)
    if loose:
        raise LoweringError(f"free variable '{loose[0]}' of the unbounded sort")
    return _TwoVariableRenamer().rename(f, {})


# --- Bounded domains ---

def _unique(name, taken):
    candidate = fresh_name(name, taken)
    taken.add(candidate)
    return candidate


class _BoundedExpander:
    """Unrolls bounded quantifiers and splits relations; collects the names it introduces."""

    def __init__(self, vocabulary):
        self.vocabulary = vocabulary
        _, self.permutations = normalize_attribute_order(vocabulary)
        self.taken = set(vocabulary.relations) | set(vocabulary.constants)
        self.splits = {}
        self.selectors = {}
        self.propositional = set()

    # names

    def split_relation(self, table, values):
        key = (table, tuple(values))
        if key not in self.splits:
            if not values:
                self.splits[key] = table
            else:
                self.splits[key] = _unique(f"{table}__{'_'.join(values)}", self.taken)
        return self.splits[key]

    def selector(self, const, element):
        key = (const.name, element)
        if key not in self.selectors:
            for e in const.sort.elements:
                self.selectors[(const.name, e)] = _unique(f"{const.name}__{e}", self.taken)
                self.propositional.add(self.selectors[(const.name, e)])
        return self.selectors[key]

    def fact(self, name, scope):
        """A 0-ary fact as an atom of a universe-constant unary relation."""
        self.propositional.add(name)
        if scope:
            return Atom(name, (Var(scope[-1], DOM),))
        return Exists(X, Atom(name, (X,)))

    # formulas

    def resolve(self, term, env):
        if isinstance(term, Var) and term.sort.is_bounded:
            try:
                return env[term.name]
            except KeyError:
                raise LoweringError(f"free bounded variable '{term.name}'") from None
        return term

    def choices(self, terms, scope):
        """
        (guard, literal values) pairs covering every value of the bounded symbolic constants in `terms`.
        """
        symbolic = sorted({t for t in terms if isinstance(t, Const) and t.sort.is_bounded and not t.is_literal},
                          key=lambda c: c.name)
        if not symbolic:
            yield TRUE, {}
            return
        for values in itertools.product(*(c.sort.elements for c in symbolic)):
            guard = conj(*(self.fact(self.selector(c, e), scope) for c, e in zip(symbolic, values)))
            yield guard, {c.name: Const(e, c.sort) for c, e in zip(symbolic, values)}

    def atom(self, f, env, scope):
        args = tuple(self.resolve(t, env) for t in f.args)
        order = self.permutations.get(f.rel, tuple(range(len(args))))
        cases = []
        for guard, literal in self.choices(args, scope):
            fixed = tuple(literal.get(t.name, t) if isinstance(t, Const) else t for t in args)
            dom_args = tuple(fixed[i] for i in order if not fixed[i].sort.is_bounded)
            values = tuple(fixed[i].name for i in order if fixed[i].sort.is_bounded)
            name = self.split_relation(f.rel, values)
            leaf = Atom(name, dom_args) if dom_args else self.fact(name, scope)
            cases.append(conj(guard, leaf))
        return disj(*cases)

    def equality(self, f, env, scope):
        left, right = self.resolve(f.left, env), self.resolve(f.right, env)
        if not left.sort.is_bounded:
            return Eq(left, right)
        cases = []
        for guard, literal in self.choices((left, right), scope):
            lval = literal.get(left.name, left)
            rval = literal.get(right.name, right)
            cases.append(conj(guard, equals(lval, rval)))
        return disj(*cases)

    def expand(self, f, env, scope):
        if isinstance(f, Atom):
            return self.atom(f, env, scope)
        if isinstance(f, Eq):
            return self.equality(f, env, scope)
        if isinstance(f, (TrueF, FalseF)):
            return f
        if isinstance(f, Not):
            return neg(self.expand(f.arg, env, scope))
        if isinstance(f, And):
            return conj(*(self.expand(a, env, scope) for a in f.args))
        if isinstance(f, Or):
            return disj(*(self.expand(a, env, scope) for a in f.args))
        if isinstance(f, Implies):
            return implies(self.expand(f.left, env, scope), self.expand(f.right, env, scope))
        if isinstance(f, Iff):
            return iff(self.expand(f.left, env, scope), self.expand(f.right, env, scope))
        if isinstance(f, QUANTIFIERS):
            if f.var.sort.is_bounded:
                parts = []
                for element in f.var.sort.elements:
                    inner = dict(env)
                    inner[f.var.name] = Const(element, f.var.sort)
                    parts.append(self.expand(f.body, inner, scope))
                return conj(*parts) if isinstance(f, Forall) else disj(*parts)
            body = self.expand(f.body, env, scope + (f.var.name,))
            if isinstance(body, (TrueF, FalseF)):
                return body
            return type(f)(f.var, body)
        raise LoweringError(f"not a formula: {f!r}")

    def axioms(self):
        parts = []
        for name in sorted(self.propositional):
            parts.append(forall([X, Y], Iff(Atom(name, (X,)), Atom(name, (Y,)))))
        by_const = {}
        for (const, element), name in self.selectors.items():
            by_const.setdefault(const, []).append(name)
        for const in sorted(by_const):
            names = by_const[const]
            parts.append(Forall(X, disj(*(Atom(n, (X,)) for n in names))))
            for a, b in itertools.combinations(names, 2):
                parts.append(Forall(X, neg(conj(Atom(a, (X,)), Atom(b, (X,))))))
        return conj(*parts)

    def lowering_map(self):
        return LoweringMap(
            vocabulary=self.vocabulary,
            permutations=dict(self.permutations),
            table_split={name: key for key, name in self.splits.items()},
            selectors={name: key for key, name in self.selectors.items()},
            propositional=frozenset(self.propositional),
        )


def expand_bounded(f, vocabulary=None):
    """
    Removes every bounded sort from an FO²_BD sentence.

    Bounded quantifiers become conjunctions/disjunctions over the sort's
    elements. An atom R(x, y, b1, b2) with bounded values becomes R__b1_b2(x, y);
    with no unbounded argument left it becomes a universe-constant unary
    relation. A bounded symbolic constant k is replaced by selector relations
    k__e, exactly one of which holds. Equalities between bounded terms are
    decided on the spot.

    Args:
        f (Formula): A sentence whose unbounded variables are x and y.
        vocabulary (Vocabulary, optional): The sentence's vocabulary; read off `f` when omitted.

    Returns:
        tuple: (FO² sentence conjoined with the selector and constancy axioms, LoweringMap).
    """
    vocabulary = vocabulary_of(f, vocabulary)
    expander = _BoundedExpander(vocabulary)
    body = expander.expand(f, {}, ())
    lowered = conj(body, expander.axioms())
    logger.debug(f"expanded bounded sorts: {len(expander.splits)} split relations, "
                 f"{len(expander.selectors)} selectors")
    return lowered, expander.lowering_map()


# --- Constants ---

def _singleton_axiom(rel):
    return conj(Exists(X, Atom(rel, (X,))),
                forall([X, Y], implies(conj(Atom(rel, (X,)), Atom(rel, (Y,))), Eq(X, Y))))


def _replace_constants(leaf, names):
    terms = leaf.args if isinstance(leaf, Atom) else (leaf.left, leaf.right)
    constants = []
    for t in terms:
        if isinstance(t, Const) and t not in constants:
            constants.append(t)
    if not constants:
        return leaf
    used = {t.name for t in terms if isinstance(t, Var)}
    spare = [v for v in (X, Y) if v.name not in used]
    if len(spare) < len(constants):
        raise LoweringError(f"no spare variable to eliminate the constants of {leaf!r}")
    witness = dict(zip((c.name for c in constants), spare))
    new_terms = tuple(witness.get(t.name, t) if isinstance(t, Const) else t for t in terms)
    body = Atom(leaf.rel, new_terms) if isinstance(leaf, Atom) else Eq(*new_terms)
    for c in reversed(constants):
        var = witness[c.name]
        body = Exists(var, conj(Atom(names[c.name], (var,)), body))
    return body


def eliminate_constants(f, lowering_map=None):
    """
    Replaces the unbounded constants of an FO² sentence by singleton relations.

    Each constant c gets a unary relation U_c with the axiom that it holds for
    exactly one element; an atom mentioning c quantifies a witness of U_c with
    a variable the atom does not use, e.g. R(x, c) becomes ∃y (U_c(y) ∧ R(x, y)).

    Args:
        f (Formula): FO² sentence (x/y variables, arity <= 2, unbounded terms only).
        lowering_map (LoweringMap, optional): Extended with the new relations.

    Returns:
        tuple: (constant-free sentence, LoweringMap).
    """
    lowering_map = lowering_map or LoweringMap()
    constants = sorted(constants_of(f, include_literals=True), key=lambda c: c.name)
    if not constants:
        return f, lowering_map
    for c in constants:
        if c.sort.is_bounded:
            raise LoweringError(f"bounded constant '{c.name}' must be expanded before constant elimination")
    taken = {node.rel for node in subformulas(f) if isinstance(node, Atom)}
    taken |= set(lowering_map.vocabulary.relations) | set(lowering_map.table_split)
    names = {c.name: _unique(f"U_{c.name}", taken) for c in constants}
    body = map_atoms(f, lambda leaf: _replace_constants(leaf, names))
    axioms = conj(*(_singleton_axiom(names[c.name]) for c in constants))
    logger.debug(f"eliminated {len(constants)} constants")
    return conj(body, axioms), lowering_map.with_const_relations(names)


# --- Decoding ---

def decode_structure(lowered, lowering_map):
    """
    Reads a model of the lowered sentence back as a structure of the original vocabulary.

    Tables are reassembled from their split relations, bounded constants from
    the selector that holds, unbounded constants from the structure itself
    or from their singleton relation. Symbols the lowered sentence never
    mentioned get empty tables or the first element of their sort.

    Args:
        lowered (Structure): A structure interpreting the lowered vocabulary.
        lowering_map (LoweringMap): The map produced while lowering.

    Returns:
        Structure: Over `lowering_map.vocabulary`, on the same unbounded carrier.
    """
    vocabulary = lowering_map.vocabulary
    n = lowered.size
    rows = {name: set() for name in vocabulary.relations}
    for name, (table, values) in lowering_map.table_split.items():
        if table not in vocabulary.relations:
            continue
        tuples = lowered.relations.get(name, frozenset())
        order = lowering_map.permutations.get(table, tuple(range(vocabulary.arity(table))))
        dom_count = len(order) - len(values)
        if name in lowering_map.propositional:
            tuples = {()} if tuples else set()
        for t in tuples:
            row = [None] * len(order)
            for slot, value in zip(order, tuple(t[:dom_count]) + tuple(values)):
                row[slot] = value
            rows[table].add(tuple(row))
    constants = {}
    for name, sort in vocabulary.constants.items():
        if sort.is_bounded:
            constants[name] = sort.elements[0]
        else:
            constants[name] = lowered.constants.get(name, 1)
    for rel, (const, element) in lowering_map.selectors.items():
        if const in constants and lowered.relations.get(rel):
            constants[const] = element
    for const, rel in lowering_map.const_relations.items():
        members = sorted(e[0] for e in lowered.relations.get(rel, ()))
        if const in constants and members:
            constants[const] = members[0]
    return Structure.build(vocabulary, n, rows, constants)


def lower(f, vocabulary=None):
    """
    All lowering passes in order, keeping constants.

    The outermost existentials are witnessed by constants first, so the
    result is equisatisfiable with `f` rather than equivalent; the map's
    vocabulary stays that of `f`.

    Returns:
        tuple: (FO² sentence that may still mention unbounded constants, LoweringMap).
    """
    vocabulary = vocabulary_of(f, vocabulary)
    witnessed, witnesses = witness_outer_existentials(f, vocabulary)
    lowered, lowering_map = expand_bounded(to_two_vars(witnessed), vocabulary_of(witnessed, vocabulary))
    return lowered, replace(lowering_map, vocabulary=vocabulary, witnesses=witnesses)
