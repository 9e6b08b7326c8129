"""
Operations on formulas and structures: evaluation, substitution, negation
normal form, fragment checks and brute-force structure enumeration.
"""

import itertools
import logging
import re

from app.errors import EvaluationError, SortError, ArityError, LoweringError, ResourceLimitError
from app.logic.models import (
    DOM, Var, Const, TrueF, FalseF, Atom, Eq, Not, And, Or, Implies, Iff, Forall, Exists,
    TRUE, FALSE, AtomTemplate, Structure, Vocabulary, QUANTIFIERS, conj, disj,
)

logger = logging.getLogger(__name__)

_MISSING = object()
TWO_VARIABLES = ('x', 'y')


# --- Evaluation ---

def term_value(structure, term, env):
    """
    Value of a term in `structure` under the valuation `env`.

    Raises:
        EvaluationError: On an unbound variable or an uninterpreted constant.
    """
    if isinstance(term, Var):
        try:
            return env[term.name]
        except KeyError:
            raise EvaluationError(f"unbound variable '{term.name}'") from None
    if term.name in structure.constants:
        return structure.constants[term.name]
    if term.is_literal:
        return term.name
    raise EvaluationError(f"constant '{term.name}' is not interpreted")


def _eval(f, s, env):
    kind = type(f)
    if kind is Atom:
        rows = s.relations.get(f.rel)
        if rows is None:
            raise EvaluationError(f"relation '{f.rel}' is not interpreted")
        sorts = s.vocabulary.relations.get(f.rel)
        if sorts is not None and tuple(t.sort for t in f.args) != sorts:
            check_sorts(f, s.vocabulary)
        return tuple(term_value(s, t, env) for t in f.args) in rows
    if kind is Not:
        return not _eval(f.arg, s, env)
    if kind is And:
        return all(_eval(a, s, env) for a in f.args)
    if kind is Or:
        return any(_eval(a, s, env) for a in f.args)
    if kind is Eq:
        return term_value(s, f.left, env) == term_value(s, f.right, env)
    if kind is Forall or kind is Exists:
        name = f.var.name
        saved = env.get(name, _MISSING)
        want = kind is Exists
        try:
            for value in s.carrier(f.var.sort):
                env[name] = value
                if _eval(f.body, s, env) is want:
                    return want
            return not want
        finally:
            if saved is _MISSING:
                env.pop(name, None)
            else:
                env[name] = saved
    if kind is Implies:
        return (not _eval(f.left, s, env)) or _eval(f.right, s, env)
    if kind is Iff:
        return _eval(f.left, s, env) == _eval(f.right, s, env)
    if kind is TrueF:
        return True
    if kind is FalseF:
        return False
    raise EvaluationError(f"not a formula: {f!r}")


def evaluate(structure, formula, env=None):
    """
    Truth value of `formula` in `structure` (standard Tarskian semantics).

    Args:
        structure (Structure): The finite structure.
        formula (Formula): A formula over the structure's vocabulary.
        env (dict, optional): Variable name -> element for the free variables.

    Returns:
        bool: Whether the structure satisfies the formula under `env`.

    Raises:
        EvaluationError: On unbound variables or symbols missing from the structure.
        SortError: On an atom whose arguments do not have the sorts of its relation.
        ArityError: On an atom with the wrong number of arguments.
    """
    return _eval(formula, structure, dict(env or {}))


# --- Syntactic queries ---

def free_variables(f):
    """Free variables of `f` as a frozenset of `Var`."""
    if isinstance(f, Atom):
        return frozenset(t for t in f.args if isinstance(t, Var))
    if isinstance(f, Eq):
        return frozenset(t for t in (f.left, f.right) if isinstance(t, Var))
    if isinstance(f, Not):
        return free_variables(f.arg)
    if isinstance(f, (And, Or)):
        return frozenset().union(*(free_variables(a) for a in f.args))
    if isinstance(f, (Implies, Iff)):
        return free_variables(f.left) | free_variables(f.right)
    if isinstance(f, QUANTIFIERS):
        return frozenset(v for v in free_variables(f.body) if v.name != f.var.name)
    return frozenset()


def free_variable_names(f):
    return frozenset(v.name for v in free_variables(f))


def all_variable_names(f):
    """Every variable name occurring in `f`, bound or free."""
    names = set()
    for node in subformulas(f):
        if isinstance(node, Atom):
            names.update(t.name for t in node.args if isinstance(t, Var))
        elif isinstance(node, Eq):
            names.update(t.name for t in (node.left, node.right) if isinstance(t, Var))
        elif isinstance(node, QUANTIFIERS):
            names.add(node.var.name)
    return names


def subformulas(f):
    """Pre-order traversal of all subformulas (including `f`)."""
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Not):
            stack.append(node.arg)
        elif isinstance(node, (And, Or)):
            stack.extend(reversed(node.args))
        elif isinstance(node, (Implies, Iff)):
            stack.extend((node.right, node.left))
        elif isinstance(node, QUANTIFIERS):
            stack.append(node.body)


def relations_of(f):
    return {node.rel for node in subformulas(f) if isinstance(node, Atom)}


def constants_of(f, include_literals=False):
    """Constant symbols occurring in `f`; element literals only when asked."""
    found = set()
    for node in subformulas(f):
        terms = node.args if isinstance(node, Atom) else (node.left, node.right) if isinstance(node, Eq) else ()
        for t in terms:
            if isinstance(t, Const) and (include_literals or not t.is_literal):
                found.add(t)
    return found


def formula_size(f):
    return sum(1 for _ in subformulas(f))


def quantifier_count(f):
    return sum(1 for node in subformulas(f) if isinstance(node, QUANTIFIERS))


def quantifier_depth(f):
    if isinstance(f, QUANTIFIERS):
        return 1 + quantifier_depth(f.body)
    if isinstance(f, Not):
        return quantifier_depth(f.arg)
    if isinstance(f, (And, Or)):
        return max((quantifier_depth(a) for a in f.args), default=0)
    if isinstance(f, (Implies, Iff)):
        return max(quantifier_depth(f.left), quantifier_depth(f.right))
    return 0


def is_quantifier_free(f):
    return not any(isinstance(node, QUANTIFIERS) for node in subformulas(f))


def map_atoms(f, fn):
    """Rebuilds `f` with every Atom/Eq leaf replaced by `fn(leaf)`; quantifiers are kept."""
    if isinstance(f, (Atom, Eq)):
        return fn(f)
    if isinstance(f, Not):
        return Not(map_atoms(f.arg, fn))
    if isinstance(f, And):
        return And(tuple(map_atoms(a, fn) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(map_atoms(a, fn) for a in f.args))
    if isinstance(f, Implies):
        return Implies(map_atoms(f.left, fn), map_atoms(f.right, fn))
    if isinstance(f, Iff):
        return Iff(map_atoms(f.left, fn), map_atoms(f.right, fn))
    if isinstance(f, Forall):
        return Forall(f.var, map_atoms(f.body, fn))
    if isinstance(f, Exists):
        return Exists(f.var, map_atoms(f.body, fn))
    return f


# --- Substitution ---

_SUFFIX = re.compile(r'_\d+$')


def fresh_variable_name(base, avoid):
    """Smallest `base_k` (k >= 1) not in `avoid`; a numeric suffix of `base` is replaced."""
    stem = _SUFFIX.sub('', base) or base
    k = 1
    while f"{stem}_{k}" in avoid:
        k += 1
    return f"{stem}_{k}"


def _subst_term(t, mapping):
    if isinstance(t, Var) and t.name in mapping:
        replacement = mapping[t.name]
        if replacement.sort != t.sort:
            raise SortError(f"cannot substitute {replacement.name}:{replacement.sort} for {t.name}:{t.sort}")
        return replacement
    return t


def _term_var_names(terms):
    return {t.name for t in terms if isinstance(t, Var)}


def substitute_terms(f, mapping):
    """
    Capture-avoiding substitution of terms for free variables.

    Args:
        f (Formula): The formula.
        mapping (dict): variable name -> replacement Term (sorts must agree).

    Returns:
        Formula: `f` with every free occurrence replaced; bound variables that
        would capture a replacement are renamed.
    """
    if not mapping:
        return f
    if isinstance(f, Atom):
        return Atom(f.rel, tuple(_subst_term(t, mapping) for t in f.args))
    if isinstance(f, Eq):
        return Eq(_subst_term(f.left, mapping), _subst_term(f.right, mapping))
    if isinstance(f, Not):
        return Not(substitute_terms(f.arg, mapping))
    if isinstance(f, And):
        return And(tuple(substitute_terms(a, mapping) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(substitute_terms(a, mapping) for a in f.args))
    if isinstance(f, Implies):
        return Implies(substitute_terms(f.left, mapping), substitute_terms(f.right, mapping))
    if isinstance(f, Iff):
        return Iff(substitute_terms(f.left, mapping), substitute_terms(f.right, mapping))
    if isinstance(f, QUANTIFIERS):
        var = f.var
        body_free = free_variable_names(f.body)
        inner = {name: t for name, t in mapping.items() if name != var.name and name in body_free}
        if not inner:
            return f
        incoming = _term_var_names(inner.values())
        body = f.body
        if var.name in incoming:
            avoid = incoming | body_free | all_variable_names(body) | set(inner)
            renamed = Var(fresh_variable_name(var.name, avoid), var.sort)
            body = substitute_terms(body, {var.name: renamed})
            var = renamed
        return type(f)(var, substitute_terms(body, inner))
    return f


def substitute_constants(f, mapping):
    """
    Replaces symbolic constants by terms.

    Replacement variables must not be bound anywhere in `f`; pick them with
    `fresh_variable_name` over `all_variable_names(f)`.

    Args:
        f (Formula): The formula.
        mapping (dict): constant name -> replacement Term of the same sort.
    """
    if not mapping:
        return f

    def swap(t):
        if isinstance(t, Const) and not t.is_literal and t.name in mapping:
            replacement = mapping[t.name]
            if replacement.sort != t.sort:
                raise SortError(f"cannot substitute {replacement.name}:{replacement.sort} for {t.name}:{t.sort}")
            return replacement
        return t

    def replace(leaf):
        if isinstance(leaf, Atom):
            return Atom(leaf.rel, tuple(swap(t) for t in leaf.args))
        return Eq(swap(leaf.left), swap(leaf.right))

    return map_atoms(f, replace)


def substitute_atoms(f, rel, template):
    """
    Replaces every atom `rel(a1..an)` of `f` by `template` instantiated at (a1..an).

    Args:
        f (Formula): The formula to rewrite.
        rel (str): Relation name whose atoms are replaced.
        template (AtomTemplate): Placeholders plus body.

    Returns:
        Formula: The rewritten formula; atoms of other relations are untouched,
        and atoms produced by the template are not rewritten again.

    Raises:
        ArityError: When an atom of `rel` has a different arity than the template.
    """
    if not isinstance(template, AtomTemplate):
        raise TypeError("substitute_atoms expects an AtomTemplate")

    def replace(leaf):
        if isinstance(leaf, Atom) and leaf.rel == rel:
            if len(leaf.args) != template.arity:
                raise ArityError(f"atom {rel}/{len(leaf.args)} does not match template arity {template.arity}")
            return template.instantiate(leaf.args)
        return leaf

    return map_atoms(f, replace)


def rename_relation(f, old, new):
    return map_atoms(f, lambda leaf: Atom(new, leaf.args) if isinstance(leaf, Atom) and leaf.rel == old else leaf)


# --- Negation normal form ---

def nnf(f, negate=False):
    """
    Negation normal form: negations only on atoms and equalities, no Implies/Iff.

    TRUE/FALSE constants are folded away where they meet a connective.
    """
    if isinstance(f, (Atom, Eq)):
        return Not(f) if negate else f
    if isinstance(f, TrueF):
        return FALSE if negate else TRUE
    if isinstance(f, FalseF):
        return TRUE if negate else FALSE
    if isinstance(f, Not):
        return nnf(f.arg, not negate)
    if isinstance(f, And):
        parts = [nnf(a, negate) for a in f.args]
        return disj(*parts) if negate else conj(*parts)
    if isinstance(f, Or):
        parts = [nnf(a, negate) for a in f.args]
        return conj(*parts) if negate else disj(*parts)
    if isinstance(f, Implies):
        if negate:
            return conj(nnf(f.left), nnf(f.right, True))
        return disj(nnf(f.left, True), nnf(f.right))
    if isinstance(f, Iff):
        if negate:
            return disj(conj(nnf(f.left), nnf(f.right, True)), conj(nnf(f.left, True), nnf(f.right)))
        return conj(disj(nnf(f.left, True), nnf(f.right)), disj(nnf(f.left), nnf(f.right, True)))
    if isinstance(f, Forall):
        body = nnf(f.body, negate)
        return _quantify(Exists if negate else Forall, f.var, body)
    if isinstance(f, Exists):
        body = nnf(f.body, negate)
        return _quantify(Forall if negate else Exists, f.var, body)
    raise TypeError(f"not a formula: {f!r}")


def _quantify(kind, var, body):
    if isinstance(body, (TrueF, FalseF)):
        return body
    return kind(var, body)


def simplify(f):
    """Folds TRUE/FALSE and literal equalities bottom-up; keeps everything else."""
    if isinstance(f, Eq):
        if f.left == f.right:
            return TRUE
        if isinstance(f.left, Const) and isinstance(f.right, Const) and f.left.is_literal and f.right.is_literal:
            return FALSE
        return f
    if isinstance(f, Not):
        inner = simplify(f.arg)
        if isinstance(inner, TrueF):
            return FALSE
        if isinstance(inner, FalseF):
            return TRUE
        return Not(inner)
    if isinstance(f, And):
        return conj(*(simplify(a) for a in f.args))
    if isinstance(f, Or):
        return disj(*(simplify(a) for a in f.args))
    if isinstance(f, Implies):
        left, right = simplify(f.left), simplify(f.right)
        if isinstance(left, FalseF) or isinstance(right, TrueF):
            return TRUE
        if isinstance(left, TrueF):
            return right
        if isinstance(right, FalseF):
            return simplify(Not(left))
        return Implies(left, right)
    if isinstance(f, Iff):
        left, right = simplify(f.left), simplify(f.right)
        if isinstance(left, TrueF):
            return right
        if isinstance(right, TrueF):
            return left
        if isinstance(left, FalseF):
            return simplify(Not(right))
        if isinstance(right, FalseF):
            return simplify(Not(left))
        return Iff(left, right)
    if isinstance(f, QUANTIFIERS):
        body = simplify(f.body)
        if isinstance(body, (TrueF, FalseF)):
            return body
        return type(f)(f.var, body)
    return f


# --- Fragment checks ---

def fo2bd_violations(f):
    """Names of unbounded-sort variables other than x and y (bound or free)."""
    bad = set()
    for node in subformulas(f):
        candidates = []
        if isinstance(node, QUANTIFIERS):
            candidates.append(node.var)
        elif isinstance(node, Atom):
            candidates.extend(t for t in node.args if isinstance(t, Var))
        elif isinstance(node, Eq):
            candidates.extend(t for t in (node.left, node.right) if isinstance(t, Var))
        for var in candidates:
            if not var.sort.is_bounded and var.name not in TWO_VARIABLES:
                bad.add(var.name)
    return sorted(bad)


def is_fo2bd(f):
    return not fo2bd_violations(f)


def check_fo2bd(f):
    """
    Raises LoweringError naming the first unbounded variable outside {x, y}.
    """
    bad = fo2bd_violations(f)
    if bad:
        raise LoweringError(f"variable '{bad[0]}' of the unbounded sort is neither x nor y")
    return f


def check_fo2(f, allow_constants=True):
    """
    Strict two-variable check: variables x/y only, unbounded sort only, arity <= 2.

    Raises:
        LoweringError: Describing the first violation.
    """
    for node in subformulas(f):
        if isinstance(node, QUANTIFIERS):
            if node.var.name not in TWO_VARIABLES or node.var.sort.is_bounded:
                raise LoweringError(f"quantified variable '{node.var.name}:{node.var.sort}' is not allowed in FO2")
        terms = node.args if isinstance(node, Atom) else (node.left, node.right) if isinstance(node, Eq) else ()
        if isinstance(node, Atom) and len(node.args) > 2:
            raise LoweringError(f"relation '{node.rel}' has arity {len(node.args)} > 2")
        for t in terms:
            if t.sort.is_bounded:
                raise LoweringError(f"term '{t.name}' has bounded sort '{t.sort}'")
            if isinstance(t, Var) and t.name not in TWO_VARIABLES:
                raise LoweringError(f"variable '{t.name}' is not allowed in FO2")
            if isinstance(t, Const) and not allow_constants:
                raise LoweringError(f"constant '{t.name}' must be eliminated first")
    return f


def check_sorts(f, vocabulary):
    """
    Checks every atom against the vocabulary's per-position sorts and equality sides against each other.

    Raises:
        SortError / ArityError: On the first ill-sorted atom.
    """
    for node in subformulas(f):
        if isinstance(node, Atom):
            if node.rel not in vocabulary.relations:
                raise SortError(f"unknown relation '{node.rel}'")
            sorts = vocabulary.relations[node.rel]
            if len(sorts) != len(node.args):
                raise ArityError(f"'{node.rel}' expects {len(sorts)} arguments, got {len(node.args)}")
            for position, (term, sort) in enumerate(zip(node.args, sorts), start=1):
                if term.sort != sort:
                    raise SortError(f"argument {position} of '{node.rel}' has sort '{term.sort}', expected '{sort}'")
        elif isinstance(node, Eq) and node.left.sort != node.right.sort:
            raise SortError(f"equality between sorts '{node.left.sort}' and '{node.right.sort}'")
    return f


# --- Brute-force enumeration ---

def _relation_space(structure_sorts, vocabulary, n):
    carriers = {name: (tuple(range(1, n + 1)) if not sort.is_bounded else sort.elements)
                for name, sort in structure_sorts.items()}
    spaces = []
    for rel, sorts in sorted(vocabulary.relations.items()):
        spaces.append((rel, list(itertools.product(*(carriers[s.name] for s in sorts)))))
    const_spaces = [(name, carriers[sort.name]) for name, sort in sorted(vocabulary.constants.items())]
    return spaces, const_spaces


def count_structures(vocabulary, n):
    """Number of structures of `vocabulary` with unbounded carrier {1..n}."""
    spaces, const_spaces = _relation_space(vocabulary.sorts(), vocabulary, n)
    total = 1
    for _, tuples in spaces:
        total *= 2 ** len(tuples)
    for _, carrier in const_spaces:
        total *= len(carrier)
    return total


def enumerate_structures(vocabulary, n, cap=None, fixed=None):
    """
    Yields every structure of `vocabulary` with unbounded carrier {1..n}.

    Order is lexicographic over relation bitmasks (relations sorted by name),
    then constants, so results are reproducible.

    Args:
        vocabulary (Vocabulary): Symbols to interpret.
        n (int): Size of the unbounded carrier.
        cap (int, optional): Refuse when more structures than this would be produced.
        fixed (dict, optional): relation name -> fixed interpretation (not enumerated).

    Raises:
        ResourceLimitError: When the space exceeds `cap`.
    """
    fixed = fixed or {}
    free_voc = vocabulary.restrict(relations=[r for r in vocabulary.relations if r not in fixed])
    total = count_structures(free_voc, n)
    if cap is not None and total > cap:
        raise ResourceLimitError(f"{total} structures of size {n} exceed the cap of {cap}", count=total)
    spaces, const_spaces = _relation_space(vocabulary.sorts(), free_voc, n)
    template = Structure.build(vocabulary, n, relations=fixed, validate=False)
    masks = [range(2 ** len(tuples)) for _, tuples in spaces]
    const_choices = [carrier for _, carrier in const_spaces]
    for mask_tuple in itertools.product(*masks):
        rels = dict(template.relations)
        for (rel, tuples), mask in zip(spaces, mask_tuple):
            rels[rel] = frozenset(t for i, t in enumerate(tuples) if mask >> i & 1)
        for values in itertools.product(*const_choices):
            consts = {name: value for (name, _), value in zip(const_spaces, values)}
            yield Structure(vocabulary, template.universe, rels, consts)


def model_sizes(formula, vocabulary, max_n, cap=None):
    """Set of sizes n <= max_n at which `formula` has a model (brute force)."""
    sizes = set()
    for n in range(1, max_n + 1):
        if any(evaluate(s, formula) for s in enumerate_structures(vocabulary, n, cap=cap)):
            sizes.add(n)
    return sizes


def vocabulary_of(f, base=None):
    """Vocabulary of the relations and symbolic constants in `f` (sorts read off the atoms)."""
    rels = dict(base.relations) if base else {}
    consts = dict(base.constants) if base else {}
    for node in subformulas(f):
        if isinstance(node, Atom):
            rels.setdefault(node.rel, tuple(t.sort for t in node.args))
    for c in constants_of(f):
        consts.setdefault(c.name, c.sort)
    return Vocabulary(rels, consts)


__all__ = [
    'evaluate', 'term_value', 'free_variables', 'free_variable_names', 'subformulas', 'relations_of',
    'constants_of', 'formula_size', 'quantifier_count', 'quantifier_depth', 'is_quantifier_free',
    'map_atoms', 'substitute_terms', 'substitute_constants', 'substitute_atoms', 'rename_relation', 'nnf', 'simplify',
    'fo2bd_violations', 'is_fo2bd', 'check_fo2bd', 'check_fo2', 'check_sorts', 'enumerate_structures',
    'count_structures', 'model_sizes', 'vocabulary_of', 'fresh_variable_name', 'DOM',
]
