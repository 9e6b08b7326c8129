"""
Cardinality bound of SSNF sentences by counting 1-types.

A satisfiable SSNF sentence with m ∀∃ conjuncts and constants K has a model
of at most |K|(m+1) + 3m·P elements, where P counts the 1-types that some
element outside the constants can realize. A type whose atoms already refute
the ∀∀ matrix on its own element cannot be realized and is left out of P.

With a SAT solver at hand the bound goes further. A witness closure (see
`app.encoder.closure`) grows from the constants: when it becomes
unsatisfiable the sentence has no model at all, and when every element it
uses has its witnesses it is a model. Otherwise P is counted by enumerating
the projections of the closure CNF onto the atoms of one extra element. F_i
atoms stay out of the types: setting F_i := β_i in any model keeps it a
model, and then they are fixed by the other atoms.
"""

import itertools
import logging
from functools import lru_cache

from app.errors import ResourceLimitError, SortError, InternalCheckError
from app.logic.models import DOM, Const, Atom, Eq, Vocabulary
from app.logic.services import evaluate, enumerate_structures
from app.encoder.closure import encode_closure, closure_structure, initial_terms, SEED, POINT
from app.encoder.models import Term
from app.normalizer.services import skolem_expansion
from app.bounds.models import (
    OneType, BoundReport, ClosureOutcome, X, ENUMERATED, COUNTED, CLOSED_FORM, REFUTED, MODEL, OPEN,
)

logger = logging.getLogger(__name__)


def type_vocabulary(psi, include_skolem=True):
    """Relations and constants whose atoms make up the 1-types of `psi`."""
    skolem = set(psi.skolem_relations)
    relations = {name: sorts for name, sorts in psi.vocabulary.relations.items()
                 if include_skolem or name not in skolem}
    if include_skolem:
        relations.update({name: (DOM, DOM) for name in skolem})
    constants = {c.name: DOM for c in psi.constants}
    constants.update({name: sort for name, sort in psi.vocabulary.constants.items() if not sort.is_bounded})
    return Vocabulary(relations, constants)


def _check_vocabulary(vocabulary):
    for name, sorts in vocabulary.relations.items():
        if len(sorts) > 2 or any(s.is_bounded for s in sorts):
            raise SortError(f"relation '{name}' is not an unbounded relation of arity <= 2")


def type_atoms(vocabulary):
    """Every atom over x and the constants, in a fixed order."""
    terms = [X] + [Const(name, DOM) for name in sorted(vocabulary.constants)]
    atoms = []
    for name, sorts in sorted(vocabulary.relations.items()):
        for args in itertools.product(terms, repeat=len(sorts)):
            atoms.append(Atom(name, args))
    for left, right in itertools.combinations(terms, 2):
        atoms.append(Eq(left, right))
    return atoms


def _set_partitions(items):
    """All partitions of `items` into non-empty blocks."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in _set_partitions(rest):
        for i in range(len(partition)):
            yield partition[:i] + [[first] + partition[i]] + partition[i + 1:]
        yield [[first]] + partition


def enumerate_one_types(vocabulary, atom_limit=None):
    """
    Yields every 1-type of `vocabulary` exactly once.

    Each type is read off a structure whose elements are the classes of an
    equivalence over x and the constants, so equalities are congruent by
    construction.

    Args:
        vocabulary (Vocabulary): Unbounded relations of arity <= 2 and constants.
        atom_limit (int, optional): Refuse when there are more atoms than this.

    Raises:
        ResourceLimitError: With the closed-form type count as `count`.
    """
    _check_vocabulary(vocabulary)
    atoms = type_atoms(vocabulary)
    if atom_limit is not None and len(atoms) > atom_limit:
        total, _ = count_one_types(vocabulary)
        raise ResourceLimitError(f"{len(atoms)} atoms exceed the 1-type limit of {atom_limit}", count=total)
    relations_only = vocabulary.restrict(constants=())
    for partition in _set_partitions(['x'] + sorted(vocabulary.constants)):
        # Blocks are reordered so that x's block becomes element 1.
        partition.sort(key=lambda block: 'x' not in block)
        element = {term: index for index, block in enumerate(partition, start=1) for term in block}
        constants = {name: element[name] for name in vocabulary.constants}
        for facts in enumerate_structures(relations_only, len(partition)):
            structure = facts.reduct(vocabulary).with_constants(constants)
            literals = frozenset((atom, evaluate(structure, atom, {'x': 1})) for atom in atoms)
            yield OneType(vocabulary, literals)


@lru_cache(maxsize=None)
def _stirling2(n, k):
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * _stirling2(n - 1, k) + _stirling2(n - 1, k - 1)


def count_one_types(vocabulary):
    """
    Closed-form (total, non-constant) 1-type counts, without pruning.

    A partition of x and the constants into j classes leaves u·j unary and
    b·j² binary facts free.
    """
    unary = sum(1 for sorts in vocabulary.relations.values() if len(sorts) == 1)
    binary = sum(1 for sorts in vocabulary.relations.values() if len(sorts) == 2)
    k = len(vocabulary.constants)

    def facts(j):
        return 2 ** (unary * j + binary * j * j)

    total = sum(_stirling2(k + 1, j) * facts(j) for j in range(1, k + 2))
    nonconstant = sum(_stirling2(k, j) * facts(j + 1) for j in range(0, k + 1))
    return total, nonconstant


def is_feasible(one_type, alpha):
    """
    Whether `one_type` can be realized in a model of ∀x∀y α.

    The element realizing the type must satisfy α(x,x); every atom of α(x,x)
    is decided by the type, so α is evaluated on the type's induced structure.
    """
    structure = one_type.induced_structure()
    if structure is None:
        return False
    return evaluate(structure, alpha, {'x': 1, 'y': 1})


def _missing_witnesses(psi, structure, placement):
    """New F_i(t) terms for the elements of `structure` with no β_i-partner inside it."""
    first = {}
    for term, element in placement.items():
        first.setdefault(element, term)
    missing = []
    for element in structure.carrier(DOM):
        for name in psi.skolem_relations:
            if not any(row[0] == element for row in structure.relations[name]):
                missing.append(Term(name, first[element]))
    return missing


def refine_closure(psi, solve, term_limit=32):
    """
    Grows a witness closure until it refutes `psi` or closes into a model.

    Each round solves the closure CNF of the current terms. Unsatisfiable
    means `psi` has no model. Otherwise the occupied elements satisfy the ∀∀
    matrix. Reading F_i as β_i on them, they form a model when every element
    has its F_i-successors among them; when not, the missing witnesses join
    the terms.

    Args:
        psi (SsnfSentence): The sentence, constants included.
        solve (callable): CnfInstance -> SatResult.
        term_limit (int): Stop with 'open' rather than grow past this many terms.

    Returns:
        ClosureOutcome: 'refuted', 'model' or 'open'.
    """
    terms = initial_terms(psi)
    rounds = 0
    while True:
        rounds += 1
        cnf = encode_closure(psi, terms)
        outcome = solve(cnf)
        if not outcome.is_sat:
            logger.info(f"witness closure of {len(terms)} terms is unsatisfiable")
            return ClosureOutcome(REFUTED, tuple(terms), rounds=rounds)
        structure, placement = closure_structure(psi, cnf, terms, outcome.assignment)
        structure = skolem_expansion(psi, structure)
        missing = _missing_witnesses(psi, structure, placement)
        if not missing:
            if not evaluate(structure, psi.to_formula()):
                raise InternalCheckError("a closed witness closure does not satisfy the sentence")
            logger.info(f"witness closure closed into a model with {structure.size} elements")
            return ClosureOutcome(MODEL, tuple(terms), structure, rounds)
        room = term_limit - len(terms)
        if room <= 0:
            logger.info(f"witness closure stopped at {len(terms)} terms")
            return ClosureOutcome(OPEN, tuple(terms), rounds=rounds)
        terms.extend(missing[:room])


def count_feasible_types(psi, solve, terms=None, limit=64):
    """
    Number of non-constant 1-types a model of `psi` can realize, by SAT.

    One more element, distinct from every constant, joins the closure
    `terms`; the projections of the CNF onto its atoms are enumerated with
    blocking clauses. All types realized in one model agree on the atoms
    over constants only, so counting the projections counts at least the
    types of any single model.

    Returns:
        int or None: The count, or None when it exceeds `limit`.
    """
    terms = list(terms) if terms is not None else initial_terms(psi)
    constants = [t for t in terms if t.parent is None and t != SEED]
    cnf = encode_closure(psi, terms + [POINT], distinct=[(POINT, c) for c in constants], point=POINT)
    count = 0
    while True:
        outcome = solve(cnf)
        if not outcome.is_sat:
            return count
        count += 1
        if count > limit:
            return None
        if not cnf.block(outcome.assignment):
            return count


def compute_bound(psi, prune=True, atom_limit=14, include_skolem=True, solve=None, terms=None, type_limit=64):
    """
    Cardinality bound of an SSNF sentence.

    Args:
        psi (SsnfSentence): The sentence, constants included.
        prune (bool): Leave infeasible types out of the count.
        atom_limit (int): Above this many type atoms the types are counted by
            SAT when `solve` is given, or else taken from the closed form.
        include_skolem (bool): Count F_i atoms in enumerated 1-types.
        solve (callable, optional): CnfInstance -> SatResult. When given,
            F_i atoms are left out of the types.
        terms (list, optional): Witness closure terms for the SAT count.
        type_limit (int): Above this many types the SAT count gives up and
            the closed form is used.

    Returns:
        BoundReport: The bound and the counts behind it.
    """
    if solve is not None:
        include_skolem = False
    vocabulary = type_vocabulary(psi, include_skolem)
    m, k = psi.m, len(vocabulary.constants)
    method = ENUMERATED
    _check_vocabulary(vocabulary)
    if solve is not None and len(type_atoms(vocabulary)) > atom_limit:
        total, unpruned = count_one_types(vocabulary)
        counted = count_feasible_types(psi, solve, terms, type_limit) if prune else None
        if counted is not None:
            nonconstant, infeasible, exact, method = counted, unpruned - counted, True, COUNTED
        else:
            if prune:
                logger.warning(f"more than {type_limit} feasible 1-types; using the unpruned count")
            nonconstant, infeasible, exact, method = unpruned, 0, False, CLOSED_FORM
    else:
        try:
            total = infeasible = nonconstant = 0
            for one_type in enumerate_one_types(vocabulary, atom_limit):
                total += 1
                if prune and not is_feasible(one_type, psi.alpha):
                    infeasible += 1
                elif not one_type.is_constant:
                    nonconstant += 1
            exact = True
        except ResourceLimitError as exc:
            logger.warning(f"1-type enumeration skipped ({exc}); using the unpruned count")
            total, nonconstant = count_one_types(vocabulary)
            infeasible, exact, method = 0, False, CLOSED_FORM

    bnd = max(1, k * (m + 1) + 3 * max(m, 1) * nonconstant)
    logger.debug(f"bound: m={m}, constants={k}, types={total}, infeasible={infeasible}, bnd={bnd} ({method})")
    return BoundReport(m, k, total, infeasible, nonconstant, bnd, exact, method, len(terms or ()))


def closure_report(psi, closure):
    """BoundReport for a closure that refuted `psi` (bnd 0) or found a model (bnd = its size)."""
    vocabulary = type_vocabulary(psi, include_skolem=False)
    total, unpruned = count_one_types(vocabulary)
    if closure.status == REFUTED:
        return BoundReport(psi.m, len(vocabulary.constants), total, unpruned, 0, 0, True, REFUTED,
                           len(closure.terms))
    return BoundReport(psi.m, len(vocabulary.constants), total, 0, unpruned, closure.structure.size, True, MODEL,
                       len(closure.terms))


def solver_bound(psi, solve, prune=True, atom_limit=14, term_limit=32, type_limit=64):
    """
    The bound of `psi` with a SAT solver: a witness closure first, then a type count.

    Returns:
        tuple: (BoundReport, ClosureOutcome).
    """
    closure = refine_closure(psi, solve, term_limit)
    if closure.status != OPEN:
        return closure_report(psi, closure), closure
    report = compute_bound(psi, prune=prune, atom_limit=atom_limit, solve=solve, terms=list(closure.terms),
                           type_limit=type_limit)
    return report, closure


__all__ = ['enumerate_one_types', 'count_one_types', 'is_feasible', 'compute_bound', 'type_atoms',
           'type_vocabulary', 'refine_closure', 'count_feasible_types', 'closure_report', 'solver_bound']
