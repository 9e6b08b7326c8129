"""
Ground encodings of an SSNF sentence over a finite set of witness terms.

A term is a constant of ψ, the seed '*' of a constant-free ψ, or F_i(t), the
F_i-witness of a term t. Any model of ψ gives every finite set of terms a
value, and those values satisfy the ∀∀ matrix pairwise and F_i(t, F_i(t))
for every witness term. The CNF of `encode_closure` says exactly this much,
so it is unsatisfiable only when ψ is.

Terms are placed on the elements 1..n (n the number of terms) by one-hot
selector variables; the term at position j only uses the elements 1..j+1,
which renumbering elements by first use always achieves. The matrix is
asserted on every pair of elements that some term occupies.
"""

import itertools
import logging

from app.errors import EncodingError
from app.logic.models import Structure
from app.logic.services import simplify
from app.encoder.models import VarMap, CnfInstance, Term, EQUALITY
from app.encoder.services import MatrixCompiler, gadget

logger = logging.getLogger(__name__)

SEED = Term('*')
POINT = Term('@x')


def closure_constants(psi):
    """Names of the unbounded constants of `psi`, sorted."""
    names = {c.name for c in psi.constants if not c.sort.is_bounded}
    names.update(name for name, sort in psi.vocabulary.constants.items() if not sort.is_bounded)
    return sorted(names)


def initial_terms(psi):
    """The constants of `psi` as terms, or the seed when it has none."""
    names = closure_constants(psi)
    return [Term(name) for name in names] if names else [SEED]


class _ClosureEncoder:

    def __init__(self, psi, terms):
        self.psi = psi
        self.terms = list(terms)
        self.position = {term: j for j, term in enumerate(self.terms)}
        if len(self.position) != len(self.terms):
            raise EncodingError("closure terms must be distinct")
        self.constant_terms = {name: Term(name) for name in closure_constants(psi)}
        missing = [name for name, term in self.constant_terms.items() if term not in self.position]
        if missing:
            raise EncodingError(f"closure terms miss the constants {', '.join(missing)}")
        self.n = len(self.terms)
        self.varmap = VarMap(self.n)
        self.clauses = {tag: [] for tag in ('eq', 'select', 'forall-exists', 'tseitin', 'assert')}

    def choices(self, term):
        return range(1, self.position[term] + 2)

    def select(self, term, element):
        return self.varmap.var(('s', self.position[term], element))

    def used(self, element):
        return self.varmap.var(('w', element))

    def atom(self, rel, args):
        """Literal of rel(args), where each argument is an element or a Term."""
        if all(isinstance(a, int) for a in args):
            return self.varmap.relation(rel, *args)
        key = ('t', rel, args)
        found = self.varmap.ids.get(key)
        if found is not None:
            return found
        lit = self.varmap.var(key)
        slots = [(i, a) for i, a in enumerate(args) if isinstance(a, Term)]
        for placement in itertools.product(*(self.choices(term) for _, term in slots)):
            row, guard = list(args), []
            for (i, term), element in zip(slots, placement):
                row[i] = element
                guard.append(-self.select(term, element))
            fact = self.varmap.relation(rel, *row)
            self.clauses['select'].append(guard + [-lit, fact])
            self.clauses['select'].append(guard + [lit, -fact])
        return lit

    def fix_equality(self):
        elements = range(1, self.n + 1)
        for l1, l2 in itertools.product(elements, repeat=2):
            var = self.varmap.equality(l1, l2)
            self.clauses['eq'].append([var if l1 == l2 else -var])

    def place_terms(self):
        out = self.clauses['select']
        for term in self.terms:
            options = [self.select(term, e) for e in self.choices(term)]
            out.append(options)
            out.extend([-a, -b] for a, b in itertools.combinations(options, 2))
        for element in range(1, self.n + 1):
            users = [self.select(t, element) for t in self.terms if element in self.choices(t)]
            out.append([-self.used(element)] + users)
            out.extend([self.used(element), -s] for s in users)

    def witnesses(self):
        skolem = set(self.psi.skolem_relations)
        for term in self.terms:
            if term.parent is None:
                continue
            if term.symbol not in skolem or term.parent not in self.position:
                raise EncodingError(f"'{term}' is not a witness of another closure term")
            self.clauses['forall-exists'].append([self.atom(term.symbol, (term.parent, term))])

    def separate(self, pairs):
        for a, b in pairs:
            self.clauses['forall-exists'].append([-self.atom(EQUALITY, (a, b))])

    def matrix(self):
        compiler = MatrixCompiler()
        root = compiler.visit(simplify(self.psi.matrix))
        # Variables each node depends on; Tseitin variables are shared across the others.
        scope = []
        for kind, data in compiler.nodes:
            if kind == 'atom':
                scope.append(frozenset(name for name in data[1] if name in ('x', 'y')))
            elif kind == 'not':
                scope.append(scope[data])
            elif data is None:
                scope.append(frozenset())
            else:
                scope.append(frozenset().union(*(scope[c] for c in data)))

        elements = range(1, self.n + 1)
        for l1, l2 in itertools.product(elements, repeat=2):
            position = {'x': l1, 'y': l2}
            lits = [0] * len(compiler.nodes)
            for i, (kind, data) in enumerate(compiler.nodes):
                if kind == 'atom':
                    rel, names = data
                    lits[i] = self.atom(rel, tuple(self._argument(name, position) for name in names))
                elif kind == 'not':
                    lits[i] = -lits[data]
                else:
                    key = ('u', i, l1 if 'x' in scope[i] else 0, l2 if 'y' in scope[i] else 0)
                    fresh = key not in self.varmap.ids
                    lits[i] = self.varmap.var(key)
                    if fresh:
                        children = tuple(lits[c] for c in data) if data is not None else ()
                        gadget(kind, lits[i], children, self.clauses['tseitin'])
            self.clauses['assert'].append([-self.used(l1), -self.used(l2), lits[root]])

    def _argument(self, name, position):
        if name in position:
            return position[name]
        term = self.constant_terms.get(name)
        if term is None:
            raise EncodingError(f"unknown symbol '{name}' in the matrix")
        return term

    def projection(self, point):
        """Atoms over `point` and the constants that mention `point`, F_i excluded."""
        skolem = set(self.psi.skolem_relations)
        terms = [point] + list(self.constant_terms.values())
        lits = []
        for name, sorts in sorted(self.psi.vocabulary.relations.items()):
            if name in skolem:
                continue
            for args in itertools.product(terms, repeat=len(sorts)):
                if point in args:
                    lits.append(self.atom(name, args))
        return lits

    def build(self, projection=()):
        order = ('eq', 'select', 'forall-exists', 'tseitin', 'assert')
        clauses = [clause for tag in order for clause in self.clauses[tag]]
        groups = [(tag, len(self.clauses[tag])) for tag in order]
        return CnfInstance(self.varmap.num_vars, clauses, self.varmap, groups, list(projection))


def encode_closure(psi, terms, distinct=(), point=None):
    """
    CNF satisfiable whenever `psi` has a model, over a set of witness terms.

    Args:
        psi (SsnfSentence): An SSNF sentence; constants are allowed.
        terms (list): Closure terms; every constant of `psi` must be among them.
        distinct (iterable): Pairs of terms whose values must differ.
        point (Term, optional): A term whose atoms with the constants become
            the projection of the result.

    Returns:
        CnfInstance: Clauses grouped 'eq', 'select', 'forall-exists', 'tseitin'
        and 'assert'.

    Raises:
        EncodingError: On a missing constant, a dangling witness term, or
            symbols outside the vocabulary.
    """
    if not terms:
        raise EncodingError("a witness closure needs at least one term")
    for name, sorts in psi.vocabulary.relations.items():
        if len(sorts) > 2 or any(s.is_bounded for s in sorts):
            raise EncodingError(f"relation '{name}' is not an unbounded relation of arity <= 2")
    encoder = _ClosureEncoder(psi, terms)
    encoder.fix_equality()
    encoder.place_terms()
    encoder.witnesses()
    encoder.separate(distinct)
    projection = encoder.projection(point) if point is not None else ()
    encoder.matrix()
    cnf = encoder.build(projection)
    logger.debug(f"closure of {len(terms)} terms: {cnf.num_vars} variables, {cnf.num_clauses} clauses")
    return cnf


def closure_structure(psi, cnf, terms, assignment):
    """
    The elements occupied by terms, read off a satisfying assignment.

    Returns:
        tuple: (Structure over `psi.vocabulary` with the constants placed,
        dict term -> element of that structure).
    """
    placement = {}
    for j, term in enumerate(terms):
        for element in range(1, j + 2):
            var = cnf.varmap.ids.get(('s', j, element))
            if var is not None and assignment.get(var, False):
                placement[term] = element
    relations = {name: set() for name in psi.vocabulary.relations}
    for var, rel, row in cnf.varmap.relation_vars():
        if rel in relations and assignment.get(var, False):
            relations[rel].add(row)
    constants = {name: placement[Term(name)] for name in closure_constants(psi)}
    full = Structure.build(psi.vocabulary, cnf.varmap.n, relations=relations, constants=constants)
    occupied = sorted(set(placement.values()))
    renumber = {old: new for new, old in enumerate(occupied, start=1)}
    return full.restrict(occupied), {term: renumber[e] for term, e in placement.items()}


__all__ = ['encode_closure', 'closure_structure', 'initial_terms', 'closure_constants', 'SEED', 'POINT']
