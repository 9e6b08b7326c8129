"""
Propositional encoding of SSNF sentences over a universe of fixed size.

For a constant-free SSNF sentence ψ and size n the CNF has one variable per
relation tuple over {1..n} (the equality relation included) and is
satisfiable exactly when ψ has a model with n elements:

- the equality clauses fix '=' to the identity,
- every ∀x∃y F_i(x,y) yields one clause per element,
- the ∀∀ matrix is Tseitin-encoded for every pair of elements.

`relativize_uni` guards a sentence by a fresh unary relation so that a model
of size n encodes a model of any size up to n.
"""

import itertools
import logging
from dataclasses import replace

from app.errors import EncodingError, LoweringError
from app.logic.models import (
    DOM, TrueF, FalseF, Atom, Eq, Not, And, Or, Implies, Iff, QUANTIFIERS, Structure,
    conj, implies,
)
from app.logic.services import check_fo2, simplify
from app.encoder.models import VarMap, CnfInstance, EQUALITY
from app.normalizer.models import X, Y
from app.utils.helpers import fresh_name

logger = logging.getLogger(__name__)


def _fresh_relation(stem, vocabulary):
    return fresh_name(stem, set(vocabulary.relations) | set(vocabulary.constants))


def relativize_uni(psi):
    """
    Relativizes an SSNF sentence to a fresh unary relation Uni.

    The ∀∀ matrix only has to hold on Uni, and every ∀∃ part only for x in
    Uni, with a witness y in Uni. An extra part ∀x∃y Uni(y) keeps Uni
    non-empty. A structure satisfies the result iff its Uni-substructure
    satisfies `psi`.

    Returns:
        SsnfSentence: With m+1 ∀∃ parts and `universe_relation` set.
    """
    uni = _fresh_relation('Uni', psi.vocabulary)
    at_x, at_y = Atom(uni, (X,)), Atom(uni, (Y,))
    alpha = implies(conj(at_x, at_y), psi.alpha)
    parts = [(name, implies(at_x, conj(at_y, beta))) for name, beta in psi.exist_parts]
    vocabulary = psi.vocabulary.with_relations({uni: (DOM,)})
    extra = _fresh_relation(f"F_{len(parts) + 1}", vocabulary)
    parts.append((extra, at_y))
    vocabulary = vocabulary.with_relations({extra: (DOM, DOM)})
    return replace(psi, alpha=alpha, exist_parts=tuple(parts), vocabulary=vocabulary, universe_relation=uni)


class MatrixCompiler:
    """
    Flattens a quantifier-free formula into shared nodes in post-order.

    Structurally equal subformulas become one node, so they share one
    Tseitin variable per pair of elements.
    """

    def __init__(self):
        self.index = {}
        self.nodes = []

    def visit(self, f):
        found = self.index.get(f)
        if found is not None:
            return found
        if isinstance(f, Atom):
            node = ('atom', (f.rel, tuple(t.name for t in f.args)))
        elif isinstance(f, Eq):
            node = ('atom', (EQUALITY, (f.left.name, f.right.name)))
        elif isinstance(f, Not):
            node = ('not', self.visit(f.arg))
        elif isinstance(f, And):
            node = ('and', tuple(self.visit(a) for a in f.args))
        elif isinstance(f, Or):
            node = ('or', tuple(self.visit(a) for a in f.args))
        elif isinstance(f, Implies):
            node = ('implies', (self.visit(f.left), self.visit(f.right)))
        elif isinstance(f, Iff):
            node = ('iff', (self.visit(f.left), self.visit(f.right)))
        elif isinstance(f, TrueF):
            node = ('true', None)
        elif isinstance(f, FalseF):
            node = ('false', None)
        elif isinstance(f, QUANTIFIERS):
            raise EncodingError("the ∀∀ matrix must be quantifier-free")
        else:
            raise EncodingError(f"not a formula: {f!r}")
        self.nodes.append(node)
        self.index[f] = len(self.nodes) - 1
        return self.index[f]


def gadget(kind, u, children, clauses):
    """Clauses making `u` equivalent to the connective over the child literals."""
    if kind == 'implies':
        kind, children = 'or', (-children[0], children[1])
    if kind == 'and':
        clauses.extend([-u, c] for c in children)
        clauses.append([u] + [-c for c in children])
    elif kind == 'or':
        clauses.append([-u] + list(children))
        clauses.extend([u, -c] for c in children)
    elif kind == 'iff':
        a, b = children
        clauses.extend([[-u, -a, b], [-u, a, -b], [u, a, b], [u, -a, -b]])
    elif kind == 'true':
        clauses.append([u])
    elif kind == 'false':
        clauses.append([-u])


def _check_encodable(psi):
    try:
        check_fo2(psi.matrix, allow_constants=False)
    except LoweringError as exc:
        raise EncodingError(str(exc)) from exc
    for name, sorts in psi.vocabulary.relations.items():
        if len(sorts) > 2 or any(s.is_bounded for s in sorts):
            raise EncodingError(f"relation '{name}' is not an unbounded relation of arity <= 2")
    if psi.vocabulary.constants:
        raise EncodingError(f"constants must be eliminated first: {', '.join(sorted(psi.vocabulary.constants))}")


def encode(psi, n):
    """
    CNF whose models are the size-n models of `psi`.

    Args:
        psi (SsnfSentence): A constant-free sentence.
        n (int): Universe size, at least 1.

    Returns:
        CnfInstance: Equality, ∀∃, Tseitin and assertion clauses in that order.

    Raises:
        EncodingError: On n < 1, constants, or symbols outside FO².
    """
    if n < 1:
        raise EncodingError(f"universe size must be at least 1, got {n}")
    _check_encodable(psi)
    varmap = VarMap(n)
    elements = range(1, n + 1)
    relations = sorted(psi.vocabulary.relations.items())

    for l1, l2 in itertools.product(elements, repeat=2):
        varmap.equality(l1, l2)
    for name, sorts in relations:
        for row in itertools.product(elements, repeat=len(sorts)):
            varmap.relation(name, *row)

    eq_clauses = [[varmap.equality(l1, l2) if l1 == l2 else -varmap.equality(l1, l2)]
                  for l1, l2 in itertools.product(elements, repeat=2)]
    exists_clauses = [[varmap.relation(name, l1, l2) for l2 in elements]
                      for name, _ in psi.exist_parts for l1 in elements]

    matrix = simplify(psi.matrix)
    compiler = MatrixCompiler()
    root = compiler.visit(matrix)
    tseitin, asserts = [], []
    for l1, l2 in itertools.product(elements, repeat=2):
        position = {'x': l1, 'y': l2}
        lits = [0] * len(compiler.nodes)
        for i, (kind, data) in enumerate(compiler.nodes):
            if kind == 'atom':
                rel, names = data
                lits[i] = varmap.relation(rel, *(position[name] for name in names))
            elif kind == 'not':
                lits[i] = -lits[data]
            else:
                lits[i] = varmap.sub(i, l1, l2)
                children = tuple(lits[c] for c in data) if data is not None else ()
                gadget(kind, lits[i], children, tseitin)
        asserts.append([lits[root]])

    clauses = eq_clauses + exists_clauses + tseitin + asserts
    groups = [('eq', len(eq_clauses)), ('forall-exists', len(exists_clauses)),
              ('tseitin', len(tseitin)), ('assert', len(asserts))]
    logger.debug(f"encoded size {n}: {varmap.num_vars} variables, {len(clauses)} clauses")
    return CnfInstance(varmap.num_vars, clauses, varmap, groups)


def assignment_to_structure(psi, cnf, assignment):
    """
    The size-n structure A_S read off a satisfying assignment.

    Args:
        psi (SsnfSentence): The encoded sentence.
        cnf (CnfInstance): Its encoding.
        assignment (dict): variable id -> bool.

    Returns:
        Structure: Interprets every relation of `psi.vocabulary`.
    """
    relations = {name: set() for name in psi.vocabulary.relations}
    for var, rel, row in cnf.varmap.relation_vars():
        if rel in relations and assignment.get(var, False):
            relations[rel].add(row)
    return Structure.build(psi.vocabulary, cnf.varmap.n, relations=relations)


__all__ = ['relativize_uni', 'encode', 'assignment_to_structure']
