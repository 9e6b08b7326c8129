import pytest

from app.errors import EncodingError
from app.encoder.closure import encode_closure, closure_structure, initial_terms, POINT
from app.encoder.dimacs import to_dimacs, parse_dimacs
from app.encoder.models import Term
from app.encoder.services import encode, relativize_uni, assignment_to_structure
from app.encoder.smtlib import to_smtlib, symbol
from app.frontend.parser import parse_schema, parse_formula
from app.logic.models import Var, Const, Atom, Eq, conj, neg, implies, forall, exists
from app.logic.services import evaluate
from app.normalizer.services import to_ssnf, ssnf_model_sizes
from app.solver.services import sat

X, Y = Var('x'), Var('y')
P = lambda t: Atom('P', (t,))
R = lambda a, b: Atom('R', (a, b))

SENTENCES = {
    'two-elements': exists(X, exists(Y, neg(Eq(X, Y)))),
    'contradiction': conj(exists(X, P(X)), forall(X, neg(P(X)))),
    'successor': conj(forall(X, exists(Y, conj(R(X, Y), neg(Eq(X, Y))))),
                      forall(X, forall(Y, implies(R(X, Y), P(Y))))),
    'unique-p': conj(exists(X, P(X)), forall(X, forall(Y, implies(conj(P(X), P(Y)), Eq(X, Y)))),
                     exists(X, neg(P(X)))),
}


def _psi(name):
    return to_ssnf(SENTENCES[name], introduce_constants=False)


# --- Satisfiability ---

@pytest.mark.parametrize('name', sorted(SENTENCES))
def test_encoding_is_satisfiable_at_model_sizes(name):
    """The size-n CNF is satisfiable exactly when the sentence has an n-element model."""
    psi = _psi(name)
    sizes = ssnf_model_sizes(psi, 3)
    for n in (1, 2, 3):
        assert sat(encode(psi, n)).is_sat == (n in sizes)


def test_relativized_encoding_covers_smaller_models():
    psi = _psi('two-elements')
    relativized = relativize_uni(psi)
    assert relativized.universe_relation == 'Uni'
    assert relativized.m == psi.m + 1
    assert not sat(encode(relativized, 1)).is_sat
    assert sat(encode(relativized, 3)).is_sat
    # exactly one P and exactly one non-P: only 2-element models
    exactly_two = to_ssnf(conj(exists(X, P(X)), exists(X, neg(P(X))),
                               forall(X, forall(Y, implies(conj(P(X), P(Y)), Eq(X, Y)))),
                               forall(X, forall(Y, implies(conj(neg(P(X)), neg(P(Y))), Eq(X, Y))))),
                          introduce_constants=False)
    assert not sat(encode(exactly_two, 3)).is_sat
    assert sat(encode(relativize_uni(exactly_two), 3)).is_sat


def test_uni_name_avoids_existing_relation():
    psi = to_ssnf(forall(X, Atom('Uni', (X,))), introduce_constants=False)
    assert relativize_uni(psi).universe_relation == 'Uni_2'


def test_model_read_from_assignment_satisfies_sentence():
    psi = _psi('successor')
    cnf = encode(psi, 2)
    result = sat(cnf)
    assert result.is_sat
    structure = assignment_to_structure(psi, cnf, result.assignment)
    assert structure.size == 2
    assert evaluate(structure, psi.to_formula())
    assert evaluate(structure, SENTENCES['successor'])


def test_clause_groups():
    psi = _psi('successor')
    n = 3
    cnf = encode(psi, n)
    sizes = cnf.group_sizes()
    assert sizes['eq'] == n * n
    assert sizes['forall-exists'] == psi.m * n
    assert sizes['assert'] == n * n
    assert sum(sizes.values()) == cnf.num_clauses
    assert all(len(clause) == n for clause in cnf.clauses_tagged('forall-exists'))


# --- Errors ---

def test_encode_rejects_bad_input():
    psi = _psi('successor')
    with pytest.raises(EncodingError, match="at least 1"):
        encode(psi, 0)
    with_constant = to_ssnf(P(Const('c')))
    with pytest.raises(EncodingError):
        encode(with_constant, 2)


# --- Witness closures ---

def _with_constants(name):
    return to_ssnf(SENTENCES[name])


def test_closure_places_constants_on_distinct_elements():
    psi = _with_constants('unique-p')
    terms = initial_terms(psi)
    assert [str(t) for t in terms] == ['c_1', 'c_2']
    cnf = encode_closure(psi, terms)
    result = sat(cnf)
    assert result.is_sat
    structure, placement = closure_structure(psi, cnf, terms, result.assignment)
    assert structure.size == 2
    assert placement[terms[0]] != placement[terms[1]]
    assert structure.relations['P'] == frozenset({(structure.constants['c_1'],)})


def test_closure_of_contradiction_is_unsatisfiable():
    psi = _with_constants('contradiction')
    assert not sat(encode_closure(psi, initial_terms(psi))).is_sat


def test_closure_without_constants_starts_from_seed():
    psi = _psi('successor')
    seed = initial_terms(psi)
    assert [str(t) for t in seed] == ['*']
    terms = seed + [Term(psi.skolem_relations[0], seed[0])]
    cnf = encode_closure(psi, terms)
    result = sat(cnf)
    assert result.is_sat
    structure, placement = closure_structure(psi, cnf, terms, result.assignment)
    assert placement[terms[0]] != placement[terms[1]]
    assert (placement[terms[0]], placement[terms[1]]) in structure.relations['R']


def test_closure_projection_covers_atoms_of_point():
    c = Term('c')
    psi = to_ssnf(conj(P(Const('c')), forall(X, forall(Y, implies(P(Y), R(X, Y))))))
    cnf = encode_closure(psi, [c, POINT], distinct=[(POINT, c)], point=POINT)
    assert len(cnf.projection) == 4
    assert cnf.group_sizes()['forall-exists'] == 1
    result = sat(cnf)
    assert cnf.block(result.assignment)
    assert cnf.groups[-1] == ('block', 1)


def test_closure_rejects_bad_terms():
    psi = _with_constants('unique-p')
    with pytest.raises(EncodingError, match="miss the constants"):
        encode_closure(psi, [Term('c_1')])
    with pytest.raises(EncodingError, match="not a witness"):
        encode_closure(psi, initial_terms(psi) + [Term('F_9', Term('c_1'))])
    with pytest.raises(EncodingError, match="at least one term"):
        encode_closure(psi, [])


# --- DIMACS ---

def test_dimacs_keeps_variable_map_and_groups():
    cnf = encode(_psi('successor'), 2)
    text = to_dimacs(cnf)
    assert text.startswith('c universe 2\n')
    assert f"p cnf {cnf.num_vars} {cnf.num_clauses}" in text
    parsed = parse_dimacs(text)
    assert parsed.clauses == cnf.clauses
    assert parsed.groups == cnf.groups
    assert parsed.varmap.relation_vars() == cnf.varmap.relation_vars()
    assert parsed.varmap.n == 2


def test_parse_dimacs_without_comments():
    parsed = parse_dimacs("p cnf 3 2\n1 -2 0\n2 3\n")
    assert parsed.clauses == [[1, -2], [2, 3]]
    assert parsed.varmap.relation_vars() == []
    assert sat(parsed).is_sat


@pytest.mark.parametrize('text, message', [
    ("1 2 0\n", "before"),
    ("c only comments\n", "missing"),
    ("p cnf 2 2\n1 2 0\n", "announces"),
    ("p cnf 2 1\n1 3 0\n", "exceeds"),
    ("p dnf 2 1\n1 0\n", "malformed"),
])
def test_parse_dimacs_errors(text, message):
    with pytest.raises(EncodingError, match=message):
        parse_dimacs(text)


# --- SMT-LIB ---

def test_smtlib_declares_every_symbol():
    schema = parse_schema("domain flag = {on, off};\ntable R(a: dom, f: flag);\nconst k: dom;")
    f = parse_formula("exists x. R(x, on) & x != k", schema)
    script = to_smtlib(f, schema.vocabulary())
    assert '(declare-sort Dom 0)' in script
    assert '(declare-datatypes ((flag 0)) (((on) (off))))' in script
    assert '(declare-fun R (Dom flag) Bool)' in script
    assert '(declare-const k Dom)' in script
    assert script.rstrip().endswith('(check-sat)')
    assert symbol('R__on') == 'R__on'
    assert symbol('a b') == '|a b|'
