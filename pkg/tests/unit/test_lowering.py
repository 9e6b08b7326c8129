import pytest

from app.errors import LoweringError
from app.frontend.parser import parse_schema, parse_formula
from app.logic.models import DOM, Var, Atom, Const, Vocabulary, conj, implies, forall, exists, neg
from app.logic.services import (
    evaluate, enumerate_structures, model_sizes, free_variables, subformulas, vocabulary_of, constants_of,
    check_fo2,
)
from app.lowering.services import (
    to_two_vars, expand_bounded, eliminate_constants, decode_structure, lower, normalize_attribute_order,
    witness_outer_existentials,
)
from app.wp.services import wp_program

Z, W = Var('z'), Var('w')
VOC = Vocabulary({'P': (DOM,), 'R': (DOM, DOM)})

FLAGGED = """
domain flag = {on, off};
table R(a: dom, f: flag);
table E(a: dom, b: dom);
table G(f: flag);
const mode: flag;
const root: dom;
"""


def _variable_names(f):
    names = set()
    for node in subformulas(f):
        if hasattr(node, 'var'):
            names.add(node.var.name)
    return names


def _models_agree(original, lowered, vocabulary, max_n=2):
    """The lowered sentence has a model of each size exactly when the original has."""
    return model_sizes(original, vocabulary, max_n) == model_sizes(lowered, vocabulary_of(lowered), max_n)


# --- Two variables ---

def test_to_two_vars_renames_scopes():
    f = exists(Z, conj(Atom('P', (Z,)), forall(W, implies(Atom('R', (Z, W)), exists(Z, Atom('R', (W, Z)))))))
    g = to_two_vars(f)
    assert _variable_names(g) <= {'x', 'y'}
    for n in (1, 2):
        for structure in enumerate_structures(VOC, n):
            assert evaluate(structure, f) == evaluate(structure, g)


def test_to_two_vars_rejects_three_variables():
    x, y = Var('x'), Var('y')
    transitive = forall(x, forall(y, forall(Z, implies(conj(Atom('R', (x, y)), Atom('R', (y, Z))),
                                                        Atom('R', (x, Z))))))
    with pytest.raises(LoweringError):
        to_two_vars(transitive)


def test_to_two_vars_rejects_loose_free_variable():
    with pytest.raises(LoweringError, match="'z'"):
        to_two_vars(Atom('P', (Z,)))


def test_update_witness_of_dom_column_is_renamed(parse):
    """The old value of an updated dom column is quantified next to x and y."""
    program = parse.program("p(k):\n  UPDATE S SET b = k WHERE a != k;")
    post = parse.formula("forall x. forall y. (S(x, y) -> (R(y, on) | x = y))", program)
    wp = wp_program(program, post)
    assert 'w2' in _variable_names(wp)
    renamed = to_two_vars(wp)
    assert _variable_names(renamed) <= {'x', 'y'}
    for n in (1, 2):
        for structure in enumerate_structures(program.schema.vocabulary(), n):
            assert evaluate(structure, wp) == evaluate(structure, renamed)
    lowered, _ = lower(wp, program.schema.vocabulary())
    check_fo2(lowered)


def test_choose_variable_in_nested_post_becomes_constant(parse):
    """
    A CHOOSE target inside nested x/y scopes needs three variables in wp;
    in the negated wp it is an outer existential and lowers to a constant.
    """
    program = parse.program("""
        p(k):
          A = SELECT b FROM S WHERE a = k;
          c = CHOOSE A;
          UPDATE S SET a = c WHERE b = k;
    """)
    post = parse.formula("forall x. (S(c, x) -> exists y. (S(x, y) & R(y, on)))", program)
    wp = wp_program(program, post)
    assert 'u_1' in _variable_names(wp)
    with pytest.raises(LoweringError):
        to_two_vars(wp)

    refutation = neg(wp)
    vocabulary = program.schema.vocabulary()
    lowered, lowering_map = lower(refutation, vocabulary)
    check_fo2(lowered)
    assert _variable_names(lowered) <= {'x', 'y'}
    assert 'u_1' in lowering_map.witnesses.values()
    assert lowering_map.vocabulary == vocabulary_of(refutation, vocabulary)
    assert _models_agree(refutation, lowered, vocabulary)
    found = 0
    for n in (1, 2):
        for structure in enumerate_structures(vocabulary_of(lowered), n):
            if evaluate(structure, lowered):
                assert evaluate(decode_structure(structure, lowering_map), refutation)
                found += 1
    assert found > 0


def test_witness_outer_existentials_leaves_universal_scopes():
    x, y = Var('x'), Var('y')
    f = conj(exists(x, forall(y, Atom('R', (x, y)))),
             neg(forall(Z, Atom('P', (Z,)))),
             forall(x, exists(y, Atom('R', (x, y)))))
    g, witnesses = witness_outer_existentials(f, VOC)
    assert witnesses == {'c_x': 'x', 'c_z': 'z'}
    assert {c.name for c in constants_of(g)} == {'c_x', 'c_z'}
    assert g.args[2] == f.args[2]
    assert model_sizes(f, VOC, 2) == model_sizes(g, vocabulary_of(g), 2)


# --- Bounded sorts ---

def test_attribute_order_moves_bounded_columns_last():
    schema = parse_schema("domain flag = {on, off};\ntable T(f: flag, a: dom);")
    reordered, permutations = normalize_attribute_order(schema)
    assert permutations['T'] == (1, 0)
    assert reordered.relations['T'][0] == DOM


def test_expand_bounded_splits_tables():
    schema = parse_schema(FLAGGED)
    f = parse_formula("forall x. forall[flag] g. (R(x, g) -> G(g))", schema)
    lowered, lowering_map = expand_bounded(to_two_vars(f), schema.vocabulary())
    assert lowering_map.split_name('R', ('on',)) == 'R__on'
    assert lowering_map.split_name('R', ('off',)) == 'R__off'
    assert lowering_map.split_name('G', ('on',)) in lowering_map.propositional
    check_fo2(lowered)
    assert _models_agree(f, lowered, schema.vocabulary().restrict(relations=['R', 'G'], constants=[]))


def test_bounded_constant_becomes_selectors():
    schema = parse_schema(FLAGGED)
    f = parse_formula("(exists x. R(x, mode)) & mode != on", schema)
    lowered, lowering_map = expand_bounded(f, schema.vocabulary())
    assert {key for key in lowering_map.selectors.values()} == {('mode', 'on'), ('mode', 'off')}
    assert not any(c.sort.is_bounded for c in constants_of(lowered))
    vocabulary = schema.vocabulary().restrict(relations=['R'], constants=['mode'])
    assert _models_agree(f, lowered, vocabulary)


def test_lowering_keeps_unsatisfiable_sentences_unsatisfiable():
    schema = parse_schema(FLAGGED)
    f = parse_formula("G(on) & (forall[flag] g. !G(g))", schema)
    lowered, _ = lower(f, schema.vocabulary())
    assert model_sizes(lowered, vocabulary_of(lowered), 2) == set()


# --- Constants ---

def test_eliminate_constants_introduces_singletons():
    f = exists(Var('x'), Atom('R', (Var('x'), Const('c'))))
    g, lowering_map = eliminate_constants(f)
    assert lowering_map.const_relations == {'c': 'U_c'}
    assert not constants_of(g, include_literals=True)
    assert not free_variables(g)
    voc = Vocabulary({'R': (DOM, DOM)}, {'c': DOM})
    assert _models_agree(f, g, voc, max_n=3)


def test_eliminate_constants_avoids_name_clash():
    f = conj(Atom('U_c', (Const('c'),)), neg(Atom('U_c', (Const('d'),))))
    g, lowering_map = eliminate_constants(f)
    assert lowering_map.const_relations['c'] != 'U_c'
    assert model_sizes(g, vocabulary_of(g), 2) == {2}


# --- Decoding ---

def test_decoded_models_satisfy_the_original():
    schema = parse_schema(FLAGGED)
    f = parse_formula("E(root, root) & (exists x. R(x, mode) & !E(x, root)) & mode = off", schema)
    lowered, lowering_map = lower(f, schema.vocabulary())
    lowered, lowering_map = eliminate_constants(lowered, lowering_map)
    vocabulary = vocabulary_of(lowered)
    found = 0
    for n in (1, 2):
        for structure in enumerate_structures(vocabulary, n):
            if evaluate(structure, lowered):
                decoded = decode_structure(structure, lowering_map)
                assert decoded.size == n
                assert evaluate(decoded, f)
                found += 1
    assert found > 0
