import os

import pytest

from app.errors import ParseError, SortError
from app.frontend.lexer import tokenize, TokenType
from app.frontend.models import (
    Insert, Delete, Update, SelectAssign, Choose, IfElse, IfExit, AttEq, AttIn, AttInList, CondOr,
    RelEmpty, BranchNot, TermsEqual,
)
from app.frontend.parser import parse_schema, parse_program, parse_formula, parse_spec
from app.frontend.services import load_case, load_manifest, parse_domain_option, schema_from_vocabulary
from app.logic.models import DOM, Atom, Var, Const, Forall, Exists, Iff, And, Or, Not, Eq, Vocabulary
from app.logic.services import simplify
from app.pipeline.services import inflate

NEWSLETTER_SCHEMA = """
# subscriptions
domain bool = {true, false};
domain codes = {nil, c1, c2};
table NS(nwl: dom, user: dom, subscribed: bool, code: codes);
const new_code: codes;
"""


# --- Lexer ---

def test_lexer_skips_comments_and_keeps_positions():
    tokens = tokenize("table T(a: dom); // trailing\n# full line\nconst c: dom;")
    words = [t.value for t in tokens if t.type == TokenType.IDENT]
    assert words == ['table', 'T', 'a', 'dom', 'const', 'c', 'dom']
    const = next(t for t in tokens if t.value == 'const')
    assert const.line == 3
    assert tokens[-1].type == TokenType.EOF


def test_lexer_reports_unknown_character():
    with pytest.raises(ParseError) as info:
        tokenize("table T(a: dom);\n  @")
    assert info.value.line == 2


# --- Schemas ---

def test_parse_schema_domains_tables_constants():
    schema = parse_schema(NEWSLETTER_SCHEMA)
    assert schema.domains['codes'].elements == ('nil', 'c1', 'c2')
    ns = schema.tables['NS']
    assert ns.attribute_names == ('nwl', 'user', 'subscribed', 'code')
    assert ns.sorts[0] == DOM
    assert ns.sorts[2] is schema.domains['bool']
    assert schema.constants['new_code'].sort is schema.domains['codes']


def test_domain_size_override_names_extra_elements():
    schema = parse_schema(NEWSLETTER_SCHEMA, {'codes': 5})
    assert schema.domains['codes'].elements == ('nil', 'c1', 'c2', 'codes_4', 'codes_5')


def test_domain_size_override_below_listed_elements():
    with pytest.raises(SortError):
        parse_schema(NEWSLETTER_SCHEMA, {'codes': 2})


def test_sized_domain_without_elements():
    schema = parse_schema("domain slots(3);\ntable T(a: dom, s: slots);")
    assert schema.domains['slots'].elements == ('slots_1', 'slots_2', 'slots_3')


def test_schema_rejects_three_unbounded_columns():
    with pytest.raises(ParseError, match="at most 2"):
        parse_schema("table T(a: dom, b: dom, c: dom);")


def test_schema_rejects_duplicates_and_unknown_sorts():
    with pytest.raises(ParseError, match="duplicate"):
        parse_schema("table T(a: dom);\ntable T(b: dom);")
    with pytest.raises(ParseError, match="unknown sort"):
        parse_schema("table T(a: colour);")
    with pytest.raises(ParseError):
        parse_schema("domain bool = {true, false};")


def test_parse_domain_option():
    assert parse_domain_option('codes=7') == ('codes', 7)
    for bad in ('codes', 'codes=', 'codes=0', '=3', 'codes=x'):
        with pytest.raises(ValueError):
            parse_domain_option(bad)


# --- Programs ---

def test_parse_subscribe_program():
    schema = parse_schema(NEWSLETTER_SCHEMA)
    program = parse_program("""
        subscribe(n, u):
          A = SELECT * FROM NS WHERE user = u AND nwl = n;
          if (A != empty) exit;
          INSERT (n, u, false, new_code) INTO NS;
    """, schema)
    assert program.name == 'subscribe'
    assert [p.name for p in program.params] == ['n', 'u']
    select, guard, insert = program.body
    assert isinstance(select, SelectAssign) and select.target == 'A'
    assert program.schema.tables['A'].local
    assert program.schema.tables['A'].attribute_names == ('nwl', 'user', 'subscribed', 'code')
    assert isinstance(guard, IfExit)
    assert guard.cond == BranchNot(RelEmpty('A'))
    assert isinstance(insert, Insert)
    assert insert.values[2] == Const('false', schema.domains['bool'])
    assert insert.values[3] == Const('new_code', schema.domains['codes'])


def test_parse_choose_declares_local_constant():
    schema = parse_schema(NEWSLETTER_SCHEMA)
    program = parse_program("""
        confirm(cd: codes):
          A = SELECT subscribed FROM NS WHERE code = cd;
          if (A = empty) exit;
          s1 = CHOOSE A;
          if (s1 = false)
            UPDATE NS SET subscribed = true, code = nil WHERE code = cd
          else
            DELETE FROM NS WHERE code = cd;
    """, schema)
    choose, branch = program.body[2], program.body[3]
    assert isinstance(choose, Choose) and choose.targets == ('s1',)
    assert program.schema.constants['s1'].sort is schema.domains['bool']
    assert isinstance(branch, IfElse)
    assert isinstance(branch.cond, TermsEqual)
    assert isinstance(branch.then_body[0], Update)
    assert isinstance(branch.else_body[0], Delete)


def test_parse_where_conditions():
    schema = parse_schema("""
        domain sessions = {null, s1, s2};
        table Papers(paperId: dom, session: sessions);
        table Conflicts(paperId: dom, userId: dom);
    """)
    program = parse_program("""
        display(usr):
          A = SELECT paperId FROM Papers
              WHERE session IN (s1, s2, null) OR paperId IN (SELECT paperId FROM Conflicts WHERE userId = usr);
          DELETE FROM Papers WHERE NOT session = null;
    """, schema)
    cond = program.body[0].select.cond
    assert isinstance(cond, CondOr)
    assert isinstance(cond.left, AttInList)
    assert [v.name for v in cond.left.values] == ['s1', 's2', 'null']
    assert isinstance(cond.right, AttIn)
    assert cond.right.select.table == 'Conflicts'


def test_program_errors_carry_positions():
    schema = parse_schema(NEWSLETTER_SCHEMA)
    with pytest.raises(ParseError) as info:
        parse_program("p(n):\n  INSERT (n, n, false, nil) INTO Missing;", schema)
    assert info.value.line == 2
    with pytest.raises(SortError):
        parse_program("p(n):\n  INSERT (n, n, nil, nil) INTO NS;", schema)
    with pytest.raises(ParseError, match="clashes"):
        parse_program("p(NS):\n  DELETE FROM NS;", schema)


# --- Formulas ---

def test_parse_formula_sorts_and_literals():
    schema = parse_schema(NEWSLETTER_SCHEMA)
    f = parse_formula("forall x, y. forall[bool] s. NS(x, y, s, nil) -> s = true", schema)
    assert isinstance(f, Forall) and f.var == Var('x')
    inner = f.body.body
    assert inner.var.sort is schema.domains['bool']


def test_parse_formula_rejects_third_unbounded_variable():
    schema = parse_schema(NEWSLETTER_SCHEMA)
    with pytest.raises(ParseError, match="'z'"):
        parse_formula("exists z. NS(z, z, true, nil)", schema)
    # Bounded variables may use any name.
    parse_formula("exists[codes] z. z = new_code", schema)


def test_parse_formula_sort_mismatch():
    schema = parse_schema(NEWSLETTER_SCHEMA)
    with pytest.raises(SortError):
        parse_formula("exists x. x = new_code", schema)
    with pytest.raises(SortError):
        parse_formula("exists x. NS(x, x, nil, nil)", schema)


def test_table_equality_expands_to_biconditional():
    spec = parse_spec("ghost table NS_gh(nwl: dom, user: dom, subscribed: bool, code: codes);\npre NS = NS_gh;",
                      parse_schema(NEWSLETTER_SCHEMA))
    f = spec.pre
    body = f
    while isinstance(body, Forall):
        body = body.body
    assert isinstance(body, Iff)
    assert body.left.rel == 'NS' and body.right.rel == 'NS_gh'
    assert spec.schema.tables['NS_gh'].ghost


# --- Specifications ---

def test_spec_definitions_and_invariants():
    schema = parse_schema(NEWSLETTER_SCHEMA)
    spec = parse_spec("""
        ghost const sub_gh: bool;
        define Inv := forall x, y. forall[bool] s, t. forall[codes] c, d.
          (NS(x, y, s, c) & NS(x, y, t, d)) -> (s = t & c = d);
        invariant Inv;
        pre sub_gh = true;
        post TRUE;
    """, schema)
    assert len(spec.invariants) == 1
    assert 'Inv' in spec.definitions
    assert spec.schema.constants['sub_gh'].kind == 'ghost'
    assert spec.pre_with_invariants == And((spec.pre, spec.invariants[0]))
    assert spec.post_with_invariants == spec.invariants[0]


def test_copy_constructs_with_one_copy():
    """With a single copy all_copies(φ) is φ and distinct_copies(...) is TRUE."""
    schema = parse_schema(NEWSLETTER_SCHEMA)
    program = parse_program("p(n):\n  DELETE FROM NS WHERE nwl = n;", schema)
    single = parse_spec("post all_copies(exists x. x = n) & distinct_copies(n);", schema, program)
    assert simplify(single.post) == Exists(Var('x'), Eq(Var('x'), Const('n')))


def test_copy_constructs_over_inflated_names():
    schema = parse_schema(NEWSLETTER_SCHEMA)
    program = parse_program("p(n):\n  DELETE FROM NS WHERE nwl = n;", schema)
    spec = parse_spec("post any_copy(exists x. x = n) & distinct_copies(n);", schema, program)
    inflated_program, inflated = inflate(program, spec, 2)
    any_copy, distinct = inflated.post.args
    assert isinstance(any_copy, Or) and len(any_copy.args) == 2
    assert distinct == Not(Eq(Const('n1'), Const('n2')))
    with pytest.raises(ParseError, match="per copy"):
        parse_spec("post exists x. x = n;", None, inflated_program, copies=2)


# --- Files ---

def test_load_manifest_reads_options(corpus_dir):
    entries = load_manifest(os.path.join(corpus_dir, 'newsletter'))
    by_name = {e.name: e for e in entries}
    assert by_name['subscribe-correct'].expected == 'valid'
    assert by_name['confirm-incorrect'].domains == {'codes': 3}
    assert by_name['subscribe-incorrect-x3'].copies == 3
    assert by_name['subscribe-correct'].schema_path.endswith('newsletter.schema')
    assert by_name['subscribe-correct'].to_dict()['program'].endswith('subscribe.smpsl')


def test_every_corpus_case_loads(manifests):
    assert len(manifests) >= 16
    for entry in manifests.values():
        case = load_case(entry.schema_path, entry.program_path, entry.spec_path, entry.domains)
        assert case.program.name
        assert case.spec.schema is not None


def test_manifest_rejects_unknown_verdict(tmp_path):
    (tmp_path / 'one.schema').write_text("table T(a: dom);")
    (tmp_path / 'cases.txt').write_text("case p.smpsl p.spec maybe\n")
    with pytest.raises(ParseError, match="maybe"):
        load_manifest(str(tmp_path))


def test_schema_from_vocabulary_names_columns():
    schema = schema_from_vocabulary(Vocabulary({'R': (DOM, DOM)}, {'c': DOM}))
    assert schema.tables['R'].attribute_names == ('a1', 'a2')
    f = parse_formula("exists x. R(x, c)", schema)
    assert f == Exists(Var('x'), Atom('R', (Var('x'), Const('c'))))
