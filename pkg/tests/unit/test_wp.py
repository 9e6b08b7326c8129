import pytest

from app.frontend.models import Delete, Insert
from app.interpreter.services import run
from app.logic.models import Var
from app.logic.services import evaluate, enumerate_structures, free_variables, simplify
from app.wp.services import wp_program, wp_command, cond_semantics, select_semantics

# Postconditions that mention every table of the small schema.
POSTS = [
    "forall x. ((exists y. S(x, y)) -> R(x, on))",
    "forall[flag] g. forall x. (R(x, g) -> (g = on | x != k))",
    "exists x. (R(x, off) & forall y. !S(y, x))",
    "R(k, on) <-> !(exists x. S(k, x))",
]

PROGRAMS = {
    'insert-delete': """
        p(k):
          INSERT (k, on) INTO R;
          DELETE FROM S WHERE a = k;
    """,
    'exit-update': """
        p(k):
          A = SELECT a FROM S WHERE b = k;
          if (A = empty) exit;
          UPDATE R SET f = off WHERE a IN (SELECT a FROM S WHERE b = k);
    """,
    'branch': """
        p(k):
          A = SELECT * FROM R WHERE a = k;
          if (A != empty) { UPDATE R SET f = on WHERE a = k } else { INSERT (k, k) INTO S };
    """,
    'update-key': """
        p(k):
          UPDATE S SET b = k WHERE a != k;
          DELETE FROM R WHERE f = off AND NOT a = k;
    """,
    'choose': """
        p(k):
          A = SELECT b FROM S WHERE a = k;
          c = CHOOSE A;
          INSERT (c, on) INTO R;
          DELETE FROM S WHERE b = c;
    """,
}


def _agrees_with_interpreter(program, post, max_n=2):
    """wp holds in exactly the states from which every run ends in post (empty CHOOSE runs excluded)."""
    wp = wp_program(program, post)
    vocabulary = program.schema.vocabulary()
    checked = 0
    for n in range(1, max_n + 1):
        for structure in enumerate_structures(vocabulary, n):
            execution = run(program, structure)
            if execution.empty_choose:
                continue
            expected = all(evaluate(final.structure, post) for final in execution.finals)
            assert evaluate(structure, wp) == expected, (n, structure)
            checked += 1
    return checked


# --- Agreement with the interpreter ---

@pytest.mark.parametrize('name', sorted(PROGRAMS))
def test_wp_matches_execution(parse, name):
    """Every small initial state satisfies wp(P, Q) iff all runs of P from it end in Q."""
    program = parse.program(PROGRAMS[name])
    for text in POSTS:
        post = parse.formula(text, program)
        assert _agrees_with_interpreter(program, post) > 0


def test_wp_is_closed_formula(parse):
    for name in sorted(PROGRAMS):
        program = parse.program(PROGRAMS[name])
        wp = wp_program(program, parse.formula(POSTS[0], program))
        assert not free_variables(wp)


# --- Individual rules ---

def test_insert_makes_row_present(parse):
    """After inserting (k, on), R(k, off) holds only if it held before."""
    program = parse.program("p(k):\n  INSERT (k, on) INTO R;")
    present = parse.formula("R(k, on)", program)
    assert all(evaluate(s, wp_command(program.body[0], present, program.schema))
               for s in enumerate_structures(program.schema.vocabulary(), 2))
    other = parse.formula("R(k, off)", program)
    wp = simplify(wp_command(program.body[0], other, program.schema))
    for structure in enumerate_structures(program.schema.vocabulary(), 2):
        assert evaluate(structure, wp) == evaluate(structure, other)


def test_delete_removes_matching_rows(parse):
    program = parse.program("p(k):\n  DELETE FROM S WHERE a = k;")
    assert isinstance(program.body[0], Delete)
    post = parse.formula("S(k, k)", program)
    wp = wp_command(program.body[0], post, program.schema)
    for structure in enumerate_structures(program.schema.vocabulary(), 1):
        assert not evaluate(structure, wp)


def test_exit_uses_final_postcondition(parse):
    """After an exit the remaining commands do not run, so the postcondition is checked as is."""
    program = parse.program("""
        p(k):
          A = SELECT * FROM R WHERE a = k;
          if (A != empty) exit;
          DELETE FROM R;
    """)
    post = parse.formula("exists x. R(x, on)", program)
    assert _agrees_with_interpreter(program, post) > 0


def test_cond_and_select_semantics(parse):
    program = parse.program("p(k):\n  A = SELECT b FROM S WHERE a = k;")
    cond = cond_semantics(program.body[0].select.cond, 'S', program.schema)
    assert cond.arity == 2
    assert free_variables(cond.formula) == {Var('v1')}
    rows = select_semantics(program.body[0].select, program.schema)
    assert rows.arity == 1
    assert free_variables(rows.formula) == {Var('v1')}
    for structure in enumerate_structures(program.schema.vocabulary(), 2):
        k = structure.constants['k']
        for b in (1, 2):
            assert evaluate(structure, rows.formula, {'v1': b}) == ((k, b) in structure.relations['S'])


def test_choose_quantifies_over_rows(parse):
    """wp of CHOOSE does not depend on the chosen constant's initial value."""
    program = parse.program(PROGRAMS['choose'])
    assert isinstance(program.body[2], Insert)
    post = parse.formula("R(c, on)", program)
    wp = wp_program(program, post)
    assert not free_variables(wp)
    for structure in enumerate_structures(program.schema.vocabulary(), 2):
        other = structure.with_constants({'c': 3 - structure.constants['c']})
        assert evaluate(structure, wp) == evaluate(other, wp)
