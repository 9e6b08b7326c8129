import pytest

from app.errors import ResourceLimitError
from app.interpreter.models import DbState
from app.interpreter.services import run, eval_select, check_triple_bruteforce, dump_state, load_state
from app.logic.models import Structure


def _state(program, n, relations=None, constants=None):
    structure = Structure.build(program.schema.vocabulary(), n, relations=relations, constants=constants)
    return DbState(structure)


def _only(result):
    assert result.is_deterministic
    return next(iter(result.finals))


# --- Single commands ---

def test_insert_delete_update(parse):
    program = parse.program("""
        p(k):
          INSERT (k, on) INTO R;
          DELETE FROM S WHERE a = k OR b = k;
          UPDATE R SET f = off WHERE a != k;
    """)
    initial = _state(program, 3, relations={'R': [(2, 'on')], 'S': [(1, 2), (2, 3), (3, 3)]}, constants={'k': 1})
    final = _only(run(program, initial))
    assert final.table('R') == frozenset({(1, 'on'), (2, 'off')})
    assert final.table('S') == frozenset({(2, 3), (3, 3)})
    assert not final.exited


def test_update_only_touches_matching_rows(parse):
    program = parse.program("p(k):\n  UPDATE S SET b = k WHERE a = k;")
    initial = _state(program, 2, relations={'S': [(1, 2), (2, 2)]}, constants={'k': 1})
    final = _only(run(program, initial))
    assert final.table('S') == frozenset({(1, 1), (2, 2)})


def test_select_with_nested_in(parse):
    program = parse.program("""
        p(k):
          A = SELECT a FROM R WHERE a IN (SELECT a FROM S WHERE b = k) AND f = on;
    """)
    initial = _state(program, 3, relations={'R': [(1, 'on'), (2, 'on'), (3, 'off')],
                                            'S': [(1, 3), (3, 3)]}, constants={'k': 3})
    select = program.body[0].select
    assert eval_select(initial, select, program.schema) == frozenset({(1,)})
    assert _only(run(program, initial)).table('A') == frozenset({(1,)})


# --- Control flow ---

def test_exit_skips_remaining_commands(parse):
    program = parse.program("""
        p(k):
          A = SELECT * FROM R WHERE a = k;
          if (A != empty) exit;
          INSERT (k, off) INTO R;
    """)
    present = _state(program, 2, relations={'R': [(1, 'on')]}, constants={'k': 1})
    final = _only(run(program, present))
    assert final.exited
    assert final.table('R') == frozenset({(1, 'on')})

    absent = _state(program, 2, relations={'R': [(2, 'on')]}, constants={'k': 1})
    final = _only(run(program, absent))
    assert not final.exited
    assert final.table('R') == frozenset({(1, 'off'), (2, 'on')})


def test_exit_inside_branch_ends_program(parse):
    program = parse.program("""
        p(k):
          A = SELECT * FROM R WHERE a = k;
          if (A = empty) { if (k = k) exit } else { DELETE FROM R WHERE a = k };
          INSERT (k, on) INTO R;
    """)
    final = _only(run(program, _state(program, 1, constants={'k': 1})))
    assert final.exited
    assert final.table('R') == frozenset()


def test_choose_branches_over_rows(parse):
    program = parse.program("""
        p(k):
          A = SELECT b FROM S WHERE a = k;
          c = CHOOSE A;
          INSERT (c, on) INTO R;
    """)
    initial = _state(program, 3, relations={'S': [(1, 2), (1, 3)]}, constants={'k': 1, 'c': 1})
    result = run(program, initial)
    assert not result.empty_choose
    assert {frozenset(s.table('R')) for s in result.finals} == {frozenset({(2, 'on')}), frozenset({(3, 'on')})}


def test_choose_on_empty_table_keeps_state(parse):
    program = parse.program("""
        p(k):
          A = SELECT b FROM S WHERE a = k;
          c = CHOOSE A;
    """)
    initial = _state(program, 2, constants={'k': 1, 'c': 2})
    result = run(program, initial)
    assert result.empty_choose
    assert _only(result).constant('c') == 2


# --- Triples by enumeration ---

def test_bruteforce_finds_violation(parse):
    program = parse.program("p(k):\n  DELETE FROM R WHERE a = k;")
    spec = parse.spec("post exists x. R(x, on);", program)
    check = check_triple_bruteforce(spec, program, 2)
    assert not check.holds
    assert check.status == 'invalid'
    assert check.witness.table('R') == frozenset()


def test_bruteforce_accepts_valid_triple(parse):
    program = parse.program("p(k):\n  INSERT (k, on) INTO R;")
    spec = parse.spec("pre TRUE;\npost exists x. R(x, on);", program)
    check = check_triple_bruteforce(spec, program, 2)
    assert check.holds
    # size 1: 2^2 R-states, 2 S-states, 1 value of k; size 2: 2^4 * 2^4 * 2
    assert check.states_checked == 8 + 512


def test_bruteforce_respects_cap(parse):
    program = parse.program("p(k):\n  INSERT (k, on) INTO R;")
    spec = parse.spec("post TRUE;", program)
    with pytest.raises(ResourceLimitError):
        check_triple_bruteforce(spec, program, 2, cap=10)


# --- Dumps ---

def test_state_dump_and_load(parse):
    program = parse.program("p(k):\n  INSERT (k, on) INTO R;")
    state = _state(program, 2, relations={'R': [(2, 'off')], 'S': [(1, 2)]}, constants={'k': 2}).exit()
    text = dump_state(state)
    assert '"exited": true' in text
    loaded = load_state(text, program.schema.vocabulary())
    assert loaded == state
