"""
Concrete semantics of SmpSL over finite database states.

`run` computes every final state of a program; `check_triple_bruteforce`
decides a Hoare triple by enumerating all small initial states. Both are
used as oracles for the symbolic pipeline.
"""

import logging

from app.errors import EvaluationError, ResourceLimitError
from app.frontend.models import (
    CondTrue, AttEq, AttIn, AttInList, CondNot, CondAnd, CondOr,
    RelEmpty, TermsEqual, BranchNot,
    Insert, Update, Delete, SelectAssign, Choose, IfElse, IfExit,
)
from app.interpreter.models import DbState, ExecResult, TripleCheck
from app.logic.services import term_value, evaluate, enumerate_structures, count_structures
from app.utils.helpers import structure_to_json, structure_from_json

logger = logging.getLogger(__name__)


def _value(state, term):
    return term_value(state.structure, term, {})


# --- Queries ---

def _row_matches(state, schema, table, row, cond):
    if isinstance(cond, CondTrue):
        return True
    if isinstance(cond, AttEq):
        return row[table.position(cond.attribute)] == _value(state, cond.term)
    if isinstance(cond, AttInList):
        return row[table.position(cond.attribute)] in {_value(state, v) for v in cond.values}
    if isinstance(cond, AttIn):
        key = tuple(row[table.position(a)] for a in cond.attributes)
        return key in eval_select(state, cond.select, schema)
    if isinstance(cond, CondNot):
        return not _row_matches(state, schema, table, row, cond.arg)
    if isinstance(cond, CondAnd):
        return (_row_matches(state, schema, table, row, cond.left)
                and _row_matches(state, schema, table, row, cond.right))
    if isinstance(cond, CondOr):
        return (_row_matches(state, schema, table, row, cond.left)
                or _row_matches(state, schema, table, row, cond.right))
    raise EvaluationError(f"unknown condition {cond!r}")


def eval_select(state, select, schema):
    """
    Rows produced by a SELECT on `state`.

    Args:
        state (DbState): The current state.
        select (Select): The query; nested IN selects are evaluated recursively.
        schema (SchemaDecl): Resolves attribute names to columns.

    Returns:
        frozenset: Projected tuples satisfying the WHERE condition.
    """
    table = schema.table(select.table)
    positions = [table.position(a) for a in select.attributes]
    return frozenset(
        tuple(row[p] for p in positions)
        for row in state.table(select.table)
        if _row_matches(state, schema, table, row, select.cond)
    )


def _branch_holds(state, cond):
    if isinstance(cond, RelEmpty):
        return not state.table(cond.table)
    if isinstance(cond, TermsEqual):
        return _value(state, cond.left) == _value(state, cond.right)
    if isinstance(cond, BranchNot):
        return not _branch_holds(state, cond.arg)
    raise EvaluationError(f"unknown branch condition {cond!r}")


# --- Commands ---

class _Runner:
    def __init__(self, schema):
        self.schema = schema
        self.empty_choose = False

    def rows(self, state, select):
        return eval_select(state, select, self.schema)

    def matches(self, state, table, row, cond):
        return _row_matches(state, self.schema, table, row, cond)

    def body(self, commands, states):
        for cmd in commands:
            following = []
            for state in states:
                if state.exited:
                    following.append(state)
                else:
                    following.extend(self.command(cmd, state))
            states = following
        return states

    def command(self, cmd, state):
        if isinstance(cmd, Insert):
            row = tuple(_value(state, v) for v in cmd.values)
            return [state.with_table(cmd.table, state.table(cmd.table) | {row})]
        if isinstance(cmd, Delete):
            table = self.schema.table(cmd.table)
            kept = {row for row in state.table(cmd.table) if not self.matches(state, table, row, cmd.cond)}
            return [state.with_table(cmd.table, kept)]
        if isinstance(cmd, Update):
            table = self.schema.table(cmd.table)
            changes = {table.position(att): _value(state, term) for att, term in cmd.assignments}
            updated = set()
            for row in state.table(cmd.table):
                if self.matches(state, table, row, cmd.cond):
                    row = tuple(changes.get(i, v) for i, v in enumerate(row))
                updated.add(row)
            return [state.with_table(cmd.table, updated)]
        if isinstance(cmd, SelectAssign):
            return [state.with_table(cmd.target, self.rows(state, cmd.select))]
        if isinstance(cmd, Choose):
            rows = sorted(state.table(cmd.table), key=repr)
            if not rows:
                self.empty_choose = True
                return [state]
            return [state.with_constants(dict(zip(cmd.targets, row))) for row in rows]
        if isinstance(cmd, IfElse):
            branch = cmd.then_body if _branch_holds(state, cmd.cond) else cmd.else_body
            return self.body(branch, [state])
        if isinstance(cmd, IfExit):
            return [state.exit()] if _branch_holds(state, cmd.cond) else [state]
        raise EvaluationError(f"unknown command {cmd!r}")


def run(program, initial):
    """
    Executes `program` from `initial` and collects every final state.

    CHOOSE branches over every row of its table and leaves the state unchanged
    on an empty table; `exit` (also inside a branch) stops the whole program
    with the current state marked as exited.

    Args:
        program (ProgramAst): A parsed program.
        initial (DbState or Structure): Interprets the program's state schema.

    Returns:
        ExecResult: The final states.
    """
    if not isinstance(initial, DbState):
        initial = DbState(initial)
    runner = _Runner(program.schema)
    finals = runner.body(program.body, [initial])
    return ExecResult(frozenset(finals), runner.empty_choose)


# --- Hoare triples by enumeration ---

def count_states(vocabulary, max_unbounded):
    return sum(count_structures(vocabulary, n) for n in range(1, max_unbounded + 1))


def check_triple_bruteforce(spec, program, max_unbounded, cap=None, fixed=None):
    """
    Decides {pre ∧ Inv} program {post ∧ Inv} on all states up to a size.

    Args:
        spec (SpecFile): Pre/postcondition and invariants, read against the program.
        program (ProgramAst): The program.
        max_unbounded (int): Largest unbounded carrier to enumerate (from 1).
        cap (int, optional): Refuse when more initial states than this exist.
        fixed (dict, optional): Table name -> fixed rows, not enumerated.

    Returns:
        TripleCheck: holds=True, or the first witness in enumeration order.

    Raises:
        ResourceLimitError: When the state space exceeds `cap`.
    """
    schema = spec.schema or program.schema
    vocabulary = schema.vocabulary()
    free = vocabulary.restrict(relations=[r for r in vocabulary.relations if r not in (fixed or {})])
    total = count_states(free, max_unbounded)
    if cap is not None and total > cap:
        raise ResourceLimitError(f"{total} initial states up to size {max_unbounded} exceed the cap of {cap}",
                                 count=total)
    pre, post = spec.pre_with_invariants, spec.post_with_invariants
    checked = 0
    for n in range(1, max_unbounded + 1):
        for structure in enumerate_structures(vocabulary, n, fixed=fixed):
            if not evaluate(structure, pre):
                continue
            checked += 1
            for final in sorted(run(program, structure).finals, key=lambda s: structure_to_json(s.structure)):
                if not evaluate(final.structure, post):
                    logger.debug(f"triple fails at size {n} after {checked} initial states")
                    return TripleCheck(False, DbState(structure), final, checked, max_unbounded)
    logger.debug(f"triple holds on {checked} initial states up to size {max_unbounded}")
    return TripleCheck(True, states_checked=checked, max_unbounded=max_unbounded)


# --- Dumps ---

def dump_state(state):
    return structure_to_json(state.structure, state.exited)


def load_state(text, vocabulary):
    structure, exited = structure_from_json(text, vocabulary)
    return DbState(structure, bool(exited))
