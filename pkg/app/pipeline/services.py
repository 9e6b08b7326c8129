"""
End-to-end verification of SmpSL programs against their specifications.

`generate_vc` builds the sentence (pre ∧ Inv) ∧ ¬wp(P, post ∧ Inv), whose
unsatisfiability means the Hoare triple is valid. `verify_case` lowers it to
FO², decides finite satisfiability and turns a model back into a database
state, which is then re-checked symbolically and by running the program.
`inflate` replicates a program k times for scaling experiments.
"""

import json
import logging
import os
import time
from dataclasses import replace

from app.errors import InflationError, InternalCheckError, StageError
from app.frontend.models import (
    ConstDecl, TableDecl, SchemaDecl, ProgramAst, CONST_PARAM,
    AttEq, AttIn, AttInList, CondNot, CondAnd, CondOr, Select,
    RelEmpty, TermsEqual, BranchNot,
    Insert, Update, Delete, SelectAssign, Choose, IfElse, IfExit, walk_commands,
)
from app.frontend.parser import parse_spec
from app.frontend.services import load_case
from app.interpreter.services import run, dump_state
from app.logic.models import Const, conj, neg
from app.logic.printer import to_text
from app.logic.services import evaluate, simplify
from app.lowering.services import lower, decode_structure
from app.pipeline.models import VerifyOptions, VcBundle, Verdict, VALID, INVALID, TIMEOUT
from app.solver.services import decide_finite_sat
from app.utils.decorators import stage
from app.wp.services import wp_program

logger = logging.getLogger(__name__)


# --- Verification conditions ---

@stage('wp')
def weakest_precondition(spec, program):
    return wp_program(program, spec.post_with_invariants)


def generate_vc(spec, program, wp=None):
    """
    The satisfiability target of a Hoare triple.

    Args:
        spec (SpecFile): Pre/postcondition and invariants, read against `program`.
        program (ProgramAst): The program.
        wp (Formula, optional): A precomputed wp(program, post ∧ Inv).

    Returns:
        Formula: simplify((pre ∧ Inv) ∧ ¬wp(program, post ∧ Inv)); unsatisfiable
        exactly when the triple is valid.
    """
    if wp is None:
        wp = weakest_precondition(spec, program)
    return simplify(conj(spec.pre_with_invariants, neg(wp)))


@stage('lower')
def lower_vc(vc, vocabulary):
    return lower(vc, vocabulary)


def prepare_vc(spec, program, timings=None):
    """
    wp, VC and lowered sentence of a triple, each stage timed under its name.

    Returns:
        VcBundle: The formulas and the lowering map.
    """
    wp = weakest_precondition(spec, program, timings=timings)
    vc = generate_vc(spec, program, wp=wp)
    state_schema = spec.schema or program.schema
    lowered, lowering_map = lower_vc(vc, state_schema.vocabulary(), timings=timings)
    return VcBundle(wp, vc, lowered, lowering_map)


# --- Artifacts ---

def dump_artifacts(directory, name, bundle):
    """
    Writes the formulas of a failed run for post-mortem inspection.

    Returns:
        list: Paths written (empty without a directory or a bundle).
    """
    if directory is None or bundle is None:
        return []
    target = os.path.join(directory, f"{name}-{time.strftime('%Y%m%d-%H%M%S')}")
    os.makedirs(target, exist_ok=True)
    contents = {
        'wp.txt': to_text(bundle.wp),
        'vc.txt': to_text(bundle.vc),
        'lowered.txt': to_text(bundle.lowered),
        'lowering.json': json.dumps(bundle.lowering_map.to_dict(), indent=2, sort_keys=True, default=str),
    }
    paths = []
    for filename, text in contents.items():
        path = os.path.join(target, filename)
        with open(path, 'w', encoding='utf-8') as handle:
            handle.write(text)
        paths.append(path)
    return paths


# --- Verification ---

@stage('decide')
def _decide(lowered, options, timings, on_cnf):
    return decide_finite_sat(
        lowered, backend=options.solver, timeout=options.timeout, max_bound=options.max_bound,
        base=options.base, prune=options.prune, economical=options.economical,
        atom_limit=options.atom_limit, seed=options.seed, solver_options=options.solver_options,
        timings=timings, on_cnf=on_cnf, term_limit=options.term_limit, type_limit=options.type_limit,
    )


def _replay(program, spec, state):
    """Final states reached from `state` that break post ∧ Inv, or None when a CHOOSE saw an empty table."""
    execution = run(program, state)
    if execution.empty_choose:
        logger.info("replay skipped: a CHOOSE ran on an empty table")
        return None
    post = spec.post_with_invariants
    finals = sorted(execution.finals, key=dump_state)
    return tuple(final for final in finals if not evaluate(final.structure, post))


def verify_case(program, spec, options=None, on_cnf=None):
    """
    Decides {pre ∧ Inv} program {post ∧ Inv}.

    Args:
        program (ProgramAst): The program.
        spec (SpecFile): Its specification.
        options (VerifyOptions, optional): Solver and search settings.
        on_cnf (callable, optional): Receives (size, CnfInstance) for every encoded size.

    Returns:
        Verdict: 'valid', 'invalid' with a re-validated counterexample, or 'timeout'.

    Raises:
        StageError: When a stage fails unexpectedly; formulas are dumped to
            `options.artifact_dir` and listed in the error.
        InternalCheckError: When a counterexample does not survive re-validation.
    """
    options = options or VerifyOptions()
    timings = {}
    bundle = None
    try:
        bundle = prepare_vc(spec, program, timings=timings)
        result = _decide(bundle.lowered, options, timings, on_cnf)
    except StageError as exc:
        paths = dump_artifacts(options.artifact_dir, program.name, bundle)
        if not paths:
            raise
        raise StageError(exc.stage, exc.cause, paths) from exc.cause
    timings.pop('decide', None)

    verdict = Verdict(VALID, program=program.name, sizes_tried=list(result.sizes_tried), bound=result.bound,
                      timings=timings, schema=spec.schema or program.schema)
    if result.status == TIMEOUT:
        verdict.status, verdict.stage, verdict.last_size = TIMEOUT, result.stage, result.last_size
        return verdict
    if not result.is_sat:
        logger.info(f"{program.name}: valid (bound {result.bound.bnd})")
        return verdict

    state = decode_structure(result.structure, bundle.lowering_map)
    if not evaluate(state, spec.pre_with_invariants):
        raise InternalCheckError(f"{program.name}: counterexample violates pre ∧ Inv")
    if evaluate(state, bundle.wp):
        raise InternalCheckError(f"{program.name}: counterexample satisfies wp(P, post ∧ Inv)")
    verdict.status, verdict.counterexample = INVALID, state
    if options.replay:
        broken = _replay(program, spec, state)
        if broken is not None:
            if not broken:
                raise InternalCheckError(f"{program.name}: running the program from the counterexample "
                                         f"reaches no state that breaks post ∧ Inv")
            verdict.final_states, verdict.replayed = broken, True
    logger.info(f"{program.name}: invalid, counterexample with {state.size} elements")
    return verdict


def verify(schema_path, program_path, spec_path, options=None, domain_sizes=None, copies=1, on_cnf=None):
    """
    Loads a case from its three source files and verifies it.

    Args:
        schema_path, program_path, spec_path (str): Source files.
        options (VerifyOptions, optional): Solver and search settings.
        domain_sizes (dict, optional): Bounded-domain size overrides.
        copies (int): Inflation multiplier; 1 verifies the program as written.

    Returns:
        Verdict: See `verify_case`.
    """
    case = load_case(schema_path, program_path, spec_path, domain_sizes)
    program, spec = inflate(case.program, case.spec, copies)
    return verify_case(program, spec, options, on_cnf=on_cnf)


# --- Inflation ---

def _rename_term(term, constants):
    if isinstance(term, Const) and term.name in constants:
        return Const(constants[term.name], term.sort)
    return term


def _rename_cond(cond, constants, tables):
    if isinstance(cond, AttEq):
        return replace(cond, term=_rename_term(cond.term, constants))
    if isinstance(cond, AttInList):
        return replace(cond, values=tuple(_rename_term(v, constants) for v in cond.values))
    if isinstance(cond, AttIn):
        return replace(cond, select=_rename_select(cond.select, constants, tables))
    if isinstance(cond, CondNot):
        return CondNot(_rename_cond(cond.arg, constants, tables))
    if isinstance(cond, (CondAnd, CondOr)):
        return type(cond)(_rename_cond(cond.left, constants, tables), _rename_cond(cond.right, constants, tables))
    return cond


def _rename_select(select, constants, tables):
    return Select(select.attributes, tables.get(select.table, select.table),
                  _rename_cond(select.cond, constants, tables))


def _rename_branch(cond, constants, tables):
    if isinstance(cond, RelEmpty):
        return RelEmpty(tables.get(cond.table, cond.table))
    if isinstance(cond, TermsEqual):
        return TermsEqual(_rename_term(cond.left, constants), _rename_term(cond.right, constants))
    if isinstance(cond, BranchNot):
        return BranchNot(_rename_branch(cond.arg, constants, tables))
    return cond


def _rename_command(cmd, constants, tables):
    table = tables.get(getattr(cmd, 'table', None), getattr(cmd, 'table', None))
    if isinstance(cmd, Insert):
        return Insert(table, tuple(_rename_term(v, constants) for v in cmd.values))
    if isinstance(cmd, Update):
        assignments = tuple((att, _rename_term(term, constants)) for att, term in cmd.assignments)
        return Update(table, assignments, _rename_cond(cmd.cond, constants, tables))
    if isinstance(cmd, Delete):
        return Delete(table, _rename_cond(cmd.cond, constants, tables))
    if isinstance(cmd, SelectAssign):
        return SelectAssign(tables.get(cmd.target, cmd.target), _rename_select(cmd.select, constants, tables))
    if isinstance(cmd, IfExit):
        return IfExit(_rename_branch(cmd.cond, constants, tables))
    if isinstance(cmd, IfElse):
        return IfElse(_rename_branch(cmd.cond, constants, tables),
                      tuple(_rename_command(c, constants, tables) for c in cmd.then_body),
                      tuple(_rename_command(c, constants, tables) for c in cmd.else_body))
    raise InflationError(f"cannot replicate command {cmd!r}")


def _exits_as_branches(body):
    """`if c exit; rest` becomes `if c {} else {rest}`, so one copy's exit spares the others."""
    for index, cmd in enumerate(body):
        if isinstance(cmd, IfExit):
            return tuple(body[:index]) + (IfElse(cmd.cond, (), _exits_as_branches(body[index + 1:])),)
    return tuple(body)


def inflate(program, spec, k):
    """
    Replicates a program k times with fresh parameters.

    Copy i renames every parameter p (and every constant the spec declares
    `per_copy`) to p<i> and every program-local table A to A<i>. The copies
    are interleaved command by command; a copy's `exit` only skips the rest of
    that copy. The spec text is read again for k copies, so `all_copies`,
    `any_copy` and `distinct_copies` expand over the new names.

    Args:
        program (ProgramAst): A program without CHOOSE and if/else.
        spec (SpecFile): Its specification.
        k (int): Multiplier; 1 returns the inputs unchanged.

    Returns:
        tuple: (inflated ProgramAst named <name><k>, re-read SpecFile).

    Raises:
        InflationError: On k < 1, an already inflated program, or a CHOOSE
            or if/else command.
    """
    if k < 1:
        raise InflationError(f"multiplier must be at least 1, got {k}")
    if k == 1:
        return program, spec
    if program.copies != 1:
        raise InflationError(f"'{program.name}' is already inflated")
    for cmd in walk_commands(program.body):
        if isinstance(cmd, (Choose, IfElse)):
            raise InflationError(f"'{program.name}' uses {type(cmd).__name__}; only straight-line programs "
                                 f"with exits can be inflated")

    schema = program.schema
    per_copy = [p.name for p in program.params] + [name for name in spec.per_copy if name in schema.constants]
    local_tables = [t for t in schema.tables.values() if t.local]
    body = _exits_as_branches(program.body)

    params, constants, tables, copies = [], dict(schema.constants), dict(schema.tables), []
    for name in per_copy:
        constants.pop(name)
    for table in local_tables:
        tables.pop(table.name)
    for index in range(1, k + 1):
        const_names = {name: f"{name}{index}" for name in per_copy}
        table_names = {t.name: f"{t.name}{index}" for t in local_tables}
        for name in per_copy:
            decl = schema.constants[name]
            constants[const_names[name]] = ConstDecl(const_names[name], decl.sort, decl.kind)
        for p in program.params:
            params.append(ConstDecl(const_names[p.name], p.sort, CONST_PARAM))
        for table in local_tables:
            tables[table_names[table.name]] = TableDecl(table_names[table.name], table.attributes, local=True)
        copies.append([_rename_command(cmd, const_names, table_names) for cmd in body])

    interleaved = tuple(copy[j] for j in range(len(body)) for copy in copies)
    inflated = ProgramAst(
        name=f"{program.name}{k}", params=tuple(params), body=interleaved,
        schema=SchemaDecl(dict(schema.domains), tables, constants),
        copies=k, copy_names=tuple(per_copy),
    )
    logger.info(f"inflated {program.name} x{k}: {len(interleaved)} commands")
    return inflated, parse_spec(spec.source, None, inflated, copies=k)


__all__ = ['generate_vc', 'prepare_vc', 'verify_case', 'verify', 'inflate', 'dump_artifacts']
