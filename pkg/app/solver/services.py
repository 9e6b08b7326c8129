"""
SAT backends and the finite-satisfiability decision procedure.

`sat` decides one CNF with the bundled CDCL procedure, pycosat, or any
external DIMACS solver (`cmd:/path/to/solver`). `decide_finite_sat` runs the
whole chain for an FO² sentence: normal form, a witness closure that may
settle the question outright, cardinality bound, constant elimination,
Uni-relativization, then one CNF per size of the doubling schedule until a
model turns up or the bound is exhausted.
"""

import logging
import os
import subprocess
import tempfile
import time

import pycosat

from app.errors import SolverTimeout, InternalCheckError, EncodingError
from app.bounds.services import solver_bound
from app.encoder.dimacs import to_dimacs
from app.encoder.services import relativize_uni, encode, assignment_to_structure
from app.logic.services import evaluate, vocabulary_of
from app.lowering.services import eliminate_constants, decode_structure
from app.normalizer.services import to_ssnf
from app.solver.cdcl import solve_cdcl
from app.solver.models import SatResult, Schedule, FiniteSatResult, SAT, UNSAT, TIMEOUT
from app.utils.decorators import stage_timer

logger = logging.getLogger(__name__)

EXTERNAL_PREFIX = 'cmd:'


# --- Backends ---

def _remaining(deadline):
    if deadline is None:
        return None
    left = deadline - time.monotonic()
    if left <= 0:
        raise SolverTimeout("time budget exhausted before the SAT call", stage='solve')
    return left


def _solve_internal(cnf, deadline, options):
    try:
        model, stats = solve_cdcl(cnf.num_vars, cnf.clauses, deadline=deadline, **options)
    except ValueError as exc:
        raise EncodingError(str(exc)) from exc
    return SatResult(SAT, model, stats) if model is not None else SatResult(UNSAT, None, stats)


def _solve_pycosat(cnf, deadline):
    if any(not clause for clause in cnf.clauses):
        return SatResult(UNSAT)
    if deadline is not None:
        logger.debug("pycosat has no wall-clock limit; the budget is checked between calls only")
    outcome = pycosat.solve(cnf.clauses, vars=cnf.num_vars)
    if outcome == 'UNSAT':
        return SatResult(UNSAT)
    if outcome == 'UNKNOWN':
        raise SolverTimeout("pycosat gave up", stage='solve')
    assignment = {v: False for v in range(1, cnf.num_vars + 1)}
    assignment.update({abs(lit): lit > 0 for lit in outcome})
    return SatResult(SAT, assignment)


def parse_solver_output(stdout, returncode, num_vars):
    """
    Reads the competition output format: 's SATISFIABLE' plus 'v' lines.

    Falls back to the exit code (10 satisfiable, 20 unsatisfiable) when there
    is no status line. Variables missing from the 'v' lines are false.
    """
    status = None
    assignment = {v: False for v in range(1, num_vars + 1)}
    for line in stdout.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == 's' and len(parts) > 1:
            status = {'SATISFIABLE': SAT, 'UNSATISFIABLE': UNSAT}.get(parts[1])
        elif parts[0] == 'v':
            for token in parts[1:]:
                lit = int(token)
                if lit != 0 and abs(lit) <= num_vars:
                    assignment[abs(lit)] = lit > 0
    if status is None:
        status = {10: SAT, 20: UNSAT}.get(returncode)
    if status is None:
        raise InternalCheckError(f"external solver gave no verdict (exit code {returncode})")
    return SatResult(status, assignment if status == SAT else None)


def _solve_external(cnf, command, deadline):
    with tempfile.NamedTemporaryFile('w', suffix='.cnf', delete=False) as handle:
        handle.write(to_dimacs(cnf))
        path = handle.name
    try:
        completed = subprocess.run([command, path], capture_output=True, text=True, timeout=_remaining(deadline))
    except subprocess.TimeoutExpired:
        raise SolverTimeout(f"external solver '{command}' exceeded its time budget", stage='solve') from None
    finally:
        os.unlink(path)
    return parse_solver_output(completed.stdout, completed.returncode, cnf.num_vars)


def check_assignment(clauses, assignment):
    """Index of the first clause `assignment` falsifies, or None."""
    for index, clause in enumerate(clauses):
        if not any(assignment.get(abs(lit), False) == (lit > 0) for lit in clause):
            return index
    return None


def sat(cnf, backend='internal', deadline=None, seed=0, var_decay=0.95, restart_first=100,
        restart_multiplier=1.5):
    """
    Decides a CNF instance.

    Args:
        cnf (CnfInstance): The instance.
        backend (str): 'internal', 'pycosat' or 'cmd:PATH'.
        deadline (float, optional): `time.monotonic()` value bounding the call.
        seed, var_decay, restart_first, restart_multiplier: Internal CDCL tuning.

    Returns:
        SatResult: Satisfying assignments are checked against every clause.

    Raises:
        SolverTimeout: When the deadline passes.
        InternalCheckError: When a backend returns an assignment that falsifies a clause.
    """
    _remaining(deadline)
    if backend == 'internal':
        options = dict(seed=seed, var_decay=var_decay, restart_first=restart_first,
                       restart_multiplier=restart_multiplier)
        result = _solve_internal(cnf, deadline, options)
    elif backend == 'pycosat':
        result = _solve_pycosat(cnf, deadline)
    elif backend.startswith(EXTERNAL_PREFIX):
        result = _solve_external(cnf, backend[len(EXTERNAL_PREFIX):], deadline)
    else:
        raise ValueError(f"unknown SAT backend '{backend}'")
    if result.is_sat:
        broken = check_assignment(cnf.clauses, result.assignment)
        if broken is not None:
            raise InternalCheckError(f"{backend} returned an assignment falsifying clause {broken}")
    return result


# --- Schedule ---

def schedule(bound, base=2, cap=None):
    """
    Sizes 1, base, base², ... stopping at `bound` (or at `cap` when smaller).

    The last size is min(bound, base · previous), so the bound itself is tried.
    """
    if base < 2:
        raise ValueError(f"schedule base must be at least 2, got {base}")
    limit = bound if cap is None else min(bound, cap)
    sizes = []
    size = 1
    while size < limit:
        sizes.append(size)
        size *= base
    sizes.append(max(1, limit))
    return Schedule(tuple(sizes), bound, capped=limit < bound)


# --- Decision procedure ---

def decode_model(assignment, cnf, relativized, lowered_vocabulary, lowering_map=None):
    """
    Model of the lowered sentence from a satisfying assignment.

    The size-n structure is restricted to Uni and reduced to the lowered
    vocabulary, which drops F_i, E_j and Uni. With a `lowering_map` the result
    is lifted to the original many-sorted vocabulary, U_c singletons becoming
    constants again.

    Raises:
        InternalCheckError: When Uni is empty.
    """
    full = assignment_to_structure(relativized, cnf, assignment)
    members = sorted(e[0] for e in full.relations.get(relativized.universe_relation, ()))
    if not members:
        raise InternalCheckError("satisfying assignment has an empty Uni")
    model = full.restrict(members)
    if lowering_map is None:
        return model.reduct(lowered_vocabulary)
    return decode_structure(model, lowering_map)


def _restore_constants(model, const_relations, vocabulary):
    """Constants of the lowered sentence from their singleton relations."""
    constants = {}
    for const, rel in const_relations.items():
        members = sorted(e[0] for e in model.relations.get(rel, ()))
        if members:
            constants[const] = members[0]
    return model.reduct(vocabulary).with_constants(constants)


def decide_finite_sat(phi, backend='internal', timeout=None, max_bound=None, base=2, prune=True,
                      economical=True, atom_limit=14, seed=0, solver_options=None, timings=None, on_cnf=None,
                      term_limit=32, type_limit=64):
    """
    Decides whether an FO² sentence has a finite model.

    Args:
        phi (Formula): An FO² sentence; unbounded constants are allowed.
        backend (str): SAT backend, see `sat`.
        timeout (float, optional): Seconds for the whole decision.
        max_bound (int, optional): Largest universe to try.
        base (int): Growth factor of the size schedule.
        prune (bool): Prune infeasible 1-types from the bound.
        economical (bool): Use the economical normal form.
        atom_limit (int): Largest atom count for explicit 1-type enumeration.
        seed (int): Seed for the internal solver.
        solver_options (dict, optional): More internal CDCL tuning.
        timings (dict, optional): Receives seconds per stage.
        on_cnf (callable, optional): Called with (universe size, CnfInstance) before each SAT call.
        term_limit (int): Largest witness closure.
        type_limit (int): Largest SAT-counted number of 1-types.

    Returns:
        FiniteSatResult: 'sat' with a model over the vocabulary of `phi`,
        'unsat' once the witness closure or the size at the bound is
        unsatisfiable, or 'timeout'.
    """
    timings = timings if timings is not None else {}
    deadline = None if timeout is None else time.monotonic() + timeout
    vocabulary = vocabulary_of(phi)
    options = dict(seed=seed, **(solver_options or {}))

    def solve(cnf):
        if on_cnf is not None:
            on_cnf(cnf.varmap.n, cnf)
        return sat(cnf, backend=backend, deadline=deadline, **options)

    with stage_timer('ssnf', timings):
        with_constants = to_ssnf(phi, economical=economical, introduce_constants=True)
    try:
        with stage_timer('bound', timings):
            report, closure = solver_bound(with_constants, solve, prune=prune, atom_limit=atom_limit,
                                           term_limit=term_limit, type_limit=type_limit)
    except SolverTimeout as exc:
        logger.warning(f"timeout while bounding: {exc}")
        return FiniteSatResult(TIMEOUT, stage='bound', timings=timings)
    logger.debug(f"bound {report.bnd} via {report.method}")
    if report.refuted:
        return FiniteSatResult(UNSAT, bound=report, timings=timings)
    if closure.structure is not None:
        model = closure.structure.reduct(vocabulary)
        if not evaluate(model, phi):
            raise InternalCheckError(f"witness model of size {model.size} does not satisfy the sentence")
        return FiniteSatResult(SAT, model, model.size, bound=report, timings=timings)

    with stage_timer('ssnf', timings):
        constant_free, const_map = eliminate_constants(phi)
        psi = to_ssnf(constant_free, economical=economical, introduce_constants=False)
        relativized = relativize_uni(psi)
    lowered_vocabulary = vocabulary_of(constant_free)

    plan = schedule(report.bnd, base=base, cap=max_bound)
    logger.info(f"bound {report.bnd}, schedule {list(plan.sizes)}")
    result = FiniteSatResult(UNSAT, bound=report, timings=timings)
    for size in plan:
        try:
            with stage_timer('encode', timings):
                cnf = encode(relativized, size)
            with stage_timer('solve', timings):
                outcome = solve(cnf)
        except SolverTimeout as exc:
            result.status, result.stage = TIMEOUT, exc.stage
            result.last_size = result.sizes_tried[-1] if result.sizes_tried else None
            logger.warning(f"timeout at size {size}: {exc}")
            return result
        result.sizes_tried.append(size)
        if outcome.is_sat:
            with stage_timer('decode', timings):
                model = decode_model(outcome.assignment, cnf, relativized, lowered_vocabulary)
                model = _restore_constants(model, const_map.const_relations, vocabulary)
                if not evaluate(model, phi):
                    raise InternalCheckError(f"decoded model of size {model.size} does not satisfy the sentence")
            result.status, result.structure, result.size = SAT, model, size
            return result
    if plan.capped:
        result.status, result.stage, result.last_size = TIMEOUT, 'bound', plan.sizes[-1]
        logger.warning(f"no model up to {plan.sizes[-1]}, below the bound {report.bnd}")
    return result


__all__ = ['sat', 'schedule', 'decide_finite_sat', 'decode_model', 'check_assignment', 'parse_solver_output']
