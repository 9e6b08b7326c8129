"""
Command-line surface: `verify` for one triple, `verify-corpus` for a manifest.

Exit codes: 0 Valid, 1 Invalid, 2 Timeout, 3 usage or input errors,
4 internal errors. `verify-corpus` exits 0 only when every case matches its
expected verdict.
"""

import json
import logging
from functools import partial

import click
import pandas as pd

from app import create_app
from config import get_config
from app.bounds.services import solver_bound
from app.encoder.dimacs import to_dimacs
from app.encoder.smtlib import to_smtlib
from app.errors.handlers import exit_code_for, handle_error, EXIT_USAGE, EXIT_VALID, EXIT_INVALID
from app.frontend.services import load_case, load_manifest, parse_domain_option
from app.logic.printer import to_text
from app.normalizer.services import to_ssnf, ssnf_to_text
from app.pipeline.models import VerifyOptions
from app.pipeline.services import inflate, prepare_vc, verify_case
from app.solver.services import sat
from app.tasks.verify_tasks import verify_cases

logger = logging.getLogger(__name__)


def _domain_sizes(values):
    sizes = {}
    for value in values:
        try:
            name, size = parse_domain_option(value)
        except ValueError as exc:
            raise click.BadParameter(str(exc), param_hint='--domain') from None
        sizes[name] = size
    return sizes


def _write(path, text):
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(text)


@click.group()
@click.option('--env', default=None, help="Configuration name: development, testing or production.")
@click.pass_context
def cli(ctx, env):
    """Verifies SmpSL programs against FO² specifications."""
    ctx.obj = create_app(get_config(env))


@cli.command('verify')
@click.option('--schema', 'schema_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--program', 'program_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--spec', 'spec_path', required=True, type=click.Path(exists=True, dir_okay=False))
@click.option('--domain', multiple=True, metavar='NAME=SIZE', help="Size of a bounded domain.")
@click.option('--copies', default=1, show_default=True, type=click.IntRange(min=1), help="Inflation multiplier.")
@click.option('--solver', default=None, help="internal, pycosat or cmd:PATH.")
@click.option('--max-bound', type=click.IntRange(min=1), default=None, help="Largest universe size to try.")
@click.option('--timeout', type=click.FloatRange(min=0), default=None, help="Seconds for the decision.")
@click.option('--seed', type=int, default=None)
@click.option('--plain-ssnf', is_flag=True, help="Use the plain Scott normal form instead of the economical one.")
@click.option('--emit-wp', is_flag=True, help="Print wp(P, post ∧ Inv).")
@click.option('--emit-vc', is_flag=True, help="Print the verification condition.")
@click.option('--emit-ssnf', is_flag=True, help="Print the normal form of the lowered VC.")
@click.option('--emit-bound', is_flag=True, help="Print the cardinality bound report.")
@click.option('--emit-cnf', type=click.Path(dir_okay=False, writable=True), default=None,
              help="Write the last CNF instance as DIMACS.")
@click.option('--emit-smtlib', type=click.Path(dir_okay=False, writable=True), default=None,
              help="Write the VC as an SMT-LIB script.")
@click.option('--json', 'as_json', is_flag=True, help="Print the verdict as JSON.")
@click.pass_context
def verify_command(ctx, schema_path, program_path, spec_path, domain, copies, solver, max_bound, timeout, seed,
                   plain_ssnf, emit_wp, emit_vc, emit_ssnf, emit_bound, emit_cnf, emit_smtlib, as_json):
    """Decides {pre ∧ Inv} P {post ∧ Inv} for one program."""
    app = ctx.obj.with_overrides(SOLVER=solver, MAX_BOUND=max_bound, SOLVER_TIMEOUT=timeout, SEED=seed,
                                 ECONOMICAL_SSNF=False if plain_ssnf else None)
    sizes = _domain_sizes(domain)
    try:
        options = VerifyOptions.from_config(app.config)
        case = load_case(schema_path, program_path, spec_path, sizes)
        program, spec = inflate(case.program, case.spec, copies)

        if emit_wp or emit_vc or emit_ssnf or emit_bound or emit_smtlib:
            bundle = prepare_vc(spec, program)
            if emit_wp:
                click.echo(to_text(bundle.wp))
            if emit_vc:
                click.echo(to_text(bundle.vc))
            if emit_ssnf or emit_bound:
                psi = to_ssnf(bundle.lowered, economical=options.economical)
                if emit_ssnf:
                    click.echo(ssnf_to_text(psi))
                if emit_bound:
                    report, _ = solver_bound(
                        psi, partial(sat, backend=options.solver, seed=options.seed), prune=options.prune,
                        atom_limit=options.atom_limit, term_limit=options.term_limit, type_limit=options.type_limit)
                    click.echo(json.dumps(report.to_dict(), indent=2))
            if emit_smtlib:
                _write(emit_smtlib, to_smtlib(bundle.vc, (spec.schema or program.schema).vocabulary()))

        instances = {}
        verdict = verify_case(program, spec, options, on_cnf=lambda size, cnf: instances.update(last=cnf))
        if emit_cnf and 'last' in instances:
            _write(emit_cnf, to_dimacs(instances['last']))
        click.echo(json.dumps(verdict.to_dict(), indent=2, sort_keys=True) if as_json else verdict.render())
        code = exit_code_for(verdict)
    except Exception as exc:
        code = handle_error(exc, logger)
        click.echo(f"error: {exc}", err=True)
    ctx.exit(code)


@cli.command('verify-corpus')
@click.argument('directory', type=click.Path(exists=True, file_okay=False))
@click.option('--solver', default=None, help="internal, pycosat or cmd:PATH.")
@click.option('--max-bound', type=click.IntRange(min=1), default=None)
@click.option('--timeout', type=click.FloatRange(min=0), default=None)
@click.option('--seed', type=int, default=None)
@click.option('--json', 'as_json', is_flag=True, help="Print the results as JSON.")
@click.pass_context
def verify_corpus_command(ctx, directory, solver, max_bound, timeout, seed, as_json):
    """Verifies every case listed in DIRECTORY/cases.txt."""
    app = ctx.obj.with_overrides(SOLVER=solver, MAX_BOUND=max_bound, SOLVER_TIMEOUT=timeout, SEED=seed)
    try:
        entries = load_manifest(directory)
        results = verify_cases(entries, app)
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(handle_error(exc, logger))
    if as_json:
        click.echo(json.dumps(results, indent=2, sort_keys=True))
    else:
        table = pd.DataFrame([
            {'case': r['name'], 'expected': r.get('expected'), 'verdict': r['status'],
             'match': 'yes' if r['match'] else 'NO',
             'seconds': round(sum(r.get('timings', {}).values()), 3)}
            for r in results
        ])
        click.echo(table.to_string(index=False))
    ctx.exit(EXIT_VALID if all(r['match'] for r in results) else EXIT_INVALID)


def main(argv=None):
    """
    Runs the command line and returns the exit code.

    Click reports usage errors with its own code 2, which here means Timeout,
    so they are mapped to 3.
    """
    try:
        code = cli.main(args=argv, prog_name='verify', standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    return code or 0
