import logging
import os

import pytest

from app import create_app
from app.bounds.models import BoundReport
from app.errors import InflationError, ParseError, SolverTimeout, StageError, LoweringError, VerifierError
from app.errors.handlers import exit_code_for, handle_error, EXIT_USAGE, EXIT_INTERNAL
from app.frontend.models import Delete, IfElse, SelectAssign
from app.frontend.services import load_case
from app.interpreter.services import check_triple_bruteforce
from app.logic.models import Structure
from app.logic.services import evaluate, free_variables, model_sizes
from app.pipeline.models import Verdict, VerifyOptions
from app.pipeline.services import generate_vc, inflate
from app.tasks import celery, celery_init_app
from app.utils.decorators import stage
from app.utils.helpers import format_seconds, fresh_name, render_structure
from config import TestingConfig, ProductionConfig, get_config


def _case(corpus_dir, directory, schema, program, spec, domains=None):
    base = os.path.join(corpus_dir, directory)
    return load_case(os.path.join(base, schema), os.path.join(base, program), os.path.join(base, spec), domains)


@pytest.fixture
def firewall(corpus_dir):
    return _case(corpus_dir, 'firewall', 'firewall.schema', 'delete-device.smpsl', 'delete-device-incorrect.spec')


@pytest.fixture
def subscribe(corpus_dir):
    return _case(corpus_dir, 'newsletter', 'newsletter.schema', 'subscribe.smpsl', 'subscribe-incorrect.spec')


# --- Verification conditions ---

def test_vc_holds_exactly_in_violating_states(firewall):
    """An enumerated witness of an invalid triple satisfies the VC; the VC is a sentence."""
    vc = generate_vc(firewall.spec, firewall.program)
    assert not free_variables(vc)
    check = check_triple_bruteforce(firewall.spec, firewall.program, 2)
    assert check.status == 'invalid'
    assert evaluate(check.witness.structure, vc)


def test_vc_of_valid_triple_has_no_small_model(corpus_dir):
    case = _case(corpus_dir, 'firewall', 'firewall.schema', 'delete-device.smpsl', 'delete-device.spec')
    vc = generate_vc(case.spec, case.program)
    vocabulary = case.spec.schema.vocabulary()
    assert model_sizes(vc, vocabulary, 2) == set()


# --- Inflation ---

def test_inflate_interleaves_copies(firewall):
    program, spec = inflate(firewall.program, firewall.spec, 3)
    assert program.name == 'delete-device3'
    assert program.copies == 3
    assert [p.name for p in program.params] == ['deviceToDelete1', 'deviceToDelete2', 'deviceToDelete3']
    assert len(program.body) == 6
    assert all(isinstance(cmd, Delete) for cmd in program.body)
    assert [cmd.table for cmd in program.body] == ['CanSend'] * 3 + ['Device'] * 3
    assert spec.copies == 3


def test_inflate_turns_exits_into_branches(subscribe):
    program, _ = inflate(subscribe.program, subscribe.spec, 2)
    assert [type(cmd) for cmd in program.body] == [SelectAssign, SelectAssign, IfElse, IfElse]
    assert [cmd.target for cmd in program.body[:2]] == ['A1', 'A2']
    first = program.body[2]
    assert first.then_body == ()
    assert first.else_body[0].values[0].name == 'n1'
    assert {'A1', 'A2'} <= set(program.schema.tables)
    assert 'A' not in program.schema.tables


def test_inflate_with_one_copy_is_identity(firewall):
    assert inflate(firewall.program, firewall.spec, 1) == (firewall.program, firewall.spec)


def test_inflate_rejections(firewall, parse):
    with pytest.raises(InflationError, match="at least 1"):
        inflate(firewall.program, firewall.spec, 0)
    program, spec = inflate(firewall.program, firewall.spec, 2)
    with pytest.raises(InflationError, match="already inflated"):
        inflate(program, spec, 2)
    chooser = parse.program("p(k):\n  A = SELECT b FROM S WHERE a = k;\n  c = CHOOSE A;")
    with pytest.raises(InflationError, match="Choose"):
        inflate(chooser, parse.spec("post TRUE;", chooser), 2)


# --- Options and verdicts ---

def test_options_from_testing_config(app):
    options = VerifyOptions.from_config(app.config)
    assert options.solver == 'internal'
    assert options.max_bound == 4
    assert options.seed == 0
    assert options.solver_options == {'var_decay': 0.95, 'restart_first': 100, 'restart_multiplier': 1.5}
    assert options.artifact_dir == app.config['ARTIFACT_DIR']


def test_verdict_serialization_and_rendering():
    report = BoundReport(m=1, num_constants=0, total_types=4, infeasible_types=0,
                         feasible_nonconstant_types=4, bnd=12)
    verdict = Verdict('timeout', program='p', sizes_tried=[1, 2, 4], bound=report, stage='bound',
                      last_size=4, timings={'wp': 0.5})
    data = verdict.to_dict()
    assert data['status'] == 'timeout'
    assert data['stage'] == 'bound' and data['last_size'] == 4
    assert data['bound']['bnd'] == 12
    assert 'counterexample' not in data
    text = verdict.render()
    assert text.startswith('p: TIMEOUT')
    assert "stopped in stage 'bound' after size 4" in text
    assert 'wp 0.500s' in text


def test_exit_codes():
    assert exit_code_for(Verdict('valid')) == 0
    assert exit_code_for(Verdict('invalid')) == 1
    assert exit_code_for(Verdict('timeout')) == 2
    assert exit_code_for(ParseError("bad", 1, 2)) == EXIT_USAGE
    assert exit_code_for(InflationError("no")) == EXIT_USAGE
    assert exit_code_for(SolverTimeout("late")) == 2
    assert exit_code_for(FileNotFoundError("x.smpsl")) == EXIT_USAGE
    assert exit_code_for(LoweringError("three variables")) == EXIT_INTERNAL
    assert exit_code_for(RuntimeError("boom")) == EXIT_INTERNAL


def test_handle_error_logs_by_severity(caplog):
    log = logging.getLogger('tests.handle_error')
    with caplog.at_level(logging.WARNING, logger='tests.handle_error'):
        assert handle_error(ParseError("unexpected ';'", 3, 7), log) == EXIT_USAGE
        assert handle_error(RuntimeError("boom"), log) == EXIT_INTERNAL
    levels = [record.levelname for record in caplog.records]
    assert levels == ['WARNING', 'ERROR']
    assert 'line 3:7' in caplog.records[0].getMessage()


# --- Stages and helpers ---

def test_stage_decorator_times_and_wraps():
    @stage('demo')
    def succeed(x):
        return x + 1

    @stage('demo')
    def fail():
        raise KeyError('missing')

    @stage('demo')
    def refuse():
        raise LoweringError('not FO2')

    timings = {}
    assert succeed(1, timings=timings) == 2
    assert 'demo' in timings
    with pytest.raises(StageError) as info:
        fail()
    assert info.value.stage == 'demo'
    assert isinstance(info.value.cause, KeyError)
    with pytest.raises(LoweringError):
        refuse()
    assert succeed.stage_name == 'demo'


def test_format_seconds():
    assert format_seconds(None) == '-'
    assert format_seconds(0.0421) == '0.042s'
    assert format_seconds(3.1) == '3.10s'
    assert format_seconds(125) == '2m05s'


def test_fresh_name_counts_from_two():
    assert fresh_name('Uni', {'R'}) == 'Uni'
    assert fresh_name('Uni', {'Uni'}) == 'Uni_2'
    assert fresh_name('Uni', {'Uni', 'Uni_2'}) == 'Uni_3'


def test_render_structure_uses_column_names(small_schema):
    structure = Structure.build(small_schema.vocabulary(), 2, relations={'R': [(2, 'off'), (1, 'on')]})
    text = render_structure(structure, small_schema)
    assert text.splitlines()[0] == 'universe: {1, 2}'
    assert 'S: empty' in text
    assert text.index('R:') < text.index('S: empty')
    rows = text.split('R:\n')[1].splitlines()
    assert rows[0].split() == ['a', 'f']
    assert rows[1].split() == ['1', 'on']


# --- Configuration ---

def test_get_config_by_name():
    assert get_config('testing') is TestingConfig
    assert get_config('production') is ProductionConfig
    with pytest.raises(ValueError, match="Unknown environment"):
        get_config('staging')


def test_create_app_and_overrides():
    app = create_app(TestingConfig)
    assert app.testing and app.debug
    changed = app.with_overrides(SOLVER='pycosat', MAX_BOUND=None)
    assert changed.config['SOLVER'] == 'pycosat'
    assert changed.config['MAX_BOUND'] == 4
    assert app.config['SOLVER'] == 'internal'


def test_celery_settings_use_lowercase_names(app):
    configured = celery_init_app(app)
    assert configured is celery
    assert celery.conf.task_always_eager is True
    assert celery.conf.broker_url == app.config['CELERY_BROKER_URL']
    assert celery.conf.task_serializer == 'json'


def test_verifier_error_defaults():
    error = VerifierError("something")
    assert str(error) == 'something'
    assert error.exit_code == EXIT_INTERNAL
