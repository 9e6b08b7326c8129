import os
from dataclasses import replace

import pytest

from app.errors import StageError
from app.frontend.services import load_case
from app.interpreter.services import check_triple_bruteforce
from app.logic.services import evaluate
from app.pipeline import services as pipeline
from app.pipeline.services import verify, verify_case, prepare_vc, dump_artifacts, inflate
from app.tasks.verify_tasks import verify_cases, case_payload, verify_case_task

CORRECT = [
    'delete-device-correct', 'subscribe-correct', 'unsubscribe-correct', 'confirm-corrected',
    'bid-correct', 'assign-correct', 'display-correct',
]
INCORRECT = [
    'delete-device-incorrect', 'subscribe-incorrect', 'unsubscribe-incorrect', 'confirm-incorrect',
    'bid-incorrect', 'assign-incorrect', 'display-incorrect',
]
INFLATED_CORRECT = [
    'delete-device-correct-x3', 'delete-device-correct-x10', 'subscribe-correct-x3', 'subscribe-correct-x10',
    'unsubscribe-correct-x3', 'unsubscribe-correct-x10',
]
INFLATED_INCORRECT = [
    'delete-device-incorrect-x3', 'delete-device-incorrect-x10', 'subscribe-incorrect-x3',
    'subscribe-incorrect-x10', 'unsubscribe-incorrect-x3', 'unsubscribe-incorrect-x10',
]


def _paths(entry):
    return entry.schema_path, entry.program_path, entry.spec_path


def _verify(entry, options):
    return verify(*_paths(entry), options, domain_sizes=entry.domains or None, copies=entry.copies)


@pytest.fixture
def fast_options(options):
    return replace(options, solver='pycosat')


def test_corpus_cases_are_all_covered(manifests):
    covered = CORRECT + INCORRECT + INFLATED_CORRECT + INFLATED_INCORRECT
    assert sorted(manifests) == sorted(covered)
    for name in CORRECT + INFLATED_CORRECT:
        assert manifests[name].expected == 'valid'
    for name in INCORRECT + INFLATED_INCORRECT:
        assert manifests[name].expected == 'invalid'


# --- Invalid triples ---

@pytest.mark.parametrize('name', INCORRECT + INFLATED_INCORRECT)
def test_invalid_case_yields_replayed_counterexample(manifests, fast_options, name):
    """The counterexample satisfies pre ∧ Inv and running the program from it breaks post ∧ Inv."""
    entry = manifests[name]
    verdict = _verify(entry, fast_options)
    assert verdict.status == 'invalid'
    assert verdict.replayed
    assert verdict.final_states

    case = load_case(*_paths(entry), entry.domains or None)
    program, spec = inflate(case.program, case.spec, entry.copies)
    assert verdict.program == program.name
    assert evaluate(verdict.counterexample, spec.pre_with_invariants)
    for final in verdict.final_states:
        assert not evaluate(final.structure, spec.post_with_invariants)


def test_invalid_verdict_renders_counterexample(manifests, options):
    verdict = _verify(manifests['delete-device-incorrect'], options)
    data = verdict.to_dict()
    assert data['replayed'] is True
    assert data['counterexample']['size'] == verdict.counterexample.size
    assert 'counterexample (initial state):' in verdict.render()


def test_inflated_program_is_renamed(manifests, fast_options):
    verdict = _verify(manifests['delete-device-incorrect-x3'], fast_options)
    assert verdict.program == 'delete-device3'


def test_display_leak_shows_session_while_reviewing(manifests, fast_options):
    """Papers in sessions other than blank or invited stay visible while reviewing."""
    verdict = _verify(manifests['display-incorrect'], fast_options)
    assert verdict.counterexample.constants['stillReviewing'] == 'true'
    sessions = {row[2] for final in verdict.final_states for row in final.structure.relations['Output']}
    assert sessions - {'blank', 'invited'}


# --- Valid triples ---

@pytest.mark.parametrize('name', CORRECT + INFLATED_CORRECT)
def test_valid_case_is_proved(manifests, fast_options, name):
    verdict = _verify(manifests[name], fast_options)
    assert verdict.status == 'valid'
    assert verdict.counterexample is None
    assert verdict.bound.bnd == 0 or verdict.sizes_tried


def test_valid_case_holds_on_small_states(manifests, options):
    """Brute force agrees with the verdict of the internal solver."""
    entry = manifests['delete-device-correct']
    case = load_case(*_paths(entry), entry.domains or None)
    assert check_triple_bruteforce(case.spec, case.program, 2).holds
    verdict = verify_case(case.program, case.spec, options)
    assert verdict.status == 'valid'
    assert verdict.bound.refuted
    assert verdict.sizes_tried == []


@pytest.mark.parametrize('name', ['delete-device-correct', 'delete-device-incorrect', 'assign-correct',
                                  'bid-incorrect'])
def test_internal_solver_agrees_with_pycosat(manifests, options, fast_options, name):
    entry = manifests[name]
    assert _verify(entry, options).status == _verify(entry, fast_options).status == entry.expected

# --- Failures and artifacts ---

def test_dump_artifacts_writes_every_formula(manifests, tmp_path):
    entry = manifests['delete-device-incorrect']
    case = load_case(*_paths(entry))
    bundle = prepare_vc(case.spec, case.program)
    paths = dump_artifacts(str(tmp_path), case.program.name, bundle)
    assert sorted(os.path.basename(p) for p in paths) == ['lowered.txt', 'lowering.json', 'vc.txt', 'wp.txt']
    assert all(os.path.getsize(p) > 0 for p in paths)
    assert dump_artifacts(None, 'x', bundle) == []


def test_stage_failure_dumps_artifacts(manifests, options, monkeypatch):
    entry = manifests['delete-device-incorrect']
    case = load_case(*_paths(entry))

    def explode(*args, **kwargs):
        raise RuntimeError("solver crashed")

    monkeypatch.setattr(pipeline, 'decide_finite_sat', explode)
    with pytest.raises(StageError) as info:
        verify_case(case.program, case.spec, options)
    assert info.value.stage == 'decide'
    assert len(info.value.artifacts) == 4
    assert all(path.startswith(options.artifact_dir) for path in info.value.artifacts)


# --- Batch ---

def test_verify_cases_runs_eagerly(manifests, app):
    entries = [manifests['delete-device-incorrect'], manifests['delete-device-correct']]
    results = verify_cases(entries, app)
    assert [r['name'] for r in results] == ['delete-device-incorrect', 'delete-device-correct']
    assert results[0]['status'] == 'invalid' and results[0]['match']
    assert results[1]['status'] == 'valid' and results[1]['match']


def test_task_reports_errors_in_result(manifests, options, tmp_path):
    entry = replace(manifests['delete-device-incorrect'], spec_path=str(tmp_path / 'missing.spec'))
    result = verify_case_task.apply(args=(case_payload(entry, options),)).get()
    assert result['status'] == 'error'
    assert result['match'] is False
    assert result['exit_code'] == 3
