"""
Celery tasks for batch verification.

Each case of a corpus manifest becomes one task; a task loads its own sources,
runs an isolated pipeline and returns a JSON-serializable verdict. Failures
are reported inside the result instead of failing the whole batch.
"""

import logging
from dataclasses import asdict

from app.errors.handlers import handle_error
from app.pipeline.models import VerifyOptions
from app.pipeline.services import verify
from app.tasks import celery, celery_init_app

logger = logging.getLogger(__name__)

ERROR = 'error'


def case_payload(entry, options):
    """JSON payload of one task: the manifest entry plus the verification options."""
    payload = entry.to_dict()
    payload['options'] = asdict(options)
    return payload


@celery.task(name='verifier.verify_case')
def verify_case_task(case):
    """
    Verifies one case.

    Args:
        case (dict): As built by `case_payload`.

    Returns:
        dict: `Verdict.to_dict()` plus 'name', 'expected', 'match' and
        'exit_code'; status 'error' with a message when a stage failed.
    """
    options = VerifyOptions(**case.get('options', {}))
    result = {'name': case['name'], 'expected': case.get('expected')}
    try:
        verdict = verify(case['schema'], case['program'], case['spec'], options,
                         domain_sizes=case.get('domains') or None, copies=case.get('copies', 1))
    except Exception as exc:
        result.update(status=ERROR, error=str(exc), exit_code=handle_error(exc, logger))
        result['match'] = False
        return result
    result.update(verdict.to_dict())
    result['match'] = result['expected'] is None or result['expected'] == verdict.status
    logger.info(f"case {case['name']}: {verdict.status} (expected {result['expected']})")
    return result


def verify_cases(cases, app):
    """
    Verifies several cases, concurrently when workers are available.

    Args:
        cases (list): CaseEntry objects.
        app (VerifierApp): Supplies options and the Celery settings.

    Returns:
        list: Result dicts of `verify_case_task`, in input order.
    """
    celery_init_app(app)
    options = VerifyOptions.from_config(app.config)
    payloads = [case_payload(entry, options) for entry in cases]
    if app.config.get('CELERY_TASK_ALWAYS_EAGER'):
        return [verify_case_task.apply(args=(payload,)).get() for payload in payloads]
    pending = [verify_case_task.delay(payload) for payload in payloads]
    return [result.get() for result in pending]
