import os
from dotenv import load_dotenv

# Load environment variables from .env file if it exists.
# Local runs can keep solver paths and budgets there instead of on the command line.
load_dotenv()


def _env_int(name, default=None):
    """Reads an integer setting, returning `default` when unset or empty."""
    raw = os.environ.get(name)
    if raw is None or raw.strip() == '':
        return default
    return int(raw)


def _env_float(name, default=None):
    """Reads a float setting, returning `default` when unset or empty."""
    raw = os.environ.get(name)
    if raw is None or raw.strip() == '':
        return default
    return float(raw)


def _env_flag(name, default):
    """Reads a boolean setting ('1', 'true', 'yes', 'on' are true)."""
    raw = os.environ.get(name)
    if raw is None:
        return default
    return raw.strip().lower() in ('1', 'true', 'yes', 'on')


class Config:
    """
    Base configuration class. Contains default settings applicable to all environments
    and common settings loaded from environment variables. Every tunable of the
    verification pipeline lives here; the command line overrides individual values.
    """
    VERIFIER_ENV = os.environ.get('VERIFIER_ENV') or 'development'
    DEBUG = False
    TESTING = False

    # Logging and Error Monitoring
    # Default logging level for the application.
    LOG_LEVEL = os.environ.get('LOG_LEVEL') or 'INFO'
    # Directory and file name for the rotating log file (used outside debug/testing).
    LOG_DIR = os.environ.get('LOG_DIR') or 'logs'
    LOG_FILE = os.environ.get('LOG_FILE') or 'verifier.log'
    # Sentry DSN (Data Source Name) for error tracking.
    SENTRY_DSN = os.environ.get('SENTRY_DSN')

    # SAT Backend Settings
    # 'internal' (bundled CDCL), 'pycosat', or 'cmd:/path/to/solver' (any DIMACS solver).
    SOLVER = os.environ.get('SOLVER') or 'internal'
    # Wall-clock budget in seconds for a whole decision; None means unlimited.
    SOLVER_TIMEOUT = _env_float('SOLVER_TIMEOUT')
    # Restart schedule and activity decay of the internal CDCL procedure.
    RESTART_FIRST = _env_int('RESTART_FIRST', 100)
    RESTART_MULTIPLIER = _env_float('RESTART_MULTIPLIER', 1.5)
    VAR_DECAY = _env_float('VAR_DECAY', 0.95)
    # Seed for every randomised choice (solver phases, fuzzers).
    SEED = _env_int('SEED', 0)

    # Model Search Settings
    # Largest universe the doubling schedule may try; None means go up to the computed bound.
    MAX_BOUND = _env_int('MAX_BOUND')
    # Growth factor of the cardinality schedule (1, b, b^2, ..., bound).
    DOUBLING_BASE = _env_int('DOUBLING_BASE', 2)
    # Drop 1-types that cannot hold on a one-element structure from the bound.
    PRUNE_INFEASIBLE_TYPES = _env_flag('PRUNE_INFEASIBLE_TYPES', True)
    # Use the economical normal-form procedure (False selects the plain baseline).
    ECONOMICAL_SSNF = _env_flag('ECONOMICAL_SSNF', True)
    # Enumerate 1-types explicitly only up to this many atoms; beyond it they
    # are counted with the SAT solver.
    TYPE_ATOM_LIMIT = _env_int('TYPE_ATOM_LIMIT', 14)
    # Give up the SAT count above this many 1-types and use the closed form.
    TYPE_COUNT_LIMIT = _env_int('TYPE_COUNT_LIMIT', 64)
    # Largest witness closure grown before the bound falls back to counting types.
    WITNESS_TERM_LIMIT = _env_int('WITNESS_TERM_LIMIT', 32)

    # Brute-Force Oracle Settings
    # Largest number of initial states the Hoare-triple enumerator will visit.
    BRUTEFORCE_STATE_CAP = _env_int('BRUTEFORCE_STATE_CAP', 200000)
    # Largest number of structures the model enumerators will visit.
    ENUMERATION_CAP = _env_int('ENUMERATION_CAP', 2000000)

    # Artifacts
    # Stage dumps (formulas, CNF) are written here when a stage fails.
    ARTIFACT_DIR = os.environ.get('ARTIFACT_DIR') or os.path.join(os.getcwd(), 'artifacts')

    # Asynchronous Task Queue Settings (Redis, Celery)
    # Redis URL used as the message broker for batch verification.
    REDIS_URL = os.environ.get('REDIS_URL') or 'redis://localhost:6379/0'
    # Celery broker URL (where tasks are sent). Defaults to REDIS_URL.
    CELERY_BROKER_URL = os.environ.get('CELERY_BROKER_URL') or REDIS_URL
    # Celery result backend URL (where task results are stored). Defaults to REDIS_URL.
    CELERY_RESULT_BACKEND = os.environ.get('CELERY_RESULT_BACKEND') or REDIS_URL
    # Run tasks in-process instead of dispatching them to workers.
    CELERY_TASK_ALWAYS_EAGER = _env_flag('CELERY_TASK_ALWAYS_EAGER', True)


class DevelopmentConfig(Config):
    """
    Local runs of the verifier.
    Logs verbosely to the console and never reports to Sentry.
    """
    DEBUG = True
    TESTING = False
    LOG_LEVEL = 'DEBUG'
    VERIFIER_ENV = 'development'
    SENTRY_DSN = None


class TestingConfig(Config):
    """
    Settings for the pytest suites.
    Batch tasks run eagerly and the search stays small and seeded; the
    fixtures point artifacts at a temporary directory.
    """
    DEBUG = True
    TESTING = True
    LOG_LEVEL = 'INFO'
    VERIFIER_ENV = 'testing'
    SENTRY_DSN = None
    SOLVER = 'internal'
    SOLVER_TIMEOUT = None
    SEED = 0
    MAX_BOUND = 4
    CELERY_TASK_ALWAYS_EAGER = True
    BRUTEFORCE_STATE_CAP = 50000


class ProductionConfig(Config):
    """
    Batch verification on workers.
    Logs only warnings to a rotating file and dispatches batch verification to
    Celery workers through the configured broker.
    """
    DEBUG = False
    TESTING = False
    LOG_LEVEL = 'WARNING'
    VERIFIER_ENV = 'production'
    CELERY_TASK_ALWAYS_EAGER = _env_flag('CELERY_TASK_ALWAYS_EAGER', False)

    # Workers need a broker and a result store
    if Config.CELERY_BROKER_URL is None or Config.CELERY_RESULT_BACKEND is None:
        raise ValueError("CELERY_BROKER_URL and CELERY_RESULT_BACKEND must be set for production batch verification.")


# A dictionary to easily select the configuration class based on an environment name.
config_by_name = dict(
    development=DevelopmentConfig,
    testing=TestingConfig,
    production=ProductionConfig,
    default=DevelopmentConfig # Fallback to development if environment is not specified
)


def get_config(env_name=None):
    """
    Retrieves the appropriate configuration class based on the provided environment name.
    If no environment name is given, it defaults to the 'VERIFIER_ENV' environment variable,
    or 'development' if 'VERIFIER_ENV' is not set.

    Args:
        env_name (str, optional): The name of the environment (e.g., 'development', 'testing', 'production').
                                  Defaults to None, which triggers environment variable lookup.

    Returns:
        type: The configuration class for the specified environment.

    Raises:
        ValueError: If an unknown environment name is provided.
    """
    if env_name is None:
        env_name = os.environ.get('VERIFIER_ENV', 'development')

    config_class = config_by_name.get(env_name)
    if config_class is None:
        raise ValueError(f"Unknown environment: '{env_name}'. Available environments: {', '.join(config_by_name.keys())}")
    return config_class
