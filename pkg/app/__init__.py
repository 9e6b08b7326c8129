import os
import logging
from logging.handlers import RotatingFileHandler

import sentry_sdk

# Package-level logger. Every module logs through a child of this logger
# (`logging.getLogger(__name__)`), so handlers installed here see everything.
logger = logging.getLogger('app')


class VerifierApp:
    """
    Application object handed to the command line and the batch tasks.

    Attributes:
        config (dict): Upper-case settings copied from the configuration class,
            possibly overridden by command-line options.
        logger (logging.Logger): The package logger, configured by `create_app`.
        debug (bool): Mirrors `config['DEBUG']`.
        testing (bool): Mirrors `config['TESTING']`.
    """

    def __init__(self, config):
        self.config = config
        self.logger = logger

    @property
    def debug(self):
        return bool(self.config.get('DEBUG'))

    @property
    def testing(self):
        return bool(self.config.get('TESTING'))

    def with_overrides(self, **overrides):
        """
        Returns a copy of this application whose config has the given keys replaced.
        Keys whose value is None are ignored, so unset command-line options keep
        the configured defaults.
        """
        merged = dict(self.config)
        merged.update({key: value for key, value in overrides.items() if value is not None})
        return VerifierApp(merged)

    def __repr__(self):
        return f"<VerifierApp env={self.config.get('VERIFIER_ENV')}>"


def _config_dict(config_class):
    """Collects the upper-case attributes of a configuration class into a plain dict."""
    return {key: getattr(config_class, key) for key in dir(config_class) if key.isupper()}


def create_app(config_class=None):
    """
    Application factory function.

    This function loads the configuration, sets up logging, and initializes error
    monitoring. It allows for flexible configuration loading based on environment.

    Args:
        config_class: An optional configuration class to use (e.g., DevelopmentConfig, TestingConfig).
                      If None, the class is chosen from the 'VERIFIER_ENV' environment variable,
                      defaulting to 'development'.

    Returns:
        VerifierApp: The configured application instance.
    """
    if config_class is None:
        from config import get_config
        config_class = get_config()

    app = VerifierApp(_config_dict(config_class))

    level = getattr(logging, str(app.config.get('LOG_LEVEL', 'INFO')).upper(), logging.INFO)
    logger.setLevel(level)

    # Remove handlers from a previous factory call (tests create many apps).
    for handler in list(logger.handlers):
        if getattr(handler, '_verifier_handler', False):
            logger.removeHandler(handler)

    formatter = logging.Formatter('%(asctime)s %(levelname)s: %(message)s [in %(pathname)s:%(lineno)d]')
    if not app.debug and not app.testing:
        log_dir = app.config.get('LOG_DIR', 'logs')
        if not os.path.exists(log_dir):
            os.mkdir(log_dir)
        # Use RotatingFileHandler to manage log file size and rotation.
        file_handler = RotatingFileHandler(os.path.join(log_dir, app.config.get('LOG_FILE', 'verifier.log')),
                                           maxBytes=10240,  # Max 10 KB per log file
                                           backupCount=10) # Keep up to 10 rotated log files
        file_handler.setFormatter(formatter)
        file_handler.setLevel(level)
        file_handler._verifier_handler = True
        logger.addHandler(file_handler)
    elif app.debug and not app.testing:
        console = logging.StreamHandler()
        console.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
        console.setLevel(level)
        console._verifier_handler = True
        logger.addHandler(console)

    if app.config.get('SENTRY_DSN'):
        sentry_sdk.init(dsn=app.config['SENTRY_DSN'], environment=app.config.get('VERIFIER_ENV'))
        logger.info('Sentry error monitoring enabled')

    logger.info('FO2 verifier startup (%s)', app.config.get('VERIFIER_ENV'))
    return app
