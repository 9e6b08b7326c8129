import os

import pytest

from app import create_app
from app.frontend.parser import parse_schema, parse_program, parse_formula, parse_spec
from app.frontend.services import load_manifest
from app.pipeline.models import VerifyOptions
from config import TestingConfig

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CORPUS = os.path.join(ROOT, 'corpus')

# A small schema used across the unit tests: one table with a bounded column,
# one binary table.
SMALL_SCHEMA = """
domain flag = {on, off};
table R(a: dom, f: flag);
table S(a: dom, b: dom);
"""


# --- Pytest Fixtures ---

@pytest.fixture(scope='session')
def corpus_dir():
    """Path of the bundled corpus."""
    return CORPUS


@pytest.fixture(scope='session')
def manifests():
    """Parsed manifests of every corpus directory, keyed by case name."""
    entries = {}
    for name in sorted(os.listdir(CORPUS)):
        directory = os.path.join(CORPUS, name)
        if os.path.isdir(directory):
            for entry in load_manifest(directory):
                entries[entry.name] = entry
    return entries


@pytest.fixture
def app(tmp_path):
    """A testing application whose artifacts go to a temporary directory."""
    application = create_app(TestingConfig)
    application.config['ARTIFACT_DIR'] = str(tmp_path / 'artifacts')
    return application


@pytest.fixture
def options(app):
    """Verification options of the testing configuration."""
    return VerifyOptions.from_config(app.config)


@pytest.fixture(scope='session')
def small_schema():
    return parse_schema(SMALL_SCHEMA)


@pytest.fixture(scope='session')
def parse():
    """
    Helper bundle for parsing program/formula/spec sources against the small schema.

    Usage: `parse.program(text)`, `parse.formula(text, program)`, `parse.spec(text, program)`.
    """
    schema = parse_schema(SMALL_SCHEMA)

    class _Parse:
        @staticmethod
        def program(text):
            return parse_program(text, schema)

        @staticmethod
        def formula(text, program=None):
            return parse_formula(text, program.schema if program is not None else schema)

        @staticmethod
        def spec(text, program):
            return parse_spec(text, schema, program)

    return _Parse
