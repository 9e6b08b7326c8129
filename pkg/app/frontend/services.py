"""
File-level helpers on top of the parsers: reading sources, loading one
verification case, reading corpus manifests.
"""

import logging
import os
import shlex
from dataclasses import dataclass, field
from typing import Mapping, Optional

from app.errors import ParseError
from app.frontend.models import Attribute, TableDecl, ConstDecl, SchemaDecl
from app.frontend.parser import parse_schema, parse_program, parse_spec

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'cases.txt'
VERDICTS = ('valid', 'invalid', 'timeout')


@dataclass(frozen=True)
class CaseEntry:
    """
    One line of a corpus manifest.

    Attributes:
        name (str): Case label.
        schema_path, program_path, spec_path (str): Source files.
        expected (str or None): 'valid', 'invalid' or 'timeout'.
        copies (int): Inflation multiplier.
        domains (dict): Bounded-domain size overrides.
    """
    name: str
    schema_path: str
    program_path: str
    spec_path: str
    expected: Optional[str] = None
    copies: int = 1
    domains: Mapping[str, int] = field(default_factory=dict)

    def to_dict(self):
        return {
            'name': self.name, 'schema': self.schema_path, 'program': self.program_path,
            'spec': self.spec_path, 'expected': self.expected, 'copies': self.copies,
            'domains': dict(self.domains),
        }


@dataclass(frozen=True)
class LoadedCase:
    schema: SchemaDecl
    program: object
    spec: object


def read_source(path):
    with open(path, encoding='utf-8') as handle:
        return handle.read()


def parse_domain_option(text):
    """Parses `name=k` into ('name', k); ValueError on malformed input."""
    name, sep, size = text.partition('=')
    if not sep or not name.strip() or not size.strip().isdigit() or int(size) < 1:
        raise ValueError(f"expected NAME=SIZE with SIZE >= 1, got '{text}'")
    return name.strip(), int(size)


def load_case(schema_path, program_path, spec_path, domain_sizes=None):
    """
    Reads and parses the three sources of a verification case.

    Returns:
        LoadedCase: Schema, program (sort-checked against the schema) and spec
        (read against the program's state schema).
    """
    schema = parse_schema(read_source(schema_path), domain_sizes)
    program = parse_program(read_source(program_path), schema)
    spec = parse_spec(read_source(spec_path), schema, program)
    logger.debug(f"loaded case {program.name}: {len(program.body)} commands, "
                 f"{len(spec.invariants)} invariants")
    return LoadedCase(schema, program, spec)


def find_schema(directory):
    schemas = sorted(name for name in os.listdir(directory) if name.endswith('.schema'))
    if len(schemas) != 1:
        raise ParseError(f"corpus directory '{directory}' must hold exactly one .schema file, found {len(schemas)}")
    return os.path.join(directory, schemas[0])


def load_manifest(directory):
    """
    Reads `cases.txt` of a corpus directory.

    Each non-comment line reads `name program spec expected [copies=K] [domain=NAME=SIZE ...]`;
    paths are relative to the directory, whose single `.schema` file is shared.

    Returns:
        list: CaseEntry objects in file order.
    """
    manifest = os.path.join(directory, MANIFEST_NAME)
    schema_path = find_schema(directory)
    entries = []
    for number, raw in enumerate(read_source(manifest).splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        fields = shlex.split(line)
        if len(fields) < 4:
            raise ParseError(f"manifest line needs name, program, spec and verdict", number, 1)
        name, program, spec, expected = fields[:4]
        if expected not in VERDICTS:
            raise ParseError(f"unknown verdict '{expected}'", number, 1)
        copies, domains = 1, {}
        for option in fields[4:]:
            key, _, value = option.partition('=')
            if key == 'copies' and value.isdigit():
                copies = int(value)
            elif key == 'domain':
                dom_name, size = parse_domain_option(value)
                domains[dom_name] = size
            else:
                raise ParseError(f"unknown manifest option '{option}'", number, 1)
        entries.append(CaseEntry(name, schema_path, os.path.join(directory, program),
                                 os.path.join(directory, spec), expected, copies, domains))
    return entries


def schema_from_vocabulary(vocabulary):
    """
    Wraps a plain Vocabulary as a SchemaDecl so formulas over it can be parsed.

    Columns are named a1, a2, ...; bounded sorts become domains.
    """
    domains = {name: sort for name, sort in vocabulary.sorts().items() if sort.is_bounded}
    tables = {
        name: TableDecl(name, tuple(Attribute(f"a{i}", sort) for i, sort in enumerate(sorts, start=1)))
        for name, sorts in vocabulary.relations.items()
    }
    constants = {name: ConstDecl(name, sort) for name, sort in vocabulary.constants.items()}
    return SchemaDecl(domains, tables, constants)
