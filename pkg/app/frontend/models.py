"""
Abstract syntax for schemas, SmpSL programs (with embedded SmpSQL) and
specification files.

Program terms are always `Const` nodes from `app.logic.models`: parameters,
declared constants, program locals and bounded-element literals all live in
the state's constant namespace, so the wp calculus and the interpreter can
treat them uniformly.
"""

from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple

from app.errors import SortError
from app.logic.models import DOM, Const, Vocabulary, TRUE, conj

CONST_SCHEMA = 'schema'
CONST_PARAM = 'param'
CONST_LOCAL = 'local'
CONST_GHOST = 'ghost'


@dataclass(frozen=True)
class Attribute:
    name: str
    sort: object


@dataclass(frozen=True)
class TableDecl:
    """
    A relation schema.

    Attributes:
        name (str): Table name.
        attributes (tuple): Attributes in column order.
        ghost (bool): Declared by a spec file; never written by programs.
        local (bool): Implicitly declared by a select-assignment in a program.
    """
    name: str
    attributes: Tuple[Attribute, ...]
    ghost: bool = False
    local: bool = False

    @property
    def arity(self):
        return len(self.attributes)

    @property
    def sorts(self):
        return tuple(a.sort for a in self.attributes)

    @property
    def attribute_names(self):
        return tuple(a.name for a in self.attributes)

    @property
    def unbounded_count(self):
        return sum(1 for a in self.attributes if not a.sort.is_bounded)

    def position(self, attribute):
        """0-based column of `attribute`; SortError when the table has no such column."""
        for index, att in enumerate(self.attributes):
            if att.name == attribute:
                return index
        raise SortError(f"table '{self.name}' has no attribute '{attribute}'")


@dataclass(frozen=True)
class ConstDecl:
    name: str
    sort: object
    kind: str = CONST_SCHEMA


@dataclass(frozen=True, eq=False)
class SchemaDecl:
    """
    Bounded domains, tables and constants of a state schema.

    The object is treated as immutable: `extend` returns a new schema.
    """
    domains: Mapping[str, object] = field(default_factory=dict)
    tables: Mapping[str, TableDecl] = field(default_factory=dict)
    constants: Mapping[str, ConstDecl] = field(default_factory=dict)

    def sort(self, name):
        if name == DOM.name:
            return DOM
        try:
            return self.domains[name]
        except KeyError:
            raise SortError(f"unknown sort '{name}'") from None

    def table(self, name):
        try:
            return self.tables[name]
        except KeyError:
            raise SortError(f"unknown table '{name}'") from None

    def has_name(self, name):
        return name in self.tables or name in self.constants or name in self.domains

    def element_sort(self, name):
        """The bounded sort declaring element `name`, or None."""
        for sort in self.domains.values():
            if name in sort.elements:
                return sort
        return None

    def constant(self, name):
        decl = self.constants.get(name)
        return Const(decl.name, decl.sort) if decl else None

    def extend(self, tables=(), constants=()):
        """New schema with extra tables/constants; clashes raise SortError."""
        new_tables = dict(self.tables)
        new_consts = dict(self.constants)
        for table in tables:
            if table.name in new_tables or table.name in new_consts:
                raise SortError(f"name '{table.name}' is already declared")
            new_tables[table.name] = table
        for const in constants:
            if const.name in new_tables or const.name in new_consts:
                raise SortError(f"name '{const.name}' is already declared")
            new_consts[const.name] = const
        return SchemaDecl(dict(self.domains), new_tables, new_consts)

    def replace_tables(self, tables):
        """New schema where the given tables replace same-named ones."""
        new_tables = dict(self.tables)
        new_tables.update({t.name: t for t in tables})
        return SchemaDecl(dict(self.domains), new_tables, dict(self.constants))

    def vocabulary(self, include_ghosts=True):
        rels = {t.name: t.sorts for t in self.tables.values() if include_ghosts or not t.ghost}
        consts = {c.name: c.sort for c in self.constants.values()
                  if include_ghosts or c.kind != CONST_GHOST}
        return Vocabulary(rels, consts)

    @property
    def ghost_names(self):
        names = {t.name for t in self.tables.values() if t.ghost}
        names.update(c.name for c in self.constants.values() if c.kind == CONST_GHOST)
        return names


# --- SmpSQL conditions ---

class Cond:
    """Base class of WHERE conditions."""


@dataclass(frozen=True)
class CondTrue(Cond):
    pass


@dataclass(frozen=True)
class AttEq(Cond):
    attribute: str
    term: Const


@dataclass(frozen=True)
class AttIn(Cond):
    """`(att_b1, ..., att_bk) IN (SELECT ...)`."""
    attributes: Tuple[str, ...]
    select: 'Select'


@dataclass(frozen=True)
class AttInList(Cond):
    """`att IN (e1, ..., ek)` over bounded-element literals."""
    attribute: str
    values: Tuple[Const, ...]


@dataclass(frozen=True)
class CondNot(Cond):
    arg: Cond


@dataclass(frozen=True)
class CondAnd(Cond):
    left: Cond
    right: Cond


@dataclass(frozen=True)
class CondOr(Cond):
    left: Cond
    right: Cond


@dataclass(frozen=True)
class Select:
    """
    `SELECT attributes FROM table WHERE cond`.

    Attributes:
        attributes (tuple): Projected attribute names in output order ('*' is expanded by the parser).
        table (str): Source table.
        cond (Cond): Row filter.
    """
    attributes: Tuple[str, ...]
    table: str
    cond: Cond = CondTrue()


# --- Branch conditions ---

class BranchCond:
    """Base class of if-conditions."""


@dataclass(frozen=True)
class RelEmpty(BranchCond):
    table: str


@dataclass(frozen=True)
class TermsEqual(BranchCond):
    left: Const
    right: Const


@dataclass(frozen=True)
class BranchNot(BranchCond):
    arg: BranchCond


# --- Commands ---

class Command:
    """Base class of SmpSL commands."""


@dataclass(frozen=True)
class Insert(Command):
    table: str
    values: Tuple[Const, ...]


@dataclass(frozen=True)
class Update(Command):
    table: str
    assignments: Tuple[Tuple[str, Const], ...]
    cond: Cond = CondTrue()


@dataclass(frozen=True)
class Delete(Command):
    table: str
    cond: Cond = CondTrue()


@dataclass(frozen=True)
class SelectAssign(Command):
    target: str
    select: Select


@dataclass(frozen=True)
class Choose(Command):
    targets: Tuple[str, ...]
    table: str


@dataclass(frozen=True)
class IfElse(Command):
    cond: BranchCond
    then_body: Tuple[Command, ...]
    else_body: Tuple[Command, ...] = ()


@dataclass(frozen=True)
class IfExit(Command):
    cond: BranchCond


@dataclass(frozen=True, eq=False)
class ProgramAst:
    """
    A parsed SmpSL function.

    Attributes:
        name (str): Function name.
        params (tuple): Parameter declarations (constants of kind 'param').
        body (tuple): Commands in execution order.
        schema (SchemaDecl): The state schema: the database schema extended
            with the parameters and the program's implicit locals.
        copies (int): How many copies `inflate` interleaved (1 for source programs).
        copy_names (tuple): Names that receive a copy index under inflation;
            defaults to the parameter names.
    """
    name: str
    params: Tuple[ConstDecl, ...]
    body: Tuple[Command, ...]
    schema: SchemaDecl
    copies: int = 1
    copy_names: Optional[Tuple[str, ...]] = None

    @property
    def per_copy_names(self):
        if self.copy_names is not None:
            return self.copy_names
        return tuple(p.name for p in self.params)

    @property
    def written_tables(self):
        return {name for name in _walk_targets(self.body)}


def _walk_targets(body):
    for cmd in body:
        if isinstance(cmd, (Insert, Update, Delete)):
            yield cmd.table
        elif isinstance(cmd, SelectAssign):
            yield cmd.target
        elif isinstance(cmd, IfElse):
            yield from _walk_targets(cmd.then_body)
            yield from _walk_targets(cmd.else_body)


def walk_commands(body):
    """Pre-order traversal of commands, descending into if/else branches."""
    for cmd in body:
        yield cmd
        if isinstance(cmd, IfElse):
            yield from walk_commands(cmd.then_body)
            yield from walk_commands(cmd.else_body)


@dataclass(frozen=True, eq=False)
class SpecFile:
    """
    Pre/postcondition, invariants and ghost declarations for one program.

    Attributes:
        pre (Formula): The precondition (without invariants).
        post (Formula): The postcondition (without invariants).
        invariants (tuple): Invariants, conjoined to both pre and post.
        ghost_tables (tuple): TableDecl of spec-only tables.
        ghost_constants (tuple): ConstDecl of spec-only constants.
        definitions (dict): name -> Formula from `define` lines.
        per_copy (tuple): Schema constants replicated by inflation.
        schema (SchemaDecl): State schema including the ghosts.
        source (str): The spec text, kept for re-reading with another copy count.
        copies (int): Number of program copies the text was read for.
    """
    pre: object = TRUE
    post: object = TRUE
    invariants: Tuple[object, ...] = ()
    ghost_tables: Tuple[TableDecl, ...] = ()
    ghost_constants: Tuple[ConstDecl, ...] = ()
    definitions: Mapping[str, object] = field(default_factory=dict)
    per_copy: Tuple[str, ...] = ()
    schema: Optional[SchemaDecl] = None
    source: str = ''
    copies: int = 1

    @property
    def invariant(self):
        return conj(*self.invariants)

    @property
    def pre_with_invariants(self):
        return conj(self.pre, *self.invariants)

    @property
    def post_with_invariants(self):
        return conj(self.post, *self.invariants)
