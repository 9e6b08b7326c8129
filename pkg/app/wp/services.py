"""
Weakest preconditions of SmpSQL commands and SmpSL programs.

Every data-manipulating command rewrites the postcondition by replacing the
atoms of the table it writes with a formula describing the table's new
contents in terms of the old ones. Branches and `exit` combine the
rewritten postconditions of the paths.
"""

import logging

from app.errors import SortError
from app.frontend.models import (
    CondTrue, AttEq, AttIn, AttInList, CondNot, CondAnd, CondOr,
    RelEmpty, TermsEqual, BranchNot,
    Insert, Update, Delete, SelectAssign, Choose, IfElse, IfExit,
)
from app.logic.models import Var, Atom, TRUE, conj, disj, neg, exists, forall, implies, equals
from app.logic.services import (
    substitute_terms, substitute_atoms, substitute_constants, all_variable_names,
    fresh_variable_name, formula_size,
)
from app.wp.models import RowFormula, row_variables

logger = logging.getLogger(__name__)


class WeakestPrecondition:
    """
    The wp calculus over one state schema.

    Args:
        schema (SchemaDecl): Resolves table names and attribute positions;
            normally a program's state schema.
    """

    def __init__(self, schema):
        self.schema = schema

    # Conditions and queries

    def cond_semantics(self, cond, table):
        """
        Row formula of a WHERE condition over `table`.

        Args:
            cond (Cond): The condition.
            table (TableDecl or str): The table the condition filters.

        Returns:
            RowFormula: Free variables v1..vn, one per column of `table`.
        """
        if isinstance(table, str):
            table = self.schema.table(table)
        variables = row_variables(table.sorts)
        return RowFormula(self._cond(cond, table, variables), variables, table.name)

    def _cond(self, cond, table, v):
        if isinstance(cond, CondTrue):
            return TRUE
        if isinstance(cond, AttEq):
            return equals(v[table.position(cond.attribute)], cond.term)
        if isinstance(cond, AttInList):
            column = v[table.position(cond.attribute)]
            return disj(*(equals(column, value) for value in cond.values))
        if isinstance(cond, AttIn):
            inner = self.select_semantics(cond.select)
            renaming = {var.name: v[table.position(att)] for var, att in zip(inner.variables, cond.attributes)}
            return substitute_terms(inner.formula, renaming)
        if isinstance(cond, CondNot):
            return neg(self._cond(cond.arg, table, v))
        if isinstance(cond, CondAnd):
            return conj(self._cond(cond.left, table, v), self._cond(cond.right, table, v))
        if isinstance(cond, CondOr):
            return disj(self._cond(cond.left, table, v), self._cond(cond.right, table, v))
        raise SortError(f"unknown condition {cond!r}")

    def select_semantics(self, select):
        """
        Row formula of a SELECT: the rows of the projection.

        Non-projected columns are existentially quantified in ascending column
        order; the i-th projected attribute becomes the free variable v_i.

        Returns:
            RowFormula: Free variables v1..vk for the k projected attributes.
        """
        table = self.schema.table(select.table)
        columns = row_variables(table.sorts)
        body = conj(Atom(table.name, columns), self._cond(select.cond, table, columns))
        positions = [table.position(att) for att in select.attributes]
        hidden = [columns[i] for i in range(table.arity) if i not in positions]
        body = exists(hidden, body)

        outputs = row_variables(table.sorts[p] for p in positions)
        renaming, duplicates = {}, []
        for out, p in zip(outputs, positions):
            source = columns[p].name
            if source in renaming:
                duplicates.append(equals(out, renaming[source]))
            else:
                renaming[source] = out
        formula = conj(substitute_terms(body, renaming), *duplicates)
        return RowFormula(formula, outputs, table.name)

    def branch_semantics(self, cond):
        """Formula of an if-condition: `R = empty`, `R != empty`, `c1 = c2`, negations."""
        if isinstance(cond, RelEmpty):
            table = self.schema.table(cond.table)
            variables = row_variables(table.sorts)
            return neg(exists(variables, Atom(table.name, variables)))
        if isinstance(cond, TermsEqual):
            return equals(cond.left, cond.right)
        if isinstance(cond, BranchNot):
            return neg(self.branch_semantics(cond.arg))
        raise SortError(f"unknown branch condition {cond!r}")

    # Commands

    def _replace_table(self, post, table, body, variables):
        return substitute_atoms(post, table, RowFormula(body, variables, table).template())

    def wp_command(self, cmd, post, exit_post=None):
        """
        Weakest precondition of one command.

        Args:
            cmd (Command): The command.
            post (Formula): What must hold after `cmd` when execution continues.
            exit_post (Formula, optional): What must hold when an `exit` fires;
                defaults to `post`.

        Returns:
            Formula: The precondition.
        """
        if exit_post is None:
            exit_post = post
        if isinstance(cmd, Insert):
            table = self.schema.table(cmd.table)
            v = row_variables(table.sorts)
            inserted = conj(*(equals(var, value) for var, value in zip(v, cmd.values)))
            return self._replace_table(post, table.name, disj(Atom(table.name, v), inserted), v)
        if isinstance(cmd, Delete):
            table = self.schema.table(cmd.table)
            v = row_variables(table.sorts)
            body = conj(Atom(table.name, v), neg(self._cond(cmd.cond, table, v)))
            return self._replace_table(post, table.name, body, v)
        if isinstance(cmd, Update):
            return self._wp_update(cmd, post)
        if isinstance(cmd, SelectAssign):
            rows = self.select_semantics(cmd.select)
            return self._replace_table(post, cmd.target, rows.formula, rows.variables)
        if isinstance(cmd, Choose):
            return self._wp_choose(cmd, post)
        if isinstance(cmd, IfElse):
            c = self.branch_semantics(cmd.cond)
            then_pre = self.wp_commands(cmd.then_body, post, exit_post)
            else_pre = self.wp_commands(cmd.else_body, post, exit_post)
            return disj(conj(neg(c), else_pre), conj(c, then_pre))
        if isinstance(cmd, IfExit):
            c = self.branch_semantics(cmd.cond)
            return disj(conj(c, exit_post), conj(neg(c), post))
        raise SortError(f"unknown command {cmd!r}")

    def _wp_update(self, cmd, post):
        # Rows that do not match keep their values; a row in the new table that
        # matched before has its SET columns equal to the new values and any old
        # values there.
        table = self.schema.table(cmd.table)
        v = row_variables(table.sorts)
        assigned = {table.position(att): value for att, value in cmd.assignments}
        old = list(v)
        witnesses = []
        for index in sorted(assigned):
            w = Var(f"w{index + 1}", table.sorts[index])
            old[index] = w
            witnesses.append(w)
        unchanged = conj(Atom(table.name, v), neg(self._cond(cmd.cond, table, v)))
        changed = conj(
            *(equals(v[index], value) for index, value in sorted(assigned.items())),
            exists(witnesses, conj(Atom(table.name, tuple(old)), self._cond(cmd.cond, table, tuple(old)))),
        )
        return self._replace_table(post, table.name, disj(unchanged, changed), v)

    def _wp_choose(self, cmd, post):
        table = self.schema.table(cmd.table)
        taken = set(all_variable_names(post))
        fresh = []
        for sort in table.sorts:
            name = fresh_variable_name('u', taken)
            taken.add(name)
            fresh.append(Var(name, sort))
        targets = {name: var for name, var in zip(cmd.targets, fresh)}
        return forall(fresh, implies(Atom(table.name, tuple(fresh)), substitute_constants(post, targets)))

    def wp_commands(self, commands, post, exit_post=None):
        """Right-to-left fold of `wp_command` over a command sequence."""
        if exit_post is None:
            exit_post = post
        for cmd in reversed(tuple(commands)):
            post = self.wp_command(cmd, post, exit_post)
        return post


def wp_program(program, post):
    """
    Weakest precondition of a whole program.

    An `exit` anywhere (also inside a branch) ends the program, so its
    continuation is `post` itself.

    Args:
        program (ProgramAst): The program; its state schema resolves the tables.
        post (Formula): A closed postcondition over the state schema.

    Returns:
        Formula: A closed formula over the same schema.
    """
    calculus = WeakestPrecondition(program.schema)
    pre = calculus.wp_commands(program.body, post, post)
    logger.debug(f"wp of {program.name}: {formula_size(post)} -> {formula_size(pre)} nodes")
    return pre


def wp_command(cmd, post, schema, exit_post=None):
    return WeakestPrecondition(schema).wp_command(cmd, post, exit_post)


def cond_semantics(cond, table, schema):
    return WeakestPrecondition(schema).cond_semantics(cond, table)


def select_semantics(select, schema):
    return WeakestPrecondition(schema).select_semantics(select)
