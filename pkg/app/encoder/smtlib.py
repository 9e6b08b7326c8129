"""
SMT-LIB v2 export of first-order sentences.

The unbounded sort becomes an uninterpreted sort, bounded sorts become
enumeration datatypes, relations Boolean-valued functions. The output is
meant for cross-checking with external reasoners, e.g. `z3 vc.smt2`.
"""

import re

from app.errors import EncodingError
from app.logic.models import TrueF, FalseF, Atom, Eq, Not, And, Or, Implies, Iff, Forall, Exists
from app.logic.services import vocabulary_of

_SIMPLE = re.compile(r'^[A-Za-z_][A-Za-z0-9_.$-]*$')
UNBOUNDED_SORT = 'Dom'


def symbol(name):
    """`name` as an SMT-LIB symbol, quoted when needed."""
    if _SIMPLE.match(name):
        return name
    if '|' in name or '\\' in name:
        raise EncodingError(f"name {name!r} cannot be written as an SMT-LIB symbol")
    return f"|{name}|"


def _sort_symbol(sort):
    return symbol(sort.name) if sort.is_bounded else UNBOUNDED_SORT


def _term(t):
    return symbol(t.name)


def to_smtlib_term(f):
    if isinstance(f, TrueF):
        return 'true'
    if isinstance(f, FalseF):
        return 'false'
    if isinstance(f, Atom):
        return f"({symbol(f.rel)} {' '.join(_term(a) for a in f.args)})"
    if isinstance(f, Eq):
        return f"(= {_term(f.left)} {_term(f.right)})"
    if isinstance(f, Not):
        return f"(not {to_smtlib_term(f.arg)})"
    if isinstance(f, And):
        return f"(and {' '.join(to_smtlib_term(a) for a in f.args)})"
    if isinstance(f, Or):
        return f"(or {' '.join(to_smtlib_term(a) for a in f.args)})"
    if isinstance(f, Implies):
        return f"(=> {to_smtlib_term(f.left)} {to_smtlib_term(f.right)})"
    if isinstance(f, Iff):
        return f"(= {to_smtlib_term(f.left)} {to_smtlib_term(f.right)})"
    if isinstance(f, (Forall, Exists)):
        binder = 'forall' if isinstance(f, Forall) else 'exists'
        return f"({binder} (({symbol(f.var.name)} {_sort_symbol(f.var.sort)})) {to_smtlib_term(f.body)})"
    raise EncodingError(f"not a formula: {f!r}")


def to_smtlib(formula, vocabulary=None):
    """
    An SMT-LIB v2 script asserting `formula`.

    Args:
        formula (Formula): A closed formula.
        vocabulary (Vocabulary, optional): Declares symbols the formula does not mention.

    Returns:
        str: The script, ending with (check-sat).
    """
    voc = vocabulary_of(formula, vocabulary)
    lines = ['(set-logic ALL)', f"(declare-sort {UNBOUNDED_SORT} 0)"]
    for name, sort in sorted(voc.sorts().items()):
        if sort.is_bounded:
            constructors = ' '.join(f"({symbol(e)})" for e in sort.elements)
            lines.append(f"(declare-datatypes (({symbol(name)} 0)) (({constructors})))")
    for name, sorts in sorted(voc.relations.items()):
        lines.append(f"(declare-fun {symbol(name)} ({' '.join(_sort_symbol(s) for s in sorts)}) Bool)")
    for name, sort in sorted(voc.constants.items()):
        lines.append(f"(declare-const {symbol(name)} {_sort_symbol(sort)})")
    lines.append(f"(assert {to_smtlib_term(formula)})")
    lines.append('(check-sat)')
    return '\n'.join(lines) + '\n'


__all__ = ['to_smtlib', 'to_smtlib_term', 'symbol']
