"""
Printer for the concrete formula syntax read by `app.frontend.parser.parse_formula`.

Canonical layout: binary connectives separated by single spaces, quantifier
blocks merged (`forall[dom] x, y. ...`), and any quantifier that is not the
whole formula or the body of another quantifier wrapped in parentheses.
"""

from app.logic.models import TrueF, FalseF, Atom, Eq, Not, And, Or, Implies, Iff, Forall, Exists

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5}
_ATOMIC = 6


def _prec(f):
    if isinstance(f, (Forall, Exists)):
        return 0
    if isinstance(f, Not) and isinstance(f.arg, Eq):
        return _ATOMIC
    return _PREC.get(type(f), _ATOMIC)


def term_to_text(t):
    return t.name


def _wrap(f, needs):
    text = to_text(f)
    return f"({text})" if needs else text


def _child(f, parent_prec, strict=True):
    p = _prec(f)
    if p == 0:
        return _wrap(f, True)
    return _wrap(f, p < parent_prec or (strict and p == parent_prec))


def to_text(f):
    """Renders `f` in the concrete formula syntax."""
    if isinstance(f, TrueF):
        return 'TRUE'
    if isinstance(f, FalseF):
        return 'FALSE'
    if isinstance(f, Atom):
        return f"{f.rel}({', '.join(term_to_text(t) for t in f.args)})"
    if isinstance(f, Eq):
        return f"{term_to_text(f.left)} = {term_to_text(f.right)}"
    if isinstance(f, Not):
        if isinstance(f.arg, Eq):
            return f"{term_to_text(f.arg.left)} != {term_to_text(f.arg.right)}"
        return '!' + _child(f.arg, _PREC[Not], strict=False)
    if isinstance(f, And):
        return ' & '.join(_child(a, _PREC[And]) for a in f.args)
    if isinstance(f, Or):
        return ' | '.join(_child(a, _PREC[Or]) for a in f.args)
    if isinstance(f, Implies):
        return f"{_child(f.left, _PREC[Implies])} -> {_child(f.right, _PREC[Implies], strict=False)}"
    if isinstance(f, Iff):
        return f"{_child(f.left, _PREC[Iff])} <-> {_child(f.right, _PREC[Iff])}"
    if isinstance(f, (Forall, Exists)):
        keyword = 'forall' if isinstance(f, Forall) else 'exists'
        names = [f.var.name]
        body = f.body
        while type(body) is type(f) and body.var.sort == f.var.sort:
            names.append(body.var.name)
            body = body.body
        return f"{keyword}[{f.var.sort.name}] {', '.join(names)}. {to_text(body)}"
    raise TypeError(f"not a formula: {f!r}")


def to_pretty(f, indent=0, width=100):
    """
    Multi-line rendering for large formulas (used by --emit-wp and --emit-vc).

    Top-level conjunctions and disjunctions are split one operand per line;
    anything shorter than `width` stays on one line.
    """
    pad = '  ' * indent
    flat = to_text(f)
    if len(flat) + len(pad) <= width:
        return pad + flat
    if isinstance(f, (And, Or)):
        op = '&' if isinstance(f, And) else '|'
        lines = [pad + '(']
        for i, arg in enumerate(f.args):
            lines.append(to_pretty(arg, indent + 1, width) + ('' if i == len(f.args) - 1 else f' {op}'))
        lines.append(pad + ')')
        return '\n'.join(lines)
    if isinstance(f, (Forall, Exists)):
        keyword = 'forall' if isinstance(f, Forall) else 'exists'
        return f"{pad}{keyword}[{f.var.sort.name}] {f.var.name}.\n{to_pretty(f.body, indent + 1, width)}"
    if isinstance(f, Not):
        return f"{pad}!(\n{to_pretty(f.arg, indent + 1, width)}\n{pad})"
    if isinstance(f, (Implies, Iff)):
        op = '->' if isinstance(f, Implies) else '<->'
        return f"{pad}(\n{to_pretty(f.left, indent + 1, width)}\n{pad}{op}\n{to_pretty(f.right, indent + 1, width)}\n{pad})"
    return pad + flat
