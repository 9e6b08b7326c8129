"""
Recursive-descent readers for `.schema`, `.smpsl` and `.spec` sources and for
standalone formulas.

Every reader reports the first problem it meets: grammar violations raise
`ParseError` with the offending token's line and column; ill-sorted commands
and atoms raise `SortError` carrying the same location suffix.
"""

import logging
from typing import List

from app.errors import ParseError, SortError
from app.frontend.lexer import Token, TokenType, tokenize
from app.frontend.models import (
    Attribute, TableDecl, ConstDecl, SchemaDecl, CONST_SCHEMA, CONST_PARAM, CONST_LOCAL, CONST_GHOST,
    CondTrue, AttEq, AttIn, AttInList, CondNot, CondAnd, CondOr, Select,
    RelEmpty, TermsEqual, BranchNot,
    Insert, Update, Delete, SelectAssign, Choose, IfElse, IfExit, ProgramAst, SpecFile,
)
from app.logic.models import (
    DOM, Sort, Var, Const, Atom, Eq, Not, And, Or, Implies, Iff, Forall, Exists,
    TRUE, FALSE, conj, neg, forall, iff,
)
from app.logic.services import TWO_VARIABLES

logger = logging.getLogger(__name__)

def _where(token):
    return f" at line {token.line}:{token.col}"


class _TokenParser:
    """Cursor over a token list with the usual one-token lookahead helpers."""

    def __init__(self, tokens: List[Token], pos=0):
        self._tokens = tokens
        self._pos = pos

    @property
    def position(self):
        return self._pos

    def _peek(self, offset=0) -> Token:
        index = self._pos + offset
        if index >= len(self._tokens):
            return self._tokens[-1]
        return self._tokens[index]

    def _previous(self) -> Token:
        return self._tokens[self._pos - 1]

    def _is_at_end(self) -> bool:
        return self._peek().type == TokenType.EOF

    def _check(self, type: TokenType, offset=0) -> bool:
        return self._peek(offset).type == type

    def _advance(self) -> Token:
        if not self._is_at_end():
            self._pos += 1
        return self._previous()

    def _match(self, *types: TokenType) -> bool:
        for type in types:
            if self._check(type):
                self._advance()
                return True
        return False

    def _consume(self, type: TokenType, message: str) -> Token:
        if self._check(type):
            return self._advance()
        self._fail(message)

    def _check_word(self, word, offset=0):
        token = self._peek(offset)
        return token.type == TokenType.IDENT and token.word == word

    def _match_word(self, *words):
        for word in words:
            if self._check_word(word):
                self._advance()
                return True
        return False

    def _consume_word(self, word, message):
        if self._check_word(word):
            return self._advance()
        self._fail(message)

    def _ident(self, what):
        return self._consume(TokenType.IDENT, f"Expected {what}")

    def _fail(self, message, token=None):
        token = token or self._peek()
        found = 'end of input' if token.type == TokenType.EOF else repr(token.value)
        raise ParseError(f"{message}, found {found}", token.line, token.col)

    def _sort_error(self, message, token):
        raise SortError(message + _where(token))


# --- Schemas ---

class SchemaParser(_TokenParser):
    """
    Reads `domain`, `table` and `const` declarations.

    Args:
        tokens (list): Token stream.
        domain_sizes (dict, optional): domain name -> size overriding the declared size.
    """

    def __init__(self, tokens, domain_sizes=None, pos=0, domains=None, reserved=()):
        super().__init__(tokens, pos)
        self._sizes = dict(domain_sizes or {})
        self._domains = dict(domains or {})
        self._reserved = set(reserved)
        self._tables = {}
        self._constants = {}

    def parse(self) -> SchemaDecl:
        while not self._is_at_end():
            if self._match_word('domain'):
                self._parse_domain()
            elif self._match_word('table'):
                table = self.table_declaration()
                self._tables[table.name] = table
            elif self._match_word('const'):
                const = self.const_declaration(CONST_SCHEMA)
                self._constants[const.name] = const
            else:
                self._fail("Expected 'domain', 'table' or 'const'")
        if not self._tables:
            raise ParseError("no tables declared")
        unknown = set(self._sizes) - set(self._domains)
        if unknown:
            raise SortError(f"size given for undeclared domain(s): {', '.join(sorted(unknown))}")
        return SchemaDecl(self._domains, self._tables, self._constants)

    def _declare(self, name, token):
        if (name in self._tables or name in self._constants or name in self._domains
                or name in self._reserved or name == DOM.name):
            raise ParseError(f"duplicate name '{name}'", token.line, token.col)
        for sort in self._domains.values():
            if name in sort.elements:
                raise ParseError(f"'{name}' is already an element of domain '{sort.name}'", token.line, token.col)

    def _parse_domain(self):
        name_token = self._ident("domain name")
        name = name_token.value
        self._declare(name, name_token)
        size = None
        if self._match(TokenType.LPAREN):
            size = int(self._consume(TokenType.NUMBER, "Expected domain size").value)
            self._consume(TokenType.RPAREN, "Expected ')' after domain size")
        elements = []
        if self._match(TokenType.EQ):
            self._consume(TokenType.LBRACE, "Expected '{' before domain elements")
            while True:
                token = self._ident("element name")
                if token.value in elements:
                    raise ParseError(f"element '{token.value}' repeated in domain '{name}'", token.line, token.col)
                self._declare(token.value, token)
                elements.append(token.value)
                if not self._match(TokenType.COMMA):
                    break
            self._consume(TokenType.RBRACE, "Expected '}' after domain elements")
        self._consume(TokenType.SEMICOLON, "Expected ';' after domain declaration")
        if name in self._sizes:
            size = self._sizes[name]
        if size is None and not elements:
            raise ParseError(f"domain '{name}' needs a size or an element list", name_token.line, name_token.col)
        if size is not None and size < len(elements):
            raise SortError(f"domain '{name}' has size {size} but lists {len(elements)} elements{_where(name_token)}")
        self._domains[name] = Sort.bounded(name, size, elements)

    def _sort(self, token):
        if token.value == DOM.name:
            return DOM
        if token.value not in self._domains:
            raise ParseError(f"unknown sort '{token.value}'", token.line, token.col)
        return self._domains[token.value]

    def table_declaration(self, ghost=False):
        name_token = self._ident("table name")
        self._declare(name_token.value, name_token)
        self._consume(TokenType.LPAREN, "Expected '(' after table name")
        attributes = []
        while True:
            att = self._ident("attribute name")
            if any(a.name == att.value for a in attributes):
                raise ParseError(f"attribute '{att.value}' repeated in table '{name_token.value}'", att.line, att.col)
            self._consume(TokenType.COLON, "Expected ':' after attribute name")
            attributes.append(Attribute(att.value, self._sort(self._ident("sort name"))))
            if not self._match(TokenType.COMMA):
                break
        self._consume(TokenType.RPAREN, "Expected ')' after attributes")
        self._consume(TokenType.SEMICOLON, "Expected ';' after table declaration")
        table = TableDecl(name_token.value, tuple(attributes), ghost=ghost)
        if table.unbounded_count > 2:
            raise ParseError(f"table '{table.name}' has {table.unbounded_count} attributes of sort dom (at most 2 allowed)",
                             name_token.line, name_token.col)
        return table

    def const_declaration(self, kind):
        name_token = self._ident("constant name")
        self._declare(name_token.value, name_token)
        self._consume(TokenType.COLON, "Expected ':' after constant name")
        sort = self._sort(self._ident("sort name"))
        self._consume(TokenType.SEMICOLON, "Expected ';' after constant declaration")
        return ConstDecl(name_token.value, sort, kind)


# --- Programs ---

class ProgramParser(_TokenParser):
    """
    Reads one SmpSL function against a schema.

    Select-assignment targets that are not declared tables become program
    locals with the projection's attributes; CHOOSE targets that are not
    declared constants become local constants with the chosen columns' sorts.
    """

    def __init__(self, tokens, schema: SchemaDecl):
        super().__init__(tokens)
        self._schema = schema

    def parse(self) -> ProgramAst:
        name = self._ident("function name").value
        self._consume(TokenType.LPAREN, "Expected '(' after function name")
        params = []
        if not self._check(TokenType.RPAREN):
            while True:
                token = self._ident("parameter name")
                sort = DOM
                if self._match(TokenType.COLON):
                    sort_token = self._ident("sort name")
                    try:
                        sort = self._schema.sort(sort_token.value)
                    except SortError:
                        raise ParseError(f"unknown sort '{sort_token.value}'", sort_token.line, sort_token.col) from None
                if (self._schema.has_name(token.value) or self._schema.element_sort(token.value) is not None
                        or any(p.name == token.value for p in params)):
                    raise ParseError(f"parameter '{token.value}' clashes with a declared name", token.line, token.col)
                params.append(ConstDecl(token.value, sort, CONST_PARAM))
                if not self._match(TokenType.COMMA):
                    break
        self._consume(TokenType.RPAREN, "Expected ')' after parameters")
        self._consume(TokenType.COLON, "Expected ':' after function header")
        self._schema = self._schema.extend(constants=params)
        body = self._commands(until=TokenType.EOF)
        logger.debug(f"parsed program {name} with {len(body)} top-level commands")
        return ProgramAst(name, tuple(params), tuple(body), self._schema)

    def _commands(self, until):
        commands = []
        while not self._check(until) and not self._is_at_end():
            commands.append(self._command())
            self._match(TokenType.SEMICOLON)
        return commands

    def _block(self):
        if self._match(TokenType.LBRACE):
            body = self._commands(until=TokenType.RBRACE)
            self._consume(TokenType.RBRACE, "Expected '}' to close block")
            return tuple(body)
        return (self._command(),)

    def _command(self):
        token = self._peek()
        if self._match_word('if'):
            return self._if()
        if self._match_word('insert'):
            return self._insert()
        if self._match_word('update'):
            return self._update()
        if self._match_word('delete'):
            return self._delete()
        if token.type == TokenType.LPAREN:
            return self._choose_tuple()
        if token.type == TokenType.IDENT and self._check(TokenType.EQ, 1):
            if self._check_word('select', 2):
                return self._select_assign()
            if self._check_word('choose', 2):
                target = self._advance()
                self._advance()
                self._advance()
                return self._choose([target])
        self._fail("Expected a command")

    # Branches

    def _if(self):
        self._consume(TokenType.LPAREN, "Expected '(' after if")
        cond = self._branch_cond()
        self._consume(TokenType.RPAREN, "Expected ')' after condition")
        if self._match_word('exit'):
            return IfExit(cond)
        then_body = self._block()
        if self._check(TokenType.SEMICOLON) and self._check_word('else', 1):
            self._advance()
        else_body = ()
        if self._match_word('else'):
            else_body = self._block()
        return IfElse(cond, then_body, else_body)

    def _branch_cond(self):
        if self._match(TokenType.BANG) or self._match_word('not'):
            return BranchNot(self._branch_cond())
        if self._match(TokenType.LPAREN):
            cond = self._branch_cond()
            self._consume(TokenType.RPAREN, "Expected ')'")
            return cond
        left = self._ident("table or term")
        if not (self._check(TokenType.EQ) or self._check(TokenType.NEQ)):
            self._fail("Expected '=' or '!=' in condition")
        negated = self._advance().type == TokenType.NEQ
        if self._check_word('empty'):
            self._advance()
            if left.value not in self._schema.tables:
                raise ParseError(f"unknown table '{left.value}'", left.line, left.col)
            cond = RelEmpty(left.value)
        else:
            right = self._ident("term")
            lterm, rterm = self._term_pair(left, right)
            cond = TermsEqual(lterm, rterm)
        return BranchNot(cond) if negated else cond

    # Terms

    def _term(self, token, expected=None):
        const = self._schema.constant(token.value)
        if const is not None:
            if expected is not None and const.sort != expected:
                self._sort_error(f"'{token.value}' has sort '{const.sort}', expected '{expected}'", token)
            return const
        if expected is not None:
            if expected.is_bounded and token.value in expected.elements:
                return Const(token.value, expected)
            if self._schema.element_sort(token.value) is not None:
                self._sort_error(f"'{token.value}' is not an element of sort '{expected}'", token)
        else:
            sort = self._schema.element_sort(token.value)
            if sort is not None:
                return Const(token.value, sort)
        raise ParseError(f"unknown name '{token.value}'", token.line, token.col)

    def _term_pair(self, left, right):
        lconst = self._schema.constant(left.value)
        if lconst is not None:
            return lconst, self._term(right, lconst.sort)
        rterm = self._term(right)
        return self._term(left, rterm.sort), rterm

    # SmpSQL

    def _select(self):
        self._consume_word('select', "Expected SELECT")
        if self._match(TokenType.STAR):
            projected = None
        else:
            projected = [self._ident("attribute name")]
            while self._match(TokenType.COMMA):
                projected.append(self._ident("attribute name"))
        self._consume_word('from', "Expected FROM")
        table_token = self._ident("table name")
        table = self._table(table_token)
        if projected is None:
            attributes = table.attribute_names
        else:
            for att in projected:
                self._attribute(table, att)
            attributes = tuple(att.value for att in projected)
        cond = self._where(table)
        return Select(attributes, table.name, cond)

    def _table(self, token):
        table = self._schema.tables.get(token.value)
        if table is None:
            raise ParseError(f"unknown table '{token.value}'", token.line, token.col)
        return table

    def _attribute(self, table, token):
        if token.value not in table.attribute_names:
            raise ParseError(f"table '{table.name}' has no attribute '{token.value}'", token.line, token.col)
        return table.attributes[table.position(token.value)]

    def _where(self, table):
        if self._match_word('where'):
            return self._cond_or(table)
        return CondTrue()

    def _cond_or(self, table):
        cond = self._cond_and(table)
        while self._match_word('or'):
            cond = CondOr(cond, self._cond_and(table))
        return cond

    def _cond_and(self, table):
        cond = self._cond_not(table)
        while self._match_word('and'):
            cond = CondAnd(cond, self._cond_not(table))
        return cond

    def _cond_not(self, table):
        if self._match_word('not'):
            return CondNot(self._cond_not(table))
        return self._cond_primary(table)

    def _cond_primary(self, table):
        if self._check(TokenType.LPAREN):
            if self._check(TokenType.IDENT, 1) and self._check(TokenType.COMMA, 2):
                return self._tuple_in(table)
            self._advance()
            cond = self._cond_or(table)
            self._consume(TokenType.RPAREN, "Expected ')' after condition")
            return cond
        att_token = self._ident("attribute name")
        att = self._attribute(table, att_token)
        if self._match(TokenType.EQ):
            return AttEq(att.name, self._term(self._ident("term"), att.sort))
        if self._match(TokenType.NEQ):
            return CondNot(AttEq(att.name, self._term(self._ident("term"), att.sort)))
        if self._match_word('in'):
            return self._in_rhs(table, [att], att_token)
        self._fail("Expected '=', '!=' or IN after attribute")

    def _tuple_in(self, table):
        self._consume(TokenType.LPAREN, "Expected '('")
        first = self._peek()
        atts = [self._attribute(table, self._ident("attribute name"))]
        while self._match(TokenType.COMMA):
            atts.append(self._attribute(table, self._ident("attribute name")))
        self._consume(TokenType.RPAREN, "Expected ')' after attribute list")
        self._consume_word('in', "Expected IN after attribute list")
        return self._in_rhs(table, atts, first)

    def _in_rhs(self, table, atts, where_token):
        if self._check(TokenType.LPAREN) and self._check_word('select', 1):
            self._advance()
            select = self._select()
            self._consume(TokenType.RPAREN, "Expected ')' after nested select")
            inner = self._schema.table(select.table)
            inner_sorts = tuple(inner.attributes[inner.position(a)].sort for a in select.attributes)
            if inner_sorts != tuple(a.sort for a in atts):
                self._sort_error("IN compares attributes with a select of different arity or sorts", where_token)
            return AttIn(tuple(a.name for a in atts), select)
        if len(atts) != 1:
            self._fail("Expected a nested SELECT after a tuple IN")
        att = atts[0]
        parenthesized = self._match(TokenType.LPAREN)
        values = [self._term(self._ident("element"), att.sort)]
        while self._match(TokenType.COMMA):
            values.append(self._term(self._ident("element"), att.sort))
        if parenthesized:
            self._consume(TokenType.RPAREN, "Expected ')' after IN list")
        return AttInList(att.name, tuple(values))

    # Data-manipulating commands

    def _insert(self):
        self._consume(TokenType.LPAREN, "Expected '(' after INSERT")
        tokens = [self._ident("value")]
        while self._match(TokenType.COMMA):
            tokens.append(self._ident("value"))
        self._consume(TokenType.RPAREN, "Expected ')' after values")
        self._consume_word('into', "Expected INTO")
        table = self._table(self._ident("table name"))
        if len(tokens) != table.arity:
            self._sort_error(f"INSERT gives {len(tokens)} values for '{table.name}' of arity {table.arity}", tokens[0])
        values = tuple(self._term(tok, att.sort) for tok, att in zip(tokens, table.attributes))
        return Insert(table.name, values)

    def _update(self):
        table = self._table(self._ident("table name"))
        self._consume_word('set', "Expected SET")
        assignments = []
        while True:
            att = self._attribute(table, self._ident("attribute name"))
            if any(name == att.name for name, _ in assignments):
                self._fail(f"attribute '{att.name}' assigned twice", self._previous())
            self._consume(TokenType.EQ, "Expected '=' in SET")
            assignments.append((att.name, self._term(self._ident("value"), att.sort)))
            if not self._match(TokenType.COMMA):
                break
        return Update(table.name, tuple(assignments), self._where(table))

    def _delete(self):
        self._consume_word('from', "Expected FROM after DELETE")
        table = self._table(self._ident("table name"))
        return Delete(table.name, self._where(table))

    def _select_assign(self):
        target = self._advance()
        self._advance()
        select = self._select()
        source = self._schema.table(select.table)
        attributes = tuple(source.attributes[source.position(a)] for a in select.attributes)
        existing = self._schema.tables.get(target.value)
        if existing is None:
            if self._schema.has_name(target.value):
                raise ParseError(f"'{target.value}' is not a table", target.line, target.col)
            self._schema = self._schema.extend(tables=[TableDecl(target.value, attributes, local=True)])
        elif existing.sorts != tuple(a.sort for a in attributes):
            self._sort_error(f"select does not match the sorts of table '{target.value}'", target)
        return SelectAssign(target.value, select)

    def _choose_tuple(self):
        self._consume(TokenType.LPAREN, "Expected '('")
        targets = [self._ident("constant name")]
        while self._match(TokenType.COMMA):
            targets.append(self._ident("constant name"))
        self._consume(TokenType.RPAREN, "Expected ')' after CHOOSE targets")
        self._consume(TokenType.EQ, "Expected '=' before CHOOSE")
        self._consume_word('choose', "Expected CHOOSE")
        return self._choose(targets)

    def _choose(self, targets):
        table = self._table(self._ident("table name"))
        if len(targets) != table.arity:
            self._sort_error(f"CHOOSE assigns {len(targets)} names from '{table.name}' of arity {table.arity}", targets[0])
        declared = []
        for token, att in zip(targets, table.attributes):
            const = self._schema.constant(token.value)
            if const is None:
                if self._schema.has_name(token.value):
                    raise ParseError(f"'{token.value}' is not a constant", token.line, token.col)
                declared.append(ConstDecl(token.value, att.sort, CONST_LOCAL))
            elif const.sort != att.sort:
                self._sort_error(f"'{token.value}' has sort '{const.sort}', column '{att.name}' has '{att.sort}'", token)
        if declared:
            self._schema = self._schema.extend(constants=declared)
        return Choose(tuple(t.value for t in targets), table.name)


# --- Formulas ---

class FormulaParser(_TokenParser):
    """
    Reads formulas in the `forall[sort] x, y. ...` syntax.

    Identifier resolution order: innermost bound variable, declared constant,
    `define`d formula, then bounded-element literal (its sort taken from the
    context). With `check_fo2bd` every quantifier over `dom` must bind x or y.
    """

    def __init__(self, tokens, schema: SchemaDecl, check_fo2bd=True, copies=1, copy_names=()):
        super().__init__(tokens)
        self._schema = schema
        self._check_fo2bd = check_fo2bd
        self._scope = []
        self._macros = {}
        self._copies = copies
        self._copy_names = set(copy_names)
        self._copy = None

    def parse_single(self):
        f = self._formula()
        if not self._is_at_end():
            self._fail("Unexpected token after formula")
        return f

    def _formula(self):
        return self._iff()

    def _iff(self):
        left = self._implies()
        while self._match(TokenType.DARROW):
            left = Iff(left, self._implies())
        return left

    def _implies(self):
        left = self._or()
        if self._match(TokenType.ARROW):
            return Implies(left, self._implies())
        return left

    def _or(self):
        parts = [self._and()]
        while self._match(TokenType.PIPE):
            parts.append(self._and())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def _and(self):
        parts = [self._unary()]
        while self._match(TokenType.AMP):
            parts.append(self._unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def _unary(self):
        if self._match(TokenType.BANG):
            return Not(self._unary())
        if self._check_word('forall') or self._check_word('exists'):
            return self._quantifier()
        return self._primary()

    def _quantifier(self):
        kind = Forall if self._advance().word == 'forall' else Exists
        sort = DOM
        if self._match(TokenType.LBRACKET):
            sort_token = self._ident("sort name")
            try:
                sort = self._schema.sort(sort_token.value)
            except SortError:
                raise ParseError(f"unknown sort '{sort_token.value}'", sort_token.line, sort_token.col) from None
            self._consume(TokenType.RBRACKET, "Expected ']' after sort")
        names = [self._ident("variable name")]
        while self._match(TokenType.COMMA):
            names.append(self._ident("variable name"))
        self._consume(TokenType.DOT, "Expected '.' after quantified variables")
        variables = []
        for token in names:
            if self._check_fo2bd and not sort.is_bounded and token.value not in TWO_VARIABLES:
                raise ParseError(f"variable '{token.value}' ranges over dom but is neither x nor y",
                                 token.line, token.col)
            variables.append(Var(token.value, sort))
        self._scope.extend(variables)
        try:
            body = self._formula()
        finally:
            del self._scope[len(self._scope) - len(variables):]
        for var in reversed(variables):
            body = kind(var, body)
        return body

    def _primary(self):
        token = self._peek()
        if token.type == TokenType.LPAREN:
            self._advance()
            f = self._formula()
            self._consume(TokenType.RPAREN, "Expected ')'")
            return f
        if token.type != TokenType.IDENT:
            self._fail("Expected a formula")
        if token.value == 'TRUE':
            self._advance()
            return TRUE
        if token.value == 'FALSE':
            self._advance()
            return FALSE
        if token.value in ('all_copies', 'any_copy') and self._check(TokenType.LPAREN, 1):
            return self._copy_formula()
        if token.value == 'distinct_copies' and self._check(TokenType.LPAREN, 1):
            return self._distinct_copies()
        if self._check(TokenType.LPAREN, 1):
            return self._atom()
        if token.value in self._macros and self._lookup_var(token.value) is None and not self._is_equality_ahead():
            return self._expand_macro(self._advance())
        if token.value in self._schema.tables and self._is_equality_ahead():
            return self._table_equality()
        return self._equality()

    def _is_equality_ahead(self):
        return self._check(TokenType.EQ, 1) or self._check(TokenType.NEQ, 1)

    def _atom(self):
        name = self._advance()
        table = self._schema.tables.get(name.value)
        if table is None:
            raise ParseError(f"unknown relation '{name.value}'", name.line, name.col)
        self._consume(TokenType.LPAREN, "Expected '('")
        tokens = [self._ident("term")]
        while self._match(TokenType.COMMA):
            tokens.append(self._ident("term"))
        self._consume(TokenType.RPAREN, "Expected ')' after arguments")
        if len(tokens) != table.arity:
            self._sort_error(f"'{table.name}' expects {table.arity} arguments, got {len(tokens)}", name)
        return Atom(table.name, tuple(self._term(tok, att.sort) for tok, att in zip(tokens, table.attributes)))

    def _equality(self):
        left = self._ident("term")
        if not (self._check(TokenType.EQ) or self._check(TokenType.NEQ)):
            self._fail("Expected '=' or '!='")
        negated = self._advance().type == TokenType.NEQ
        right = self._ident("term")
        lterm = self._resolve(left)
        rterm = self._resolve(right)
        if lterm is None and rterm is None:
            lterm = self._term(left)
        if lterm is None:
            lterm = self._term(left, rterm.sort)
        if rterm is None:
            rterm = self._term(right, lterm.sort)
        if lterm.sort != rterm.sort:
            self._sort_error(f"equality between sorts '{lterm.sort}' and '{rterm.sort}'", left)
        eq = Eq(lterm, rterm)
        return Not(eq) if negated else eq

    def _table_equality(self):
        left = self._advance()
        negated = self._advance().type == TokenType.NEQ
        right = self._ident("table name")
        lt = self._schema.tables[left.value]
        rt = self._schema.tables.get(right.value)
        if rt is None:
            raise ParseError(f"unknown table '{right.value}'", right.line, right.col)
        if lt.sorts != rt.sorts:
            self._sort_error(f"tables '{lt.name}' and '{rt.name}' have different sorts", left)
        f = table_equality(lt, rt)
        return Not(f) if negated else f

    # Names

    def _lookup_var(self, name):
        for var in reversed(self._scope):
            if var.name == name:
                return var
        return None

    def _copy_name(self, token):
        name = token.value
        if name not in self._copy_names or self._copies == 1:
            return name
        if self._copy is None:
            raise ParseError(f"'{name}' differs per copy; use it inside all_copies(...) or any_copy(...)",
                             token.line, token.col)
        return f"{name}{self._copy}"

    def _resolve(self, token):
        var = self._lookup_var(token.value)
        if var is not None:
            return var
        return self._schema.constant(self._copy_name(token))

    def _term(self, token, expected=None):
        term = self._resolve(token)
        if term is None:
            sort = expected if expected is not None and expected.is_bounded and token.value in expected.elements \
                else self._schema.element_sort(token.value)
            if sort is None:
                raise ParseError(f"unknown name '{token.value}'", token.line, token.col)
            term = Const(token.value, sort)
        if expected is not None and term.sort != expected:
            self._sort_error(f"'{token.value}' has sort '{term.sort}', expected '{expected}'", token)
        return term

    # Macros and copies

    def _expand_macro(self, token):
        start, end = self._macros[token.value]
        saved_pos, saved_scope = self._pos, self._scope
        self._pos, self._scope = start, []
        try:
            f = self._formula()
            if self._pos != end:
                self._fail(f"Definition '{token.value}' does not end where expected")
        finally:
            self._pos, self._scope = saved_pos, saved_scope
        return f

    def _copy_formula(self):
        word = self._advance()
        if self._copy is not None:
            raise ParseError("copy constructs cannot be nested", word.line, word.col)
        self._consume(TokenType.LPAREN, "Expected '('")
        if self._copies == 1:
            f = self._formula()
        else:
            start, parts = self._pos, []
            try:
                for index in range(1, self._copies + 1):
                    self._pos, self._copy = start, index
                    parts.append(self._formula())
            finally:
                self._copy = None
            f = conj(*parts) if word.value == 'all_copies' else _disj(parts)
        self._consume(TokenType.RPAREN, f"Expected ')' to close {word.value}")
        return f

    def _distinct_copies(self):
        word = self._advance()
        self._consume(TokenType.LPAREN, "Expected '('")
        start = self._pos
        rows = []
        try:
            for index in range(1, self._copies + 1):
                self._pos, self._copy = start, index
                terms = [self._term(self._ident("term"))]
                while self._match(TokenType.COMMA):
                    terms.append(self._term(self._ident("term")))
                rows.append(terms)
        finally:
            self._copy = None
        self._consume(TokenType.RPAREN, f"Expected ')' to close {word.value}")
        distinct = []
        for i in range(len(rows)):
            for j in range(i + 1, len(rows)):
                same = [Eq(a, b) for a, b in zip(rows[i], rows[j])]
                distinct.append(neg(conj(*same)))
        return conj(*distinct)


def _disj(parts):
    return parts[0] if len(parts) == 1 else Or(tuple(parts))


def table_equality(left: TableDecl, right: TableDecl):
    """`∀ columns. left(...) <-> right(...)`; dom columns use x then y."""
    variables = []
    unbounded = iter(TWO_VARIABLES)
    bounded_index = 0
    for att in left.attributes:
        if att.sort.is_bounded:
            bounded_index += 1
            variables.append(Var(f"{att.sort.name[0]}{bounded_index}", att.sort))
        else:
            variables.append(Var(next(unbounded), DOM))
    body = iff(Atom(left.name, tuple(variables)), Atom(right.name, tuple(variables)))
    ordered = [v for v in variables if not v.sort.is_bounded] + [v for v in variables if v.sort.is_bounded]
    return forall(ordered, body)


# --- Specification files ---

class SpecParser(FormulaParser):
    """
    Reads a `.spec` file: ghost declarations, definitions, invariants, pre and post.
    """

    def __init__(self, tokens, schema, program=None, copies=1):
        names = set(program.per_copy_names) if program is not None else set()
        super().__init__(tokens, schema, check_fo2bd=True, copies=copies, copy_names=names)
        self._program = program
        self._ghost_tables = []
        self._ghost_constants = []
        self._definitions = {}
        self._per_copy = []

    def parse(self, source='') -> SpecFile:
        pre, post, invariants = [], [], []
        while not self._is_at_end():
            if self._match_word('ghost'):
                self._ghost()
            elif self._match_word('per_copy'):
                self._per_copy_decl()
            elif self._match_word('define'):
                self._define()
            elif self._match_word('invariant'):
                invariants.append(self._statement())
            elif self._match_word('pre'):
                pre.append(self._statement())
            elif self._match_word('post'):
                post.append(self._statement())
            else:
                self._fail("Expected 'ghost', 'per_copy', 'define', 'invariant', 'pre' or 'post'")
        return SpecFile(
            pre=conj(*pre), post=conj(*post), invariants=tuple(invariants),
            ghost_tables=tuple(self._ghost_tables), ghost_constants=tuple(self._ghost_constants),
            definitions=dict(self._definitions), per_copy=tuple(self._per_copy),
            schema=self._schema, source=source, copies=self._copies,
        )

    def _statement(self):
        f = self._formula()
        self._consume(TokenType.SEMICOLON, "Expected ';' after formula")
        return f

    def _ghost(self):
        reserved = set(self._schema.tables) | set(self._schema.constants)
        if not (self._check_word('table') or self._check_word('const')):
            self._fail("Expected 'table' or 'const' after ghost")
        is_table = self._advance().word == 'table'
        helper = SchemaParser(self._tokens, pos=self._pos, domains=self._schema.domains, reserved=reserved)
        if is_table:
            decl = helper.table_declaration(ghost=True)
            self._ghost_tables.append(decl)
            self._schema = self._schema.extend(tables=[decl])
        else:
            decl = helper.const_declaration(CONST_GHOST)
            self._ghost_constants.append(decl)
            self._schema = self._schema.extend(constants=[decl])
        self._pos = helper.position

    def _per_copy_decl(self):
        while True:
            token = self._ident("constant name")
            if token.value not in self._schema.constants and not (
                    self._copies > 1 and f"{token.value}1" in self._schema.constants):
                raise ParseError(f"per_copy names an undeclared constant '{token.value}'", token.line, token.col)
            self._per_copy.append(token.value)
            self._copy_names.add(token.value)
            if not self._match(TokenType.COMMA):
                break
        self._consume(TokenType.SEMICOLON, "Expected ';' after per_copy")

    def _define(self):
        name = self._ident("definition name")
        if self._schema.has_name(name.value) or name.value in self._macros:
            raise ParseError(f"definition '{name.value}' clashes with a declared name", name.line, name.col)
        self._consume(TokenType.DEFINE, "Expected ':=' after definition name")
        start = self._pos
        if self._copies == 1:
            self._definitions[name.value] = self._formula()
        else:
            # Per-copy names only resolve where the definition is used.
            while not self._check(TokenType.SEMICOLON) and not self._is_at_end():
                self._advance()
        self._macros[name.value] = (start, self._pos)
        self._consume(TokenType.SEMICOLON, "Expected ';' after definition")


# --- Entry points ---

def parse_schema(text, domain_sizes=None):
    """
    Parses a `.schema` source.

    Args:
        text (str): Schema source.
        domain_sizes (dict, optional): Overrides for bounded-domain sizes
            (`--domain codes=5`); extra elements are auto-named.

    Returns:
        SchemaDecl: The validated schema.

    Raises:
        ParseError: On grammar errors, duplicates, unknown sorts, an empty
            schema or a table with more than two `dom` attributes.
    """
    return SchemaParser(tokenize(text), domain_sizes).parse()


def parse_program(text, schema):
    """
    Parses one SmpSL function and sort-checks it against `schema`.

    Returns:
        ProgramAst: The program; its `schema` includes parameters and locals.
    """
    return ProgramParser(tokenize(text), schema).parse()


def parse_formula(text, schema, check_fo2bd=True):
    """
    Parses a closed formula over `schema`.

    Raises:
        ParseError: On grammar errors or (with `check_fo2bd`) a `dom`
            variable other than x and y, naming the variable.
        SortError: On ill-sorted atoms or equalities.
    """
    return FormulaParser(tokenize(text), schema, check_fo2bd=check_fo2bd).parse_single()


def parse_spec(text, schema, program=None, copies=1):
    """
    Parses a `.spec` file.

    Args:
        text (str): Spec source.
        schema (SchemaDecl): Database schema; ignored when `program` is given,
            whose state schema (with parameters and locals) is used instead.
        program (ProgramAst, optional): The program the spec belongs to.
        copies (int): Number of program copies (see `inflate`).

    Returns:
        SpecFile: With the ghost-extended state schema and the source text.
    """
    base = program.schema if program is not None else schema
    return SpecParser(tokenize(text), base, program, copies).parse(source=text)
