"""Recursive-descent parser producing one MethodDecl tree per source unit.

Grammar (one method per file):

    method     : type IDENT '(' [param {',' param}] ')' block
    param      : type IDENT
    type       : IDENT | 'void'-like IDENT (no special casing; any identifier)
    block      : '{' {stmt} '}'
    stmt       : vardecl | assign | ifstmt | returnstmt | exprstmt
    vardecl    : type IDENT ['=' expr] ';'
    assign     : IDENT '=' expr ';'
    ifstmt     : 'if' '(' expr ')' body ['else' body]
    body       : block | stmt          -- single statements normalized to blocks
    returnstmt : 'return' [expr] ';'
    exprstmt   : expr ';'
    expr       : orexpr
    orexpr     : andexpr {'||' andexpr}
    andexpr    : eqexpr {'&&' eqexpr}
    eqexpr     : relexpr {('==' | '!=') relexpr}
    relexpr    : addexpr {('<' | '>') addexpr}
    addexpr    : postfix {('+' | '-') postfix}
    postfix    : primary {'.' IDENT ['(' args ')']}
    primary    : IDENT ['(' args ')'] | NUMBER | STRING | 'true' | 'false'
               | 'null' | '(' expr ')'
"""

from __future__ import annotations

import itertools

from sepforge.errors import MinijSyntaxError, MultipleMethodsError
from sepforge.minij import ast as A
from sepforge.minij.lexer import Token, tokenize

_BIN_LEVELS = [["||"], ["&&"], ["==", "!="], ["<", ">"], ["+", "-"]]


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.ids = itertools.count(0)

    # -- token helpers -------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type != "EOF":
            self.pos += 1
        return tok

    def expect(self, ttype: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok.type != ttype or (text is not None and tok.text != text):
            want = text if text is not None else ttype
            raise MinijSyntaxError(f"expected {want!r}, found {tok.text or tok.type!r}",
                                   tok.line, tok.column)
        return self.advance()

    def at(self, ttype: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.type == ttype and (text is None or tok.text == text)

    def node(self, kind: str, label: str = "", tok: Token | None = None) -> A.AstNode:
        n = A.AstNode(id=next(self.ids), kind=kind, label=label)
        if tok is not None:
            n.span = (tok.line, tok.column, tok.line, tok.column + max(len(tok.text), 1))
        return n

    def _close_span(self, n: A.AstNode, start: Token, end: Token) -> None:
        n.span = (start.line, start.column, end.line, end.column + max(len(end.text), 1))

    # -- grammar -------------------------------------------------------

    def parse_method(self) -> A.AstNode:
        start = self.peek()
        ret_type = self.type_name()
        name = self.expect("IDENT")
        method = self.node(A.METHOD_DECL, name.text)
        method.add_child(ret_type)
        self.expect("PUNCT", "(")
        if not self.at("PUNCT", ")"):
            method.add_child(self.param())
            while self.at("PUNCT", ","):
                self.advance()
                method.add_child(self.param())
        self.expect("PUNCT", ")")
        method.add_child(self.block())
        end = self.tokens[self.pos - 1]
        self._close_span(method, start, end)
        if not self.at("EOF"):
            nxt = self.peek()
            # A second `Type name (` sequence means another method follows.
            if nxt.type == "IDENT" and self.peek(1).type == "IDENT" \
                    and self.peek(2).type == "PUNCT" and self.peek(2).text == "(":
                raise MultipleMethodsError(
                    f"more than one method in source (line {nxt.line})")
            raise MinijSyntaxError("trailing input after method", nxt.line, nxt.column)
        return method

    def type_name(self) -> A.AstNode:
        tok = self.expect("IDENT")
        return self.node(A.TYPE_NAME, tok.text, tok)

    def param(self) -> A.AstNode:
        start = self.peek()
        ptype = self.type_name()
        name = self.expect("IDENT")
        p = self.node(A.PARAM)
        p.add_child(ptype)
        p.add_child(self.node(A.IDENTIFIER, name.text, name))
        self._close_span(p, start, name)
        return p

    def block(self) -> A.AstNode:
        start = self.expect("PUNCT", "{")
        b = self.node(A.BLOCK)
        while not self.at("PUNCT", "}"):
            if self.at("EOF"):
                tok = self.peek()
                raise MinijSyntaxError("unterminated block", tok.line, tok.column)
            b.add_child(self.statement())
        end = self.expect("PUNCT", "}")
        self._close_span(b, start, end)
        return b

    def statement(self) -> A.AstNode:
        if self.at("KEYWORD", "if"):
            return self.if_stmt()
        if self.at("KEYWORD", "return"):
            return self.return_stmt()
        # `Type name ...` introduces a declaration; `name = ...` an assignment.
        if self.at("IDENT") and self.peek(1).type == "IDENT":
            return self.var_decl_stmt()
        if self.at("IDENT") and self.peek(1).type == "OP" and self.peek(1).text == "=":
            return self.assign_stmt()
        return self.expr_stmt()

    def var_decl_stmt(self) -> A.AstNode:
        start = self.peek()
        vtype = self.type_name()
        name = self.expect("IDENT")
        frag = self.node(A.VAR_DECL_FRAGMENT)
        frag.add_child(self.node(A.IDENTIFIER, name.text, name))
        if self.at("OP", "="):
            self.advance()
            frag.add_child(self.expression())
        end = self.expect("PUNCT", ";")
        stmt = self.node(A.VAR_DECL_STMT)
        stmt.add_child(vtype)
        stmt.add_child(frag)
        self._close_span(frag, start, end)
        self._close_span(stmt, start, end)
        return stmt

    def assign_stmt(self) -> A.AstNode:
        start = self.peek()
        name = self.expect("IDENT")
        self.expect("OP", "=")
        stmt = self.node(A.ASSIGN)
        stmt.add_child(self.node(A.IDENTIFIER, name.text, name))
        stmt.add_child(self.expression())
        end = self.expect("PUNCT", ";")
        self._close_span(stmt, start, end)
        return stmt

    def if_stmt(self) -> A.AstNode:
        start = self.expect("KEYWORD", "if")
        self.expect("PUNCT", "(")
        cond = self.expression()
        self.expect("PUNCT", ")")
        stmt = self.node(A.IF_STMT)
        stmt.add_child(cond)
        stmt.add_child(self.if_body())
        if self.at("KEYWORD", "else"):
            self.advance()
            stmt.add_child(self.if_body())
        end = self.tokens[self.pos - 1]
        self._close_span(stmt, start, end)
        return stmt

    def if_body(self) -> A.AstNode:
        if self.at("PUNCT", "{"):
            return self.block()
        # Single-statement body: normalize by wrapping in a block.
        inner = self.statement()
        b = self.node(A.BLOCK)
        b.add_child(inner)
        b.span = inner.span
        return b

    def return_stmt(self) -> A.AstNode:
        start = self.expect("KEYWORD", "return")
        stmt = self.node(A.RETURN_STMT)
        if not self.at("PUNCT", ";"):
            stmt.add_child(self.expression())
        end = self.expect("PUNCT", ";")
        self._close_span(stmt, start, end)
        return stmt

    def expr_stmt(self) -> A.AstNode:
        start = self.peek()
        expr = self.expression()
        end = self.expect("PUNCT", ";")
        stmt = self.node(A.EXPR_STMT)
        stmt.add_child(expr)
        self._close_span(stmt, start, end)
        return stmt

    def expression(self) -> A.AstNode:
        return self.binary(0)

    def binary(self, level: int) -> A.AstNode:
        if level >= len(_BIN_LEVELS):
            return self.postfix()
        node = self.binary(level + 1)
        while self.at("OP") and self.peek().text in _BIN_LEVELS[level]:
            op = self.advance()
            rhs = self.binary(level + 1)
            parent = self.node(A.BINARY_OP, op.text, op)
            parent.add_child(node)
            parent.add_child(rhs)
            node = parent
        return node

    def postfix(self) -> A.AstNode:
        node = self.primary()
        while self.at("PUNCT", "."):
            self.advance()
            name = self.expect("IDENT")
            if self.at("PUNCT", "("):
                call = self.node(A.METHOD_INVOCATION, name.text, name)
                call.has_receiver = True
                call.add_child(node)
                self.advance()
                self.arguments(call)
                end = self.expect("PUNCT", ")")
                self._close_span(call, name, end)
                node = call
            else:
                access = self.node(A.FIELD_ACCESS, name.text, name)
                access.add_child(node)
                node = access
        return node

    def arguments(self, call: A.AstNode) -> None:
        if self.at("PUNCT", ")"):
            return
        call.add_child(self.expression())
        while self.at("PUNCT", ","):
            self.advance()
            call.add_child(self.expression())

    def primary(self) -> A.AstNode:
        tok = self.peek()
        if tok.type == "IDENT":
            self.advance()
            if self.at("PUNCT", "("):
                # Receiverless invocation (implicit receiver).
                call = self.node(A.METHOD_INVOCATION, tok.text, tok)
                self.advance()
                self.arguments(call)
                end = self.expect("PUNCT", ")")
                self._close_span(call, tok, end)
                return call
            return self.node(A.IDENTIFIER, tok.text, tok)
        if tok.type == "NUMBER":
            self.advance()
            n = self.node(A.LITERAL, tok.text, tok)
            n.lit_category = A.LIT_NUMBER
            return n
        if tok.type == "STRING":
            self.advance()
            n = self.node(A.LITERAL, tok.text, tok)
            n.lit_category = A.LIT_STRING
            return n
        if tok.type == "KEYWORD" and tok.text in ("true", "false"):
            self.advance()
            n = self.node(A.LITERAL, tok.text, tok)
            n.lit_category = A.LIT_BOOLEAN
            return n
        if tok.type == "KEYWORD" and tok.text == "null":
            self.advance()
            n = self.node(A.LITERAL, tok.text, tok)
            n.lit_category = A.LIT_NULL
            return n
        if tok.type == "PUNCT" and tok.text == "(":
            self.advance()
            inner = self.expression()
            self.expect("PUNCT", ")")
            return inner
        raise MinijSyntaxError(f"expected expression, found {tok.text or tok.type!r}",
                               tok.line, tok.column)


def parse_method(source: str) -> A.AstNode:
    """Parses exactly one MiniJ method; see module docstring for the grammar."""
    tree = _Parser(tokenize(source)).parse_method()
    A.validate_tree(tree)
    return tree
