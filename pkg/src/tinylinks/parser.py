"""Parser for the Links-style surface syntax of TinyLinks.

The core language only applies values to values and only stores values in
constructors, events and pages.  Surface programs may write arbitrary
expressions in those positions (``buy(5)("a")``, ``f(a, b)``,
``Text(g(1))``); the parser binds such sub-expressions to fresh ``var``
temporaries, left to right, so the resulting AST follows the core grammar.
Multi-parameter functions are curried.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass

from . import syntax as s

KEYWORDS = frozenset({"var", "fun", "get", "post", "event", "assert", "href", "form", "switch", "case"})

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<num>\d+)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<arrow>->)
  | (?P<punct>[(){}\[\],;=+\-*/])
    """,
    re.VERBOSE,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # num | str | ident | op | eof
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            if kind in ("arrow", "punct"):
                kind = "op"
            tokens.append(Token(kind, text, line, pos - line_start + 1))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# Tokens after which an expression may continue a named function declaration.
_STOPPERS = frozenset({")", "}", "]", ",", ";", "->", "=", "+", "-", "*", "/"})


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0
        self._taken = {t.text for t in self.tokens if t.kind == "ident"}
        self._generated: set[str] = set()
        self._counter = 0

    # -- token helpers --------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        tok = self.tok
        self.pos += 1
        return tok

    def ident(self, what: str = "identifier") -> str:
        tok = self.tok
        if tok.kind != "ident" or tok.text in KEYWORDS:
            raise self.error(f"expected {what}, found {tok.text or 'end of input'!r}")
        self.pos += 1
        return tok.text

    def binder(self) -> str:
        tok = self.tok
        name = self.ident("binder")
        if name in s.NAMED_CONSTRUCTORS:
            raise self.error(f"constructor {name} cannot be bound", tok)
        return name

    # -- A-normalisation ------------------------------------------------

    def fresh(self) -> str:
        while True:
            self._counter += 1
            name = f"_a{self._counter}"
            if name not in self._taken:
                self._taken.add(name)
                self._generated.add(name)
                return name

    def hoist(self, e: s.Expr) -> tuple[list[tuple[str, s.Expr]], s.Value]:
        """Split ``e`` into temporaries to evaluate first and a value."""
        if isinstance(e, s.Val):
            return [], e.value
        if isinstance(e, s.Let) and e.name in self._generated:
            binds, v = self.hoist(e.body)
            return [(e.name, e.bound)] + binds, v
        name = self.fresh()
        return [(name, e)], s.Var(name)

    def hoist_all(self, exprs: list[s.Expr]) -> tuple[list[tuple[str, s.Expr]], list[s.Value]]:
        binds: list[tuple[str, s.Expr]] = []
        values = []
        for e in exprs:
            b, v = self.hoist(e)
            binds.extend(b)
            values.append(v)
        return binds, values

    @staticmethod
    def wrap(binds: list[tuple[str, s.Expr]], e: s.Expr) -> s.Expr:
        for name, bound in reversed(binds):
            e = s.Let(name, bound, e)
        return e

    # -- grammar ----------------------------------------------------------

    def program(self) -> s.Expr:
        e = self.expr()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return e

    def expr(self) -> s.Expr:
        if self.accept("var"):
            name = self.binder()
            self.expect("=")
            bound = self.expr()
            self.expect(";")
            return s.Let(name, bound, self.expr())
        if self.at("fun") and self.tokens[self.pos + 1].kind == "ident":
            return self.fun_declaration()
        return self.additive()

    def fun_declaration(self) -> s.Expr:
        self.expect("fun")
        name = self.binder()
        fn = self.fun_rest()
        if self.accept(";") or (self.tok.kind != "eof" and self.tok.text not in _STOPPERS):
            return s.Let(name, s.Val(fn), self.expr())
        return s.Val(fn)

    def fun_rest(self) -> s.Lambda:
        self.expect("(")
        params = [self.binder()]
        while self.accept(","):
            params.append(self.binder())
        self.expect(")")
        body = self.block()
        for p in reversed(params):
            body = s.Val(s.Lambda(p, body))
        return body.value  # type: ignore[return-value]

    def block(self) -> s.Expr:
        self.expect("{")
        e = self.expr()
        self.expect("}")
        return e

    def additive(self) -> s.Expr:
        e = self.term()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.pos += 1
            e = s.Prim(op, e, self.term())
        return e

    def term(self) -> s.Expr:
        e = self.postfix()
        while self.at("*") or self.at("/"):
            op = self.tok.text
            self.pos += 1
            e = s.Prim(op, e, self.postfix())
        return e

    def postfix(self) -> s.Expr:
        e = self.primary()
        while self.at("("):
            self.pos += 1
            args = self.comma_list(self.expr, ")")
            if not args:
                raise self.error("application needs at least one argument")
            binds, (fn, *values) = self.hoist_all([e, *args])
            for i, v in enumerate(values):
                call = s.App(fn, v)
                if i + 1 < len(values):
                    b, fn = self.hoist(call)
                    binds.extend(b)
                else:
                    e = self.wrap(binds, call)
        return e

    def comma_list(self, item, close: str) -> list:
        items = []
        if not self.accept(close):
            items.append(item())
            while self.accept(","):
                items.append(item())
            self.expect(close)
        return items

    def primary(self) -> s.Expr:
        tok = self.tok
        if tok.kind == "num":
            self.pos += 1
            return s.Val(s.num(int(tok.text)))
        if self.at("-") and self.tokens[self.pos + 1].kind == "num":
            self.pos += 2
            return s.Val(s.num(-int(self.tokens[self.pos - 1].text)))
        if tok.kind == "str":
            self.pos += 1
            return s.Val(s.string(json.loads(tok.text)))
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind != "ident":
            raise self.error(f"unexpected {tok.text or 'end of input'!r}")
        if tok.text in s.NAMED_CONSTRUCTORS:
            return self.constructor()
        handler = {
            "fun": self.lambda_,
            "href": self.href,
            "form": self.form,
            "get": self.get,
            "post": self.post,
            "event": self.annotation,
            "assert": self.annotation,
            "switch": self.switch,
        }.get(tok.text)
        if handler is not None:
            return handler()
        if tok.text in KEYWORDS:
            raise self.error(f"unexpected keyword {tok.text!r}")
        if tok.text == "_":
            raise self.error("'_' cannot be used as a value")
        self.pos += 1
        return s.Val(s.Var(tok.text))

    def constructor(self) -> s.Expr:
        tok = self.tok
        tag = tok.text
        self.pos += 1
        args = self.comma_list(self.expr, ")") if self.accept("(") else []
        if tag == s.TUPLE:
            if len(args) < 2:
                raise self.error("Tuple needs at least two components", tok)
            ctor = s.Constructor(tag, len(args))
        else:
            ctor = s.Constructor(tag)
        if len(args) != ctor.arity:
            raise self.error(f"{tag} expects {ctor.arity} argument(s), got {len(args)}", tok)
        binds, values = self.hoist_all(args)
        return self.wrap(binds, s.Val(s.Con(ctor, tuple(values))))

    def lambda_(self) -> s.Expr:
        self.expect("fun")
        return s.Val(self.fun_rest())

    def href(self) -> s.Expr:
        self.expect("href")
        self.expect("(")
        body = self.expr()
        self.expect(")")
        return s.Val(s.Href(body))

    def form(self) -> s.Expr:
        self.expect("form")
        self.expect("(")
        self.expect("[")
        labels = self.comma_list(lambda: self.ident("label"), "]")
        self.expect(",")
        body = self.expr()
        self.expect(")")
        return s.Val(s.Form(tuple(labels), body))

    def get(self) -> s.Expr:
        self.expect("get")
        self.expect("(")
        target = self.expr()
        self.expect(")")
        binds, v = self.hoist(target)
        return self.wrap(binds, s.Get(v))

    def post(self) -> s.Expr:
        self.expect("post")
        self.expect("(")
        self.expect("{")

        def field():
            label = self.ident("label")
            self.expect("=")
            return label, self.expr()

        fields = self.comma_list(field, "}")
        self.expect(",")
        target = self.expr()
        self.expect(")")
        binds, values = self.hoist_all([e for _, e in fields] + [target])
        labelled = tuple(zip((label for label, _ in fields), values[:-1]))
        return self.wrap(binds, s.Post(labelled, values[-1]))

    def annotation(self) -> s.Expr:
        kind = self.tok.text
        self.pos += 1
        pred = self.ident("predicate")
        self.expect("(")
        arg = self.expr()
        self.expect(")")
        binds, v = self.hoist(arg)
        node = s.EventAnn if kind == "event" else s.AssertAnn
        return self.wrap(binds, node(s.Event(pred, v)))

    def switch(self) -> s.Expr:
        self.expect("switch")
        self.expect("(")
        scrut = self.expr()
        self.expect(")")
        self.expect("{")
        self.expect("case")
        ctor, binders = self.pattern()
        self.expect("->")
        matched = self.expr()
        self.expect(";")
        self.expect("_")
        self.expect("->")
        default = self.expr()
        self.expect("}")
        binds, v = self.hoist(scrut)
        return self.wrap(binds, s.Switch(v, ctor, tuple(binders), matched, default))

    def pattern(self) -> tuple[s.Constructor, list[str]]:
        tok = self.tok
        negative = self.at("-") and self.tokens[self.pos + 1].kind == "num"
        if negative:
            self.pos += 1
            tok = self.tok
        if tok.kind == "num":
            self.pos += 1
            return s.Constructor(s.INT, -int(tok.text) if negative else int(tok.text)), []
        if tok.kind == "str":
            self.pos += 1
            return s.Constructor(s.STR, json.loads(tok.text)), []
        if tok.kind != "ident" or tok.text not in s.NAMED_CONSTRUCTORS:
            raise self.error("expected a constructor pattern")
        self.pos += 1
        binders = self.comma_list(self.binder, ")") if self.accept("(") else []
        if tok.text == s.TUPLE:
            if len(binders) < 2:
                raise self.error("Tuple pattern needs at least two binders", tok)
            ctor = s.Constructor(s.TUPLE, len(binders))
        else:
            ctor = s.Constructor(tok.text)
        if len(binders) != ctor.arity:
            raise self.error(f"{tok.text} pattern binds {ctor.arity} variable(s)", tok)
        return ctor, binders


def parse(source: str) -> s.Expr:
    """Parse a TinyLinks program, raising :class:`ParseError` on bad input."""
    return _Parser(source).program()
