"""Abstract syntax of TinyLinks.

Values and expressions are frozen dataclasses, so ASTs hash, compare
structurally and can be shared freely between the three semantics.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

# Constructor tags. ``Int`` and ``Str`` carry a payload (the numeral / text),
# ``Tuple`` carries its arity.
UNIT = "Unit"
ZERO = "Zero"
SUCC = "Succ"
INT = "Int"
STR = "Str"
NIL = "Nil"
CONS = "Cons"
TUPLE = "Tuple"
ELEM = "Elem"
TEXT = "Text"

CONSTRUCTOR_TAGS = (UNIT, ZERO, SUCC, INT, STR, NIL, CONS, TUPLE, ELEM, TEXT)
# Tags written by name in the surface syntax.
NAMED_CONSTRUCTORS = (UNIT, ZERO, SUCC, NIL, CONS, TUPLE, ELEM, TEXT)

_FIXED_ARITY = {UNIT: 0, ZERO: 0, INT: 0, STR: 0, NIL: 0, SUCC: 1, TEXT: 1, CONS: 2, ELEM: 2}

PRIM_OPS = ("+", "-", "*", "/")


@dataclass(frozen=True)
class Constructor:
    tag: str
    payload: int | str | None = None

    def __post_init__(self):
        if self.tag not in CONSTRUCTOR_TAGS:
            raise ValueError(f"unknown constructor {self.tag!r}")
        if self.tag == INT and not isinstance(self.payload, int):
            raise ValueError("Int constructor needs an integer payload")
        if self.tag == STR and not isinstance(self.payload, str):
            raise ValueError("Str constructor needs a text payload")
        if self.tag == TUPLE and not (isinstance(self.payload, int) and self.payload >= 2):
            raise ValueError("Tuple arity must be at least 2")

    @property
    def arity(self) -> int:
        if self.tag == TUPLE:
            return self.payload  # type: ignore[return-value]
        return _FIXED_ARITY[self.tag]


# -- values -----------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Con:
    ctor: Constructor
    args: tuple[Value, ...] = ()

    def __post_init__(self):
        if len(self.args) != self.ctor.arity:
            raise ValueError(
                f"{self.ctor.tag} expects {self.ctor.arity} argument(s), got {len(self.args)}"
            )


@dataclass(frozen=True)
class Href:
    body: Expr


@dataclass(frozen=True)
class Lambda:
    param: str
    body: Expr


@dataclass(frozen=True)
class Form:
    labels: tuple[str, ...]
    body: Expr


Value = Union[Var, Con, Href, Lambda, Form]

# -- expressions ------------------------------------------------------------


@dataclass(frozen=True)
class Event:
    """A predicate applied to exactly one value, ``p(V)``."""

    pred: str
    arg: Value


@dataclass(frozen=True)
class Val:
    value: Value


@dataclass(frozen=True)
class Let:
    name: str  # "_" discards the bound value
    bound: Expr
    body: Expr


@dataclass(frozen=True)
class Prim:
    op: str
    left: Expr
    right: Expr

    def __post_init__(self):
        if self.op not in PRIM_OPS:
            raise ValueError(f"unknown primitive operator {self.op!r}")


@dataclass(frozen=True)
class App:
    fn: Value
    arg: Value


@dataclass(frozen=True)
class Post:
    fields: tuple[tuple[str, Value], ...]
    target: Value


@dataclass(frozen=True)
class Get:
    target: Value


@dataclass(frozen=True)
class EventAnn:
    event: Event


@dataclass(frozen=True)
class AssertAnn:
    event: Event


@dataclass(frozen=True)
class Switch:
    scrutinee: Value
    ctor: Constructor
    binders: tuple[str, ...]
    matched: Expr
    default: Expr

    def __post_init__(self):
        if len(self.binders) != self.ctor.arity:
            raise ValueError(
                f"pattern {self.ctor.tag} binds {self.ctor.arity} variable(s), got {len(self.binders)}"
            )


Expr = Union[Val, Let, Prim, App, Post, Get, EventAnn, AssertAnn, Switch]

VALUE_TYPES = (Var, Con, Href, Lambda, Form)
EXPR_TYPES = (Val, Let, Prim, App, Post, Get, EventAnn, AssertAnn, Switch)


# -- smart constructors used by tests and the enumerator --------------------


def num(n: int) -> Con:
    return Con(Constructor(INT, n))


def string(s: str) -> Con:
    return Con(Constructor(STR, s))


def unit() -> Con:
    return Con(Constructor(UNIT))


def text(s: str | Value) -> Con:
    arg = string(s) if isinstance(s, str) else s
    return Con(Constructor(TEXT), (arg,))


def elem(tag: Value, child: Value) -> Con:
    return Con(Constructor(ELEM), (tag, child))


def event(pred: str, arg: Value) -> EventAnn:
    return EventAnn(Event(pred, arg))


def assert_(pred: str, arg: Value) -> AssertAnn:
    return AssertAnn(Event(pred, arg))


def seq(first: Expr, then: Expr) -> Let:
    """``var _ = first; then``"""
    return Let("_", first, then)


def free_vars(node: Value | Expr) -> frozenset[str]:
    """Identifiers occurring free in a value or expression."""
    match node:
        case Var(name):
            return frozenset({name})
        case Con(_, args):
            return frozenset().union(*(free_vars(a) for a in args))
        case Href(body):
            return free_vars(body)
        case Lambda(param, body):
            return free_vars(body) - {param}
        case Form(labels, body):
            return free_vars(body) - set(labels)
        case Val(v):
            return free_vars(v)
        case Let(name, bound, body):
            return free_vars(bound) | (free_vars(body) - {name})
        case Prim(_, left, right):
            return free_vars(left) | free_vars(right)
        case App(fn, arg):
            return free_vars(fn) | free_vars(arg)
        case Post(fields, target):
            return free_vars(target).union(*(free_vars(v) for _, v in fields))
        case Get(target):
            return free_vars(target)
        case EventAnn(ev) | AssertAnn(ev):
            return free_vars(ev.arg)
        case Switch(scrut, _, binders, matched, default):
            return free_vars(scrut) | (free_vars(matched) - set(binders)) | free_vars(default)
    raise TypeError(f"not a TinyLinks node: {node!r}")
