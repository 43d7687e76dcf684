"""Concrete denotational semantics of TinyLinks.

Programs are treated as an untyped strict lambda-calculus that threads an
events environment.  Every dynamic type confusion produces the ``WRONG``
sentinel paired with the empty events environment; nothing here raises on a
bad program.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Callable, Mapping, Union

from . import syntax as s


class Mark(enum.Enum):
    E = "E"  # occurred
    EA = "EA"  # occurred and asserted
    A = "A"  # asserted only

    def __str__(self):
        return self.value

    @property
    def occurred(self) -> bool:
        return self is not Mark.A


# pred -> (denotable value, mark).  Treated as immutable: updates copy.
EEnv = Mapping[str, tuple]
IOTA: EEnv = {}


def bind_event(phi: EEnv, pred: str, d, mark: Mark) -> dict:
    out = dict(phi)
    out[pred] = (d, mark)
    return out


# -- the Eval domain ----------------------------------------------------------


@dataclass(frozen=True)
class Int:
    n: int


@dataclass(frozen=True)
class Str:
    s: str


@dataclass(frozen=True)
class UnitV:
    pass


@dataclass(frozen=True)
class XmlText:
    s: str


@dataclass(frozen=True)
class XmlElem:
    tag: "Eval"
    child: "Eval"


@dataclass(frozen=True)
class NilV:
    pass


@dataclass(frozen=True)
class ConsV:
    head: "Eval"
    tail: "Eval"


@dataclass(frozen=True)
class TupleV:
    items: tuple


@dataclass(frozen=True, eq=False)
class HrefC:
    suspension: Callable[[EEnv], tuple]


@dataclass(frozen=True, eq=False)
class FormC:
    suspension: Callable[[EEnv, list], tuple]


@dataclass(frozen=True, eq=False)
class FunC:
    f: Callable[[EEnv, "Eval"], tuple]


class _Wrong:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "WRONG"


WRONG = _Wrong()

Eval = Union[Int, Str, UnitV, XmlText, XmlElem, NilV, ConsV, TupleV, HrefC, FormC, FunC, _Wrong]
Env = Mapping[str, Eval]

_XML = (XmlText, XmlElem, HrefC, FormC)


class StepLimitExceeded(Exception):
    pass


class Evaluator:
    """Evaluator with an optional step budget (one step per expression node)."""

    def __init__(self, max_steps: int | None = None):
        self.max_steps = max_steps
        self.steps = 0

    def _tick(self):
        self.steps += 1
        if self.max_steps is not None and self.steps > self.max_steps:
            raise StepLimitExceeded(self.steps)

    # -- values -----------------------------------------------------------

    def value(self, v: s.Value, rho: Env, phi: EEnv) -> Eval:
        match v:
            case s.Var(name):
                return rho.get(name, WRONG)
            case s.Con(ctor, args):
                return self._construct(ctor, [self.value(a, rho, phi) for a in args])
            case s.Lambda(param, body):
                def fun(phi2, w, rho=rho):
                    return self.expr(body, _extend(rho, param, w), phi2)

                return FunC(fun)
            case s.Href(body):
                return HrefC(lambda phi2, rho=rho: self.expr(body, rho, phi2))
            case s.Form(labels, body):
                def form(phi2, values, rho=rho):
                    if len(set(labels)) != len(labels):
                        return WRONG, IOTA
                    inner = dict(rho)
                    for i, label in enumerate(labels):
                        inner[label] = values[i] if i < len(values) else Str("")
                    return self.expr(body, inner, phi2)

                return FormC(form)
        raise TypeError(f"not a value: {v!r}")

    @staticmethod
    def _construct(ctor: s.Constructor, args: list) -> Eval:
        if any(a is WRONG for a in args):
            return WRONG
        tag = ctor.tag
        if tag == s.INT:
            return Int(ctor.payload)
        if tag == s.STR:
            return Str(ctor.payload)
        if tag == s.UNIT:
            return UnitV()
        if tag == s.ZERO:
            return Int(0)
        if tag == s.NIL:
            return NilV()
        if tag == s.SUCC:
            (a,) = args
            return Int(a.n + 1) if isinstance(a, Int) else WRONG
        if tag == s.TEXT:
            (a,) = args
            return XmlText(a.s) if isinstance(a, Str) else WRONG
        if tag == s.ELEM:
            tag_v, child = args
            if isinstance(tag_v, Str) and isinstance(child, _XML):
                return XmlElem(tag_v, child)
            return WRONG
        if tag == s.CONS:
            return ConsV(args[0], args[1])
        if tag == s.TUPLE:
            return TupleV(tuple(args))
        raise AssertionError(tag)

    # -- expressions ------------------------------------------------------

    def expr(self, e: s.Expr, rho: Env, phi: EEnv) -> tuple[Eval, EEnv]:
        self._tick()
        match e:
            case s.Val(v):
                w = self.value(v, rho, phi)
                return (w, phi) if w is not WRONG else (WRONG, IOTA)
            case s.Let(name, bound, body):
                w, phi1 = self.expr(bound, rho, phi)
                if w is WRONG:
                    return WRONG, IOTA
                return self.expr(body, _extend(rho, name, w), phi1)
            case s.Prim(op, left, right):
                a, phi1 = self.expr(left, rho, phi)
                if a is WRONG:
                    return WRONG, IOTA
                b, phi2 = self.expr(right, rho, phi1)
                if not (isinstance(a, Int) and isinstance(b, Int)):
                    return WRONG, IOTA
                r = arith(op, a.n, b.n)
                return (Int(r), phi2) if r is not None else (WRONG, IOTA)
            case s.App(fn, arg):
                f = self.value(fn, rho, phi)
                w = self.value(arg, rho, phi)
                if not isinstance(f, FunC) or w is WRONG:
                    return WRONG, IOTA
                return _strict(f.f(phi, w))
            case s.Get(target):
                v = self.value(target, rho, phi)
                if isinstance(v, HrefC):
                    return _strict(v.suspension(phi))
                return WRONG, IOTA
            case s.Post(fields, target):
                v = self.value(target, rho, phi)
                labels = [label for label, _ in fields]
                values = [self.value(x, rho, phi) for _, x in fields]
                if len(set(labels)) != len(labels) or not all(isinstance(x, Str) for x in values):
                    return WRONG, IOTA
                if isinstance(v, FormC):
                    return _strict(v.suspension(phi, values))
                return WRONG, IOTA
            case s.EventAnn(ev):
                d = self.value(ev.arg, rho, phi)
                if isinstance(d, Int):
                    return UnitV(), bind_event(phi, ev.pred, d.n, Mark.E)
                return WRONG, IOTA
            case s.AssertAnn(ev):
                d = self.value(ev.arg, rho, phi)
                if not isinstance(d, Int) or ev.pred not in phi:
                    return WRONG, IOTA
                bound, _ = phi[ev.pred]
                if bound == d.n:
                    return UnitV(), bind_event(phi, ev.pred, bound, Mark.EA)
                return WRONG, IOTA
            case s.Switch(scrut, ctor, binders, matched, default):
                v = self.value(scrut, rho, phi)
                if v is WRONG:
                    return WRONG, IOTA
                parts = _match(ctor, v)
                if parts is None:
                    return self.expr(default, rho, phi)
                inner = rho
                for name, part in zip(binders, parts):
                    inner = _extend(inner, name, part)
                return self.expr(matched, inner, phi)
        raise TypeError(f"not an expression: {e!r}")


def _extend(rho: Env, name: str, w: Eval) -> Env:
    if name == "_":
        return rho
    out = dict(rho)
    out[name] = w
    return out


def _strict(result: tuple) -> tuple:
    w, phi = result
    return (WRONG, IOTA) if w is WRONG else (w, phi)


def arith(op: str, a: int, b: int) -> int | None:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if b == 0:
        return None
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b > 0) else -q


def _match(ctor: s.Constructor, v: Eval) -> list | None:
    tag = ctor.tag
    if tag == s.UNIT and isinstance(v, UnitV):
        return []
    if tag == s.ZERO and v == Int(0):
        return []
    if tag == s.SUCC and isinstance(v, Int) and v.n >= 1:
        return [Int(v.n - 1)]
    if tag == s.INT and v == Int(ctor.payload):
        return []
    if tag == s.STR and v == Str(ctor.payload):
        return []
    if tag == s.NIL and isinstance(v, NilV):
        return []
    if tag == s.CONS and isinstance(v, ConsV):
        return [v.head, v.tail]
    if tag == s.TUPLE and isinstance(v, TupleV) and len(v.items) == ctor.payload:
        return list(v.items)
    if tag == s.TEXT and isinstance(v, XmlText):
        return [Str(v.s)]
    if tag == s.ELEM and isinstance(v, XmlElem):
        return [v.tag, v.child]
    return None


def eval_value(v: s.Value, rho: Env, phi: EEnv) -> Eval:
    return Evaluator().value(v, rho, phi)


def eval_expr(e: s.Expr, rho: Env, phi: EEnv) -> tuple[Eval, EEnv]:
    return Evaluator().expr(e, rho, phi)


# -- reports ------------------------------------------------------------------


def render_value(v: Eval) -> str:
    match v:
        case _Wrong():
            return "Wrong"
        case Int(n):
            return str(n)
        case Str(text):
            return _quote(text)
        case UnitV():
            return "Unit"
        case XmlText(text):
            return f"Xml(Text({_quote(text)}))"
        case XmlElem(tag, child):
            return f"Xml(Elem({render_value(tag)}, {render_value(child)}))"
        case NilV():
            return "Nil"
        case ConsV(head, tail):
            return f"Cons({render_value(head)}, {render_value(tail)})"
        case TupleV(items):
            return f"Tuple({', '.join(render_value(x) for x in items)})"
        case HrefC():
            return "Link(<suspension>)"
        case FormC():
            return "Form(<suspension>)"
        case FunC():
            return "Fun(<closure>)"
    raise TypeError(v)


def _quote(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)


def render_eenv(phi: EEnv, dval=str) -> str:
    items = ", ".join(f"{q} -> ({dval(d)}, {m})" for q, (d, m) in sorted(phi.items()))
    return "{" + items + "}"


SAFE, UNSAFE, SKIPPED = "safe", "unsafe", "skipped"


@dataclass
class RunReport:
    value: Eval | None
    events: EEnv
    verdict: str  # safe | unsafe | skipped
    steps: int

    @property
    def wrong(self) -> bool:
        return self.verdict == UNSAFE

    def render(self) -> str:
        if self.verdict == SKIPPED:
            return f"skipped after {self.steps} steps"
        return f"{render_value(self.value)} {render_eenv(self.events)}"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "value": None if self.value is None else render_value(self.value),
            "events": {q: [d, str(m)] for q, (d, m) in sorted(self.events.items())},
        }


def run(program: s.Expr, max_steps: int | None = 100_000) -> RunReport:
    """Execute a closed program from the empty environments.

    Exceeding the step budget (or Python's recursion limit) yields a
    ``skipped`` report instead of a verdict.
    """
    ev = Evaluator(max_steps)
    try:
        value, phi = ev.expr(program, {}, IOTA)
    except (StepLimitExceeded, RecursionError):
        return RunReport(None, IOTA, SKIPPED, ev.steps)
    return RunReport(value, phi, UNSAFE if value is WRONG else SAFE, ev.steps)
