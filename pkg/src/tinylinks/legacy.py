"""The original type-and-effect judgments for TinyLinks.

Judgments have the form ``Γ; F ⊢ E : T {F'}``: ``F`` is the set of events
known to have occurred, ``F'`` the events produced.  Every piece of markup —
text, elements, links and forms — has the single type ``xml``, and that
conflation is precisely why this system accepts ``get(Text("Hello!"))``.

Only get, post, event, assert and application have published rules; the
remaining rules below are the minimal standard completion and are marked
``# completion``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Union

from . import syntax as s
from .pretty import pretty

# -- types and effects -----------------------------------------------------------


@dataclass(frozen=True)
class LBase:
    name: str  # unit | int | string | xml

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class LVar:
    id: int

    def __str__(self):
        return f"'t{self.id}"


@dataclass(frozen=True)
class LList:
    elem: "LType"

    def __str__(self):
        return f"list({self.elem})"


@dataclass(frozen=True)
class LTuple:
    items: tuple

    def __str__(self):
        return f"tuple({', '.join(map(str, self.items))})"


@dataclass(frozen=True)
class LFun:
    """``<x:arg>{pre} -> result{post}``: a dependent function type."""

    param: str
    arg: "LType"
    pre: frozenset
    result: "LType"
    post: frozenset

    def __str__(self):
        return f"<{self.param}:{self.arg}>{render_effects(self.pre)} -> {self.result}{render_effects(self.post)}"


LType = Union[LBase, LVar, LList, LTuple, LFun]
L_UNIT, L_INT, L_STRING, L_XML = LBase("unit"), LBase("int"), LBase("string"), LBase("xml")

EffectSet = frozenset  # of s.Event, compared syntactically
NO_EFFECTS: EffectSet = frozenset()


def render_effects(effects) -> str:
    inner = ", ".join(sorted(f"{e.pred}<{pretty(e.arg)}>" for e in effects))
    return "{" + (f" {inner} " if inner else " ") + "}"


class LegacyFail(Exception):
    def __init__(self, rule: str, premise: str):
        super().__init__(f"FAIL({rule}, {premise})")
        self.rule = rule
        self.premise = premise


# -- value substitution inside effects ---------------------------------------------


def subst_value(v: s.Value, x: str, w: s.Value) -> s.Value:
    match v:
        case s.Var(name):
            return w if name == x else v
        case s.Con(ctor, args):
            return s.Con(ctor, tuple(subst_value(a, x, w) for a in args))
    # Suspensions never carry event values in practice; leave them intact.
    return v


def subst_effects(effects: EffectSet, x: str, w: s.Value) -> EffectSet:
    return frozenset(s.Event(e.pred, subst_value(e.arg, x, w)) for e in effects)


def subst_ltype(t: LType, x: str, w: s.Value) -> LType:
    match t:
        case LList(elem):
            return LList(subst_ltype(elem, x, w))
        case LTuple(items):
            return LTuple(tuple(subst_ltype(i, x, w) for i in items))
        case LFun(param, arg, pre, result, post):
            if param == x:
                return t
            return LFun(
                param,
                subst_ltype(arg, x, w),
                subst_effects(pre, x, w),
                subst_ltype(result, x, w),
                subst_effects(post, x, w),
            )
    return t


# -- the checker --------------------------------------------------------------------


class _Checker:
    def __init__(self):
        self.bindings: dict[int, LType] = {}
        self.counter = itertools.count()
        # One entry per enclosing function body: the preconditions it needs.
        self.pending: list[set] = []

    def fresh(self) -> LVar:
        return LVar(next(self.counter))

    def resolve(self, t: LType) -> LType:
        while isinstance(t, LVar) and t in self.bindings:
            t = self.bindings[t]
        return t

    def zonk(self, t: LType) -> LType:
        t = self.resolve(t)
        match t:
            case LList(elem):
                return LList(self.zonk(elem))
            case LTuple(items):
                return LTuple(tuple(self.zonk(i) for i in items))
            case LFun(param, arg, pre, result, post):
                return LFun(param, self.zonk(arg), pre, self.zonk(result), post)
        return t

    def _occurs(self, v: LVar, t: LType) -> bool:
        t = self.resolve(t)
        match t:
            case LVar():
                return t == v
            case LList(elem):
                return self._occurs(v, elem)
            case LTuple(items):
                return any(self._occurs(v, i) for i in items)
            case LFun(_, arg, _, result, _):
                return self._occurs(v, arg) or self._occurs(v, result)
        return False

    def unify(self, a: LType, b: LType, rule: str, premise: str) -> None:
        a, b = self.resolve(a), self.resolve(b)
        if a == b:
            return
        if isinstance(a, LVar) or isinstance(b, LVar):
            v, t = (a, b) if isinstance(a, LVar) else (b, a)
            if self._occurs(v, t):
                raise LegacyFail(rule, premise)
            self.bindings[v] = t
            return
        match a, b:
            case LList(x), LList(y):
                self.unify(x, y, rule, premise)
                return
            case LTuple(xs), LTuple(ys) if len(xs) == len(ys):
                for x, y in zip(xs, ys):
                    self.unify(x, y, rule, premise)
                return
            case LFun(), LFun():
                # Effects must agree once the parameters are identified.
                other = s.Var(a.param)
                if (
                    a.pre != subst_effects(b.pre, b.param, other)
                    or a.post != subst_effects(b.post, b.param, other)
                ):
                    raise LegacyFail(rule, premise)
                self.unify(a.arg, b.arg, rule, premise)
                self.unify(a.result, subst_ltype(b.result, b.param, other), rule, premise)
                return
        raise LegacyFail(rule, premise)

    def require(self, event: s.Event, F: EffectSet, rule: str, premise: str) -> None:
        """Side condition ``L ∈ F``; inside a function body it grows the precondition."""
        if event in F:
            return
        if self.pending:
            self.pending[-1].add(event)
            return
        raise LegacyFail(rule, premise)

    # values ------------------------------------------------------------------------

    def value(self, gamma: Mapping[str, LType], F: EffectSet, v: s.Value) -> LType:
        match v:
            case s.Var(name):
                if name not in gamma:
                    raise LegacyFail("T-Var", f"{name} ∈ dom(Γ)")  # completion
                return gamma[name]
            case s.Con(ctor, args):
                return self.constructor(gamma, F, ctor, args)
            case s.Href(body):  # completion: links are xml
                t, _ = self.expr(gamma, F, body)
                self.unify(t, L_XML, "T-Href", "body : xml")
                return L_XML
            case s.Form(labels, body):  # completion: forms are xml
                inner = {**gamma, **{label: L_STRING for label in labels}}
                t, _ = self.expr(inner, F, body)
                self.unify(t, L_XML, "T-Form", "body : xml")
                return L_XML
            case s.Lambda(param, body):  # completion: dependent function type
                arg = self.fresh()
                inner = gamma if param == "_" else {**gamma, param: arg}
                self.pending.append(set())
                try:
                    result, post = self.expr(inner, NO_EFFECTS, body)
                finally:
                    pre = frozenset(self.pending.pop())
                return LFun(param, arg, pre, result, post)
        raise TypeError(f"not a value: {v!r}")

    def constructor(self, gamma, F, ctor: s.Constructor, args) -> LType:  # completion
        ts = [self.value(gamma, F, a) for a in args]
        tag = ctor.tag
        rule = f"T-{tag}"
        if tag in (s.INT, s.ZERO):
            return L_INT
        if tag == s.STR:
            return L_STRING
        if tag == s.UNIT:
            return L_UNIT
        if tag == s.SUCC:
            self.unify(ts[0], L_INT, rule, "V : int")
            return L_INT
        if tag == s.TEXT:
            self.unify(ts[0], L_STRING, rule, "V : string")
            return L_XML
        if tag == s.ELEM:
            self.unify(ts[0], L_STRING, rule, "V1 : string")
            self.unify(ts[1], L_XML, rule, "V2 : xml")
            return L_XML
        if tag == s.NIL:
            return LList(self.fresh())
        if tag == s.CONS:
            t = LList(ts[0])
            self.unify(ts[1], t, rule, "V2 : list(T)")
            return t
        if tag == s.TUPLE:
            return LTuple(tuple(ts))
        raise AssertionError(tag)

    # expressions -------------------------------------------------------------------

    def expr(self, gamma: Mapping[str, LType], F: EffectSet, e: s.Expr) -> tuple[LType, EffectSet]:
        match e:
            case s.Val(v):  # completion
                return self.value(gamma, F, v), NO_EFFECTS
            case s.Let(name, bound, body):  # completion
                t1, f1 = self.expr(gamma, F, bound)
                inner = gamma if name == "_" else {**gamma, name: t1}
                t2, f2 = self.expr(inner, F | f1, body)
                return t2, f1 | f2
            case s.Prim(_, left, right):  # completion
                t1, f1 = self.expr(gamma, F, left)
                t2, f2 = self.expr(gamma, F | f1, right)
                self.unify(t1, L_INT, "T-Prim", "E1 : int")
                self.unify(t2, L_INT, "T-Prim", "E2 : int")
                return L_INT, f1 | f2
            case s.Get(target):
                self.unify(self.value(gamma, F, target), L_XML, "T-Get", "V : xml")
                return L_XML, NO_EFFECTS
            case s.Post(fields, target):
                for _, v in fields:
                    self.unify(self.value(gamma, F, v), L_STRING, "T-Post", "Vi : string")
                self.unify(self.value(gamma, F, target), L_XML, "T-Post", "U : xml")
                return L_XML, NO_EFFECTS
            case s.EventAnn(ev):
                self._scope(gamma, ev, "T-Event")
                self.value(gamma, F, ev.arg)
                return L_UNIT, frozenset({ev})
            case s.AssertAnn(ev):
                self._scope(gamma, ev, "T-Assert")
                self.value(gamma, F, ev.arg)
                self.require(ev, F, "T-Assert", "L ∈ F")
                return L_UNIT, frozenset({ev})
            case s.App(fn, arg):
                return self.apply(gamma, F, fn, arg)
            case s.Switch(scrut, ctor, binders, matched, default):  # completion
                return self.switch(gamma, F, scrut, ctor, binders, matched, default)
        raise TypeError(f"not an expression: {e!r}")

    @staticmethod
    def _scope(gamma, ev: s.Event, rule: str) -> None:
        if not s.free_vars(s.Val(ev.arg)) <= gamma.keys():
            raise LegacyFail(rule, "fv(F, L) ⊆ dom(Γ)")

    def apply(self, gamma, F, fn, arg) -> tuple[LType, EffectSet]:
        t = self.resolve(self.value(gamma, F, fn))
        ta = self.value(gamma, F, arg)
        if isinstance(t, LVar):
            # An unknown function is assumed to have no effects.
            t2 = LFun("_", ta, NO_EFFECTS, self.fresh(), NO_EFFECTS)
            self.unify(t, t2, "T-App", "U : <x:T1>{F1} -> T2{F2}")
            t = t2
        if not isinstance(t, LFun):
            raise LegacyFail("T-App", "U : <x:T1>{F1} -> T2{F2}")
        self.unify(ta, t.arg, "T-App", "V : T1")
        for ev in sorted(subst_effects(t.pre, t.param, arg), key=str):
            self.require(ev, F, "T-App", "F1{x↦V} ⊆ F")
        return subst_ltype(t.result, t.param, arg), subst_effects(t.post, t.param, arg)

    def switch(self, gamma, F, scrut, ctor, binders, matched, default):
        t = self.value(gamma, F, scrut)
        tag = ctor.tag
        comps: list[LType]
        if tag in (s.ZERO, s.INT):
            pat, comps = L_INT, []
        elif tag == s.SUCC:
            pat, comps = L_INT, [L_INT]
        elif tag == s.STR:
            pat, comps = L_STRING, []
        elif tag == s.UNIT:
            pat, comps = L_UNIT, []
        elif tag == s.NIL:
            pat, comps = LList(self.fresh()), []
        elif tag == s.CONS:
            elem = self.fresh()
            pat, comps = LList(elem), [elem, LList(elem)]
        elif tag == s.TUPLE:
            comps = [self.fresh() for _ in range(ctor.payload)]
            pat = LTuple(tuple(comps))
        elif tag == s.TEXT:
            pat, comps = L_XML, [L_STRING]
        else:
            pat, comps = L_XML, [L_STRING, L_XML]
        self.unify(t, pat, "T-Switch", "V : pattern type")
        inner = dict(gamma)
        for name, c in zip(binders, comps):
            if name != "_":
                inner[name] = c
        t1, f1 = self.expr(inner, F, matched)
        t2, f2 = self.expr(gamma, F, default)
        self.unify(t1, t2, "T-Switch", "E1 : T and E2 : T")
        return t1, f1 | f2


@dataclass
class LegacyJudgment:
    """Outcome of checking ``∅; F ⊢ E``."""

    result: tuple[LType, EffectSet] | None
    failure: LegacyFail | None = None

    @property
    def ok(self) -> bool:
        return self.result is not None

    @property
    def accepted(self) -> bool:
        """The program checks and yields a page."""
        return self.ok and self.result[0] == L_XML

    def render(self) -> str:
        if self.failure is not None:
            return f"FAIL({self.failure.rule}, {self.failure.premise})"
        t, effects = self.result
        return f"{t} {render_effects(effects)}"


def typecheck_legacy(
    e: s.Expr, gamma: Mapping[str, LType] | None = None, F: EffectSet = NO_EFFECTS
) -> LegacyJudgment:
    ch = _Checker()
    try:
        t, effects = ch.expr(dict(gamma or {}), frozenset(F), e)
    except LegacyFail as fail:
        return LegacyJudgment(None, fail)
    return LegacyJudgment((ch.zonk(t), effects))
