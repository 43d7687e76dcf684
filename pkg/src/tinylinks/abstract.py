"""Types-and-effects analysis of TinyLinks by abstract interpretation.

An abstract value (:class:`TypeA`) pairs a simple type with the idempotent
substitution that instantiated it, an abstract denotable value, a set of
``(annotation variable, predicate)`` constraints and a correspondence
function giving the value each constrained predicate must carry.  The
events environment has the same shape as in the concrete semantics, with
abstract denotable values in place of integers.

``xml``, ``link`` and ``form`` are unrelated types, which is what stops
``get(Text("Hello!"))`` from being accepted.

Every suspended body (function, link, form) is analysed from the empty
events environment, so its preconditions and post-conditions are relative
to the point where it is finally invoked rather than where it was written.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from . import syntax as s
from . import terms as T
from .concrete import IOTA, EEnv, Mark, arith, bind_event
from .terms import Fresh, Subst, TVar, UnifyError

# -- abstract denotable values ---------------------------------------------------


@dataclass(frozen=True)
class NoDval:
    def __str__(self):
        return "No_dval"


@dataclass(frozen=True)
class NInt:
    n: int

    def __str__(self):
        return str(self.n)


@dataclass(frozen=True)
class VarD:
    x: TVar  # an identifier variable

    def __str__(self):
        return str(self.x)


@dataclass(frozen=True)
class Top:
    def __str__(self):
        return "Unknown"


NODVAL = NoDval()
TOP = Top()
AbsDval = Union[NoDval, NInt, VarD, Top]


def meet(a: AbsDval, b: AbsDval) -> AbsDval:
    """Merge two bindings of one predicate: equal stays, NoDval yields, else Top."""
    if a == b or isinstance(b, NoDval):
        return a
    if isinstance(a, NoDval):
        return b
    return TOP


def subst_dval(theta: Mapping, d: AbsDval) -> AbsDval:
    if isinstance(d, VarD) and d.x in theta:
        return VarD(theta[d.x])
    return d


def is_specific(d: AbsDval) -> bool:
    return isinstance(d, (NInt, VarD))


# -- correspondence functions and constraints ------------------------------------

TPred = Mapping[str, AbsDval]
ZETA: TPred = {}
Constr = frozenset  # of (TVar, pred)


def cb(*fs: TPred) -> dict:
    """Greatest lower bound of correspondence functions; ZETA is the unit."""
    out: dict = {}
    for f in fs:
        for q, d in f.items():
            out[q] = meet(out[q], d) if q in out else d
    return out


def preds(c: Iterable[tuple[TVar, str]]) -> set[str]:
    return {q for _, q in c}


def restrict_out(f: TPred, c: Iterable) -> dict:
    """``f ↓ C``: drop the predicates mentioned in ``c``."""
    drop = preds(c)
    return {q: d for q, d in f.items() if q not in drop}


def restrict_in(f: TPred, c: Iterable) -> dict:
    """``f <- C``: keep only the predicates mentioned in ``c``."""
    keep = preds(c)
    return {q: d for q, d in f.items() if q in keep}


def bind_param(f: TPred, x: TVar, d: AbsDval) -> dict:
    """``f[x, d]``: rebind every predicate waiting on parameter ``x`` to ``d``."""
    target = VarD(x)
    return {q: (d if v == target else v) for q, v in f.items()}


def subst_tpred(theta: Mapping, f: TPred) -> dict:
    return {q: subst_dval(theta, d) for q, d in f.items()}


def subst_constr(theta: Mapping, c: Iterable) -> frozenset:
    return frozenset((T.apply(theta, g), q) for g, q in c)


def subst_eenv(theta: Mapping, phi: EEnv) -> dict:
    if not theta:
        return dict(phi)
    return {q: (subst_dval(theta, d), m) for q, (d, m) in phi.items()}


def satisfies(required: AbsDval, entry) -> bool:
    """Does an events-environment entry prove that ``required`` has occurred?

    Only a specific value (an integer or a parameter) can be proved, and only
    by an occurred event carrying that very value.
    """
    if entry is None:
        return False
    have, mark = entry
    return mark.occurred and is_specific(required) and required == have


def check(f: TPred, phi: EEnv) -> bool:
    return all(satisfies(d, phi.get(q)) for q, d in f.items())


def env_delta(phi2: EEnv, phi1: EEnv) -> tuple[set, set, dict]:
    """Predicates newly asserted-only, newly occurred, and the changed bindings."""
    delta = {q: b for q, b in phi2.items() if phi1.get(q) != b}
    asserted = {q for q, (_, m) in delta.items() if m is Mark.A}
    evented = {q for q, (_, m) in delta.items() if m is not Mark.A}
    return asserted, evented, delta


def eenv_to_tpred(phi: EEnv) -> dict:
    return {q: d for q, (d, _) in phi.items()}


def pr_ps_vars(t: T.Term) -> tuple[set, set]:
    if isinstance(t, T.TApp) and t.sym == "fun":
        return {t.args[2]}, {t.args[4]}
    return set(), set()


def incl(phi: EEnv, f: TPred) -> dict:
    """Record the events of a post-condition as having occurred."""
    out = dict(phi)
    for q, d in f.items():
        out[q] = (d, Mark.E)
    return out


def merge_eenv(phi1: EEnv, phi2: EEnv) -> dict:
    """Join the events environments of two alternative branches.

    Asserted-only bindings are preconditions and survive from either branch;
    any other disagreement leaves the predicate touched with an unknown value.
    """
    out = {}
    for q in phi1.keys() | phi2.keys():
        a, b = phi1.get(q), phi2.get(q)
        if a == b:
            out[q] = a
            continue
        if a is None or b is None:
            d, m = a or b
            out[q] = (d, Mark.A) if m is Mark.A else (TOP, Mark.E)
            continue
        (da, ma), (db, mb) = a, b
        if Mark.A in (ma, mb):
            out[q] = (da if da == db and ma == mb else TOP, Mark.A)
        else:
            out[q] = (da if da == db else TOP, Mark.E)
    return out


# -- abstract values ---------------------------------------------------------------

TYPE_CLASH = "type-clash"
UNMET_PRECONDITION = "unmet-precondition"
BAD_EVENT_VALUE = "bad-event-value"
NOT_XML = "not-xml"


@dataclass(frozen=True)
class Error:
    """Bottom of the abstract domain, with the reason the analysis failed."""

    message: str
    code: str = TYPE_CLASH

    def render(self) -> str:
        return f'Exception: No_type "{self.message}"'


@dataclass(frozen=True)
class TypeA:
    t: T.Term
    theta: Subst = T.EMPTY
    dval: AbsDval = NODVAL
    constr: frozenset = frozenset()
    corr: Mapping[str, AbsDval] = field(default_factory=dict, hash=False)
    # Annotation variables that must never acquire a constraint: they belong
    # to functions or links invoked without any known precondition or
    # post-condition.
    closed: frozenset = frozenset()

    @property
    def ts(self) -> tuple[T.Term, Subst]:
        return self.t, self.theta

    def render(self) -> str:
        return f"{self.t} {self.dval} {render_constr(self.constr)} {render_tpred(self.corr)}"


Abs = Union[TypeA, Error]


def render_constr(c: Iterable) -> str:
    items = sorted(c, key=lambda gq: (gq[0].id, gq[1]))
    return "[" + ", ".join(f"({g},{q})" for g, q in items) + "]"


def render_tpred(f: TPred) -> str:
    return "{" + ", ".join(f"{q} -> {d}" for q, d in sorted(f.items())) + "}"


def render_eenv(phi: EEnv) -> str:
    return "{" + ", ".join(f"{q} -> ({d}, {m})" for q, (d, m) in sorted(phi.items())) + "}"


def _normal(theta: Subst, t, dval, constr, corr, closed) -> Abs:
    """Build a TypeA with ``theta`` applied everywhere."""
    constr = subst_constr(theta, constr)
    closed = frozenset(T.apply(theta, g) for g in closed)
    clash = [(g, q) for g, q in constr if g in closed]
    if clash:
        g, q = min(clash, key=lambda gq: (gq[0].id, gq[1]))
        return Error(f"unknown function may require {q} ({g})", UNMET_PRECONDITION)
    return TypeA(
        T.apply(theta, t), theta, subst_dval(theta, dval), constr, subst_tpred(theta, corr), closed
    )


def _dangling(a: TypeA) -> frozenset:
    """Constraints whose annotation variable is not reachable from the type."""
    reachable = set(T.term_vars(a.t))
    return frozenset(gq for gq in a.constr if gq[0] not in reachable)


def _string_value() -> TypeA:
    return TypeA(T.STRING_T)


# -- the analyser -----------------------------------------------------------------


class Analyzer:
    def __init__(self, fresh: Fresh | None = None):
        self.fresh = fresh or Fresh()
        # >0 while analysing the body of a function, link or form
        self.suspended = 0

    # values ------------------------------------------------------------------

    def aval(self, v: s.Value, rho: Mapping[str, TypeA], phi: EEnv) -> Abs:
        match v:
            case s.Var(name):
                if name in rho:
                    return rho[name]
                return Error(f"unbound identifier {name}")
            case s.Con(ctor, args):
                return self._construct(ctor, args, rho, phi)
            case s.Href(body):
                return self._page(body, rho, (), T.link)
            case s.Form(labels, body):
                if len(set(labels)) != len(labels):
                    return Error("form: duplicate labels")
                return self._page(body, rho, labels, T.form)
            case s.Lambda(param, body):
                return self._lambda(param, body, rho)
        raise TypeError(f"not a value: {v!r}")

    def _construct(self, ctor: s.Constructor, args, rho, phi) -> Abs:
        parts = []
        for a in args:
            r = self.aval(a, rho, phi)
            if isinstance(r, Error):
                return r
            parts.append(r)
        tag = ctor.tag
        eqs = []
        dval: AbsDval = NODVAL
        if tag == s.INT:
            t, dval = T.INT_T, NInt(ctor.payload)
        elif tag == s.ZERO:
            t, dval = T.INT_T, NInt(0)
        elif tag == s.STR:
            t = T.STRING_T
        elif tag == s.UNIT:
            t = T.UNIT_T
        elif tag == s.SUCC:
            t = T.INT_T
            eqs.append((parts[0].t, T.INT_T))
            d = parts[0].dval
            dval = NInt(d.n + 1) if isinstance(d, NInt) else TOP
        elif tag == s.TEXT:
            t = T.xml(self.fresh.ann_var())
            eqs.append((parts[0].t, T.STRING_T))
        elif tag == s.ELEM:
            t = T.xml(self.fresh.ann_var())
            eqs.append((parts[0].t, T.STRING_T))
            eqs.append((parts[1].t, T.xml(self.fresh.ann_var())))
        elif tag == s.NIL:
            t = T.list_of(self.fresh.type_var())
        elif tag == s.CONS:
            t = T.list_of(parts[0].t)
            eqs.append((parts[1].t, t))
        elif tag == s.TUPLE:
            t = T.tuple_of(*(p.t for p in parts))
        else:
            raise AssertionError(tag)
        try:
            theta = T.merge(*(p.theta for p in parts), extra=eqs)
        except UnifyError as exc:
            return Error(f"{tag}: {exc}")
        return _normal(
            theta,
            t,
            dval,
            frozenset().union(*(p.constr for p in parts)),
            cb(*(p.corr for p in parts)),
            frozenset().union(*(p.closed for p in parts)),
        )

    def _page(self, body, rho, labels, make) -> Abs:
        gamma = self.fresh.ann_var()
        inner = dict(rho)
        for label in labels:
            inner[label] = _string_value()
        self.suspended += 1
        try:
            a, phi2 = self.aexp(body, inner, IOTA)
        finally:
            self.suspended -= 1
        if isinstance(a, Error):
            return a
        asserted, evented, delta = env_delta(phi2, IOTA)
        kind = "href" if make is T.link else "form"
        if evented:
            return Error(f"{kind}: new events {sorted(evented)}", BAD_EVENT_VALUE)
        try:
            theta = T.merge(a.theta, extra=[(a.t, T.xml(gamma))])
        except UnifyError as exc:
            return Error(f"{kind}: body is not xml ({exc})")
        constr = a.constr | {(gamma, q) for q in asserted}
        return _normal(theta, make(gamma), NODVAL, constr, cb(a.corr, eenv_to_tpred(delta)), a.closed)

    def _lambda(self, param, body, rho) -> Abs:
        x, alpha = self.fresh.param(param)
        pre, post = self.fresh.ann_var(), self.fresh.ann_var()
        inner = dict(rho)
        if param != "_":
            inner[param] = TypeA(alpha, T.EMPTY, VarD(x))
        self.suspended += 1
        try:
            a, phi2 = self.aexp(body, inner, IOTA)
        finally:
            self.suspended -= 1
        if isinstance(a, Error):
            return a
        asserted, evented, delta = env_delta(phi2, IOTA)
        constr = a.constr | {(pre, q) for q in asserted} | {(post, q) for q in evented}
        return _normal(
            a.theta,
            T.fun(x, alpha, pre, a.t, post),
            NODVAL,
            constr,
            cb(a.corr, eenv_to_tpred(delta)),
            a.closed,
        )

    # expressions ----------------------------------------------------------------

    def aexp(self, e: s.Expr, rho: Mapping[str, TypeA], phi: EEnv) -> tuple[Abs, EEnv]:
        match e:
            case s.Val(v):
                return self._lift(self.aval(v, rho, phi), phi)
            case s.Let(name, bound, body):
                return self._let(name, bound, body, rho, phi)
            case s.Prim(op, left, right):
                return self._prim(op, left, right, rho, phi)
            case s.App(fn, arg):
                return self._apply(fn, arg, rho, phi)
            case s.Get(target):
                return self._get(target, rho, phi)
            case s.Post(fields, target):
                return self._post(fields, target, rho, phi)
            case s.EventAnn(ev):
                return self._annotation(ev, rho, phi, is_event=True)
            case s.AssertAnn(ev):
                return self._annotation(ev, rho, phi, is_event=False)
            case s.Switch(scrut, ctor, binders, matched, default):
                return self._switch(scrut, ctor, binders, matched, default, rho, phi)
        raise TypeError(f"not an expression: {e!r}")

    @staticmethod
    def _lift(a: Abs, phi: EEnv) -> tuple[Abs, EEnv]:
        return (a, IOTA) if isinstance(a, Error) else (a, phi)

    def _let(self, name, bound, body, rho, phi):
        a1, phi1 = self.aexp(bound, rho, phi)
        if isinstance(a1, Error):
            return a1, IOTA
        inner = rho if name == "_" else {**rho, name: a1}
        a2, phi2 = self.aexp(body, inner, phi1)
        if isinstance(a2, Error):
            return a2, IOTA
        try:
            theta = T.merge(a1.theta, a2.theta)
        except UnifyError as exc:
            return Error(f"let {name}: {exc}"), IOTA
        # Constraints tied to the bound value's own type travel with it through
        # the environment; only the others must be kept here.
        a1 = _normal(theta, a1.t, a1.dval, a1.constr, a1.corr, a1.closed)
        if isinstance(a1, Error):
            return a1, IOTA
        leftover = _dangling(a1)
        r = _normal(
            theta,
            a2.t,
            a2.dval,
            a2.constr | leftover,
            cb(a2.corr, restrict_in(a1.corr, leftover)),
            a1.closed | a2.closed,
        )
        return self._lift(r, subst_eenv(theta, phi2))

    def _prim(self, op, left, right, rho, phi):
        a1, phi1 = self.aexp(left, rho, phi)
        if isinstance(a1, Error):
            return a1, IOTA
        a2, phi2 = self.aexp(right, rho, phi1)
        if isinstance(a2, Error):
            return a2, IOTA
        try:
            theta = T.merge(a1.theta, a2.theta, extra=[(a1.t, T.INT_T), (a2.t, T.INT_T)])
        except UnifyError as exc:
            return Error(f"prim {op}: {exc}"), IOTA
        d1, d2 = a1.dval, a2.dval
        if op == "/" and not (isinstance(d2, NInt) and d2.n != 0):
            return Error("prim /: divisor not known to be non-zero"), IOTA
        dval: AbsDval = TOP
        if isinstance(d1, NInt) and isinstance(d2, NInt):
            dval = NInt(arith(op, d1.n, d2.n))
        r = _normal(theta, T.INT_T, dval, a1.constr | a2.constr, cb(a1.corr, a2.corr), a1.closed | a2.closed)
        return self._lift(r, subst_eenv(theta, phi2))

    def _discharge(self, required: TPred, needed: set[str], phi: EEnv, what: str) -> EEnv | Error:
        """Prove the preconditions ``needed`` (values in ``required``) in ``phi``.

        Inside a suspended body an unknown predicate becomes a precondition of
        that body instead, exactly as an ``assert`` would.
        """
        out = dict(phi)
        for q in sorted(needed):
            d = required.get(q, TOP)
            entry = phi.get(q)
            if satisfies(d, entry):
                continue
            if self.suspended and entry is None and is_specific(d):
                out[q] = (d, Mark.A)
                continue
            return Error(f"{what}: no preconditions", UNMET_PRECONDITION)
        return out

    def _apply(self, fn, arg, rho, phi):
        x, alpha = self.fresh.param()
        pre, post = self.fresh.ann_var(), self.fresh.ann_var()
        a1 = self.aval(fn, rho, phi)
        if isinstance(a1, Error):
            return a1, IOTA
        a2 = self.aval(arg, rho, phi)
        if isinstance(a2, Error):
            return a2, IOTA
        try:
            theta = T.merge(a1.theta, a2.theta, extra=[(a1.t, T.fun(x, a2.t, pre, alpha, post))])
        except UnifyError as exc:
            return Error(f"apply_fun: {exc}"), IOTA
        ft = T.apply(theta, a1.t)
        fx, _, fpre, fres, fpost = ft.args
        c1 = subst_constr(theta, a1.constr)
        c_pre = frozenset(gq for gq in c1 if gq[0] == fpre)
        c_post = frozenset(gq for gq in c1 if gq[0] == fpost)
        f1 = bind_param(subst_tpred(theta, a1.corr), fx, subst_dval(theta, a2.dval))
        phi2 = self._discharge(f1, preds(c_pre), subst_eenv(theta, phi), "apply_fun")
        if isinstance(phi2, Error):
            return phi2, IOTA
        conflict = self._overwrites_precondition(phi2, preds(c_post))
        if conflict:
            return conflict, IOTA
        closed = a1.closed | a2.closed
        if not c_pre:
            closed |= {fpre}
        if not c_post:
            closed |= {fpost}
        r = _normal(
            theta,
            fres,
            TOP,
            (c1 | subst_constr(theta, a2.constr)) - c_pre - c_post,
            cb(restrict_out(f1, c_pre | c_post), subst_tpred(theta, a2.corr)),
            closed,
        )
        effects = {q: f1.get(q, TOP) for q in preds(c_post)}
        return self._lift(r, incl(phi2, effects))

    @staticmethod
    def _overwrites_precondition(phi: EEnv, written: set[str]) -> Error | None:
        for q in sorted(written):
            if q in phi and phi[q][1] is Mark.A:
                return Error(f"event {q} would overwrite a pending precondition", BAD_EVENT_VALUE)
        return None

    def _open_page(self, a: TypeA, make, phi, extra_eqs=(), extra_parts=()):
        """Shared part of get and post: unify with ``make(γ)`` and discharge."""
        gamma = self.fresh.ann_var()
        parts = [a, *extra_parts]
        try:
            theta = T.merge(*(p.theta for p in parts), extra=[(a.t, make(gamma)), *extra_eqs])
        except UnifyError as exc:
            what = "get" if make is T.link else "post"
            return Error(f"{what}: {exc}"), IOTA
        g = T.apply(theta, gamma)
        constr = frozenset().union(*(subst_constr(theta, p.constr) for p in parts))
        c_pre = frozenset(gq for gq in constr if gq[0] == g)
        f = subst_tpred(theta, cb(*(p.corr for p in parts)))
        what = "get" if make is T.link else "post"
        phi2 = self._discharge(f, preds(c_pre), phi, what)
        if isinstance(phi2, Error):
            return phi2, IOTA
        closed = frozenset().union(*(p.closed for p in parts))
        if not c_pre:
            closed |= {g}
        r = _normal(theta, T.xml(g), NODVAL, constr - c_pre, restrict_out(f, c_pre), closed)
        # Links and forms cannot raise events, so only pending preconditions
        # discharged inside a suspended body can change the environment.
        return self._lift(r, phi2 if phi2 != dict(phi) else phi)

    def _get(self, target, rho, phi):
        a = self.aval(target, rho, phi)
        if isinstance(a, Error):
            return a, IOTA
        return self._open_page(a, T.link, phi)

    def _post(self, fields, target, rho, phi):
        labels = [label for label, _ in fields]
        if len(set(labels)) != len(labels):
            return Error("post: duplicate labels"), IOTA
        a = self.aval(target, rho, phi)
        if isinstance(a, Error):
            return a, IOTA
        values = []
        for _, v in fields:
            r = self.aval(v, rho, phi)
            if isinstance(r, Error):
                return r, IOTA
            values.append(r)
        eqs = [(r.t, T.STRING_T) for r in values]
        return self._open_page(a, T.form, phi, eqs, values)

    def _annotation(self, ev: s.Event, rho, phi, is_event: bool):
        kind = "event" if is_event else "assert"
        a = self.aval(ev.arg, rho, phi)
        if isinstance(a, Error):
            return a, IOTA
        if not is_specific(a.dval):
            return Error(f"{kind} {ev.pred}: value {a.dval} is not a known integer", BAD_EVENT_VALUE), IOTA
        try:
            theta = T.merge(a.theta, extra=[(a.t, T.INT_T)])
        except UnifyError as exc:
            return Error(f"{kind} {ev.pred}: {exc}", BAD_EVENT_VALUE), IOTA
        d = subst_dval(theta, a.dval)
        phi = subst_eenv(theta, phi)
        entry = phi.get(ev.pred)
        if is_event:
            if entry is not None and not (entry[0] == d and entry[1].occurred):
                return Error(f"event {ev.pred}: conflicts with {entry[0]} ({entry[1]})", BAD_EVENT_VALUE), IOTA
            mark = Mark.E
        else:
            if entry is not None and entry[0] != d:
                return Error(f"assert {ev.pred}: expected {entry[0]}, got {d}", BAD_EVENT_VALUE), IOTA
            mark = Mark.EA if entry is not None and entry[1].occurred else Mark.A
        r = _normal(theta, T.UNIT_T, NODVAL, a.constr, a.corr, a.closed)
        return self._lift(r, bind_event(phi, ev.pred, d, mark))

    def _pattern(self, ctor: s.Constructor) -> tuple[T.Term, list[T.Term]]:
        tag = ctor.tag
        if tag in (s.ZERO, s.INT):
            return T.INT_T, []
        if tag == s.SUCC:
            return T.INT_T, [T.INT_T]
        if tag == s.STR:
            return T.STRING_T, []
        if tag == s.UNIT:
            return T.UNIT_T, []
        if tag == s.NIL:
            return T.list_of(self.fresh.type_var()), []
        if tag == s.CONS:
            elem = self.fresh.type_var()
            return T.list_of(elem), [elem, T.list_of(elem)]
        if tag == s.TUPLE:
            parts = [self.fresh.type_var() for _ in range(ctor.payload)]
            return T.tuple_of(*parts), parts
        if tag == s.TEXT:
            return T.xml(self.fresh.ann_var()), [T.STRING_T]
        if tag == s.ELEM:
            return T.xml(self.fresh.ann_var()), [T.STRING_T, T.xml(self.fresh.ann_var())]
        raise AssertionError(tag)

    def _switch(self, scrut, ctor, binders, matched, default, rho, phi):
        a = self.aval(scrut, rho, phi)
        if isinstance(a, Error):
            return a, IOTA
        pat, components = self._pattern(ctor)
        try:
            theta0 = T.merge(a.theta, extra=[(a.t, pat)])
        except UnifyError as exc:
            return Error(f"switch: {exc}"), IOTA
        inner = dict(rho)
        for name, comp in zip(binders, components):
            if name != "_":
                inner[name] = TypeA(
                    T.apply(theta0, comp), theta0, TOP, a.constr, a.corr, a.closed
                )
        b1, phi1 = self.aexp(matched, inner, phi)
        if isinstance(b1, Error):
            return b1, IOTA
        b2, phi2 = self.aexp(default, rho, phi)
        if isinstance(b2, Error):
            return b2, IOTA
        try:
            theta = T.merge(theta0, b1.theta, b2.theta, extra=[(b1.t, b2.t)])
        except UnifyError as exc:
            return Error(f"switch branches: {exc}"), IOTA
        scrut_a = _normal(theta, a.t, a.dval, a.constr, a.corr, a.closed)
        if isinstance(scrut_a, Error):
            return scrut_a, IOTA
        leftover = _dangling(scrut_a)
        d1, d2 = subst_dval(theta, b1.dval), subst_dval(theta, b2.dval)
        r = _normal(
            theta,
            b1.t,
            d1 if d1 == d2 else TOP,
            b1.constr | b2.constr | leftover,
            cb(b1.corr, b2.corr, restrict_in(scrut_a.corr, leftover)),
            a.closed | b1.closed | b2.closed,
        )
        return self._lift(r, merge_eenv(subst_eenv(theta, phi1), subst_eenv(theta, phi2)))


def aval(v: s.Value, rho=None, phi: EEnv = IOTA, fresh: Fresh | None = None) -> Abs:
    return Analyzer(fresh).aval(v, rho or {}, phi)


def aexp(e: s.Expr, rho=None, phi: EEnv = IOTA, fresh: Fresh | None = None) -> tuple[Abs, EEnv]:
    return Analyzer(fresh).aexp(e, rho or {}, phi)


# -- whole programs ---------------------------------------------------------------

SAFE, UNSAFE = "Safe", "Unsafe"


@dataclass
class AnalysisReport:
    verdict: str
    reason: str | None  # one of the reason codes when Unsafe
    message: str
    result: Abs
    events: EEnv

    @property
    def safe(self) -> bool:
        return self.verdict == SAFE

    def render(self) -> str:
        if isinstance(self.result, Error):
            return self.result.render()
        return f"(type - : {self.result.render()}, {render_eenv(self.events)})"

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "reason": self.reason, "message": self.message}
        a = self.result
        if isinstance(a, Error):
            out.update(type=None, dval=None, constraints=[], correspondence={}, events={})
            return out
        out.update(
            type=str(a.t),
            dval=str(a.dval),
            constraints=[[str(g), q] for g, q in sorted(a.constr, key=lambda gq: (gq[0].id, gq[1]))],
            correspondence={q: str(d) for q, d in sorted(a.corr.items())},
            events={q: [str(d), str(m)] for q, (d, m) in sorted(self.events.items())},
        )
        return out

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def analyze(program: s.Expr) -> AnalysisReport:
    """Judge a closed program: it must need no precondition and yield a page."""
    an = Analyzer()
    a, phi = an.aexp(program, {}, IOTA)
    if isinstance(a, Error):
        return AnalysisReport(UNSAFE, a.code, a.message, a, IOTA)
    try:
        T.merge(a.theta, extra=[(a.t, T.xml(an.fresh.ann_var()))])
    except UnifyError:
        return AnalysisReport(UNSAFE, NOT_XML, f"result has type {a.t}, not Xml", a, phi)
    pending = sorted(q for q, (_, m) in phi.items() if m is Mark.A)
    if pending:
        return AnalysisReport(
            UNSAFE, UNMET_PRECONDITION, f"asserted without a prior event: {', '.join(pending)}", a, phi
        )
    if a.constr:
        return AnalysisReport(
            UNSAFE, UNMET_PRECONDITION, f"undischarged constraints {render_constr(a.constr)}", a, phi
        )
    return AnalysisReport(SAFE, None, "", a, phi)
