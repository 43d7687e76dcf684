"""Simple-type terms with type, annotation and identifier variables.

Unification is ordinary syntactic unification with an occurs check, except
that annotation and identifier variables only ever unify with variables of
their own kind.  Substitutions are kept idempotent.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

TYPE, ANN, IDE = "type", "ann", "ide"


@dataclass(frozen=True, order=True)
class TVar:
    kind: str
    id: int
    hint: str = field(default="", compare=False)

    def __str__(self):
        if self.kind == TYPE:
            return f"_typevar{self.id}_"
        if self.kind == ANN:
            return f"_annvar{self.id}_"
        return f"_#{self.hint}#var{self.id}_" if self.hint else f"_#var{self.id}_"


@dataclass(frozen=True)
class TApp:
    sym: str
    args: tuple = ()

    def __str__(self):
        name = _DISPLAY.get(self.sym, self.sym)
        return f"{name}({', '.join(str(a) for a in self.args)})"


Term = Union[TVar, TApp]

_DISPLAY = {
    "unit": "Unit",
    "int": "Integer",
    "string": "String",
    "xml": "Xml",
    "link": "Link",
    "form": "Form",
    "list": "List",
    "fun": "Function",
    "tuple": "Tuple",
}
_ARITY = {"unit": 0, "int": 0, "string": 0, "xml": 1, "link": 1, "form": 1, "list": 1, "fun": 5}

UNIT_T = TApp("unit")
INT_T = TApp("int")
STRING_T = TApp("string")


def xml(a: TVar) -> TApp:
    return TApp("xml", (a,))


def link(a: TVar) -> TApp:
    return TApp("link", (a,))


def form(a: TVar) -> TApp:
    return TApp("form", (a,))


def list_of(t: Term) -> TApp:
    return TApp("list", (t,))


def tuple_of(*ts: Term) -> TApp:
    if len(ts) < 2:
        raise ValueError("tuple types have at least two components")
    return TApp("tuple", tuple(ts))


def fun(x: TVar, arg: Term, pre: TVar, res: Term, post: TVar) -> TApp:
    return TApp("fun", (x, arg, pre, res, post))


def well_formed(t: Term) -> bool:
    """Arity and slot-kind discipline of the signature."""
    if isinstance(t, TVar):
        return t.kind == TYPE
    if t.sym == "tuple":
        return len(t.args) >= 2 and all(well_formed(a) for a in t.args)
    if _ARITY.get(t.sym) != len(t.args):
        return False
    if t.sym in ("xml", "link", "form"):
        return _is(t.args[0], ANN)
    if t.sym == "fun":
        x, arg, pre, res, post = t.args
        return _is(x, IDE) and _is(pre, ANN) and _is(post, ANN) and well_formed(arg) and well_formed(res)
    return all(well_formed(a) for a in t.args)


def _is(t: Term, kind: str) -> bool:
    return isinstance(t, TVar) and t.kind == kind


def term_vars(t: Term) -> Iterator[TVar]:
    if isinstance(t, TVar):
        yield t
    else:
        for a in t.args:
            yield from term_vars(a)


class Fresh:
    """Per-analysis supply of fresh variables.

    Type and identifier variables share one counter, so a function's
    parameter and its type print with the same index.
    """

    def __init__(self):
        self.var = 0
        self.ann = 0

    def type_var(self) -> TVar:
        self.var += 1
        return TVar(TYPE, self.var - 1)

    def param(self, hint: str = "") -> tuple[TVar, TVar]:
        """An identifier variable and a type variable with a shared index."""
        self.var += 1
        n = self.var - 1
        return TVar(IDE, n, hint), TVar(TYPE, n)

    def ann_var(self) -> TVar:
        self.ann += 1
        return TVar(ANN, self.ann - 1)


# -- substitutions --------------------------------------------------------------


class UnifyError(Exception):
    def __init__(self, reason: str, left=None, right=None):
        super().__init__(f"{reason}: {left} = {right}")
        self.reason = reason  # clash | occurs | kind | cycle
        self.left = left
        self.right = right


class Subst(Mapping):
    """An immutable, idempotent substitution ``TVar -> Term``."""

    __slots__ = ("_map",)

    def __init__(self, bindings: Mapping[TVar, Term] | None = None):
        self._map = {v: t for v, t in (bindings or {}).items() if v != t}

    def __getitem__(self, v):
        return self._map[v]

    def __iter__(self):
        return iter(self._map)

    def __len__(self):
        return len(self._map)

    def __eq__(self, other):
        if isinstance(other, Subst):
            return self._map == other._map
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._map.items()))

    def __repr__(self):
        inner = ", ".join(f"{v} -> {t}" for v, t in sorted(self._map.items(), key=lambda kv: kv[0]))
        return "{" + inner + "}"

    def __call__(self, t: Term) -> Term:
        return apply(self, t)

    def equations(self) -> list[tuple[Term, Term]]:
        return list(self._map.items())

    def is_idempotent(self) -> bool:
        return all(apply(self, t) == t for t in self._map.values())


EMPTY = Subst()


def apply(theta: Mapping[TVar, Term], t: Term) -> Term:
    if not theta:
        return t
    if isinstance(t, TVar):
        return theta.get(t, t)
    if not t.args:
        return t
    return TApp(t.sym, tuple(apply(theta, a) for a in t.args))


def _occurs(v: TVar, t: Term) -> bool:
    if isinstance(t, TVar):
        return v == t
    return any(_occurs(v, a) for a in t.args)


def mgu(equations: Iterable[tuple[Term, Term]]) -> Subst:
    """Most general idempotent unifier of ``equations``.

    Raises :class:`UnifyError` on a constructor clash, an occurs-check
    failure, or a kind clash.  When two variables of the same kind meet, the
    older one (smaller index) is kept.
    """
    sigma: dict[TVar, Term] = {}
    work = list(equations)
    while work:
        left, right = work.pop()
        left, right = apply(sigma, left), apply(sigma, right)
        if left == right:
            continue
        if isinstance(left, TVar) and isinstance(right, TVar):
            if left.kind != right.kind:
                raise UnifyError("kind", left, right)
            old, new = (left, right) if left < right else (right, left)
            _bind(sigma, new, old)
        elif isinstance(left, TVar) or isinstance(right, TVar):
            v, t = (left, right) if isinstance(left, TVar) else (right, left)
            if v.kind != TYPE:
                raise UnifyError("kind", v, t)
            if _occurs(v, t):
                raise UnifyError("occurs", v, t)
            _bind(sigma, v, t)
        else:
            if left.sym != right.sym or len(left.args) != len(right.args):
                raise UnifyError("clash", left, right)
            work.extend(zip(left.args, right.args))
    return Subst(sigma)


def _bind(sigma: dict, v: TVar, t: Term) -> None:
    one = {v: t}
    for k in sigma:
        sigma[k] = apply(one, sigma[k])
    sigma[v] = t


def merge(*thetas: Mapping[TVar, Term], extra: Iterable[tuple[Term, Term]] = ()) -> Subst:
    """Unify the solved forms of several substitutions plus extra equations."""
    eqs = list(extra)
    for th in thetas:
        eqs.extend(th.items())
    return mgu(eqs)


def compose(first: Mapping[TVar, Term], second: Mapping[TVar, Term]) -> Subst:
    """Substitution applying ``first`` then ``second``.

    Raises :class:`UnifyError` when the composite is not idempotent, i.e. the
    two substitutions bind variables cyclically.
    """
    out = {v: apply(second, t) for v, t in first.items()}
    for v, t in second.items():
        out.setdefault(v, t)
    result = Subst(out)
    if not result.is_idempotent():
        raise UnifyError("cycle", Subst(first), Subst(second))
    return result


def alpha_equivalent(a: Term, b: Term) -> bool:
    """Equality up to a kind-preserving bijective renaming of variables."""
    fwd: dict[TVar, TVar] = {}
    bwd: dict[TVar, TVar] = {}

    def walk(x: Term, y: Term) -> bool:
        if isinstance(x, TVar) or isinstance(y, TVar):
            if not (isinstance(x, TVar) and isinstance(y, TVar)) or x.kind != y.kind:
                return False
            if fwd.setdefault(x, y) != y or bwd.setdefault(y, x) != x:
                return False
            return True
        return x.sym == y.sym and len(x.args) == len(y.args) and all(map(walk, x.args, y.args))

    return walk(a, b)
