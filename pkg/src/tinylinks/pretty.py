"""Pretty-printer producing surface syntax that parses back to the same AST."""
from __future__ import annotations

import json

from . import syntax as s

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def pretty(node: s.Expr | s.Value) -> str:
    if isinstance(node, s.VALUE_TYPES):
        return _value(node)
    return _expr(node)


def _value(v: s.Value) -> str:
    match v:
        case s.Var(name):
            return name
        case s.Con(ctor, args):
            return _con(ctor, args)
        case s.Href(body):
            return f"href({_expr(body)})"
        case s.Form(labels, body):
            return f"form([{', '.join(labels)}], {_expr(body)})"
        case s.Lambda():
            params = []
            while isinstance(v, s.Lambda):
                params.append(v.param)
                body = v.body
                if isinstance(body, s.Val) and isinstance(body.value, s.Lambda):
                    v = body.value
                else:
                    break
            return f"fun ({', '.join(params)}) {{ {_expr(body)} }}"
    raise TypeError(f"not a value: {v!r}")


def _con(ctor: s.Constructor, args: tuple[s.Value, ...]) -> str:
    if ctor.tag == s.INT:
        return str(ctor.payload)
    if ctor.tag == s.STR:
        return json.dumps(ctor.payload, ensure_ascii=False)
    if not args:
        return ctor.tag
    return f"{ctor.tag}({', '.join(_value(a) for a in args)})"


def _pattern(ctor: s.Constructor, binders: tuple[str, ...]) -> str:
    if ctor.tag in (s.INT, s.STR) or not binders:
        return _con(ctor, ())
    return f"{ctor.tag}({', '.join(binders)})"


def _operand(e: s.Expr, parent: str, right: bool) -> str:
    text = _expr(e)
    if isinstance(e, s.Let):
        return f"({text})"
    if isinstance(e, s.Prim):
        p, q = _PREC[e.op], _PREC[parent]
        if p < q or (right and p == q):
            return f"({text})"
    return text


def _expr(e: s.Expr) -> str:
    match e:
        case s.Val(v):
            return _value(v)
        case s.Let(name, bound, body):
            rhs = _expr(bound)
            if isinstance(bound, s.Let):
                rhs = f"({rhs})"
            return f"var {name} = {rhs}; {_expr(body)}"
        case s.Prim(op, left, right):
            return f"{_operand(left, op, False)} {op} {_operand(right, op, True)}"
        case s.App(fn, arg):
            head = fn.name if isinstance(fn, s.Var) else f"({_value(fn)})"
            return f"{head}({_value(arg)})"
        case s.Post(fields, target):
            body = ", ".join(f"{label} = {_value(v)}" for label, v in fields)
            return f"post({{{body}}}, {_value(target)})"
        case s.Get(target):
            return f"get({_value(target)})"
        case s.EventAnn(ev):
            return f"event {ev.pred}({_value(ev.arg)})"
        case s.AssertAnn(ev):
            return f"assert {ev.pred}({_value(ev.arg)})"
        case s.Switch(scrut, ctor, binders, matched, default):
            return (
                f"switch ({_value(scrut)}) {{ case {_pattern(ctor, binders)} -> "
                f"{_expr(matched)}; _ -> {_expr(default)} }}"
            )
    raise TypeError(f"not an expression: {e!r}")
