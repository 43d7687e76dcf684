from __future__ import annotations

import re

import pytest
from hypothesis import given, settings

from strategies import expressions
from tinylinks import syntax as s
from tinylinks import terms as T
from tinylinks.abstract import (
    NODVAL,
    TOP,
    Analyzer,
    Error,
    NInt,
    TypeA,
    VarD,
    aexp,
    analyze,
    aval,
)
from tinylinks.concrete import Mark, run
from tinylinks.harness import GenConfig, gen_programs
from tinylinks.parser import parse

BUY = """
fun buy(value, dbpass) {
  var _ = assert PriceIs(value);
    Text("Hello")
}
"""

# Expected listings, with fresh-variable numbering as printed by a reference run.
BUY_LISTING = """(type - :
 Function(_#value#var0_, Integer(), _annvar0_,
   Function(_#dbpass#var1_, _typevar1_, _annvar2_,
            Xml(_annvar4_), _annvar3_),
   _annvar1_)
 No_dval [(_annvar2_,PriceIs)] {PriceIs -> _#value#var0_}, {})"""

BUY5_LISTING = """(type - :
 Function(_#dbpass#var3_, _typevar3_, _annvar7_,
          Xml(_annvar9_), _annvar8_)
 Unknown [(_annvar7_,PriceIs)] {PriceIs -> 5}, {})"""


def canonical(text: str) -> str:
    """Collapse whitespace and renumber fresh variables by first occurrence."""
    text = re.sub(r"\s+", " ", text).replace("( ", "(").replace(" )", ")")
    text = re.sub(r",\s*", ", ", text)
    numbering: dict[tuple[str, str], int] = {}

    def renumber(m):
        kind = "ann" if m.group(1) == "annvar" else "var"
        key = (kind, m.group(2))
        numbering.setdefault(key, sum(1 for k in numbering if k[0] == kind))
        return f"{m.group(1)}{numbering[key]}_"

    return re.sub(r"(annvar|var)(\d+)_", renumber, text)


def buy_program(rest: str) -> s.Expr:
    return parse(BUY.strip() + ";\n" + rest)


def test_buy_definition_matches_listing():
    report = analyze(parse(BUY))
    assert canonical(report.render()) == canonical(BUY_LISTING)


def test_buy_definition_structure():
    a = analyze(parse(BUY)).result
    assert isinstance(a, TypeA)
    x, arg, pre, res, post = a.t.args
    assert a.t.sym == "fun" and arg == T.INT_T and x.hint == "value"
    assert res.sym == "fun" and isinstance(res.args[1], T.TVar) and res.args[3].sym == "xml"
    assert a.constr == {(res.args[2], "PriceIs")}
    assert a.corr == {"PriceIs": VarD(x)}
    assert a.dval == NODVAL


def test_partial_application_matches_listing():
    report = analyze(buy_program("buy(5)"))
    assert canonical(report.render()) == canonical(BUY5_LISTING)
    assert report.result.corr == {"PriceIs": NInt(5)}
    assert report.result.dval == TOP


def test_full_application_without_event_fails():
    report = analyze(buy_program('var pay = buy(5); pay("a")'))
    assert isinstance(report.result, Error)
    assert report.result.message == "apply_fun: no preconditions"
    assert report.reason == "unmet-precondition"
    assert report.render() == 'Exception: No_type "apply_fun: no preconditions"'


def test_full_application_after_event_is_safe():
    report = analyze(buy_program('var _ = event PriceIs(5); var pay = buy(5); pay("a")'))
    assert report.safe
    assert report.events == {"PriceIs": (NInt(5), Mark.E)}


def test_full_application_after_wrong_price_fails():
    assert not analyze(buy_program('var _ = event PriceIs(4); buy(5)("a")')).safe


def test_counterexample_is_a_type_clash():
    report = analyze(parse('get(Text("Hello!"))'))
    assert (report.verdict, report.reason) == ("Unsafe", "type-clash")


def test_get_of_link_is_safe_and_pure():
    a, phi = aexp(parse('get(href(Text("x")))'))
    assert isinstance(a, TypeA) and a.t.sym == "xml" and a.constr == frozenset() and a.corr == {}
    assert phi == {}
    assert analyze(parse('get(href(Text("x")))')).safe


def test_link_of_link_is_rejected():
    assert analyze(parse('href(href(Text("Hello")))')).reason == "type-clash"


def test_href_values():
    a = aval(s.Href(s.Val(s.text(s.string("h")))))
    assert a.t.sym == "link" and a.dval == NODVAL and not a.constr and not a.corr
    assert isinstance(aval(s.Href(s.event("p", s.num(1)))), Error)


def test_href_records_preconditions():
    a = aval(s.Href(s.seq(s.assert_("p", s.num(1)), s.Val(s.text(s.string("h"))))))
    (gamma,) = a.t.args
    assert a.constr == {(gamma, "p")} and a.corr == {"p": NInt(1)}


def test_assert_registers_a_precondition():
    a, phi = aexp(s.assert_("q", s.num(3)))
    assert a.t == T.UNIT_T
    assert phi == {"q": (NInt(3), Mark.A)}


def test_assert_after_event_is_satisfied():
    _, phi = aexp(parse("var _ = event q(3); assert q(3)"))
    assert phi == {"q": (NInt(3), Mark.EA)}
    assert analyze(parse('var _ = event q(3); var _ = assert q(3); Text("ok")')).safe


def test_assert_with_wrong_value_fails():
    a, phi = aexp(parse("var _ = event q(3); assert q(4)"))
    assert isinstance(a, Error) and phi == {}


def test_event_needs_known_integer():
    assert analyze(parse('event p("x")')).reason == "bad-event-value"
    assert analyze(parse("var f = fun (x) { event p(x + 1) }; Text(\"a\")")).reason == "bad-event-value"


def test_event_payload_can_be_a_parameter():
    report = analyze(parse('var f = fun (x) { event p(x) }; var _ = f(3); var _ = assert p(3); Text("a")'))
    assert report.safe


def test_top_level_unmet_assert_is_unsafe():
    report = analyze(parse('var _ = assert p(1); Text("a")'))
    assert (report.verdict, report.reason) == ("Unsafe", "unmet-precondition")


def test_non_markup_result_is_unsafe():
    assert analyze(parse("1 + 2")).reason == "not-xml"


def test_division_needs_known_nonzero_divisor():
    assert analyze(parse('var x = 6 / 2; Text("a")')).safe
    assert not analyze(parse('var x = 6 / 0; Text("a")')).safe


def test_unbound_variable_is_an_error():
    assert isinstance(aexp(parse("get(nowhere)"))[0], Error)


def test_form_and_post():
    assert analyze(parse('post({who = "a"}, form([who], Text(who)))')).safe
    assert not analyze(parse('post({who = 1}, form([who], Text("x")))')).safe
    assert not analyze(parse('post({}, href(Text("x")))')).safe


def test_higher_order_callback_with_precondition_is_rejected():
    src = 'var k = fun (f) { f(1) }; var g = fun (y) { var _ = assert p(y); Text("a") }; k(g)'
    assert run(parse(src)).verdict == "unsafe"
    assert not analyze(parse(src)).safe


def test_higher_order_callback_without_precondition_is_accepted():
    assert analyze(parse('var k = fun (f) { f(1) }; var g = fun (y) { Text("a") }; k(g)')).safe


def test_preconditions_propagate_through_wrappers():
    base = 'var b = fun (v) { var _ = assert p(v); Text("a") }; var c = fun (w) { b(w) }; var _ = event p(1); '
    assert analyze(parse(base + "c(1)")).safe
    assert not analyze(parse(base + "c(2)")).safe


def test_call_cannot_overwrite_pending_precondition():
    src = 'var k = fun (u) { event p(2) }; var c = fun (w) { var _ = assert p(1); k(0) }; Text("a")'
    assert not analyze(parse(src)).safe


def test_switch_join():
    assert analyze(parse('switch (1) { case Succ(n) -> Text("a"); _ -> Text("b") }')).safe
    assert not analyze(parse('switch (1) { case Succ(n) -> Text("a"); _ -> 3 }')).safe
    # one branch may skip the event, so a later assert cannot rely on it
    src = 'var _ = switch (1) { case 1 -> event p(1); _ -> Unit }; var _ = assert p(1); Text("x")'
    assert not analyze(parse(src)).safe


def test_report_json_is_stable():
    prog = buy_program("buy(5)")
    one, two = analyze(prog).to_json(), analyze(prog).to_json()
    assert one == two
    assert one["constraints"] == [["_annvar2_", "PriceIs"]]
    assert one["correspondence"] == {"PriceIs": "5"}
    assert one["dval"] == "Unknown"


def _types_are_normal(a: TypeA) -> bool:
    return T.apply(a.theta, a.t) == a.t and a.theta.is_idempotent()


@pytest.mark.parametrize("program", list(gen_programs(GenConfig(max_depth=2))), ids=str)
def test_substitution_hygiene(program):
    a, _ = Analyzer().aexp(program, {}, {})
    if isinstance(a, TypeA):
        assert _types_are_normal(a)


def _rename(e, names: dict, preds: dict):
    """Consistently rename identifiers and predicates."""
    n = lambda x: names.get(x, x)  # noqa: E731

    def val(v):
        match v:
            case s.Var(x):
                return s.Var(n(x))
            case s.Con(c, args):
                return s.Con(c, tuple(val(a) for a in args))
            case s.Href(b):
                return s.Href(exp(b))
            case s.Lambda(x, b):
                return s.Lambda(n(x), exp(b))
            case s.Form(ls, b):
                return s.Form(tuple(n(x) for x in ls), exp(b))

    def exp(e):
        match e:
            case s.Val(v):
                return s.Val(val(v))
            case s.Let(x, b, body):
                return s.Let(n(x), exp(b), exp(body))
            case s.Prim(op, l, r):
                return s.Prim(op, exp(l), exp(r))
            case s.App(f, a):
                return s.App(val(f), val(a))
            case s.Get(v):
                return s.Get(val(v))
            case s.Post(fs, v):
                return s.Post(tuple((l, val(x)) for l, x in fs), val(v))
            case s.EventAnn(ev):
                return s.EventAnn(s.Event(preds[ev.pred], val(ev.arg)))
            case s.AssertAnn(ev):
                return s.AssertAnn(s.Event(preds[ev.pred], val(ev.arg)))
            case s.Switch(v, c, xs, e1, e2):
                return s.Switch(val(v), c, tuple(n(x) for x in xs), exp(e1), exp(e2))
        raise TypeError(e)

    return exp(e)


def test_verdicts_invariant_under_renaming():
    names = {"x0": "alpha", "x1": "beta", "x2": "gamma"}
    preds = {"p": "Paid", "q": "Seen"}
    for program in list(gen_programs(GenConfig(max_depth=3)))[::37]:
        renamed = _rename(program, names, preds)
        assert analyze(program).verdict == analyze(renamed).verdict


@settings(max_examples=400, deadline=None)
@given(expressions)
def test_safe_programs_never_go_wrong(e):
    report = analyze(e)
    if report.safe:
        assert run(e, max_steps=10_000).verdict != "unsafe"
    if isinstance(report.result, Error):
        assert report.events == {}
