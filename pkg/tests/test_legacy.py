from __future__ import annotations

from tinylinks import syntax as s
from tinylinks.concrete import run
from tinylinks.legacy import L_INT, L_UNIT, L_XML, LFun, typecheck_legacy
from tinylinks.parser import parse


def judge(src: str, F=frozenset()):
    return typecheck_legacy(parse(src), F=F)


def ev(p: str, n: int) -> s.Event:
    return s.Event(p, s.num(n))


def test_counterexample_is_accepted_yet_goes_wrong():
    j = judge('get(Text("Hello!"))')
    assert j.result == (L_XML, frozenset())
    assert run(parse('get(Text("Hello!"))')).verdict == "unsafe"


def test_event_rule():
    assert judge("event p(3)").result == (L_UNIT, frozenset({ev("p", 3)}))


def test_event_rule_accepts_any_typed_value():
    assert judge('event p("x")').ok


def test_assert_rule_requires_event_in_precondition():
    j = judge("assert p(3)")
    assert not j.ok and (j.failure.rule, j.failure.premise) == ("T-Assert", "L ∈ F")
    assert judge("assert p(3)", F={ev("p", 3)}).result == (L_UNIT, frozenset({ev("p", 3)}))
    assert not judge("assert p(3)", F={ev("p", 4)}).ok


def test_assert_scope_check():
    j = judge("assert p(y)", F={s.Event("p", s.Var("y"))})
    assert (j.failure.rule, j.failure.premise) == ("T-Assert", "fv(F, L) ⊆ dom(Γ)")


def test_get_rule_requires_xml():
    assert judge("get(href(Text(\"x\")))").result == (L_XML, frozenset())
    assert judge("get(1)").failure.rule == "T-Get"


def test_post_rule():
    assert judge('post({a = "s"}, form([a], Text(a)))').result == (L_XML, frozenset())
    assert judge('post({a = 1}, form([a], Text("x")))').failure.premise == "Vi : string"
    assert judge('post({}, 3)').failure.premise == "U : xml"


def test_let_threads_effects():
    assert judge("var _ = event q(3); assert q(3)").result == (L_UNIT, frozenset({ev("q", 3)}))


def test_function_type_collects_precondition():
    j = judge("fun (v) { var _ = assert PriceIs(v); Text(\"ok\") }")
    t, _ = j.result
    assert isinstance(t, LFun) and t.pre == {s.Event("PriceIs", s.Var("v"))} and t.result == L_XML


def test_app_rule_substitutes_actual_arguments():
    buy = 'fun buy(value, dbpass) { var _ = assert PriceIs(value); Text("ok") };'
    t, _ = judge(buy + " buy(5)").result
    assert t.pre == {ev("PriceIs", 5)}
    j = judge(buy + ' buy(5)("a")')
    assert (j.failure.rule, j.failure.premise) == ("T-App", "F1{x↦V} ⊆ F")
    assert judge(buy + ' var _ = event PriceIs(5); buy(5)("a")').result == (L_XML, frozenset({ev("PriceIs", 5)}))


def test_app_rule_adds_post_condition():
    assert judge("var f = fun (x) { event p(x) }; f(7)").result == (L_UNIT, frozenset({ev("p", 7)}))


def test_app_argument_type_must_match():
    assert judge("var f = fun (x) { x + 1 }; f(\"a\")").failure.rule == "T-App"


def test_conflated_markup_types():
    # links, forms and text all share the type xml
    assert judge('href(href(Text("x")))').accepted
    assert judge('get(form([], Text("x")))').accepted
    assert judge('post({}, href(Text("x")))').accepted


def test_arithmetic_and_switch():
    assert judge("1 + 2").result == (L_INT, frozenset())
    assert not judge('1 + "a"').ok
    assert judge('switch (1) { case Succ(n) -> Text("a"); _ -> Text("b") }').accepted


def test_rendering():
    assert judge("event p(3)").render() == "unit { p<3> }"
    assert judge("assert p(3)").render() == "FAIL(T-Assert, L ∈ F)"
    assert judge('get(Text("Hello!"))').render() == "xml { }"
