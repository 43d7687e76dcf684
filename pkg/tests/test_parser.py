from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import given, settings

from strategies import expressions
from tinylinks import syntax as s
from tinylinks.parser import ParseError, parse
from tinylinks.pretty import pretty

CORPUS = sorted((Path(__file__).parent.parent / "corpus").glob("*.tl"))


def test_counterexample_parses_to_expected_ast():
    assert parse('get(Text("Hello!"))') == s.Get(s.text(s.string("Hello!")))


def test_numbers_strings_and_unit():
    assert parse("42") == s.Val(s.num(42))
    assert parse("-7") == s.Val(s.num(-7))
    assert parse('"a\\"b"') == s.Val(s.string('a"b'))
    assert parse("Unit") == parse("Unit()") == s.Val(s.unit())


def test_var_and_sequencing():
    e = parse("var _ = event q(3); assert q(3)")
    assert e == s.seq(s.event("q", s.num(3)), s.assert_("q", s.num(3)))


def test_named_function_declaration_is_curried():
    e = parse("fun buy(value, dbpass) { Text(\"ok\") }")
    assert isinstance(e, s.Val)
    outer = e.value
    assert isinstance(outer, s.Lambda) and outer.param == "value"
    inner = outer.body.value
    assert isinstance(inner, s.Lambda) and inner.param == "dbpass"


def test_named_function_with_continuation_binds_name():
    e = parse("fun f(x) { x }; f(1)")
    assert e == s.Let("f", s.Val(s.Lambda("x", s.Val(s.Var("x")))), s.App(s.Var("f"), s.num(1)))


def test_multi_argument_call_is_normalised():
    e = parse("f(1, 2)")
    # the partial application is bound to a generated temporary
    assert isinstance(e, s.Let)
    assert e.bound == s.App(s.Var("f"), s.num(1))
    assert e.body == s.App(s.Var(e.name), s.num(2))


def test_temporaries_avoid_source_names():
    e = parse("var _a1 = 3; g(f(_a1))")
    names = set()

    def walk(x):
        if isinstance(x, s.Let):
            names.add(x.name)
            walk(x.bound)
            walk(x.body)

    walk(e)
    assert "_a1" in names and len(names) == 2


def test_prim_precedence_and_associativity():
    assert parse("1 + 2 * 3") == s.Prim("+", s.Val(s.num(1)), s.Prim("*", s.Val(s.num(2)), s.Val(s.num(3))))
    assert parse("8 - 4 - 2") == s.Prim("-", s.Prim("-", s.Val(s.num(8)), s.Val(s.num(4))), s.Val(s.num(2)))


def test_post_form_and_switch():
    e = parse('post({user = "alice"}, form([user], Text("hi")))')
    assert isinstance(e, s.Post) and e.fields == (("user", s.string("alice")),)
    assert e.target == s.Form(("user",), s.Val(s.text(s.string("hi"))))
    sw = parse("switch (1) { case Succ(n) -> n; _ -> 0 }")
    assert isinstance(sw, s.Switch) and sw.ctor.tag == s.SUCC and sw.binders == ("n",)


def test_comments_are_ignored():
    assert parse("# a page\nText(\"x\") # trailing") == s.Val(s.text(s.string("x")))


@pytest.mark.parametrize(
    "source",
    ["", "get(", "var = 3; 4", "Text(1, 2)", "fun (x) { x", "post({a = 1, a = 2}, f", "1 +", "switch (x) { _ -> 1 }"],
)
def test_malformed_programs_raise(source):
    with pytest.raises(ParseError):
        parse(source)


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as info:
        parse("var x = 1;\n  get(")
    assert info.value.line == 2


@pytest.mark.parametrize("path", CORPUS, ids=[p.name for p in CORPUS])
def test_corpus_parses_and_round_trips(path):
    e = parse(path.read_text())
    assert parse(pretty(e)) == e


def test_pretty_prints_curried_lambda_as_one_function():
    e = parse("fun (x, y) { x }")
    assert pretty(e) == "fun (x, y) { x }"


@settings(max_examples=300, deadline=None)
@given(expressions)
def test_round_trip_property(e):
    assert parse(pretty(e)) == e
