"""Exhaustive small-program enumeration and the differential soundness check.

Each closed program is judged three ways: run concretely, analysed by the
abstract interpreter, and checked by the legacy type system.  A *violation*
is a program judged safe that nevertheless goes wrong at run time.
"""
from __future__ import annotations

import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

from . import syntax as s
from .abstract import analyze
from .concrete import SKIPPED, UNSAFE, run
from .legacy import typecheck_legacy
from .pretty import pretty


@dataclass(frozen=True)
class GenConfig:
    max_depth: int = 3
    preds: tuple[str, ...] = ("p", "q")
    ints: tuple[int, ...] = (0, 1)
    strings: tuple[str, ...] = ("Hello!",)
    ops: tuple[str, ...] = ("+",)
    seed: int = 0
    max_steps: int = 100_000

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")


# -- enumeration ------------------------------------------------------------------
#
# Height 1 is the atoms (literals and variables in scope).  A construct has
# height d when its tallest immediate component has height d - 1.  Building
# each height exactly once keeps the stream free of duplicates.


class _Grammar:
    def __init__(self, cfg: GenConfig):
        self.cfg = cfg
        self.values = lru_cache(maxsize=None)(self._values)
        self.exprs = lru_cache(maxsize=None)(self._exprs)

    @staticmethod
    def binder(scope: tuple[str, ...]) -> str:
        return f"x{len(scope)}"

    def upto(self, kind, d: int, scope) -> list:
        table = self.values if kind == "v" else self.exprs
        out: list = []
        for h in range(1, d + 1):
            out.extend(table(h, scope))
        return out

    def pairs(self, kind_a, scope_a, kind_b, scope_b, d: int):
        """Pairs of components of height < d with at least one of height d - 1."""
        table_a = self.values if kind_a == "v" else self.exprs
        table_b = self.values if kind_b == "v" else self.exprs
        top_a, top_b = table_a(d - 1, scope_a), table_b(d - 1, scope_b)
        low_a, low_b = self.upto(kind_a, d - 2, scope_a), self.upto(kind_b, d - 2, scope_b)
        for a in top_a:
            for b in (*low_b, *top_b):
                yield a, b
        for a in low_a:
            for b in top_b:
                yield a, b

    def _values(self, d: int, scope: tuple[str, ...]) -> tuple[s.Value, ...]:
        cfg = self.cfg
        if d == 1:
            out: list[s.Value] = [s.num(n) for n in cfg.ints]
            out += [s.string(t) for t in cfg.strings]
            out.append(s.unit())
            out += [s.Var(x) for x in scope]
            return tuple(out)
        below = self.values(d - 1, scope)
        out = [s.text(v) for v in below]
        out += [s.elem(s.string(tag), v) for tag in cfg.strings for v in below]
        x = self.binder(scope)
        out += [s.Href(e) for e in self.exprs(d - 1, scope)]
        out += [s.Form((), e) for e in self.exprs(d - 1, scope)]
        out += [s.Form((x,), e) for e in self.exprs(d - 1, scope + (x,))]
        out += [s.Lambda(x, e) for e in self.exprs(d - 1, scope + (x,))]
        return tuple(out)

    def _exprs(self, d: int, scope: tuple[str, ...]) -> tuple[s.Expr, ...]:
        out: list[s.Expr] = [s.Val(v) for v in self.values(d, scope)]
        if d == 1:
            return tuple(out)
        below = self.values(d - 1, scope)
        out += [s.Get(v) for v in below]
        out += [s.Post((), v) for v in below]
        out += [s.Post((("l", a),), v) for a, v in self.pairs("v", scope, "v", scope, d)]
        for p in self.cfg.preds:
            out += [s.EventAnn(s.Event(p, v)) for v in below]
            out += [s.AssertAnn(s.Event(p, v)) for v in below]
        # Self-application is excluded.
        out += [s.App(f, a) for f, a in self.pairs("v", scope, "v", scope, d) if f != a]
        for op in self.cfg.ops:
            out += [s.Prim(op, l, r) for l, r in self.pairs("e", scope, "e", scope, d)]
        x = self.binder(scope)
        out += [s.Let(x, b, e) for b, e in self.pairs("e", scope, "e", scope + (x,), d)]
        out += [s.Let("_", b, e) for b, e in self.pairs("e", scope, "e", scope, d)]
        return tuple(out)


def gen_programs(cfg: GenConfig) -> Iterator[s.Expr]:
    """Every closed program up to ``cfg.max_depth``, shortest first."""
    g = _Grammar(cfg)
    for d in range(1, cfg.max_depth + 1):
        yield from g.exprs(d, ())


def gen_page_programs(cfg: GenConfig) -> Iterator[s.Expr]:
    """``get``/``post`` applied to links and forms over every enumerated body.

    Each body is used as is and also followed by a page, so that bodies which
    compute something else still yield markup.
    """
    page = s.Val(s.text(s.string(cfg.strings[0])))
    for e in gen_programs(cfg):
        for body in (e, s.seq(e, page)):
            yield s.Get(s.Href(body))
            yield s.Post((), s.Form((), body))
            for text in cfg.strings:
                yield s.Post((("l", s.string(text)),), s.Form(("l",), body))


def random_program(rng: random.Random, cfg: GenConfig, depth: int, scope: tuple[str, ...] = ()) -> s.Expr:
    """A random closed-under-``scope`` expression of height at most ``depth``."""
    return _RandomGen(rng, cfg).expr(depth, scope)


class _RandomGen:
    def __init__(self, rng: random.Random, cfg: GenConfig):
        self.rng = rng
        self.cfg = cfg

    def atom(self, scope) -> s.Value:
        r = self.rng
        choices = [lambda: s.num(r.choice(self.cfg.ints)), lambda: s.string(r.choice(self.cfg.strings)), s.unit]
        if scope:
            choices.append(lambda: s.Var(r.choice(scope)))
            choices.append(lambda: s.Var(r.choice(scope)))
        return r.choice(choices)()

    def value(self, d: int, scope) -> s.Value:
        r = self.rng
        if d <= 1 or r.random() < 0.3:
            return self.atom(scope)
        x = f"x{len(scope)}"
        kind = r.randrange(5)
        if kind == 0:
            return s.text(self.value(d - 1, scope))
        if kind == 1:
            return s.elem(s.string(r.choice(self.cfg.strings)), self.value(d - 1, scope))
        if kind == 2:
            return s.Href(self.expr(d - 1, scope))
        if kind == 3:
            labels = r.choice([(), (x,)])
            return s.Form(labels, self.expr(d - 1, scope + labels))
        return s.Lambda(x, self.expr(d - 1, scope + (x,)))

    def expr(self, d: int, scope) -> s.Expr:
        r = self.rng
        if d <= 1 or r.random() < 0.15:
            return s.Val(self.value(d, scope))
        x = f"x{len(scope)}"
        v = lambda: self.value(d - 1, scope)  # noqa: E731
        p = r.choice(self.cfg.preds)
        kind = r.randrange(9)
        if kind == 0:
            return s.Get(v())
        if kind == 1:
            return s.Post(r.choice([(), (("l", v()),)]), v())
        if kind == 2:
            return s.EventAnn(s.Event(p, v()))
        if kind == 3:
            return s.AssertAnn(s.Event(p, v()))
        if kind == 4:
            return s.App(v(), v())
        if kind == 5:
            return s.Prim(r.choice(self.cfg.ops), self.expr(d - 1, scope), self.expr(d - 1, scope))
        if kind == 6:
            return s.Let("_", self.expr(d - 1, scope), self.expr(d - 1, scope))
        if kind == 7:
            return s.Val(self.value(d, scope))
        return s.Let(x, self.expr(d - 1, scope), self.expr(d - 1, scope + (x,)))


def gen_random(cfg: GenConfig, count: int, depth: int) -> Iterator[s.Expr]:
    """``count`` seeded random closed programs of height at most ``depth``."""
    rng = random.Random(cfg.seed)
    gen = _RandomGen(rng, cfg)
    for _ in range(count):
        yield gen.expr(depth, ())


# -- judging ----------------------------------------------------------------------

WRONG_FREE, WRONG = "wrong-free", "wrong"


@dataclass(frozen=True)
class Verdict:
    program: s.Expr
    legacy: bool  # accepted: derivation with result type xml
    analysis: bool  # Safe
    concrete: str  # wrong-free | wrong | skipped

    @property
    def violation(self) -> bool:
        return self.analysis and self.concrete == WRONG

    @property
    def legacy_violation(self) -> bool:
        return self.legacy and self.concrete == WRONG

    @property
    def incomplete(self) -> bool:
        return not self.analysis and self.concrete == WRONG_FREE


def judge(program: s.Expr, max_steps: int = 100_000) -> Verdict:
    report = run(program, max_steps)
    concrete = {UNSAFE: WRONG, SKIPPED: SKIPPED}.get(report.verdict, WRONG_FREE)
    return Verdict(program, typecheck_legacy(program).accepted, analyze(program).safe, concrete)


@dataclass
class SoundnessReport:
    total: int = 0
    analysis_safe: int = 0
    legacy_accepted: int = 0
    wrong: int = 0
    skipped: int = 0
    incomplete: int = 0
    violations: list[Verdict] = field(default_factory=list)
    legacy_violations: list[Verdict] = field(default_factory=list)
    incomplete_examples: list[s.Expr] = field(default_factory=list)

    def add(self, v: Verdict, keep_examples: int = 10) -> None:
        self.total += 1
        self.analysis_safe += v.analysis
        self.legacy_accepted += v.legacy
        self.wrong += v.concrete == WRONG
        self.skipped += v.concrete == SKIPPED
        if v.violation:
            self.violations.append(v)
        if v.legacy_violation:
            self.legacy_violations.append(v)
        if v.incomplete:
            self.incomplete += 1
            if len(self.incomplete_examples) < keep_examples:
                self.incomplete_examples.append(v.program)

    @property
    def sound(self) -> bool:
        return not self.violations

    def summary(self) -> dict:
        return {
            "programs": self.total,
            "analysis_safe": self.analysis_safe,
            "legacy_accepted": self.legacy_accepted,
            "concrete_wrong": self.wrong,
            "skipped": self.skipped,
            "incomplete": self.incomplete,
            "violations": [pretty(v.program) for v in self.violations],
            "legacy_violations": len(self.legacy_violations),
            "legacy_violation_examples": [pretty(v.program) for v in self.legacy_violations[:20]],
            "incomplete_examples": [pretty(p) for p in self.incomplete_examples],
        }

    def render(self) -> str:
        lines = [
            f"programs:          {self.total}",
            f"analysis safe:     {self.analysis_safe}",
            f"legacy accepted:   {self.legacy_accepted}",
            f"concrete wrong:    {self.wrong}",
            f"skipped:           {self.skipped}",
            f"incomplete:        {self.incomplete}",
            f"violations:        {len(self.violations)}",
        ]
        lines += [f"  VIOLATION {pretty(v.program)}" for v in self.violations]
        lines.append(f"legacy violations: {len(self.legacy_violations)}")
        lines += [f"  LEGACY {pretty(v.program)}" for v in self.legacy_violations[:20]]
        if len(self.legacy_violations) > 20:
            lines.append(f"  ... and {len(self.legacy_violations) - 20} more")
        return "\n".join(lines)


def _judge_chunk(args: tuple[Sequence[s.Expr], int]) -> list[Verdict]:
    programs, max_steps = args
    return [judge(p, max_steps) for p in programs]


def check_programs(programs: Sequence[s.Expr], max_steps: int = 100_000, workers: int | None = None) -> SoundnessReport:
    """Judge every program; results are merged in input order."""
    programs = list(programs)
    workers = workers if workers is not None else min(os.cpu_count() or 1, 8)
    report = SoundnessReport()
    if workers <= 1 or len(programs) < 2000:
        verdicts: Iterator[Verdict] = (judge(p, max_steps) for p in programs)
    else:
        size = max(500, len(programs) // (workers * 8))
        chunks = [(programs[i : i + size], max_steps) for i in range(0, len(programs), size)]
        with ProcessPoolExecutor(workers) as pool:
            verdicts = (v for chunk in pool.map(_judge_chunk, chunks) for v in chunk)
            for v in verdicts:
                report.add(v)
        return report
    for v in verdicts:
        report.add(v)
    return report


def soundness_check(cfg: GenConfig, workers: int | None = None) -> SoundnessReport:
    return check_programs(gen_programs(cfg), cfg.max_steps, workers)
