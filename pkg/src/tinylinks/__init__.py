"""TinyLinks: a concrete evaluator, a types-and-effects analyser and a legacy checker."""
from __future__ import annotations

from .abstract import AnalysisReport, analyze
from .concrete import RunReport, run
from .legacy import LegacyJudgment, typecheck_legacy
from .parser import ParseError, parse
from .pretty import pretty

__all__ = [
    "AnalysisReport",
    "LegacyJudgment",
    "ParseError",
    "RunReport",
    "analyze",
    "parse",
    "pretty",
    "run",
    "typecheck_legacy",
]
__version__ = "0.1.0"
