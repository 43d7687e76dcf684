from __future__ import annotations

import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from tinylinks.cli import main

CORPUS = Path(__file__).parent.parent / "corpus"


def call(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_run_counterexample_exits_two(capsys):
    code, out, _ = call(capsys, "run", CORPUS / "hello.tl")
    assert code == 2 and out.startswith("Wrong")


def test_run_safe_program(capsys):
    code, out, _ = call(capsys, "run", CORPUS / "event_assert.tl")
    assert code == 0 and "{q -> (3, EA)}" in out


def test_analyze_buy_prints_listing(capsys):
    code, out, _ = call(capsys, "analyze", CORPUS / "buy.tl")
    assert code == 1  # a function, not a page
    assert out.startswith("(type - : Function(_#value#var0_, Integer(), _annvar0_,")
    assert "[(_annvar2_,PriceIs)] {PriceIs -> _#value#var0_}, {})" in out


def test_analyze_full_application_fails(capsys):
    code, out, _ = call(capsys, "analyze", CORPUS / "buy_full.tl")
    assert code == 1 and 'Exception: No_type "apply_fun: no preconditions"' in out


def test_analyze_safe_program(capsys):
    code, out, _ = call(capsys, "analyze", CORPUS / "buy_ok.tl")
    assert code == 0 and out.rstrip().endswith("Safe")


def test_analyze_json_is_stable(capsys):
    code, out, _ = call(capsys, "analyze", "--json", CORPUS / "buy_partial.tl")
    again = call(capsys, "analyze", "--json", CORPUS / "buy_partial.tl")[1]
    assert out == again
    data = json.loads(out)
    assert set(data) >= {"verdict", "type", "dval", "constraints", "correspondence", "events"}
    assert data["correspondence"] == {"PriceIs": "5"} and data["dval"] == "Unknown"


def test_legacy_accepts_counterexample(capsys):
    code, out, _ = call(capsys, "legacy", CORPUS / "hello.tl")
    assert code == 0 and out.startswith("xml { }")


def test_legacy_rejects_unmet_assert(capsys):
    code, out, _ = call(capsys, "legacy", CORPUS / "buy_full.tl")
    assert code == 1 and out.startswith("FAIL(T-App,")


def test_parse_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.tl"
    bad.write_text("get(")
    code, _, err = call(capsys, "analyze", bad)
    assert code == 3 and "parse error" in err


def test_usage_errors(capsys, tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 4
    assert call(capsys, "run", tmp_path / "missing.tl")[0] == 4
    assert call(capsys, "fuzz", "--depth", "0")[0] == 4


def test_stdin_input(capsys, monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO('Text("hi")'))
    code, out, _ = call(capsys, "run", "-")
    assert code == 0 and 'Xml(Text("hi"))' in out


def test_fuzz_small_depth(capsys):
    code, out, _ = call(capsys, "fuzz", "--depth", "2", "--workers", "1", "--json")
    data = json.loads(out)
    assert code == 0 and data["programs"] == 134 and data["violations"] == []


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "tinylinks", "run", str(CORPUS / "hello.tl")], capture_output=True, text=True
    )
    assert proc.returncode == 2 and proc.stdout.startswith("Wrong")


@pytest.mark.parametrize("path", sorted(CORPUS.glob("*.tl")), ids=lambda p: p.name)
def test_run_and_analyze_never_crash_on_corpus(capsys, path):
    assert call(capsys, "run", path)[0] in (0, 1, 2)
    assert call(capsys, "analyze", path)[0] in (0, 1)
    assert call(capsys, "legacy", path)[0] in (0, 1)
