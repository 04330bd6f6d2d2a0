"""CLI surface: exit codes, JSON schemas, flags."""

import io
import json
import os

from trx.cli import main

from conftest import grammar_path

LEFT_RECURSIVE_MATH = """\
@start expr ;
ws     <- (' ' / '\\t')* ;
number <- [0-9]+ ;
term   <- ws number ws / ws '(' expr ')' ws ;
factor <- term '*' factor / term ;
expr   <- expr '+' factor / factor ;
"""


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def validate_tree_schema(doc):
    assert isinstance(doc["start"], int) and isinstance(doc["end"], int)
    if "rule" in doc:
        assert isinstance(doc["rule"], str)
        for child in doc["children"]:
            validate_tree_schema(child)
        assert set(doc) == {"rule", "start", "end", "children"}
    else:
        assert isinstance(doc["text"], str)
        assert set(doc) == {"text", "start", "end"}


def test_check_math_grammar_ok(capsys):
    code, out, _ = run(capsys, "check", grammar_path("math.peg"))
    assert code == 0
    doc = json.loads(out)
    assert doc["wellFormed"] is True
    assert doc["offenders"] == []
    assert doc["expressionCount"] == doc["wellFormedCount"]


def test_check_left_recursive_variant(capsys, tmp_path):
    path = tmp_path / "leftrec.peg"
    path.write_text(LEFT_RECURSIVE_MATH)
    code, out, _ = run(capsys, "check", str(path))
    assert code == 1
    doc = json.loads(out)
    assert doc["wellFormed"] is False
    prods = {o["production"] for o in doc["offenders"]}
    assert "expr" in prods
    expr_offenders = [o for o in doc["offenders"] if o["production"] == "expr"]
    assert any(o["reason"] == "LeftRecursionSuspected" for o in expr_offenders)
    assert all("line" in o for o in doc["offenders"])


def test_check_simplified_mode_diverges_on_guarded_recursion(capsys, tmp_path):
    path = tmp_path / "guard.peg"
    path.write_text("A <- !eps A ;")
    code, _, _ = run(capsys, "check", str(path))
    assert code == 0
    code, _, _ = run(capsys, "check", "--simplified", str(path))
    assert code == 1


def test_check_missing_file(capsys):
    code, _, err = run(capsys, "check", "/nonexistent/g.peg")
    assert code == 2
    assert "cannot read" in err


def test_check_syntax_error(capsys, tmp_path):
    path = tmp_path / "bad.peg"
    path.write_text("A <- ")
    code, _, err = run(capsys, "check", str(path))
    assert code == 2
    assert "syntax error" in err


def test_parse_tree_json(capsys, tmp_path):
    inp = tmp_path / "inp.xml"
    inp.write_bytes(b"<a><b/></a>")
    code, out, _ = run(capsys, "parse", grammar_path("xml-lite.peg"),
                       str(inp), "--json")
    assert code == 0
    doc = json.loads(out)
    validate_tree_schema(doc)
    assert doc["rule"] == "element"
    golden = json.load(open(os.path.join(os.path.dirname(__file__), "golden",
                                         "xml_lite_tree.json")))
    assert doc == golden


def test_parse_reject_reports_position(capsys, tmp_path):
    inp = tmp_path / "inp.xml"
    inp.write_bytes(b"<a></b>")
    code, out, err = run(capsys, "parse", grammar_path("xml-lite.peg"),
                         str(inp), "--json")
    assert code == 1
    doc = json.loads(out)
    assert doc["ok"] is False
    assert doc["farthest"] == 4
    assert "line 1" in err


def test_parse_refuses_uncertified_grammar(capsys, tmp_path):
    path = tmp_path / "leftrec.peg"
    path.write_text(LEFT_RECURSIVE_MATH)
    inp = tmp_path / "inp.txt"
    inp.write_text("1")
    code, _, err = run(capsys, "parse", str(path), str(inp))
    assert code == 3
    assert "not well-formed" in err


def test_parse_prefix_mode(capsys, tmp_path):
    inp = tmp_path / "inp.txt"
    inp.write_bytes(b"<a/>trailing garbage")
    code, out, _ = run(capsys, "parse", grammar_path("xml-lite.peg"),
                       str(inp), "--prefix")
    assert code == 0
    doc = json.loads(out)
    assert doc == {"ok": True, "consumed": 4, "total": 20}
    # without --prefix the same input is a reject
    code, _, _ = run(capsys, "parse", grammar_path("xml-lite.peg"), str(inp))
    assert code == 1


def test_parse_eval_demo_prints_36(capsys, tmp_path):
    inp = tmp_path / "e.txt"
    inp.write_text("(1+2) * (3 * 4)")
    code, out, _ = run(capsys, "parse", grammar_path("math.peg"), str(inp),
                       "--eval")
    assert code == 0
    assert out.strip() == "36"


def test_parse_eval_rejects_other_grammars(capsys, tmp_path):
    inp = tmp_path / "e.txt"
    inp.write_text("1")
    code, _, err = run(capsys, "parse", grammar_path("xml-lite.peg"),
                       str(inp), "--eval")
    assert code == 2
    assert "math grammar" in err


def test_parse_stdin(capsys, monkeypatch):
    stdin = io.TextIOWrapper(io.BytesIO(b"1+2"))
    monkeypatch.setattr("sys.stdin", stdin)
    code, out, _ = run(capsys, "parse", grammar_path("math.peg"), "-",
                       "--json")
    assert code == 0
    validate_tree_schema(json.loads(out))


def test_parse_packrat_mode(capsys, tmp_path):
    inp = tmp_path / "inp.txt"
    inp.write_bytes(b"(1+2) * (3 * 4)")
    code, out, err = run(capsys, "parse", grammar_path("math.peg"), str(inp),
                         "--mode", "packrat", "--json")
    assert code == 0
    assert "memo" in err


def test_bench_size_zero_no_crash(capsys):
    code, out, _ = run(capsys, "bench", grammar_path("xml-lite.peg"),
                       "--gen", "xmark-lite", "--sizes", "0", "--reps", "1",
                       "--json")
    assert code == 0
    rows = json.loads(out)
    assert rows[0]["bytes"] == 0
    assert rows[0]["ok"] is False


def test_bench_corpus_dir_and_ratios(capsys, tmp_path):
    from trx.bench import xmark_lite

    (tmp_path / "a.xml").write_bytes(xmark_lite(2000, seed=1))
    (tmp_path / "b.xml").write_bytes(xmark_lite(4000, seed=2))
    code, out, _ = run(capsys, "bench", grammar_path("xml-lite.peg"),
                       "--gen", str(tmp_path), "--reps", "2", "--json")
    assert code == 0
    rows = json.loads(out)
    assert [r["label"] for r in rows] == ["a.xml", "b.xml"]
    assert all(r["ok"] for r in rows)
    assert "ratioToPrevious" in rows[1]


def test_bench_packrat_reports_memo(capsys):
    code, out, _ = run(capsys, "bench", grammar_path("xml-lite.peg"),
                       "--gen", "xmark-lite", "--sizes", "4K", "--reps", "1",
                       "--mode", "packrat", "--json")
    assert code == 0
    rows = json.loads(out)
    assert rows[0]["memo"]["entries"] > 0


def test_bench_refuses_uncertified(capsys, tmp_path):
    path = tmp_path / "leftrec.peg"
    path.write_text(LEFT_RECURSIVE_MATH)
    code, _, _ = run(capsys, "bench", str(path), "--sizes", "1K")
    assert code == 3


def test_usage_error_exit_code(capsys):
    assert main(["parse"]) == 2
    capsys.readouterr()


def test_check_synth200_fast(capsys):
    import time

    t0 = time.perf_counter()
    code, out, _ = run(capsys, "check", grammar_path("synth200.peg"))
    elapsed = time.perf_counter() - t0
    assert code == 0
    assert json.loads(out)["wellFormed"] is True
    assert elapsed < 5.0


def test_selftest_detects_injected_semantics_bug(monkeypatch):
    # A build whose interpreter deviates from the semantics (here: a
    # step-count perturbation) must fail the differential suite.
    import trx.selftest as st
    from trx.interp import ParseOutcome

    real_parse = st.parse

    def broken_parse(g, cert, data, mode="plain", memo=None):
        out = real_parse(g, cert, data, mode=mode, memo=memo)
        if mode == "plain" and out.ok:
            return ParseOutcome(out.ok, out.pos, out.value, out.steps + 1,
                                farthest=out.farthest)
        return out

    monkeypatch.setattr(st, "parse", broken_parse)
    res = st.differential_suite(min_cases=300)
    assert not res.passed


def test_color_env_override(monkeypatch, capsys):
    from trx.cli import _paint

    monkeypatch.setenv("TRX_COLOR", "0")
    assert _paint("x", "31") == "x"
    monkeypatch.setenv("TRX_COLOR", "1")
    assert _paint("x", "31") == "\x1b[31mx\x1b[0m"
