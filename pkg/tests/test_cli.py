import csv
import json

import pytest

from lookahead.cli import main


@pytest.fixture()
def workdir(tmp_path):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("the cat sat on the mat. the cat ran to the mat. " * 40, encoding="utf-8")
    prompts = tmp_path / "prompts.txt"
    prompts.write_text("the cat \nthe mat \nthe cat ran ", encoding="utf-8")
    return tmp_path


def run(workdir, *extra, command="decode"):
    out = workdir / "report.json"
    argv = [
        command,
        "--model", "markov",
        "--corpus", str(workdir / "corpus.txt"),
        "--prompts", str(workdir / "prompts.txt"),
        "--tokenizer", "bytes",
        "-W", "5", "-N", "3",
        "--max-tokens", "24",
        "--seed", "7",
        "--out", str(out),
        *extra,
    ]
    code = main(argv)
    return code, out


def test_decode_lookahead_report(workdir):
    code, out = run(workdir, "--mode", "lookahead")
    assert code == 0
    report = json.loads(out.read_text())
    assert report["mode"] == "lookahead"
    assert len(report["prompts"]) == 3
    for row in report["prompts"]:
        assert row["compression"] >= 1.0
        assert row["tokens"] == 24
    text = (workdir / "report.txt").read_text().splitlines()
    assert len(text) == 3


def test_report_aggregate_recomputable(workdir):
    code, out = run(workdir, "--mode", "lookahead")
    report = json.loads(out.read_text())
    rows = report["prompts"]
    total_tokens = sum(r["tokens"] for r in rows)
    total_steps = sum(r["steps"] for r in rows)
    agg = report["aggregate"]
    assert agg["total_tokens"] == total_tokens
    assert agg["total_steps"] == total_steps
    assert agg["overall_compression"] == pytest.approx(total_tokens / total_steps)
    assert agg["flops_proxy"] == (5 + 5) * (3 - 1)


def test_reports_byte_identical_across_runs(workdir):
    _, out = run(workdir, "--mode", "lookahead")
    first = out.read_bytes()
    _, out = run(workdir, "--mode", "lookahead")
    assert out.read_bytes() == first


def test_bench_lookahead_matches_autoregressive_bytes(workdir):
    code, out = run(workdir, command="bench")
    assert code == 0
    ar = (workdir / "report.autoregressive.txt").read_bytes()
    la = (workdir / "report.lookahead.txt").read_bytes()
    ja = (workdir / "report.jacobi.txt").read_bytes()
    assert la == ar
    assert ja == ar
    report = json.loads(out.read_text())
    assert set(report["modes"]) == {"autoregressive", "jacobi", "lookahead"}
    assert report["modes"]["autoregressive"]["aggregate"]["overall_compression"] == 1.0


def test_simulate_reports_comm_and_matches_decode(workdir):
    code, out = run(workdir, "--devices", "3", command="simulate")
    assert code == 0
    report = json.loads(out.read_text())
    comm = report["aggregate"]["comm"]
    assert comm["sync_events"] == report["aggregate"]["total_steps"]
    assert comm["tokens_synchronized"] > 0
    sim_text = (workdir / "report.txt").read_bytes()

    code, _ = run(workdir, "--mode", "lookahead")
    assert sim_text == (workdir / "report.txt").read_bytes()


def test_analyze_closed_form_row(tmp_path):
    out = tmp_path / "curve.csv"
    code = main([
        "analyze", "--alpha", "0.5", "--gamma", "2", "--b", "1",
        "--trials", "50000", "--out", str(out),
    ])
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 1
    assert float(rows[0]["predicted_S"]) == pytest.approx(1.75, abs=1e-12)
    assert abs(float(rows[0]["mc_mean"]) - 1.75) <= 3 * float(rows[0]["mc_stderr"])


def test_analyze_stdout(capsys):
    code = main(["analyze", "--alpha", "0.3", "--gamma", "2", "--b", "1", "2", "--trials", "2000"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("alpha,")
    assert len(lines) == 3


def test_csv_summary_format(workdir):
    code, out = run(workdir, "--mode", "lookahead", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader((workdir / "report.csv").open()))
    assert len(rows) == 3
    assert rows[0]["mode"] == "lookahead"


def test_ints_tokenizer_roundtrip(tmp_path):
    (tmp_path / "corpus.txt").write_text("0 1 2 3 " * 100, encoding="utf-8")
    (tmp_path / "prompts.txt").write_text("0 1\n2 3", encoding="utf-8")
    out = tmp_path / "r.json"
    code = main([
        "decode", "--mode", "lookahead",
        "--model", "markov",
        "--corpus", str(tmp_path / "corpus.txt"),
        "--prompts", str(tmp_path / "prompts.txt"),
        "--tokenizer", "ints",
        "-W", "3", "-N", "3", "--max-tokens", "8",
        "--out", str(out),
    ])
    assert code == 0
    lines = (tmp_path / "r.txt").read_text().splitlines()
    assert all(tok.isdigit() for line in lines for tok in line.split())


def test_transformer_model_decode(tmp_path):
    (tmp_path / "prompts.txt").write_text("5 3 1", encoding="utf-8")
    out = tmp_path / "r.json"
    code = main([
        "decode", "--mode", "autoregressive",
        "--model", "transformer",
        "--prompts", str(tmp_path / "prompts.txt"),
        "--tokenizer", "ints", "--vocab-size", "16",
        "--dim", "8", "--layers", "1", "--heads", "2",
        "--max-tokens", "6",
        "--out", str(out),
    ])
    assert code == 0
    assert json.loads(out.read_text())["prompts"][0]["tokens"] == 6


def test_usage_error_exit_code_2(workdir):
    with pytest.raises(SystemExit) as excinfo:
        main(["decode", "--bogus-flag"])
    assert excinfo.value.code == 2


def test_missing_file_exit_code_1(tmp_path, capsys):
    code = main([
        "decode", "--model", "markov",
        "--corpus", str(tmp_path / "nope.txt"),
        "--prompts", str(tmp_path / "nope.txt"),
        "--out", str(tmp_path / "r.json"),
    ])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_empty_prompt_line_exit_code_1(tmp_path, capsys):
    (tmp_path / "corpus.txt").write_text("abcabc" * 20, encoding="utf-8")
    (tmp_path / "prompts.txt").write_text("abc\n\nabc", encoding="utf-8")
    code = main([
        "decode", "--model", "markov",
        "--corpus", str(tmp_path / "corpus.txt"),
        "--prompts", str(tmp_path / "prompts.txt"),
        "--out", str(tmp_path / "r.json"),
    ])
    assert code == 1
    assert "line 2" in capsys.readouterr().err
