import json

import pytest

from weft import __version__
from weft.cli import main


@pytest.fixture
def spec(tmp_path):
    path = tmp_path / "s.mtl"
    path.write_text("# demo\nonce[0:10](p && q)\nhistorically(p && q)\n")
    return path


@pytest.fixture
def trace(tmp_path):
    path = tmp_path / "t.jsonl"
    rows = [(1, 1), (1, 0), (0, 1), (1, 1)]
    path.write_text("".join(json.dumps({"time": t, "p": p, "q": q}) + "\n" for t, (p, q) in enumerate(rows)))
    return path


def test_run_happy_path(spec, trace, capsys):
    code = main(["run", "--spec", str(spec), "--trace", str(trace), "--format", "json", "--time-model", "discrete"])
    assert code == 0
    assert capsys.readouterr().out == "0,0,1\n1,1,1\n2,1,0\n3,1,0\n"


def test_run_stats_and_out(spec, trace, tmp_path, capsys):
    out = tmp_path / "v.csv"
    assert main(["run", "--spec", str(spec), "--trace", str(trace), "--out", str(out), "--stats"]) == 0
    stats = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert stats["alloc_counter"] == 0
    assert stats["high_water"] <= stats["capacity"]
    assert out.read_text().count("\n") == 4


def test_missing_spec_is_usage_error(trace, capsys):
    with pytest.raises(SystemExit) as info:
        main(["run", "--trace", str(trace)])
    assert info.value.code == 1
    assert "usage" in capsys.readouterr().err


def test_parse_error_names_line(tmp_path, trace, capsys):
    bad = tmp_path / "bad.mtl"
    bad.write_text("p\nq\np since\n")
    assert main(["run", "--spec", str(bad), "--trace", str(trace)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_data_error_exit_code(spec, tmp_path, capsys):
    broken = tmp_path / "t.jsonl"
    broken.write_text('{"time":0}\n{"oops":1}\n')
    assert main(["run", "--spec", str(spec), "--trace", str(broken)]) == 3
    assert "line 2" in capsys.readouterr().err


def test_compile_report(spec, capsys):
    assert main(["compile", "--spec", str(spec)]) == 0
    out = capsys.readouterr().out
    assert "nodes: 5" in out
    assert "compression: 1.6000" in out
    assert "arena_capacity:" in out


def test_gen_trace_and_run_dense(spec, tmp_path, capsys):
    path = tmp_path / "d.bin"
    assert main(["gen-trace", "--kind", "dense", "--steps", "200", "--density", "5", "--format", "bin",
                 "--out", str(path)]) == 0
    assert main(["run", "--spec", str(spec), "--trace", str(path), "--format", "bin", "--time-model", "dense"]) == 0
    for line in capsys.readouterr().out.splitlines():
        rec = json.loads(line)
        assert rec["property"] in (1, 2) and 0 <= rec["begin"] < rec["end"] <= 200


def test_check_passes(capsys):
    assert main(["check", "--cases", "50", "--seed", "4"]) == 0
    assert main(["check", "--cases", "50", "--seed", "4", "--time-model", "dense"]) == 0


def test_check_reports_counterexample(monkeypatch, capsys):
    import weft.cli as cli

    monkeypatch.setattr(cli, "oracle_eval_all", lambda f, w: [True] * w.length)
    monkeypatch.setattr(cli, "random_formula", lambda rng, *a: cli.normalize(cli_false()))
    assert main(["check", "--cases", "5"]) == 4
    out = capsys.readouterr().out
    assert "formula: false" in out and "step: 0" in out and "time,p,q,r" in out


def cli_false():
    from weft.syntax import FALSE

    return FALSE


def test_bench_report(tmp_path):
    report = tmp_path / "r.json"
    assert main(["bench", "--scenario", "nested-best", "--steps", "2000", "--mode", "multi",
                 "--repeats", "1", "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["nodes_shared"] == 23 and data["nodes_independent"] == 94
    assert data["steps"] == 2000 and len(data["checksums"]) == 10


def test_deterministic_output(spec, trace, capsys):
    main(["run", "--spec", str(spec), "--trace", str(trace)])
    first = capsys.readouterr().out
    main(["run", "--spec", str(spec), "--trace", str(trace)])
    assert capsys.readouterr().out == first


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert __version__ in capsys.readouterr().out
