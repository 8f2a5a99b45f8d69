import shutil

import pytest

from pvasskit.cli import main, run
from pvasskit.core import Configuration, reach_set_bounded
from pvasskit.models import transfer_model


def payload(text):
    return text.split("---\n", 1)[1].splitlines()


def status(text):
    return text.splitlines()[0]


def test_reach_matches_oracle(samples):
    code, text = run(["reach", "--model", str(samples / "transfer.pv"), "--from", "q_s (0,0,0)", "--bound", "2"])
    assert code == 0 and status(text) == "status: ok"
    order = {q: i for i, q in enumerate(transfer_model().states)}
    want = sorted(reach_set_bounded(transfer_model(), Configuration("q_s", (0, 0, 0)), 2), key=lambda c: (order[c.state], c.counters))
    assert payload(text) == [str(c) for c in want]


def test_translate_then_eval_matches_section(samples, tmp_path):
    model = str(samples / "transfer.pv")
    section = ["--model", model, "--p", "q_s", "--q", "q_s", "--bs", "(0)", "--bt", "(0)"]
    code, _ = run(["translate", "--to-regex", *section, "--out", str(tmp_path)])
    assert code == 0
    _, evaluated = run(["eval", "--expr", str(tmp_path / "expr.rx"), "--bound", "2"])
    _, direct = run(["section", *section, "--bound", "2"])
    assert payload(evaluated) == payload(direct) and payload(direct)


def test_translate_to_pvass(samples, tmp_path):
    code, text = run(["translate", "--to-pvass", "--expr", str(samples / "incdec_comp.rx"), "--out", str(tmp_path)])
    assert code == 0
    p, q = (line.split()[1] for line in payload(text)[1:3])
    _, rel = run(["section", "--model", str(tmp_path / "section.pv"), "--p", p, "--q", q, "--bound", "2"])
    assert len(payload(rel)) == 9


def test_compare_runs_incomparable(samples):
    args = ["compare-runs", "--model", str(samples / "crossing.pv"), "--p", "q", "--q", "p"]
    code, text = run([*args, str(samples / "crossing_short.run"), str(samples / "crossing_long.run")])
    assert code == 0 and payload(text) == ["incomparable"]


def test_flat_check_reports_failure(samples):
    args = ["flat-check", "--model", str(samples / "transfer.pv"), "--p", "q_s", "--q", "q_t", "--bs", "(0)"]
    args += ["--witness", str(samples / "transfer_flat.words")]
    assert run([*args, "--bound", "1"])[0] == 0
    code, text = run([*args, "--bound", "2"])
    assert code == 1 and status(text) == "status: fail"


def test_separator(samples):
    args = ["separator", "--model", str(samples / "transfer.pv"), "--semilinear", str(samples / "transfer_separator.sl")]
    args += ["--from", "q_s (0,0,0)", "--to", "q_s (0,1,0)", "--bound", "3"]
    code, text = run(args)
    assert code == 0 and payload(text)[0].startswith("separates")


def test_intersect(samples):
    args = ["intersect", "--model", str(samples / "transfer_round.pv"), "--p", "q_s", "--q", "q_t", "--bs", "(0)", "--bt", "(0)"]
    code, text = run([*args, "--semilinear", str(samples / "out_z.sl"), "--bound", "1"])
    assert code == 0
    assert payload(text)[1:] == ["(0,0) -> (0,1)", "(0,0) -> (1,1)", "(1,0) -> (1,1)"]


def test_enumerate_minimize_pump_decompose(samples, tmp_path):
    expr = str(samples / "transfer_star.rx")
    code, text = run(["enumerate", "--expr", expr, "--bound", "1", "--steps", "10", "--segments", "2"])
    assert code == 0
    runs = payload(text)
    assert len(runs) == 7
    code, text = run(["minimize", "--expr", expr, "--bound", "1", "--steps", "10", "--segments", "2"])
    assert code == 0 and len(payload(text)) < len(runs)
    (tmp_path / "a.run").write_text(runs[-1] + "\n")
    code, text = run(["decompose", "--expr", expr, "--bound", "1", str(tmp_path / "a.run")])
    assert code == 0 and payload(text)[0].startswith("factors ")
    (tmp_path / "b.run").write_text(runs[0] + "\n")
    code, text = run(["pump", "--expr", expr, "--n", "2", str(tmp_path / "b.run"), str(tmp_path / "b.run")])
    assert code == 0 and len(payload(text)) == 4


def test_invariant_and_validate(samples):
    args = ["invariant", "--model", str(samples / "transfer.pv"), "--semilinear", str(samples / "transfer_separator.sl") + ":separator"]
    assert run([*args, "--bound", "2"])[0] == 0
    assert run(["validate", "--model", str(samples / "transfer.pv")])[0] == 0
    assert run(["validate", "--expr", str(samples / "edgeless_star.rx")])[0] == 0


def test_usage_and_parse_errors(samples, tmp_path):
    assert run(["reach", "--model", str(samples / "transfer.pv"), "--from", "q_s (0,0,0)"])[0] == 2
    assert run(["reach", "--model", str(tmp_path / "missing.pv"), "--from", "q (0)", "--bound", "1"])[0] == 2
    assert run(["reach", "--model", str(samples / "transfer.pv"), "--from", "q_s (0,0,0)", "--bound", "-1"])[0] == 2
    assert run(["translate", "--model", str(samples / "transfer.pv"), "--out", str(tmp_path)])[0] == 2
    bad = tmp_path / "bad.pv"
    bad.write_text("pvass dim=2\nstate q\nedge q q vec=(1) zerotest=0\n")
    code, text = run(["validate", "--model", str(bad)])
    assert code == 2 and ":3:" in payload(text)[0]
    with pytest.raises(SystemExit) as info:
        run(["reach", "--unknown-flag"])
    assert info.value.code == 2


def test_pump_incomparable_is_analysis_failure(samples):
    args = ["pump", "--model", str(samples / "crossing.pv"), "--p", "q", "--q", "p", "--n", "2"]
    assert run([*args, str(samples / "crossing_short.run"), str(samples / "crossing_long.run")])[0] == 1


def test_reports_are_reproducible_and_digest_inputs(samples, tmp_path, capsys):
    copy = tmp_path / "t.pv"
    shutil.copy(samples / "transfer.pv", copy)
    args = ["reach", "--model", str(copy), "--from", "q_s (0,0,0)", "--bound", "1"]
    first, second = run(args)[1], run(args)[1]
    assert first == second
    copy.write_text(copy.read_text() + "# changed\n")
    third = run(args)[1]
    assert third != first and payload(third) == payload(first)
    assert main(args) == 0
    assert capsys.readouterr().out == third
