import re
import subprocess
import sys

import pytest

from rlbp.cli import build_parser, main

TTTN = "[trace]\nkind = pattern\nlength = 20000\npattern = TTTN\n"

SWEEP = TTTN + """
[trace.xor]
kind = xor_of_history
length = 3000
i = 2
j = 3

[predictor.gs]
kind = gshare
table_entries = 256

[sweep]
predictors = gs
traces = trace.xor
trace_seeds = 1, 2
history_lengths = 0, 3
warmup = 100
"""


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "exp.cfg"
    p.write_text(SWEEP)
    return p


def test_gen_trace_then_run_bimodal(tmp_path, cfg, capsys):
    out = tmp_path / "t.csv"
    assert main(["gen-trace", "--spec", str(cfg), "--out", str(out)]) == 0
    assert out.read_text().startswith("pc_hex,taken,inst_gap\n")
    capsys.readouterr()
    assert main(["run", "--predictor", "bimodal", "--trace", str(out)]) == 0
    header, row = capsys.readouterr().out.strip().splitlines()
    fields = dict(zip(header.split(","), row.split(",")))
    assert abs(float(fields["mpkb"]) - 250.0) <= 1


def test_budget_command(capsys):
    assert main(["budget", "--kind", "gshare", "--bits", "524288"]) == 0
    assert main(["budget", "--kind", "gqlag", "--bits", "524288"]) == 0
    assert capsys.readouterr().out.split() == ["262144", "32768"]


def test_missing_config_fails(capsys):
    assert main(["sweep", "--config", "missing.cfg"]) != 0
    assert "config not found" in capsys.readouterr().err


def test_sweep_writes_csv_and_seed_env(tmp_path, cfg, capsys, monkeypatch):
    out = tmp_path / "r.csv"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    text = out.read_text()
    assert len(text.splitlines()) == 1 + 4 + 2
    monkeypatch.setenv("RLBP_SEED", "123")
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    assert out.read_text() != text  # cell seeds change
    assert main(["sweep", "--config", str(cfg), "--out", str(out), "--seed", "0"]) == 0
    assert out.read_text() == text  # flag beats environment; 0 is the file default


def test_sweep_to_stdout(cfg, capsys):
    assert main(["sweep", "--config", str(cfg), "--jobs", "2"]) == 0
    assert capsys.readouterr().out.startswith("predictor,kind,history_len")


def test_env_demo(tmp_path, cfg, capsys):
    out = tmp_path / "t.csv"
    main(["gen-trace", "--spec", str(cfg), "--out", str(out), "--length", "40"])
    capsys.readouterr()
    assert main(["env-demo", "--trace", str(out), "--pc", "0x1000", "--agent", "oracle"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "step,action,reward,cumulative" and lines[-1].endswith(",40")
    assert main(["env-demo", "--trace", str(out), "--pc", "0x1000", "--agent", "gshare",
                 "--ghr-len", "4"]) == 0


def test_bad_inputs_report_errors(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("pc_hex,taken,inst_gap\n0x10,7,1\n")
    assert main(["run", "--predictor", "bimodal", "--trace", str(bad)]) == 1
    assert "bad.csv:2" in capsys.readouterr().err
    assert main(["run", "--predictor", "nope", "--trace", str(bad)]) == 1
    assert main(["run", "--predictor", "gshare", "--trace", str(tmp_path / "none.csv")]) == 1
    assert "error" in capsys.readouterr().err


def test_unknown_flag_and_command_fail_fast():
    with pytest.raises(SystemExit) as e:
        main(["budget", "--kind", "gshare", "--bits", "8", "--frobnicate"])
    assert e.value.code != 0
    with pytest.raises(SystemExit) as e:
        main(["launch"])
    assert e.value.code != 0


def _flags(parser):
    return {s for a in parser._actions for s in a.option_strings if s.startswith("--")}


def test_every_flag_appears_in_help():
    parser = build_parser()
    sub = next(a for a in parser._actions if a.__class__.__name__ == "_SubParsersAction")
    assert set(sub.choices) == {"gen-trace", "run", "sweep", "env-demo", "budget"}
    for name, p in sub.choices.items():
        text = p.format_help()
        for flag in _flags(p):
            assert re.search(re.escape(flag) + r"\b", text), (name, flag)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "rlbp", "budget", "--kind", "gqlag", "--bits", "524288"],
                       capture_output=True, text=True, check=True)
    assert r.stdout.strip() == "32768"
