import csv
import io

import pytest

from mpcmp import harness
from mpcmp.cli import CSV_COLUMNS, main


def _csv_rows(text):
    start = text.index("protocol,")
    return list(csv.DictReader(io.StringIO(text[start:])))


def test_gen_then_run_then_reuse(tmp_path, capsys):
    d = tmp_path / "t"
    assert main(["gen", "--protocol", "msb_p", "--prime", "61", "--batch", "3", "--seed", "4", "--tapes", str(d)]) == 0
    assert sorted(p.name for p in d.glob("*.tape")) == [f"msb_p.p{i}.tape" for i in range(3)]
    capsys.readouterr()
    assert main(["run", "--protocol", "msb_p", "--tapes", str(d), "--inputs", "5,30,60", "--seed", "4"]) == 0
    out = capsys.readouterr().out
    assert "5 -> 0" in out and "30 -> 1" in out and "60 -> 1" in out
    rows = _csv_rows(out)
    assert list(rows[0]) == list(CSV_COLUMNS) and rows[0]["rounds"] == "2"
    assert main(["run", "--protocol", "msb_p", "--tapes", str(d), "--inputs", "5,30,60"]) == 3


def test_bad_inputs_do_not_consume_tapes(tmp_path, capsys):
    d = tmp_path / "t"
    main(["gen", "--protocol", "ltbits_2n", "--ell", "4", "--batch", "1", "--seed", "1", "--tapes", str(d)])
    assert main(["run", "--tapes", str(d), "--inputs", "1:2,3:4"]) == 2
    assert main(["run", "--tapes", str(d), "--inputs", "3:9"]) == 0
    assert "(3, 9) -> 1" in capsys.readouterr().out


def test_gen_regenerates_same_seed(tmp_path):
    d = tmp_path / "t"
    args = ["gen", "--protocol", "and_m", "--ell", "3", "--seed", "9", "--tapes", str(d)]
    assert main(args) == 0
    assert main(["run", "--tapes", str(d), "--inputs", "111"]) == 0
    assert main(args) == 0
    assert main(["run", "--tapes", str(d), "--inputs", "110"]) == 0


def test_usage_errors(capsys):
    assert main(["run", "--protocol", "msb_p", "--prime", "3", "--inputs", "1"]) == 2
    assert main(["run", "--protocol", "ltbits_p", "--prime", "13", "--ell", "12", "--inputs", "1:2"]) == 2
    assert main(["run", "--protocol", "msb_p", "--prime", "15", "--inputs", "1"]) == 2
    assert main(["run", "--protocol", "msb_2k"]) == 2
    assert main(["bogus"]) == 2


def test_tamper_exits_with_abort(capsys):
    args = ["run", "--protocol", "msb_2k", "--k", "16", "--security", "active", "--inputs", "7,40000", "--seed", "3"]
    assert main(args) == 0
    assert main(args + ["--tamper", "2:1:5"]) == 4
    assert "abort" in capsys.readouterr().err


def test_missing_tape_dir(tmp_path):
    assert main(["run", "--protocol", "msb_p", "--tapes", str(tmp_path / "none"), "--inputs", "1"]) == 3


def test_run_over_tcp(capsys):
    assert main(["run", "--protocol", "prefix_and", "--ell", "5", "--inputs", "11011", "--fabric", "tcp", "--seed", "2"]) == 0
    out = capsys.readouterr().out
    assert "-> [1, 1, 0, 0, 0]" in out
    assert _csv_rows(out)[0]["wall_ms"] != ""


def test_bench_branch_sweep(tmp_path, capsys):
    md = tmp_path / "best.md"
    out_csv = tmp_path / "bench.csv"
    rc = main(["bench", "--protocol", "msb_2k", "--k", "32", "--branch", "2..10", "--net", "wan", "--seed", "1",
               "--csv", str(out_csv), "--md", str(md)])
    assert rc == 0
    rows = list(csv.DictReader(out_csv.open()))
    assert len(rows) == 9 and list(rows[0]) == list(CSV_COLUMNS)
    by_n = {int(r["n_branch"]): float(r["modeled_ms"]) for r in rows}
    fastest = min(by_n.values())
    assert by_n[2] / fastest >= 1.5
    # the CSV is rounded, so several n can tie on the minimum
    table = md.read_text()
    assert any(f"| {n} |" in table for n, t in by_n.items() if t == fastest)


def test_bench_empty_sweep(tmp_path, capsys):
    out_csv = tmp_path / "e.csv"
    assert main(["bench", "--k", "16", "--security", "", "--csv", str(out_csv)]) == 0
    assert out_csv.read_text().strip() == ",".join(CSV_COLUMNS)


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# demo\nprotocol = ltbits_p\nprime = 61\nell = 5\nparties = 4\n")
    assert main(["run", "--config", str(cfg), "--inputs", "7:9", "--seed", "5"]) == 0
    row = _csv_rows(capsys.readouterr().out)[0]
    assert (row["protocol"], row["param"], row["parties"]) == ("ltbits_p", "61", "4")
    assert main(["run", "--config", str(cfg), "--parties", "2", "--inputs", "7:9", "--seed", "5"]) == 0
    assert _csv_rows(capsys.readouterr().out)[0]["parties"] == "2"
    cfg.write_text("colour = blue\n")
    assert main(["run", "--config", str(cfg)]) == 2


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("MPCMP_SEED", "77")
    assert main(["run", "--protocol", "msb_p", "--prime", "13"]) == 0
    first = capsys.readouterr().out
    assert main(["run", "--protocol", "msb_p", "--prime", "13"]) == 0
    assert capsys.readouterr().out == first
    assert _csv_rows(first)[0]["seed"] == "77"


def test_verify_exit_codes(tmp_path, capsys, monkeypatch):
    out_csv = tmp_path / "v.csv"
    assert main(["verify", "--suite", "round_counts", "--suite", "communication", "--budget", "5", "--csv", str(out_csv)]) == 0
    assert "[PASS] round_counts" in capsys.readouterr().out
    assert len(list(csv.DictReader(out_csv.open()))) == 2
    assert main(["verify", "--suite", "nonsense"]) == 2
    monkeypatch.setattr(harness, "oracle_compare", lambda x, R: 1 - int(x < R))
    assert main(["verify", "--suite", "ltbits_p_exhaustive", "--budget", "20"]) == 1
    assert "[FAIL]" in capsys.readouterr().out
