import json

import pytest

from swapdiag import cli


def run(args):
    return cli.main(args)


def test_curves_csv(tmp_path):
    out = tmp_path / "curves.csv"
    assert run(["curves", "--points", "9", "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "# schema_version: 1"
    assert lines[1] == "kind,strength,witness"
    rows = [ln.split(",") for ln in lines[2:]]
    assert len(rows) == 3 * 9
    table = {(r[0], float(r[1])): float(r[2]) for r in rows}
    assert table[("depolarizing", 0.0)] == pytest.approx(-0.25, abs=1e-10)
    assert table[("depolarizing", 0.375)] == pytest.approx(0.5, abs=1e-10)
    assert table[("depolarizing", 0.75)] == pytest.approx(0.75, abs=1e-10)
    assert table[("amplitude_damping", 1.0)] == pytest.approx(0.0, abs=1e-10)
    # locale-proof: every number uses a '.' decimal point
    assert all("," not in cell and ("." in cell or cell.lstrip("-").isdigit())
               for row in rows for cell in row[1:])


def test_curves_json_single_kind(tmp_path):
    out = tmp_path / "curves.json"
    assert run(["curves", "--kind", "phase_damping", "--points", "3",
                "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == 1
    assert [row["strength"] for row in doc["curves"]] == [0.0, 0.5, 1.0]
    assert doc["curves"][-1]["witness"] == pytest.approx(0.25)


def test_simulate_summary_and_records(tmp_path):
    out = tmp_path / "summary.json"
    rec = tmp_path / "records.jsonl"
    code = run(["simulate", "--channel", "phase_damping", "--strength", "1.0",
                "--seed", "3", "--shots", "100000",
                "--out", str(out), "--records", str(rec)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["schema_version"] == 1
    rows = [json.loads(ln) for ln in rec.read_text().splitlines()]
    assert len(rows) == 16 * 60 + 60
    assert sum(1 for r in rows if "marginal_basis" in r) == 60
    # full dephasing pushes a quarter of the signal into the ++ projection
    sigma = max(doc["witness"]["uncertainty"], 1e-4)
    assert abs(doc["probabilities"]["p_pp"] - 0.25) <= 3 * sigma
    assert doc["rates"]["expected"]["HV"] == pytest.approx(0.125, abs=1e-9)


def test_simulate_identity_high_stats(tmp_path):
    out = tmp_path / "summary.json"
    assert run(["simulate", "--channel", "identity", "--seed", "1",
                "--shots", "100000", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    w = doc["witness"]
    assert abs(w["value"] + 0.25) <= 3 * w["uncertainty"]


def test_deterministic_outputs(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["simulate", "--channel", "depolarizing", "--strength", "0.4",
            "--visibility", "0.44", "--seed", "7"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_diagnose_from_records(tmp_path):
    rec = tmp_path / "records.jsonl"
    out = tmp_path / "diag.json"
    assert run(["simulate", "--channel", "depolarizing", "--strength", "0.75",
                "--shots", "10000", "--seed", "11",
                "--out", str(tmp_path / "s.json"), "--records", str(rec)]) == 0
    code = run(["diagnose", "--records-in", str(rec), "--cal-visibility", "1.0",
                "--out", str(out)])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["kind"] == "depolarizing"
    assert abs(doc["strength"] - 0.75) < 0.05
    assert doc["schema_version"] == 1
    assert set(doc["sigma"]) == {"p_hh", "p_hv", "p_vv", "p_pp", "p_h"}


def test_diagnose_calibrated_bsm(tmp_path):
    out = tmp_path / "diag.json"
    assert run(["diagnose", "--channel", "identity", "--visibility", "0.44",
                "--mode", "genuine_rate_calibrated", "--seed", "5",
                "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["kind"] == "imperfect_bsm"
    assert abs(doc["strength"] - 0.44) < 0.05


def test_diagnose_unmodeled_exit_code(tmp_path):
    rec = tmp_path / "weird.jsonl"
    rows = []
    fixed = {0: 6, 1: 2, 4: 2, 5: 1, 10: 8}
    for cfg in range(16):
        for seq in range(30):
            rows.append({"config_id": cfg, "seq": seq, "count": fixed.get(cfg, 3),
                         "shots": 100, "seed": 0})
    rows += [{"marginal_basis": "H", "seq": s, "count": 50, "shots": 100, "seed": 0}
             for s in range(30)]
    rec.write_text("\n".join(json.dumps(r) for r in rows))
    out = tmp_path / "diag.json"
    code = run(["diagnose", "--records-in", str(rec), "--cal-visibility", "1.0",
                "--out", str(out)])
    assert code == 4
    doc = json.loads(out.read_text())
    assert doc["kind"] == "unmodeled"
    assert doc["strength"] is None


def test_calibrate(tmp_path):
    out = tmp_path / "cal.json"
    assert run(["calibrate", "--overlap", "0.44", "--seed", "2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert abs(doc["visibility"] - 0.44) < 0.02
    assert doc["schema_version"] == 1
    assert len(doc["dip_counts"]) == 2


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "channel": {"kind": "amplitude_damping", "strength": 0.5},
        "run": {"seed": 9, "shots": 50, "sequences": 20},
        "output": {"out": str(tmp_path / "from_file.json")},
    }))
    assert run(["--config", str(cfg), "simulate"]) == 0
    doc = json.loads((tmp_path / "from_file.json").read_text())
    assert doc["channel"] == {"kind": "amplitude_damping", "strength": 0.5}
    assert doc["run"] == {"seed": 9, "sequences": 20, "shots": 50}
    # explicit flag beats the file value
    assert run(["--config", str(cfg), "simulate", "--strength", "0.25",
                "--out", str(tmp_path / "override.json")]) == 0
    doc = json.loads((tmp_path / "override.json").read_text())
    assert doc["channel"]["strength"] == 0.25


def test_error_exit_codes(tmp_path, capsys):
    assert run(["simulate", "--channel", "depolarizing", "--strength", "1.5"]) == 2
    # argparse rejects unknown enum values itself, also with code 2
    with pytest.raises(SystemExit) as exc:
        run(["curves", "--kind", "identity"])
    assert exc.value.code == 2
    cfg = tmp_path / "curves.json"
    cfg.write_text(json.dumps({"curves": {"kind": "identity"}}))
    assert run(["--config", str(cfg), "curves"]) == 2
    assert run(["curves", "--points", "1"]) == 2
    assert run(["simulate", "--channel", "identity", "--shots", "0"]) == 2
    missing = str(tmp_path / "missing.jsonl")
    assert run(["diagnose", "--records-in", missing]) == 3
    bad_cfg = tmp_path / "bad.json"
    bad_cfg.write_text("{not json")
    assert run(["--config", str(bad_cfg), "curves"]) == 2
    assert run(["--config", str(tmp_path / "nope.json"), "curves"]) == 3
    unwritable = str(tmp_path / "no_dir" / "out.csv")
    assert run(["curves", "--out", unwritable]) == 3
    capsys.readouterr()


def test_stdout_output(capsys):
    assert run(["curves", "--points", "2", "--kind", "amplitude_damping"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["curves"][0]["witness"] == pytest.approx(-0.25)
