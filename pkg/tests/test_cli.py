import csv
import json
import math

import pytest

from manifold_frames import cli

SMALL = {
    "backend": {"kind": "sphere", "L_max": 8, "n_theta": 12, "n_phi": 24},
    "partition": {"b": [0.7, 0.35]},
    "besov": [[1, 2, 2], [2, 0.7, 0.7]],
    "reconstruct": {"functions": 2},
}


def run(tmp_path, command, config=SMALL, extra=(), name="out"):
    cfg_path = tmp_path / f"{name}.json"
    cfg_path.write_text(json.dumps(config))
    out = tmp_path / name
    code = cli.main([command, "--config", str(cfg_path), "--out", str(out), *extra])
    return code, out


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config_sha256=")
    return lines[0].split("=", 1)[1], list(csv.DictReader(lines[1:]))


def test_bounds_defaults(tmp_path):
    code = cli.main(["bounds", "--out", str(tmp_path / "b")])
    assert code == 0
    _, rows = read_csv(tmp_path / "b" / "bounds.csv")
    by_a = {float(r["a"]): r for r in rows}
    a13 = 2.0 ** (1.0 / 3.0)
    assert float(by_a[a13]["ratio_minus_1"]) <= 1e-4
    assert float(by_a[2.0]["B_over_A"]) > float(by_a[a13]["B_over_A"])
    assert all(abs(float(r["c"]) - 0.25) <= 1e-9 for r in rows)


def test_partition(tmp_path):
    code, out = run(tmp_path, "partition")
    assert code == 0
    summary = json.loads((out / "partition_summary.json").read_text())
    assert all(r["passed"] for r in summary["runs"])
    part = json.loads((out / "partition_b0.35.json").read_text())
    assert set(part) == {"config_hash", "a", "b", "levels"}
    js = [lev["j"] for lev in part["levels"]]
    assert js == sorted(js)
    assert set(part["levels"][0]["cells"][0]) == {"center", "members", "measure", "diameter"}


def test_partition_torus(tmp_path):
    config = {"backend": {"kind": "torus", "K_max": 4, "n_grid": 16}, "partition": {"b": [0.5]}}
    code, out = run(tmp_path, "partition", config)
    assert code == 0
    assert json.loads((out / "partition_summary.json").read_text())["runs"][0]["passed"]


def test_frame(tmp_path):
    code, out = run(tmp_path, "frame")
    assert code == 0
    _, rows = read_csv(out / "frame_bounds.csv")
    assert [float(r["b"]) for r in rows] == [0.7, 0.35]
    assert float(rows[1]["B_over_A_emp"]) < float(rows[0]["B_over_A_emp"])
    assert float(rows[1]["Q_minus_S"]) < float(rows[0]["Q_minus_S"])
    assert all(float(r["S_of_constant"]) == 0.0 for r in rows)
    report = json.loads((out / "frame_bounds.json").read_text())
    assert set(report["runs"][0]) >= {"A_emp", "B_emp", "A_daub", "B_daub", "b", "a", "j_range"}


def test_besov(tmp_path):
    code, out = run(tmp_path, "besov")
    assert code == 0
    report = json.loads((out / "besov.json").read_text())
    assert [r["l"] for r in report["runs"]] == [1, 2]
    assert all(r["spread"] <= 50 for r in report["runs"])
    sweep = json.loads((out / "harmonic_sweep.json").read_text())
    assert abs(sweep["runs"][0]["slope"] - 0.5) <= 0.15
    _, rows = read_csv(out / "besov.csv")
    assert len(rows) == 16


def test_reconstruct(tmp_path):
    code, out = run(tmp_path, "reconstruct")
    assert code == 0
    _, rows = read_csv(out / "reconstruct.csv")
    assert len(rows) == 4
    for r in rows:
        assert float(r["relative_error"]) <= 1e-6
        assert int(r["iterations"]) <= int(r["iteration_bound"])
    assert (out / "coefficients_(1_2_2).csv").exists()


def test_not_converged_exit(tmp_path):
    config = dict(SMALL, reconstruct={"functions": 1, "max_iter": 1, "tol": 1e-14})
    code, _ = run(tmp_path, "reconstruct", config)
    assert code == cli.EXIT_NOT_CONVERGED


def test_unknown_key(tmp_path, capsys):
    code, _ = run(tmp_path, "bounds", {"filtre": {}})
    assert code == cli.EXIT_CONSTRAINT
    assert "filtre" in capsys.readouterr().err


def test_unknown_backend_key(tmp_path):
    code, _ = run(tmp_path, "bounds", {"backend": {"kind": "torus", "L_max": 3}})
    assert code == cli.EXIT_CONSTRAINT


def test_missing_mesh(tmp_path):
    code, _ = run(tmp_path, "bounds", {"backend": {"kind": "mesh", "path": "nope.txt"}})
    assert code == cli.EXIT_CONSTRAINT


def test_inadmissible(tmp_path):
    config = dict(SMALL, filter={"l": 1})
    code, _ = run(tmp_path, "besov", config)
    assert code == cli.EXIT_CONSTRAINT


def test_constraint_violation_exit(tmp_path, capsys):
    config = dict(SMALL, partition={"b": [0.5], "Cfloor": 100.0})
    code, _ = run(tmp_path, "partition", config)
    assert code == cli.EXIT_CONSTRAINT
    assert "ConstraintViolation" in capsys.readouterr().err


def test_mesh_backend(tmp_path, mesh_file):
    config = {"backend": {"kind": "mesh", "path": str(mesh_file)}, "partition": {"b": [0.5]},
              "besov": [[1, 2, 2]], "reconstruct": {"functions": 1}}
    code, out = run(tmp_path, "reconstruct", config)
    assert code == 0
    _, rows = read_csv(out / "reconstruct.csv")
    assert float(rows[0]["relative_error"]) <= 1e-6


def test_hash_and_determinism(tmp_path):
    _, out1 = run(tmp_path, "besov", name="one")
    _, out2 = run(tmp_path, "besov", name="two")
    files = sorted(p.name for p in out1.iterdir())
    for name in files:
        # output directory is excluded from the hash, so files are bit-identical
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    digest, _ = read_csv(out1 / "besov.csv")
    assert json.loads((out1 / "besov.json").read_text())["config_hash"] == digest


def test_seed_changes_hash(tmp_path):
    _, out1 = run(tmp_path, "besov", name="s0")
    _, out2 = run(tmp_path, "besov", extra=("--seed", "5"), name="s5")
    h1 = json.loads((out1 / "besov.json").read_text())["config_hash"]
    h2 = json.loads((out2 / "besov.json").read_text())["config_hash"]
    assert h1 != h2


def test_infinite_exponent_roundtrip():
    cfg = cli.resolve_config({"besov": [[1.5, "inf", "inf"]]})
    assert cfg["besov"] == [[1.5, math.inf, math.inf]]


def test_module_entry(tmp_path):
    import subprocess
    import sys
    proc = subprocess.run([sys.executable, "-m", "manifold_frames", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for cmd in ("bounds", "partition", "frame", "besov", "reconstruct"):
        assert cmd in proc.stdout
