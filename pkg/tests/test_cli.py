import csv
import json
import subprocess
import sys

import pytest

from kerrmagno.cli import main
from kerrmagno.params import load_params, params_to_dict, reference_params, save_params


@pytest.fixture
def pfile(tmp_path):
    path = tmp_path / "params.json"
    save_params(reference_params(), path, "hz_over_2pi")
    return path


def run(*argv):
    return main([str(a) for a in argv])


def read_json(path):
    return json.loads(path.read_text())


def test_steady_reference(tmp_path, pfile):
    assert run("steady", "--params", pfile, "--out", tmp_path) == 0
    out = read_json(tmp_path / "steady.json")
    assert out["region"] == "2S1U" and len(out["roots"]) == 3
    lo, hi = out["bistable_power_window_w"]
    assert lo == pytest.approx(13.84e-3, rel=1e-2) and hi == pytest.approx(81.94e-3, rel=1e-2)
    assert out["config"]["params"]["omega_b"] == pytest.approx(reference_params().omega_b)
    assert [r["status"] for r in out["roots"]] == ["stable", "unstable", "stable"]


def test_steady_zero_drive(tmp_path):
    assert run("steady", "--power-mw", 0, "--out", tmp_path) == 0
    out = read_json(tmp_path / "steady.json")
    assert [r["intensity"] for r in out["roots"]] == [0.0]


def test_missing_key_exit_code(tmp_path, capsys):
    d = params_to_dict(reference_params())
    del d["omega_b"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(d))
    assert run("steady", "--params", bad, "--out", tmp_path) == 2
    assert "omega_b" in capsys.readouterr().err


def test_unknown_override(tmp_path):
    assert run("steady", "--set", "omega_q=1", "--out", tmp_path) == 2
    assert run("steady", "--set", "omega_b=-1", "--out", tmp_path) == 2


def test_dynamics_limit_cycle(tmp_path):
    assert run("dynamics", "--power-mw", 130, "--t-span", 400, "--limit-cycle",
               "--out", tmp_path) == 0
    rep = read_json(tmp_path / "dynamics.json")
    assert rep["limit_cycle"]["periodic"] is True
    assert rep["start_state_stable"] is False
    with open(tmp_path / "trajectory.csv") as fh:
        assert fh.readline().startswith("# config:")
        rows = list(csv.DictReader(fh))
    assert len(rows) == 400 * 20 + 1


def test_dynamics_zero_span(tmp_path):
    assert run("dynamics", "--t-span", 0, "--out", tmp_path) == 0
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert len(lines) == 2
    assert read_json(tmp_path / "dynamics.json")["samples"] == 0


def test_dynamics_stable_lyapunov(tmp_path):
    assert run("dynamics", "--t-span", 5, "--lyapunov", "--lyapunov-horizon", 200,
               "--lyapunov-transient", 0, "--out", tmp_path) == 0
    assert read_json(tmp_path / "dynamics.json")["lyapunov"]["rate"] < 0


def test_entangle_steady(tmp_path, capsys):
    assert run("entangle", "--out", tmp_path) == 0
    out = read_json(tmp_path / "entangle.json")
    assert out["kind"] == "steady" and out["log_negativity"] > 0


def test_entangle_phonon_pair_zero(tmp_path):
    assert run("entangle", "--modes", "magnon,phonon", "--out", tmp_path) == 0
    assert read_json(tmp_path / "entangle.json")["log_negativity"] == 0.0


def test_entangle_no_stationary_state(tmp_path):
    assert run("entangle", "--power-mw", 130, "--kind", "steady", "--out", tmp_path) == 3


def test_entangle_bad_mode(tmp_path):
    assert run("entangle", "--modes", "cavity,photon", "--out", tmp_path) == 2


def test_entangle_wigner_snapshots(tmp_path):
    assert run("entangle", "--power-mw", 130, "--t-span", 100, "--wigner-times", 30, 60, 90,
               "--wigner-grid", 41, "--out", tmp_path) == 0
    out = read_json(tmp_path / "entangle.json")
    assert out["kind"] == "dynamic" and len(out["wigner_files"]) == 3
    for name in out["wigner_files"]:
        lines = (tmp_path / name).read_text().splitlines()
        header = json.loads(lines[0][2:])
        assert header["integral"] == pytest.approx(1.0, abs=1e-3)
        assert lines[1] == "x,y,W" and len(lines) == 2 + 41 * 41
    assert (tmp_path / "entanglement.csv").exists()


def test_sweep_fig1_branch_table(tmp_path):
    assert run("sweep", "--preset", "fig1", "--resolution", 150, "--out", tmp_path) == 0
    with open(tmp_path / "fig1_branches.csv") as fh:
        fh.readline()
        rows = list(csv.DictReader(fh))
    three = [float(r["drive_power"]) for r in rows if r["branch"] == "middle"]
    assert min(three) == pytest.approx(13.84e-3, abs=1e-3)
    assert max(three) == pytest.approx(81.94e-3, abs=1e-3)


def test_sweep_axes_and_env_workers(tmp_path, monkeypatch):
    monkeypatch.setenv("KERRMAGNO_WORKERS", "2")
    monkeypatch.setenv("KERRMAGNO_OUT", str(tmp_path / "env"))
    assert run("sweep", "--axis", "drive_power:0.01:0.1:4",
               "--axis", "delta_m_over_omega_b:-1:-0.5:3") == 0
    meta = read_json(tmp_path / "env" / "sweep.json")
    assert meta["shape"] == [4, 3]


def test_sweep_worker_determinism(tmp_path):
    for w in (1, 2):
        assert run("sweep", "--preset", "fig2", "--resolution", 20, "--workers", w,
                   "--out", tmp_path / f"w{w}") == 0
    for name in ("fig2.csv", "fig2.json"):
        assert (tmp_path / "w1" / name).read_bytes() == (tmp_path / "w2" / name).read_bytes()


def test_sweep_needs_axes(tmp_path):
    assert run("sweep", "--out", tmp_path) == 2
    assert run("sweep", "--axis", "drive_power:1:2", "--out", tmp_path) == 2


def test_bad_env_workers(tmp_path, monkeypatch):
    monkeypatch.setenv("KERRMAGNO_WORKERS", "many")
    assert run("sweep", "--preset", "fig1", "--resolution", 5, "--out", tmp_path) == 2


def test_params_file_round_trip_through_output(tmp_path, pfile):
    run("steady", "--params", pfile, "--out", tmp_path)
    cfg = read_json(tmp_path / "steady.json")["config"]["params"]
    again = tmp_path / "again.json"
    again.write_text(json.dumps(cfg))
    assert load_params(again) == reference_params()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "kerrmagno", "--help"], capture_output=True,
                       text=True)
    assert r.returncode == 0
    for cmd in ("steady", "dynamics", "entangle", "sweep"):
        assert cmd in r.stdout
