import json

import pytest

from lwrdg import __version__
from lwrdg.cli import main, parse_meshes


def test_parse_meshes():
    assert parse_meshes("10..320") == [10, 20, 40, 80, 160, 320]
    assert parse_meshes("10,30") == [10, 30]
    import argparse
    for bad in ("0..5", "x", "20..10"):
        with pytest.raises(argparse.ArgumentTypeError):
            parse_meshes(bad)


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0 and __version__ in capsys.readouterr().out


def test_list_presets(capsys):
    assert main(["list-presets"]) == 0
    out = capsys.readouterr().out.split()
    assert "traffic-circle" in out and "bottleneck-2" in out


def test_run_smoke(tmp_path, capsys):
    out = tmp_path / "acc"
    assert main(["run", "--preset", "accuracy", "--degree", "1", "--cells", "40", "--out", str(out)]) == 0
    csv = (out / "1" / "t0.1.csv").read_text().splitlines()
    assert csv[0] == "x,rho_sampled,cell_avg" and len(csv) == 1 + 40 * 4
    summary = json.loads((out / "summary.json").read_text())
    assert summary["t_end"] == pytest.approx(0.1)
    assert summary["relative_mass_drift"] <= 1e-10
    assert len(summary["dt_history"]) == summary["steps"]
    assert "wrote" in capsys.readouterr().out


@pytest.mark.parametrize("backend", ["python", "compiled"])
def test_export_round_trip_is_bit_identical(tmp_path, backend):
    from lwrdg import kernels
    if backend == "compiled" and not kernels.COMPILED_AVAILABLE:
        pytest.skip("compiled core not built")
    cfg = tmp_path / "two-two-step.json"
    assert main(["export-preset", "two-two-step", "-o", str(cfg)]) == 0
    common = ["--backend", backend]
    assert main(common + ["run", "--preset", "two-two-step", "--cells", "10", "--out", str(tmp_path / "a")]) == 0
    assert main(common + ["run", "--config", str(cfg), "--cells", "10", "--out", str(tmp_path / "b")]) == 0
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*.csv"))
    assert len(files) == 4 * 2
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_run_overrides(tmp_path):
    out = tmp_path / "o"
    assert main(["run", "--preset", "bottleneck-3", "--degree", "2", "--cells", "10", "--t-end", "0.3",
                 "--cfl", "0.1", "--flux", "godunov", "--tvb-M", "5", "--samples", "2",
                 "--out", str(out)]) == 0
    assert sorted(p.name for p in (out / "1").iterdir()) == ["t0.2.csv", "t0.3.csv"]
    assert len((out / "2" / "t0.3.csv").read_text().splitlines()) == 1 + 10 * 2


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"roads": [{"id": "a", "n_cells": 4, "initial": 0.2}],
                               "boundaries": [{"road": "a", "type": "inflow", "end": "left", "density": 2.0},
                                              {"road": "a", "type": "outflow", "end": "right"}]}))
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "boundaries[0].density" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == 1
    assert "error" in capsys.readouterr().err


def test_integrity_error_exit_code(tmp_path, capsys):
    # P1 at CFL 1 without the bound limiter blows up
    code = main(["run", "--preset", "accuracy-step", "--degree", "1", "--cfl", "1.0", "--no-bp",
                 "--no-tvb", "--t-end", "5", "--out", str(tmp_path / "o")])
    assert code == 3
    err = capsys.readouterr().err
    assert "road '1'" in err and "cell" in err and "t=" in err


def test_convergence_command(tmp_path, capsys):
    assert main(["convergence", "--degrees", "0,1", "--meshes", "10,20", "--no-bp", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "P0 (without BP limiter)" in out and "P1 (without BP limiter)" in out
    assert (tmp_path / "convergence.csv").read_text().count("\n") == 5


def test_compare_command(capsys):
    assert main(["compare", "--preset", "two-one", "--cells", "10", "--ref-cells", "40"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].split() == ["t", "road", "P0", "P1", "P2"]
    assert len(lines) == 2 + 3 * 3
    assert main(["compare", "--preset", "two-one", "--cells", "30", "--ref-cells", "40"]) == 2


def test_junction_fuzz_command(capsys):
    assert main(["junction-fuzz", "--trials", "50", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert out.strip().endswith("zero mismatches") and "2x2: 50 trials" in out
    assert main(["junction-fuzz", "--trials", "5", "--kinds", "3x3"]) == 2


def test_export_to_stdout(capsys):
    assert main(["export-preset", "bottleneck-1"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["name"] == "bottleneck-1" and len(data["roads"]) == 2
