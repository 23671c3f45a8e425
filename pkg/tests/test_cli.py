import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from tunnelfwm import cli, scan, spectral
from tunnelfwm.params import dump_parameters

sys.path.insert(0, str(Path(__file__).parent))
from golden_cases import CASES, GOLDEN, argv_for, thin  # noqa: E402


def _same_table(got: str, want: str) -> None:
    g, w = got.splitlines(), want.splitlines()
    assert g[0] == w[0] and len(g) == len(w)
    for a, b in zip(g[1:], w[1:]):
        for x, y in zip(a.split(","), b.split(",")):
            if x == y:
                continue
            assert float(x) == pytest.approx(float(y), rel=1e-9, abs=1e-300), (a, b)


def _same_json(got, want):
    if isinstance(want, dict):
        assert set(got) == set(want)
        for k in want:
            _same_json(got[k], want[k])
    elif isinstance(want, list):
        assert len(got) == len(want)
        for a, b in zip(got, want):
            _same_json(a, b)
    elif isinstance(want, float):
        assert got == pytest.approx(want, rel=1e-9, abs=1e-300)
    else:
        assert got == want


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name, tmp_path, capsys):
    _, files, every = CASES[name]
    assert cli.main([*argv_for(name), "--out", str(tmp_path)]) == cli.EXIT_OK
    summary = capsys.readouterr().out.strip().splitlines()
    assert len(summary) == len(files)
    for f in files:
        got = (tmp_path / f).read_text()
        want = (GOLDEN / f"{name}__{f}").read_text()
        if f.endswith(".csv"):
            _same_table(thin(got, every), want)
        elif f.endswith(".json"):
            _same_json(json.loads(got), json.loads(want))
        else:
            assert got == want


def test_every_subcommand_has_a_golden_case():
    covered = {CASES[n][0][0] for n in CASES}
    sub = cli.build_parser()._subparsers._group_actions[0].choices
    assert covered == set(sub)


def test_csv_round_trip_is_bitwise(defaults, tmp_path):
    res = scan.eta_scan([1.0, 100.0], spectral.eta_grid(128), *defaults)
    path = cli.write_csv(res, tmp_path / "r.csv")
    rows = cli.read_csv(path)
    for got, want in zip(rows, res.rows()):
        assert got == want
    raw = path.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    assert raw.splitlines()[0] == b"eta,z_um,rho_tunneling,rho_baseline,enhancement"
    assert b"undefined" in raw


def test_empty_result_gives_header_only(tmp_path):
    path = cli.write_csv(None, tmp_path / "e.csv")
    assert path.read_text() == "eta,z_um,rho_tunneling,rho_baseline,enhancement\n"


def test_zero_distance_column(tmp_path):
    assert cli.main(["eta-scan", "--z", "0", "--n-eta", "32", "--out", str(tmp_path)]) == 0
    rows = cli.read_csv(tmp_path / "eta_scan.csv")
    assert all(r[2] == 0.0 for r in rows)


def test_fig2_svg_has_one_polyline_per_curve(tmp_path):
    assert cli.main(["reproduce", "fig2", "--svg", "--out", str(tmp_path)]) == 0
    for svg in tmp_path.glob("fig2_*.svg"):
        text = svg.read_text()
        assert text.count("<polyline") == 3 * 2
        assert "log10 rho" in text and "eta" in text
        assert "href" not in text


def test_plot_reads_back_distance_scan(tmp_path):
    assert cli.main(["distance-scan", "--n-z", "11", "--out", str(tmp_path)]) == 0
    res = cli.result_from_csv(tmp_path / "distance_scan.csv")
    assert res.axis == "z_um" and list(res.series) == [0.75, -0.75]


def test_oracle_compare_spec_example(tmp_path, capsys):
    code = cli.main(["oracle-compare", "--z", "10", "--omega-p", "0.01", "--omega-d2", "0.01",
                     "--n-eta", "41", "--out", str(tmp_path)])
    assert code == 0
    line = capsys.readouterr().out
    peak = float(line.split("peak relative deviation ")[1].split(",")[0])
    assert peak < 0.05


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
    assert cli.main(["group-velocity"]) == 0
    assert (tmp_path / "env" / "group_velocity.json").exists()


def test_config_file(tmp_path, defaults):
    doc = dump_parameters(*defaults)
    doc["drive"]["tau_ps"] = 3.0
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(doc))
    assert cli.main(["eta-scan", "--config", str(cfg), "--z", "1", "--n-eta", "16", "--out", str(tmp_path)]) == 0


@pytest.mark.parametrize("argv", [
    ["eta-scan", "--bogus"],
    ["nonsense"],
    ["eta-scan", "--tau", "-1"],
    ["eta-scan", "--delta-m", "fast"],
    ["eta-scan", "--z", "-1"],
    ["eta-scan", "--omega-p", "1.0"],
    ["plot", "missing.csv"],
])
def test_config_errors_exit_2(argv, tmp_path):
    assert cli.main([*argv, "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_unknown_config_key_exit_2(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"drive": {"speed": 1}}))
    assert cli.main(["eta-scan", "--config", str(cfg), "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_numerical_failure_exit_3(tmp_path):
    assert cli.main(["oracle-compare", "--z", "50", "--dz", "5", "--n-t", "256", "--out", str(tmp_path)]) \
        == cli.EXIT_NUMERIC
    assert cli.main(["group-velocity", "--bracket", "0.05", "--out", str(tmp_path)]) == cli.EXIT_NUMERIC


def test_run_config_round_trip(defaults):
    rc = cli.RunConfig("eta-scan", *defaults, options={"z": [1.0, 10.0]}, out_dir="out")
    again = cli.RunConfig.from_dict(json.loads(json.dumps(rc.to_dict())))
    assert again == rc


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "tunnelfwm.cli", "bandstructure", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("wrote ")
    data = json.loads((tmp_path / "bandstructure.json").read_text())
    assert np.all(np.diff(data["energies_meV"]) > 0)
