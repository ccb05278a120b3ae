import csv
import io
import json
import subprocess
import sys

import pytest

from hyperconc.cli import SweepSpec, main, sweep, sweep_csv


def run_cli(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_run_json(capsys):
    code, out = run_cli(capsys, "run", "--n", "3", "--alpha2", "0.2", "--delta2", "0.5", "--no-states")
    assert code == 0
    data = json.loads(out)
    assert data["success_probability"] == pytest.approx(0.16, abs=1e-12)
    assert data["summary"]["accepted_branches"] == 64
    assert all("collapsed" not in b for b in data["branches"])


def test_run_text_with_shots(capsys):
    code, out = run_cli(
        capsys, "run", "--n", "3", "--alpha2", "0.2", "--shots", "100000", "--seed", "7", "--format", "text"
    )
    assert code == 0
    assert "success_probability: 0.16" in out
    rate = float(next(l for l in out.splitlines() if l.startswith("empirical_success_rate")).split()[-1])
    assert abs(rate - 0.16) < 5 * (0.16 * 0.84 / 1e5) ** 0.5


def test_run_complex_amplitudes(capsys):
    code, out = run_cli(capsys, "run", "--amplitudes", "0.6,0.8j,0.6,-0.8", "--no-states")
    assert code == 0
    assert json.loads(out)["success_probability"] == pytest.approx(4 * 0.36 * 0.64 * 0.36 * 0.64)


def test_run_seeded_output_identical(capsys, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(["run", "--shots", "1000", "--seed", "3", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--n", "1"],
        ["run", "--alpha2", "1.5"],
        ["run", "--amplitudes", "1,0"],
        ["run", "--shots", "0"],
        ["run", "--detector", "geiger"],
        ["sweep", "--step", "0"],
        ["verify", "--trials", "0"],
        ["bogus"],
    ],
)
def test_bad_arguments_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_sweep_csv(capsys):
    code, out = run_cli(capsys, "sweep", "--step", "0.25")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 9
    assert list(rows[0]) == ["alpha2", "delta2", "p_exact", "p_formula"]
    for r in rows:
        assert float(r["p_exact"]) == pytest.approx(float(r["p_formula"]), abs=1e-9)
    best = max(rows, key=lambda r: float(r["p_exact"]))
    assert (best["alpha2"], best["delta2"]) == ("0.5", "0.5")
    assert float(best["p_exact"]) == pytest.approx(0.25, abs=1e-9)


def test_sweep_symmetric_and_stable():
    spec = SweepSpec(n=2, step=0.2)
    rows = sweep(spec)
    table = {(a, d): p for a, d, p, _ in rows}
    for (a, d), p in table.items():
        assert table[round(1 - a, 12), d] == pytest.approx(p, abs=1e-12)
        assert table[d, a] == pytest.approx(p, abs=1e-12)
    assert sweep_csv(rows) == sweep_csv(sweep(spec))


def test_sweep_workers_match_serial():
    spec = SweepSpec(n=2, step=0.25)
    assert sweep(spec, workers=2) == sweep(spec)


def test_sweep_n5_equals_n2():
    a = sweep(SweepSpec(n=2, step=0.25))
    b = sweep(SweepSpec(n=5, step=0.25))
    for ra, rb in zip(a, b):
        assert ra[:2] == rb[:2]
        assert abs(ra[2] - rb[2]) < 1e-12


def test_grid():
    assert SweepSpec(step=0.25).grid() == [0.25, 0.5, 0.75]
    assert len(SweepSpec(step=0.1).grid()) == 9


def test_devices_text(capsys):
    code, out = run_cli(capsys, "devices")
    assert code == 0
    hv = next(l for l in out.splitlines() if "ppc" in l and "|HV>" in l and "improved" not in l)
    assert "0 detector photons" in hv
    assert any("spc" in l and "both port 1" in l for l in out.splitlines())


def test_devices_json(capsys):
    code, out = run_cli(capsys, "devices", "--format", "json")
    assert code == 0
    assert isinstance(json.loads(out), list)


def test_verify(capsys):
    code, out = run_cli(capsys, "verify", "--trials", "10", "--seed", "2")
    assert code == 0
    assert "max amplitude deviation" in out
    dev = float(out.splitlines()[1].split()[-1])
    assert dev <= 1e-10


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "hyperconc", "run", "--no-states", "--format", "text"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "success_probability: 0.25" in proc.stdout
