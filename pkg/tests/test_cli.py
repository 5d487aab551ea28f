"""End-to-end command-line tests, all in-process through main(argv)."""

import json

import numpy as np
import pytest

import specband as sb
from specband.cli import _read_evolution_csv, main


@pytest.fixture
def ssh_config(tmp_path):
    path = tmp_path / "ssh.json"
    path.write_text(json.dumps({"a": [1.0, 2.0], "b": [0.0, 0.0]}))
    return str(path)


@pytest.fixture
def lap_config(tmp_path):
    path = tmp_path / "lap.json"
    path.write_text(json.dumps({"a": [1.0], "b": [0.0]}))
    return str(path)


def test_spectrum_json(ssh_config, tmp_path):
    out = tmp_path / "spectrum.json"
    assert main(["spectrum", "--config", ssh_config, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["q"] == 2
    assert doc["config_hash"] == sb.config_hash(sb.new_operator([1.0, 2.0], [0.0, 0.0]))
    assert np.allclose(doc["edges"], [-3.0, -1.0, 1.0, 3.0], atol=1e-9)
    assert np.allclose(doc["gaps"], [[-1.0, 1.0]], atol=1e-9)
    assert len(doc["eigenvalues"]) == 1
    ev = doc["eigenvalues"][0]
    assert ev["value"] == pytest.approx(0.0, abs=1e-9)
    assert ev["gap_index"] == 1
    assert ev["weight"] == pytest.approx(0.75, abs=1e-9)


def test_spectrum_stdout(lap_config, capsys):
    assert main(["spectrum", "--config", lap_config]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["q"] == 1
    assert doc["eigenvalues"] == []


def test_measure_csv_and_masses(ssh_config, tmp_path):
    out = tmp_path / "dens.csv"
    assert main(["measure", "--config", ssh_config, "--grid", "16", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "# specband measure"
    assert lines[1].startswith("# config_hash: ")
    assert lines[4] == "band,x,density"
    rows = [ln.split(",") for ln in lines[5:]]
    assert len(rows) == 2 * 16
    assert {r[0] for r in rows} == {"1", "2"}
    assert all(float(r[2]) > 0.0 for r in rows)

    masses = json.loads((tmp_path / "dens.masses.json").read_text())
    assert masses["total_mass"] == pytest.approx(1.0, abs=1e-9)
    assert masses["point_masses"][0]["weight"] == pytest.approx(0.75, abs=1e-9)


def test_evolve_csv_round_trip(lap_config, tmp_path):
    out = tmp_path / "evo.csv"
    rc = main([
        "evolve", "--config", lap_config,
        "--times", "geometric:20,120,10", "--out", str(out),
    ])
    assert rc == 0
    read_back = _read_evolution_csv(str(out))
    J = sb.new_operator([1.0], [0.0])
    ref = sb.evolve_grid(J, sb.FiniteState.delta(1), sb.geometric_times(20.0, 120.0, 10))
    # repr round-trips floats exactly, so the CSV is lossless
    assert np.array_equal(read_back.times, ref.times)
    assert np.array_equal(read_back.amplitudes, ref.amplitudes)
    assert read_back.method == "spectral"
    assert read_back.config_hash == sb.config_hash(J)
    assert read_back.norm_bound == 2.0


def test_evolve_initial_site(lap_config, tmp_path):
    out = tmp_path / "evo3.csv"
    rc = main([
        "evolve", "--config", lap_config, "--times", "geometric:1,4,3",
        "--initial-site", "3", "--n-max", "40", "--out", str(out),
    ])
    assert rc == 0
    read_back = _read_evolution_csv(str(out))
    J = sb.new_operator([1.0], [0.0])
    ref = sb.evolve_grid(J, sb.FiniteState.delta(3), [1.0, 2.0, 4.0], n_max=40)
    assert np.array_equal(read_back.amplitudes, ref.amplitudes)


def test_evolve_both_reports_disagreement(lap_config, tmp_path):
    out = tmp_path / "both.csv"
    rc = main([
        "evolve", "--config", lap_config, "--times", "geometric:1,10,4",
        "--method", "both", "--n-max", "90", "--out", str(out),
    ])
    assert rc == 0
    gap_lines = [
        ln for ln in out.read_text().splitlines()
        if ln.startswith("# oracle_max_disagreement: ")
    ]
    assert len(gap_lines) == 1
    assert float(gap_lines[0].split(": ")[1]) < 1e-8


def test_decay_fit_round_trip(lap_config, tmp_path):
    evo = tmp_path / "evo.csv"
    main([
        "evolve", "--config", lap_config,
        "--times", "geometric:20,200,12", "--out", str(evo),
    ])
    fit_out = tmp_path / "fit.json"
    rc = main([
        "decay-fit", str(evo), "--config", lap_config, "--out", str(fit_out),
    ])
    assert rc == 0
    doc = json.loads(fit_out.read_text())
    assert doc["method"] == "spectral"
    assert doc["t_min"] == 20.0
    by_kind = {f["kind"]: f for f in doc["fits"]}
    assert set(by_kind) == {"sup", "wsup", "l2"}
    assert by_kind["sup"]["predicted"] == pytest.approx(-1.0 / 3.0)
    assert by_kind["wsup"]["predicted"] == -0.5
    assert by_kind["l2"]["pass"] is True
    assert abs(by_kind["l2"]["slope"]) < 1e-6
    assert by_kind["sup"]["n_points"] == 12
    assert np.isfinite(by_kind["sup"]["ci"])


def test_decay_fit_selected_norm(lap_config, tmp_path):
    evo = tmp_path / "evo.csv"
    main(["evolve", "--config", lap_config, "--times", "geometric:20,200,12",
          "--out", str(evo)])
    fit_out = tmp_path / "fit.json"
    rc = main(["decay-fit", str(evo), "--config", lap_config,
               "--norm", "l2", "--out", str(fit_out)])
    assert rc == 0
    doc = json.loads(fit_out.read_text())
    assert [f["kind"] for f in doc["fits"]] == ["l2"]


def test_audit_json(lap_config, tmp_path):
    out = tmp_path / "audit.json"
    assert main(["audit", "--config", lap_config, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["q"] == 1
    assert doc["nondegenerate"] is True
    assert doc["predicted_global_exponent"] == pytest.approx(-1.0 / 3.0)
    assert doc["predicted_local_exponent"] == -0.5
    band = doc["bands"][0]
    assert len(band["t2"]) == 1
    assert band["t2"][0] == pytest.approx(-np.pi / 2.0, abs=1e-8)


def test_validate_passes(lap_config, tmp_path, capsys):
    out = tmp_path / "val.json"
    rc = main(["validate", "--config", lap_config, "--out", str(out)])
    captured = capsys.readouterr().out
    assert rc == 0
    assert "all checks passed" in captured
    doc = json.loads(out.read_text())
    assert doc["passed"] is True
    assert all(c["passed"] for c in doc["checks"])


def test_deterministic_outputs(ssh_config, tmp_path):
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    argv_tail = [
        "--config", ssh_config, "--times", "geometric:20,60,8",
        "--emit-plot", "--norm", "sup", "--t-min", "20",
    ]
    assert main(["evolve", *argv_tail, "--out", str(first)]) == 0
    assert main(["evolve", *argv_tail, "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    svg_a = (tmp_path / "a.svg").read_bytes()
    svg_b = (tmp_path / "b.svg").read_bytes()
    assert svg_a == svg_b
    assert svg_a.lstrip().startswith(b"<?xml")

    m1 = tmp_path / "m1.csv"
    m2 = tmp_path / "m2.csv"
    assert main(["measure", "--config", ssh_config, "--grid", "32", "--out", str(m1)]) == 0
    assert main(["measure", "--config", ssh_config, "--grid", "32", "--out", str(m2)]) == 0
    assert m1.read_bytes() == m2.read_bytes()


def test_usage_errors(lap_config, ssh_config, tmp_path, capsys):
    assert main(["spectrum", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["evolve", "--config", lap_config, "--times", "linear:1,2,3"]) == 2
    assert main(["evolve", "--config", lap_config, "--times", "geometric:nope"]) == 2
    assert main(["evolve", "--config", lap_config, "--times", "geometric:1,9,5",
                 "--emit-plot"]) == 2
    assert main(["no-such-command"]) == 2
    capsys.readouterr()

    evo = tmp_path / "evo.csv"
    main(["evolve", "--config", lap_config, "--times", "geometric:20,60,8",
          "--out", str(evo)])
    assert main(["decay-fit", str(evo), "--config", ssh_config]) == 2
    capsys.readouterr()


def test_numerical_error_exit_code(lap_config, capsys):
    rc = main([
        "evolve", "--config", lap_config, "--times", "geometric:10,100,8",
        "--method", "oracle", "--truncation-cap", "50",
    ])
    assert rc == 3
    assert "TruncationTooLarge" in capsys.readouterr().err


def test_decay_fit_nonpositive_norm(lap_config, tmp_path, capsys):
    path = tmp_path / "zeroed.csv"
    times = [20.0 + 10.0 * i for i in range(8)]
    lines = ["# specband evolve", "# method: oracle", "# norm_bound: 0.0",
             "t,site,re,im"]
    for t in times:
        amp = 0.0 if t == 50.0 else t**-0.5
        for site in range(1, 65):
            val = amp if site == 1 else 0.0
            lines.append(f"{t!r},{site},{val!r},0.0")
    path.write_text("\n".join(lines) + "\n")
    rc = main(["decay-fit", str(path), "--config", lap_config, "--norm", "l2"])
    assert rc == 3
    assert "NonPositiveNorm" in capsys.readouterr().err
