import json
from pathlib import Path

import numpy as np
import pytest

from cityeq import ConfigError, load_config, parse_config, run_scenario
from cityeq.cli import main as cli_main
from cityeq.selfcheck import self_check

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def base_doc(**overrides):
    doc = {
        "name": "mini",
        "mode": "base",
        "grid": {"dimension": 1, "bounds": [[-10, 10]], "nodes_per_axis": 51},
        "firms": [
            {"location": [-7], "tech": {"kind": "cobb_douglas", "A": 1e4, "beta": 0.7}},
            {"location": [0], "tech": {"kind": "cobb_douglas", "A": 1e4, "beta": 0.7}},
            {"location": [3], "tech": {"kind": "cobb_douglas", "A": 1e4, "beta": 0.7}},
        ],
        "params": {"theta": 0.0, "sigma": 0.1, "w0": 12, "commute_scale": 0.5},
    }
    doc.update(overrides)
    return doc


def test_parse_valid_config():
    cfg = parse_config(base_doc())
    assert cfg.grid.node_count == 51
    assert len(cfg.firms) == 3
    assert cfg.params.w0 == 12.0


def test_theta_one_rejected_naming_field():
    doc = base_doc()
    doc["params"]["theta"] = 1.0
    with pytest.raises(ConfigError, match="params.theta"):
        parse_config(doc)


def test_sigma_zero_rejected_in_base_mode():
    doc = base_doc()
    doc["params"]["sigma"] = 0.0
    with pytest.raises(ConfigError, match="params.sigma"):
        parse_config(doc)


def test_unsorted_sweep_rejected():
    doc = base_doc(sweep={"parameter": "theta", "values": [0.4, 0.2]})
    with pytest.raises(ConfigError, match="sweep.values"):
        parse_config(doc)


def test_b_sweep_requires_telework():
    doc = base_doc(sweep={"parameter": "B", "values": [0.0, 1.0]})
    with pytest.raises(ConfigError, match="sweep.parameter"):
        parse_config(doc)


def test_location_outside_bounds_rejected():
    doc = base_doc()
    doc["firms"][0]["location"] = [-12]
    with pytest.raises(ConfigError, match=r"firms\[0\].location"):
        parse_config(doc)


def test_tech_kind_must_match_mode():
    doc = base_doc(mode="telework")
    with pytest.raises(ConfigError, match="ces"):
        parse_config(doc)


def test_schema_violation_reports_path():
    doc = base_doc()
    doc["grid"]["dimension"] = 3
    with pytest.raises(ConfigError, match="grid.dimension"):
        parse_config(doc)


def test_json_parse_error_line_anchored(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "mode": "base",\n  oops\n}\n')
    with pytest.raises(ConfigError, match="line 3"):
        load_config(bad)


def test_nodes_override(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(base_doc()))
    cfg = load_config(p, nodes_override=21)
    assert cfg.grid.node_count == 21


def test_run_scenario_single_solve(tmp_path):
    doc = base_doc(output_dir=str(tmp_path / "out"))
    cfg = parse_config(doc)
    outcome = run_scenario(cfg, quiet=True)
    assert outcome.exit_code == 0
    out = tmp_path / "out"
    assert (out / "wages.csv").exists()
    assert (out / "fields_solve.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["runs"][0]["converged"] is True
    assert 0 < summary["theta0"] < 1
    assert summary["uniqueness_regime"] is True


def test_run_scenario_sweep_outputs(tmp_path):
    doc = base_doc(
        output_dir=str(tmp_path / "out"),
        sweep={"parameter": "theta", "values": [0.0, 0.2, 0.4]},
    )
    outcome = run_scenario(parse_config(doc), quiet=True)
    assert outcome.exit_code == 0
    out = tmp_path / "out"
    for tag in ("0", "0.2", "0.4"):
        assert (out / f"fields_{tag}.csv").exists()
    rows = (out / "wages.csv").read_text().strip().splitlines()
    assert len(rows) == 1 + 3 * 3  # header + 3 sweep values x 3 firms
    header = rows[0].split(",")
    assert header[:4] == ["parameter", "value", "firm", "location_x"]


def test_fields_csv_schema(tmp_path):
    doc = base_doc(output_dir=str(tmp_path / "out"))
    run_scenario(parse_config(doc), quiet=True)
    lines = (tmp_path / "out" / "fields_solve.csv").read_text().strip().splitlines()
    assert lines[0] == (
        "x,revenue,density,rent,share_home,share_firm_1,share_firm_2,share_firm_3"
    )
    assert len(lines) == 52
    cells = lines[1].split(",")
    assert float(cells[0]) == -10.0
    shares = [float(c) for c in cells[4:]]
    assert sum(shares) == pytest.approx(1.0, abs=1e-9)


def test_run_scenario_empty_firms(tmp_path):
    doc = base_doc(firms=[], output_dir=str(tmp_path / "out"))
    outcome = run_scenario(parse_config(doc), quiet=True)
    assert outcome.exit_code == 0
    lines = (tmp_path / "out" / "wages.csv").read_text().strip().splitlines()
    assert len(lines) == 1  # header only
    fields = (tmp_path / "out" / "fields_solve.csv").read_text().strip().splitlines()
    # everyone stays home; the density is uniform since revenue is constant
    first = fields[1].split(",")
    assert float(first[2]) == pytest.approx(0.05, abs=1e-12)
    assert float(first[4]) == 1.0


def test_reverse_sweep_flag(tmp_path):
    doc = base_doc(
        output_dir=str(tmp_path / "out"),
        sweep={"parameter": "theta", "values": [0.0, 0.4]},
    )
    outcome = run_scenario(parse_config(doc), reverse=True, quiet=True)
    assert outcome.exit_code == 0
    rows = (tmp_path / "out" / "wages.csv").read_text().strip().splitlines()[1:]
    assert [r.split(",")[1] for r in rows] == ["0.4"] * 3 + ["0"] * 3


def test_deterministic_rerun_overwrites(tmp_path):
    doc = base_doc(output_dir=str(tmp_path / "out"))
    run_scenario(parse_config(doc), quiet=True)
    first = (tmp_path / "out" / "wages.csv").read_text()
    run_scenario(parse_config(doc), quiet=True)
    assert (tmp_path / "out" / "wages.csv").read_text() == first


def test_solver_failure_exit_code_and_partials(tmp_path):
    doc = base_doc(
        output_dir=str(tmp_path / "out"),
        solver={"max_iterations": 1, "residual_tolerance": 1e-14},
    )
    outcome = run_scenario(parse_config(doc), quiet=True)
    assert outcome.exit_code == 3
    assert (tmp_path / "out" / "wages.csv").exists()  # partial outputs retained
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["failures"]
    assert summary["runs"][0]["converged"] is False


def test_cli_solve_and_exit_codes(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(base_doc()))
    code = cli_main(
        ["solve", "--config", str(cfg_path), "--out", str(tmp_path / "o"), "--quiet"]
    )
    assert code == 0
    assert (tmp_path / "o" / "summary.json").exists()


def test_cli_config_error_exit_2(tmp_path, capsys):
    doc = base_doc()
    doc["params"]["theta"] = 1.0
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(doc))
    code = cli_main(["solve", "--config", str(cfg_path), "--quiet"])
    assert code == 2
    assert "params.theta" in capsys.readouterr().err


def test_cli_sweep_requires_sweep_section(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(base_doc()))
    assert cli_main(["sweep", "--config", str(cfg_path), "--quiet"]) == 2


def test_cli_missing_file_exit_2(tmp_path):
    assert cli_main(["solve", "--config", str(tmp_path / "nope.json")]) == 2


def test_cli_schema_prints_json(capsys):
    assert cli_main(["schema"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["title"].startswith("cityeq")
    assert "grid" in doc["properties"]


def test_cli_zeronoise(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(base_doc()))
    code = cli_main(
        ["zeronoise", "--config", str(cfg_path), "--out", str(tmp_path / "zn"),
         "--nodes", "201", "--quiet"]
    )
    assert code == 0
    assert (tmp_path / "zn" / "sigma_trajectory.csv").exists()
    assert (tmp_path / "zn" / "partition.csv").exists()
    report = json.loads((tmp_path / "zn" / "verification.json").read_text())
    assert "checks" in report


def test_shipped_scenarios_parse():
    for name in (
        "test1_theta_sweep.json",
        "test2_telework_1d.json",
        "test3_telework_2d.json",
        "test1_zeronoise.json",
    ):
        cfg = load_config(SCENARIOS / name)
        assert cfg.firms and cfg.grid.node_count >= 2


def test_self_check_passes_and_tamper_fails(capsys):
    report = self_check(mc_draws=2 * 10**4, quiet=True)
    assert report.passed
    tampered = self_check(mc_draws=2 * 10**4, quiet=True, _tamper_weights=1.5)
    bad = {c.name: c.passed for c in tampered.checks}
    assert bad["quadrature-refinement"] is False


def test_cli_check_exit_code():
    assert cli_main(["check", "--quiet", "--mc-draws", "20000"]) == 0


def test_summary_contains_trace_records(tmp_path):
    doc = base_doc(output_dir=str(tmp_path / "out"))
    run_scenario(parse_config(doc), quiet=True)
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    trace = summary["runs"][0]["trace"]
    assert trace, "iteration trace missing from the run record"
    rec = trace[0]
    assert {"iteration", "residual_max_norm", "trust_radius", "step_type",
            "jacobian_refreshed"} <= set(rec)


def test_cli_zeronoise_rejects_telework_config(tmp_path, capsys):
    doc = base_doc(mode="telework")
    for f in doc["firms"]:
        f["tech"] = {"kind": "ces", "A": 1e4, "B": 0.5, "alpha": 0.9, "beta": 0.7}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(doc))
    assert cli_main(["zeronoise", "--config", str(cfg_path), "--quiet"]) == 2
    assert "base model" in capsys.readouterr().err


def test_config_solver_overrides(tmp_path):
    doc = base_doc(solver={"residual_tolerance": 1e-8, "max_iterations": 50,
                           "fd_scale": 1e-7, "trust_radius_init": 0.5,
                           "damping": 0.9})
    cfg = parse_config(doc)
    assert cfg.solver.residual_tolerance == 1e-8
    assert cfg.solver.max_iterations == 50
    assert cfg.solver.fd_scale == 1e-7
    assert cfg.solver.damping == 0.9
