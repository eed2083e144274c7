"""Command-line behavior: outputs, determinism, exit codes, reports."""

import csv
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from nanogrid import cli
from nanogrid.dataio import write_bills_csv, write_field_csv
from nanogrid.billing import BillStatement

TZ = timezone(timedelta(hours=-5))


def run(args):
    return cli.main(args)


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


def test_simulate_synth_all_topologies(tmp_path, capsys):
    out = tmp_path / "out"
    code = run(["simulate", "--synth", "--seed", "7", "--days", "60", "--out", str(out)])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "simulated 1440 steps" in stdout
    annual = {}
    for name in ("ac_baseline", "dc_retrofit", "dc_ideal"):
        assert (out / f"flows_{name}.csv").exists()
        bills = read_rows(out / f"bills_{name}.csv")
        annual[name] = sum(float(r["amount_usd"]) for r in bills)
    assert annual["ac_baseline"] >= annual["dc_retrofit"] >= annual["dc_ideal"]
    assert "savings_vs_ac_baseline" in stdout
    assert "%" in stdout


def test_simulate_outputs_are_byte_identical(tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        assert run(["simulate", "--synth", "--seed", "3", "--days", "45", "--out", str(out)]) == 0
    for name in ("flows_dc_ideal.csv", "bills_dc_ideal.csv", "flows_ac_baseline.csv"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_simulate_single_topology(tmp_path):
    out = tmp_path / "out"
    code = run(
        ["simulate", "--synth", "--seed", "1", "--days", "30",
         "--topology", "dc_retrofit", "--out", str(out)]
    )
    assert code == 0
    assert (out / "flows_dc_retrofit.csv").exists()
    assert not (out / "flows_ac_baseline.csv").exists()


def test_simulate_with_config_file(tmp_path):
    config = tmp_path / "scenario.toml"
    config.write_text(
        "\n".join(
            [
                "[simulation]",
                "topology = 'dc_ideal'",
                f"out_dir = '{tmp_path / 'cfg_out'}'",
                "strict_power_cap = true",
                "[battery]",
                "energy_capacity_kwh = 10.0",
                "[tariff]",
                "volumetric_price_usd_per_kwh = 0.20",
                "export_credit_usd_per_kwh = 0.20",
                "[synth]",
                "seed = 5",
                "days = 30",
            ]
        ),
        encoding="utf-8",
    )
    assert run(["simulate", "--config", str(config)]) == 0
    assert (tmp_path / "cfg_out" / "bills_dc_ideal.csv").exists()


def test_missing_input_file_exits_2(tmp_path, capsys):
    config = tmp_path / "scenario.toml"
    config.write_text("[inputs]\nloads = 'does_not_exist.csv'\npv = 'x.csv'\n", encoding="utf-8")
    code = run(["simulate", "--config", str(config)])
    assert code == 2
    assert "does_not_exist.csv" in capsys.readouterr().err


def test_unknown_config_key_fails(tmp_path, capsys):
    config = tmp_path / "scenario.toml"
    config.write_text("[simulation]\nwarp = 9\n", encoding="utf-8")
    code = run(["simulate", "--config", str(config)])
    assert code == 1
    assert "warp" in capsys.readouterr().err


def test_unknown_topology_errors(tmp_path, capsys):
    code = run(["simulate", "--synth", "--days", "2", "--topology", "dc_dream",
                "--out", str(tmp_path)])
    assert code == 1
    assert "dc_dream" in capsys.readouterr().err


def test_synth_subcommand_writes_inputs(tmp_path):
    out = tmp_path / "synth"
    assert run(["synth", "--seed", "2", "--days", "10", "--out", str(out)]) == 0
    assert (out / "loads.csv").exists()
    assert (out / "pv.csv").exists()
    assert (out / "field.csv").exists()
    # the generated files feed simulate directly
    config = tmp_path / "scenario.toml"
    config.write_text(
        "\n".join(
            [
                "[inputs]",
                f"loads = '{out / 'loads.csv'}'",
                f"pv = '{out / 'pv.csv'}'",
                "[simulation]",
                f"out_dir = '{tmp_path / 'sim_out'}'",
            ]
        ),
        encoding="utf-8",
    )
    assert run(["simulate", "--config", str(config)]) == 0
    assert (tmp_path / "sim_out" / "bills_dc_ideal.csv").exists()


def write_hourly_csv(path, header, row_of):
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        start = datetime(2024, 6, 1, 0, 0, tzinfo=TZ)
        for hour in range(48):
            writer.writerow([(start + timedelta(hours=hour)).isoformat()] + row_of(hour))


def test_simulate_from_irradiance_input(tmp_path):
    loads = tmp_path / "loads.csv"
    write_hourly_csv(
        loads,
        ["timestamp", "hp_power_kw", "house_power_kw"],
        lambda h: ["0.8", "0.4"],
    )
    irr = tmp_path / "irradiance.csv"

    def irradiance_row(hour):
        hod = hour % 24
        if 8 <= hod <= 16:
            return ["500", "700", "120", "35", "180"]
        return ["0", "0", "0", "110", "300"]

    write_hourly_csv(
        irr,
        ["timestamp", "ghi_w_m2", "dni_w_m2", "dhi_w_m2", "zenith_deg", "azimuth_deg"],
        irradiance_row,
    )
    config = tmp_path / "scenario.toml"
    config.write_text(
        "\n".join(
            [
                "[inputs]",
                f"loads = '{loads}'",
                f"irradiance = '{irr}'",
                "[simulation]",
                "topology = 'dc_retrofit'",
                f"out_dir = '{tmp_path / 'out'}'",
            ]
        ),
        encoding="utf-8",
    )
    assert run(["simulate", "--config", str(config)]) == 0
    flows = read_rows(tmp_path / "out" / "flows_dc_retrofit.csv")
    daylight = [float(r["s"]) for r in flows if r["timestamp"].endswith("T12:00:00-05:00")]
    night = [float(r["s"]) for r in flows if r["timestamp"].endswith("T02:00:00-05:00")]
    assert all(v > 1.0 for v in daylight)
    assert all(v == 0.0 for v in night)


def test_simulate_misaligned_inputs_fail(tmp_path, capsys):
    loads = tmp_path / "loads.csv"
    write_hourly_csv(
        loads, ["timestamp", "hp_power_kw", "house_power_kw"], lambda h: ["1", "1"]
    )
    pv = tmp_path / "pv.csv"
    with open(pv, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["timestamp", "pv_dc_kw"])
        start = datetime(2024, 6, 2, 0, 0, tzinfo=TZ)  # one day later than loads
        for hour in range(48):
            writer.writerow([(start + timedelta(hours=hour)).isoformat(), "1.0"])
    config = tmp_path / "scenario.toml"
    config.write_text(
        f"[inputs]\nloads = '{loads}'\npv = '{pv}'\n", encoding="utf-8"
    )
    assert run(["simulate", "--config", str(config)]) == 1
    assert "misaligned" in capsys.readouterr().err


def test_analyze_lab_report(tmp_path, lab_csv, capsys):
    out = tmp_path / "out"
    code = run(["analyze", "--lab", str(lab_csv), "--out", str(out)])
    assert code == 0
    rows = read_rows(out / "report.csv")
    cop_rows = [r for r in rows if r["section"] == "cop"]
    assert len(cop_rows) == 20
    a2_ac = next(r for r in cop_rows if r["label"] == "A2" and r["supply"] == "ac")
    assert float(a2_ac["value"]) == pytest.approx(3.40, abs=0.005)
    h32_dc = next(r for r in cop_rows if r["label"] == "H32" and r["supply"] == "dc")
    assert float(h32_dc["value"]) == pytest.approx(2.19, abs=0.005)
    parity = [r for r in rows if r["section"] == "capacity_parity" and r["metric"] == "passed"]
    assert len(parity) == 10
    # H01 capacities differ by 6.5% in the bundled dataset; the checker flags it
    flagged = sorted(r["label"] for r in parity if r["value"] == "false")
    assert flagged == ["H01"]


def test_analyze_field_excludes_warm_days(tmp_path):
    # 3 days: two cold (usable) and one warm (excluded, deficit <= threshold)
    start = datetime(2025, 1, 6, tzinfo=TZ)
    stamps, powers, temps = [], [], []
    for day, t_c in enumerate((-5.0, 0.0, 18.0)):
        for hour in range(24):
            stamps.append(start + timedelta(days=day, hours=hour))
            powers.append(2.0 if t_c < 10 else 0.1)
            temps.append(t_c)
    field = tmp_path / "field.csv"
    write_field_csv(stamps, "ac", np.array(powers), np.array(temps), field)
    out = tmp_path / "out"
    assert run(["analyze", "--field", str(field), "--out", str(out)]) == 0
    rows = read_rows(out / "report.csv")
    excluded = [r for r in rows if r["metric"] == "excluded"]
    assert len(excluded) == 1
    normalized = [r for r in rows if r["metric"] == "normalized_kw_per_c"]
    assert len(normalized) == 2


def test_analyze_identical_supplies_p_is_one(tmp_path, capsys):
    start = datetime(2025, 1, 6, tzinfo=TZ)
    stamps, powers, temps = [], [], []
    rng = np.random.default_rng(1)
    for day in range(6):
        t_c = -2.0 - day
        for hour in range(24):
            stamps.append(start + timedelta(days=day, hours=hour))
            powers.append(1.5 + 0.3 * day + float(rng.normal(0, 0.05)))
            temps.append(t_c)
    field = tmp_path / "field.csv"
    with open(field, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["timestamp", "supply", "power_kw", "t_out_c"])
        for supply in ("ac", "dc"):
            for ts, p, t in zip(stamps, powers, temps):
                writer.writerow([ts.isoformat(), supply, f"{p:.6f}", f"{t:.6f}"])
    out = tmp_path / "out"
    assert run(["analyze", "--field", str(field), "--out", str(out)]) == 0
    rows = read_rows(out / "report.csv")
    p_row = next(r for r in rows if r["section"] == "welch" and r["metric"] == "p_value")
    assert float(p_row["value"]) == 1.0


def test_analyze_requires_an_input(capsys):
    assert run(["analyze"]) == 1
    assert "lab.csv and/or field.csv" in capsys.readouterr().err


def write_bills(path, total):
    write_bills_csv(
        [BillStatement("2024-01", max(total, 0.0) / 0.14, 0.0, total)], path
    )


def test_compare_reference_savings(tmp_path, capsys):
    a = tmp_path / "bills_a.csv"
    b = tmp_path / "bills_b.csv"
    write_bills(a, 367.4)
    write_bills(b, 321.6)
    assert run(["compare", str(a), str(b)]) == 0
    stdout = capsys.readouterr().out
    assert "(12.5%)" in stdout
    assert "45.8" in stdout


def test_compare_ideal_savings(tmp_path, capsys):
    a = tmp_path / "bills_a.csv"
    b = tmp_path / "bills_b.csv"
    write_bills(a, 367.4)
    write_bills(b, 306.2)
    assert run(["compare", str(a), str(b)]) == 0
    stdout = capsys.readouterr().out
    assert "(16.7%)" in stdout
    assert "61.2" in stdout


def test_compare_identical_is_zero(tmp_path, capsys):
    a = tmp_path / "bills_a.csv"
    write_bills(a, 250.0)
    assert run(["compare", str(a), str(a)]) == 0
    assert "(0.0%)" in capsys.readouterr().out


def test_compare_mismatched_periods(tmp_path, capsys):
    a = tmp_path / "bills_a.csv"
    b = tmp_path / "bills_b.csv"
    write_bills_csv([BillStatement("2024-01", 10.0, 0.0, 1.4)], a)
    write_bills_csv([BillStatement("2024-02", 10.0, 0.0, 1.4)], b)
    assert run(["compare", str(a), str(b)]) == 1
    assert "mismatched" in capsys.readouterr().err


def test_shipped_example_config_loads():
    from pathlib import Path

    example = Path(__file__).parent.parent / "scenario.example.toml"
    cfg = cli.load_config(example)
    assert cfg.topology == "all"
    assert cfg.battery.energy_capacity_kwh == 20.0
    assert cfg.tariff.volumetric_price_usd_per_kwh == 0.14
    assert cfg.loads_csv == "data/loads.csv"


def test_log_env_var_sets_verbosity(tmp_path, monkeypatch, caplog):
    monkeypatch.setenv("NANOGRID_LOG", "INFO")
    out = tmp_path / "out"
    with caplog.at_level("INFO", logger="nanogrid"):
        assert run(["simulate", "--synth", "--seed", "0", "--days", "2", "--out", str(out)]) == 0
    assert any("synthetic scenario" in r.message for r in caplog.records)
