"""Command-line front end: simulate, analyze, compare, synth.

Scenario configuration is a TOML file; every model parameter has a default
matching the reference system, so a config only needs to name its inputs.
Set NANOGRID_LOG=DEBUG (or INFO/WARNING/ERROR) for logging verbosity.

Exit codes: 0 success, 1 validation/runtime error, 2 missing file or bad
config. Partially written outputs are removed on error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from . import analysis, billing, converters, dataio, dispatch, pvsolar
from .battery import BatteryParams, BatteryState
from .errors import NanogridError, SchemaError

log = logging.getLogger("nanogrid")


@dataclass
class ScenarioConfig:
    """Typed view of the TOML scenario file."""

    loads_csv: str | None = None
    pv_csv: str | None = None
    irradiance_csv: str | None = None
    lab_csv: str | None = None
    field_csv: str | None = None
    topology: str = "all"
    out_dir: str = "out"
    seed: int | None = None
    days: int = 365
    initial_soc_kwh: float = 0.0
    strict_power_cap: bool = False
    battery: BatteryParams = field(default_factory=BatteryParams)
    tariff: billing.Tariff = field(default_factory=billing.Tariff)
    peak_efficiencies: dict = field(default_factory=dict)
    rated_powers_kw: dict = field(default_factory=dict)
    fixed_loss_coeff: float = 0.01
    quadratic_loss_coeff: float = 0.05
    pv_derate: float = pvsolar.DEFAULT_DERATE
    sub_arrays: tuple = ()
    setpoint_c: float = analysis.DEFAULT_SETPOINT_C
    zero_load_deficit_c: float = analysis.ZERO_LOAD_DEFICIT_C


def _build_dataclass(cls, table: dict, where: str):
    import dataclasses

    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(table) - known
    if unknown:
        raise SchemaError(f"{where}: unknown key(s) {sorted(unknown)}")
    return cls(**table)


def load_config(path) -> ScenarioConfig:
    try:
        with open(path, "rb") as handle:
            doc = tomllib.load(handle)
    except FileNotFoundError:
        raise FileNotFoundError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError(f"{path}: invalid TOML: {exc}")

    cfg = ScenarioConfig()
    inputs = doc.pop("inputs", {})
    for key, attr in (
        ("loads", "loads_csv"),
        ("pv", "pv_csv"),
        ("irradiance", "irradiance_csv"),
        ("lab", "lab_csv"),
        ("field", "field_csv"),
    ):
        if key in inputs:
            setattr(cfg, attr, str(inputs.pop(key)))
    if inputs:
        raise SchemaError(f"{path}: unknown [inputs] key(s) {sorted(inputs)}")

    sim = doc.pop("simulation", {})
    cfg.topology = str(sim.pop("topology", cfg.topology))
    cfg.out_dir = str(sim.pop("out_dir", cfg.out_dir))
    cfg.initial_soc_kwh = float(sim.pop("initial_soc_kwh", cfg.initial_soc_kwh))
    cfg.strict_power_cap = bool(sim.pop("strict_power_cap", cfg.strict_power_cap))
    if sim:
        raise SchemaError(f"{path}: unknown [simulation] key(s) {sorted(sim)}")

    if "battery" in doc:
        cfg.battery = _build_dataclass(BatteryParams, doc.pop("battery"), f"{path} [battery]")
    if "tariff" in doc:
        cfg.tariff = _build_dataclass(billing.Tariff, doc.pop("tariff"), f"{path} [tariff]")

    conv = doc.pop("converters", {})
    cfg.fixed_loss_coeff = float(conv.pop("fixed_loss_coeff", cfg.fixed_loss_coeff))
    cfg.quadratic_loss_coeff = float(
        conv.pop("quadratic_loss_coeff", cfg.quadratic_loss_coeff)
    )
    cfg.peak_efficiencies = {
        str(k): float(v) for k, v in conv.pop("peak_efficiency", {}).items()
    }
    cfg.rated_powers_kw = {
        str(k): float(v) for k, v in conv.pop("rated_power_kw", {}).items()
    }
    if conv:
        raise SchemaError(f"{path}: unknown [converters] key(s) {sorted(conv)}")

    pv = doc.pop("pv", {})
    cfg.pv_derate = float(pv.pop("derate", cfg.pv_derate))
    subs = pv.pop("sub_arrays", None)
    if subs is not None:
        cfg.sub_arrays = tuple(
            _build_dataclass(pvsolar.SubArray, entry, f"{path} [[pv.sub_arrays]]")
            for entry in subs
        )
    if pv:
        raise SchemaError(f"{path}: unknown [pv] key(s) {sorted(pv)}")

    ana = doc.pop("analysis", {})
    cfg.setpoint_c = float(ana.pop("setpoint_c", cfg.setpoint_c))
    cfg.zero_load_deficit_c = float(
        ana.pop("zero_load_deficit_c", cfg.zero_load_deficit_c)
    )
    if ana:
        raise SchemaError(f"{path}: unknown [analysis] key(s) {sorted(ana)}")

    synth = doc.pop("synth", {})
    if "seed" in synth:
        cfg.seed = int(synth.pop("seed"))
    cfg.days = int(synth.pop("days", cfg.days))
    if synth:
        raise SchemaError(f"{path}: unknown [synth] key(s) {sorted(synth)}")

    if doc:
        raise SchemaError(f"{path}: unknown table(s) {sorted(doc)}")
    return cfg


def _selected_topologies(cfg: ScenarioConfig):
    kwargs = dict(
        peak_efficiencies=cfg.peak_efficiencies,
        rated_powers_kw=cfg.rated_powers_kw,
        fixed_loss_coeff=cfg.fixed_loss_coeff,
        quadratic_loss_coeff=cfg.quadratic_loss_coeff,
    )
    if cfg.topology == "all":
        return list(converters.builtin_topologies(**kwargs))
    return [converters.topology_by_name(cfg.topology, **kwargs)]


def _load_scenario(cfg: ScenarioConfig) -> dataio.AlignedSeries:
    """Assemble the aligned pv/hp/house scenario from files or the generator."""
    if cfg.loads_csv is None:
        seed = cfg.seed if cfg.seed is not None else 0
        log.info("generating synthetic scenario: seed=%d days=%d", seed, cfg.days)
        return dataio.synth_scenario(seed, cfg.days)
    loads = dataio.read_loads_csv(cfg.loads_csv)
    if cfg.pv_csv is not None:
        pv_series = dataio.read_pv_csv(cfg.pv_csv)
    elif cfg.irradiance_csv is not None:
        irr = dataio.read_irradiance_csv(cfg.irradiance_csv)
        records = dataio.irradiance_records(irr)
        arrays = cfg.sub_arrays or pvsolar.default_sub_arrays()
        pv_kw = pvsolar.pv_power(records, arrays, cfg.pv_derate)
        pv_series = dataio.AlignedSeries(
            start=irr.start, timestep_h=irr.timestep_h, columns={"pv_dc_kw": pv_kw}
        )
    else:
        raise SchemaError("config needs an [inputs] pv or irradiance file with loads")
    return dataio.merge_aligned(loads, pv_series)


def _cleanup(paths: list[Path]) -> None:
    for path in paths:
        try:
            path.unlink()
        except OSError:
            pass


def cmd_simulate(args) -> int:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    if args.topology:
        cfg.topology = args.topology
    if args.out:
        cfg.out_dir = args.out
    if args.synth:
        cfg.loads_csv = cfg.pv_csv = cfg.irradiance_csv = None
    if args.seed is not None:
        cfg.seed = args.seed
    if args.days is not None:
        cfg.days = args.days

    started = time.perf_counter()
    series = _load_scenario(cfg)
    house = series.column("house_power_kw")
    topologies = _selected_topologies(cfg)
    initial = BatteryState(cfg.initial_soc_kwh)

    results = []
    for topo in topologies:
        flows = dispatch.simulate(
            series,
            topo,
            cfg.battery,
            initial_state=initial,
            strict_power_cap=cfg.strict_power_cap,
        )
        bills = billing.monthly_bills(flows, house, cfg.tariff)
        annual, _ = billing.annual_summary(bills)
        results.append((topo.name, flows, bills, annual))

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        for name, flows, bills, _ in results:
            flows_path = out_dir / f"flows_{name}.csv"
            dataio.write_flows_csv(flows, flows_path)
            written.append(flows_path)
            bills_path = out_dir / f"bills_{name}.csv"
            dataio.write_bills_csv(bills, bills_path)
            written.append(bills_path)
    except Exception:
        _cleanup(written)
        raise
    elapsed = time.perf_counter() - started

    baseline = next((annual for name, _, _, annual in results if name == "ac_baseline"), None)
    print(f"{'topology':<14} {'annual_usd':>12} {'import_kwh':>12} {'export_kwh':>12}  savings_vs_ac_baseline")
    for name, flows, bills, annual in results:
        imports = sum(b.import_kwh for b in bills)
        exports = sum(b.export_kwh for b in bills)
        if baseline is None or name == "ac_baseline" or baseline == 0.0:
            savings = "--"
        else:
            pct = billing.savings_percent(baseline, annual)
            savings = f"{pct:.6f}% ({pct:.1f}%)"
        print(f"{name:<14} {annual:>12.6f} {imports:>12.3f} {exports:>12.3f}  {savings}")
    print(f"simulated {len(series)} steps x {len(results)} topologies in {elapsed:.3f} s")
    print(f"outputs written to {out_dir}")
    return 0


def cmd_analyze(args) -> int:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    if args.lab:
        cfg.lab_csv = args.lab
    if args.field:
        cfg.field_csv = args.field
    if args.out:
        cfg.out_dir = args.out
    if cfg.lab_csv is None and cfg.field_csv is None:
        raise SchemaError("analyze needs a lab.csv and/or field.csv input")

    rows: list[tuple] = []
    if cfg.lab_csv is not None:
        records = dataio.read_lab_csv(cfg.lab_csv)
        for rec in records:
            rows.append(("cop", rec.test_label, rec.supply, "cop", analysis.cop(rec)))
        # AC-vs-DC thermal capacity parity per test condition, checked with the
        # same +/-6% relative-error rule used for capacity measurements.
        by_label: dict[str, dict[str, analysis.SteadyStateTestRecord]] = {}
        for rec in records:
            by_label.setdefault(rec.test_label, {})[rec.supply] = rec
        for label in sorted(by_label):
            pair = by_label[label]
            if "ac" in pair and "dc" in pair:
                check = analysis.energy_balance_check(
                    pair["dc"].thermal_capacity_kw, pair["ac"].thermal_capacity_kw
                )
                rows.append(
                    ("capacity_parity", label, "", "relative_error", check.relative_error)
                )
                rows.append(
                    ("capacity_parity", label, "", "passed", str(check.passed).lower())
                )

    if cfg.field_csv is not None:
        samples = dataio.read_field_csv(cfg.field_csv)
        normalized: dict[str, list[float]] = {"ac": [], "dc": []}
        for supply in ("ac", "dc"):
            subset = [s for s in samples if s.supply == supply]
            if not subset:
                continue
            stamps = [s.timestamp for s in subset]
            powers = np.array([s.power_kw for s in subset])
            temps = np.array([s.t_out_c for s in subset])
            days, day_power = analysis.daily_means(stamps, powers)
            _, day_deficit = analysis.daily_temperature_deficit(
                stamps, temps, cfg.setpoint_c
            )
            for day, p_kw, dt_c in zip(days, day_power, day_deficit):
                xval = analysis.weather_normalized_power(
                    p_kw, dt_c, cfg.zero_load_deficit_c
                )
                rows.append(("field_daily", day.isoformat(), supply, "power_kw", float(p_kw)))
                rows.append(("field_daily", day.isoformat(), supply, "deficit_c", float(dt_c)))
                if xval is None:
                    rows.append(("field_daily", day.isoformat(), supply, "excluded", "true"))
                else:
                    rows.append(
                        ("field_daily", day.isoformat(), supply, "normalized_kw_per_c", xval)
                    )
                    normalized[supply].append(xval)
            if len(days) >= 4:
                fit = analysis.fit_poly(day_deficit, day_power, degree=1)
                for k, c in enumerate(fit.coefficients):
                    rows.append(("fit_daily_linear", "", supply, f"c{k}", c))
                rows.append(("fit_daily_linear", "", supply, "r_squared", fit.r_squared))
                rows.append(
                    ("fit_daily_linear", "", supply, "residual_sigma", fit.residual_sigma)
                )
            hour_deficit = analysis.temperature_deficit(temps, cfg.setpoint_c)
            if len(subset) >= 4:
                fit = analysis.fit_poly(hour_deficit, powers, degree=2)
                for k, c in enumerate(fit.coefficients):
                    rows.append(("fit_hourly_quadratic", "", supply, f"c{k}", c))
                rows.append(("fit_hourly_quadratic", "", supply, "r_squared", fit.r_squared))
                rows.append(
                    ("fit_hourly_quadratic", "", supply, "residual_sigma", fit.residual_sigma)
                )
        if len(normalized["ac"]) >= 2 and len(normalized["dc"]) >= 2:
            welch = analysis.welch_t_test(normalized["ac"], normalized["dc"])
            for metric, value in (
                ("mean_a", welch.mean_a),
                ("mean_d", welch.mean_d),
                ("var_a", welch.var_a),
                ("var_d", welch.var_d),
                ("n_a", float(welch.n_a)),
                ("n_d", float(welch.n_d)),
                ("t_statistic", welch.t_statistic),
                ("degrees_of_freedom", welch.degrees_of_freedom),
                ("p_value", welch.p_value),
            ):
                rows.append(("welch", "", "", metric, value))
            print(
                f"welch: t={welch.t_statistic:.6f} df={welch.degrees_of_freedom:.6f} "
                f"p={welch.p_value:.6f}"
            )

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.csv"
    try:
        dataio.write_report_csv(rows, report_path)
    except Exception:
        _cleanup([report_path])
        raise
    print(f"report written to {report_path} ({len(rows)} rows)")
    return 0


def cmd_compare(args) -> int:
    bills_a = dataio.read_bills_csv(args.bills_a)
    bills_b = dataio.read_bills_csv(args.bills_b)
    periods_a = [b.period for b in bills_a]
    periods_b = [b.period for b in bills_b]
    if periods_a != periods_b:
        raise SchemaError(
            f"mismatched billing periods: {periods_a} vs {periods_b}"
        )
    total_a, _ = billing.annual_summary(bills_a)
    total_b, _ = billing.annual_summary(bills_b)
    pct = billing.savings_percent(total_a, total_b)
    print(f"baseline total: {total_a:.6f} USD")
    print(f"variant total:  {total_b:.6f} USD")
    print(f"savings: {pct:.6f}% ({pct:.1f}%), {total_a - total_b:.6f} USD ({total_a - total_b:.1f} USD)")
    return 0


def cmd_synth(args) -> int:
    series = dataio.synth_scenario(args.seed, args.days)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        loads = dataio.AlignedSeries(
            start=series.start,
            timestep_h=series.timestep_h,
            columns={
                "hp_power_kw": series.column("hp_power_kw"),
                "house_power_kw": series.column("house_power_kw"),
            },
        )
        loads_path = out_dir / "loads.csv"
        dataio.write_aligned_csv(loads, loads_path)
        written.append(loads_path)

        pv = dataio.AlignedSeries(
            start=series.start,
            timestep_h=series.timestep_h,
            columns={"pv_dc_kw": series.column("pv_dc_kw")},
        )
        pv_path = out_dir / "pv.csv"
        dataio.write_aligned_csv(pv, pv_path)
        written.append(pv_path)

        field_path = out_dir / "field.csv"
        dataio.write_field_csv(
            series.timestamps(),
            "ac",
            series.column("hp_power_kw"),
            series.column("t_out_c"),
            field_path,
        )
        written.append(field_path)
    except Exception:
        _cleanup(written)
        raise
    print(f"synthetic scenario (seed={args.seed}, days={args.days}) written to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nanogrid",
        description="Residential nanogrid simulation and heat-pump data analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run the dispatch and write flows/bills")
    p_sim.add_argument("--config", help="scenario TOML file")
    p_sim.add_argument("--topology", help="ac_baseline, dc_retrofit, dc_ideal, or all")
    p_sim.add_argument("--synth", action="store_true", help="use the synthetic generator")
    p_sim.add_argument("--seed", type=int, help="synthetic generator seed")
    p_sim.add_argument("--days", type=int, help="synthetic scenario length in days")
    p_sim.add_argument("--out", help="output directory")
    p_sim.set_defaults(func=cmd_simulate)

    p_ana = sub.add_parser("analyze", help="reduce lab/field data into report.csv")
    p_ana.add_argument("--config", help="scenario TOML file")
    p_ana.add_argument("--lab", help="lab.csv path")
    p_ana.add_argument("--field", help="field.csv path")
    p_ana.add_argument("--out", help="output directory")
    p_ana.set_defaults(func=cmd_analyze)

    p_cmp = sub.add_parser("compare", help="compare two bills.csv files")
    p_cmp.add_argument("bills_a")
    p_cmp.add_argument("bills_b")
    p_cmp.set_defaults(func=cmd_compare)

    p_syn = sub.add_parser("synth", help="write a synthetic scenario as CSV inputs")
    p_syn.add_argument("--seed", type=int, default=0)
    p_syn.add_argument("--days", type=int, default=365)
    p_syn.add_argument("--out", default="out")
    p_syn.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("NANOGRID_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NanogridError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
