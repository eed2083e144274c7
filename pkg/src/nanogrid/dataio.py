"""CSV ingestion, validation, alignment, and the synthetic scenario generator.

All input files are comma-separated with a header row. Timestamps are
ISO-8601 with an explicit UTC offset; calendar operations (billing months,
daily statistics) use the offset the file declares. Aligned files must sit
on a uniform timestep grid; gaps of up to `max_gap_steps` missing rows are
filled by linear interpolation, anything longer is an error naming the line.

File formats:
    loads.csv       timestamp, hp_power_kw, house_power_kw
    pv.csv          timestamp, pv_dc_kw
    irradiance.csv  timestamp, ghi_w_m2, dni_w_m2, dhi_w_m2, zenith_deg, azimuth_deg
    lab.csv         test_label, supply, thermal_capacity_kw, indoor_power_kw,
                    outdoor_power_kw, total_power_kw
    field.csv       timestamp, supply, power_kw, t_out_c
    flows.csv       timestamp, s, d, u, b, x, p, loss_pv, loss_batt, loss_hp, loss_house
    bills.csv       period, import_kwh, export_kwh, amount_usd
    report.csv      section, label, supply, metric, value
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np

from .analysis import FieldSample, SteadyStateTestRecord
from .billing import BillStatement
from .errors import SchemaError
from .pvsolar import IrradianceRecord

DEFAULT_MAX_GAP_STEPS = 3

# Local offset used for generated scenarios (US Eastern standard, no DST).
SYNTH_TZ = timezone(timedelta(hours=-5))
SYNTH_START = datetime(2024, 1, 1, 0, 0, tzinfo=SYNTH_TZ)


def format_number(value: float) -> str:
    """Canonical 9-significant-digit formatting used by every writer."""
    return format(float(value), ".9g")


def parse_timestamp(text: str, line: int | None = None) -> datetime:
    """Parse an ISO-8601 timestamp; the UTC offset must be explicit."""
    where = f"line {line}: " if line is not None else ""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        ts = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise SchemaError(f"{where}unparsable timestamp {text!r}") from exc
    if ts.tzinfo is None:
        raise SchemaError(f"{where}timestamp {text!r} lacks a UTC offset")
    return ts


@dataclass
class AlignedSeries:
    """Named columns on a uniform timestep grid.

    `start` keeps the offset declared by the source file; billing and daily
    statistics interpret calendar boundaries in that offset.
    """

    start: datetime
    timestep_h: float
    columns: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.start.tzinfo is None:
            raise SchemaError("AlignedSeries start must be timezone-aware")
        if not self.timestep_h > 0.0:
            raise SchemaError("timestep_h must be > 0")
        lengths = {name: len(col) for name, col in self.columns.items()}
        if len(set(lengths.values())) > 1:
            raise SchemaError(f"column lengths differ: {lengths}")
        self.columns = {
            name: np.asarray(col, dtype=float) for name, col in self.columns.items()
        }

    def __len__(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise SchemaError(f"missing column {name!r}; have {sorted(self.columns)}")
        return self.columns[name]

    def timestamp(self, index: int) -> datetime:
        return self.start + timedelta(hours=self.timestep_h * index)

    def timestamps(self) -> list[datetime]:
        dt = timedelta(hours=self.timestep_h)
        return [self.start + k * dt for k in range(len(self))]


@dataclass(frozen=True)
class ColumnSpec:
    """Validation bounds for one numeric CSV column."""

    name: str
    minimum: float | None = None
    maximum: float | None = None

    def parse(self, text: str, line: int) -> float:
        try:
            value = float(text)
        except ValueError as exc:
            raise SchemaError(
                f"line {line}: unparsable value {text!r} in column {self.name!r}"
            ) from exc
        if not math.isfinite(value):
            raise SchemaError(f"line {line}: non-finite value in column {self.name!r}")
        if self.minimum is not None and value < self.minimum:
            raise SchemaError(
                f"line {line}: column {self.name!r} value {value} < {self.minimum}"
            )
        if self.maximum is not None and value > self.maximum:
            raise SchemaError(
                f"line {line}: column {self.name!r} value {value} > {self.maximum}"
            )
        return value


LOADS_SCHEMA = (
    ColumnSpec("hp_power_kw", minimum=0.0),
    ColumnSpec("house_power_kw", minimum=0.0),
)
PV_SCHEMA = (ColumnSpec("pv_dc_kw", minimum=0.0),)
IRRADIANCE_SCHEMA = (
    ColumnSpec("ghi_w_m2", minimum=0.0),
    ColumnSpec("dni_w_m2", minimum=0.0),
    ColumnSpec("dhi_w_m2", minimum=0.0),
    ColumnSpec("zenith_deg", minimum=0.0, maximum=180.0),
    ColumnSpec("azimuth_deg", minimum=0.0, maximum=360.0),
)


def _read_rows(path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    try:
        handle = open(path, newline="", encoding="utf-8-sig")
    except FileNotFoundError:
        raise FileNotFoundError(f"input file not found: {path}")
    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file")
        rows = [(line, row) for line, row in enumerate(reader, start=2) if row]
    return [h.strip() for h in header], rows


def _check_header(path, header: list[str], expected: list[str]):
    if sorted(header) != sorted(set(header)):
        raise SchemaError(f"{path}: duplicated column in header: {header}")
    unknown = [h for h in header if h not in expected]
    if unknown:
        raise SchemaError(f"{path}: unknown column(s) {unknown}; expected {expected}")
    missing = [c for c in expected if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {missing}")


def read_aligned_csv(
    path, schema, max_gap_steps: int = DEFAULT_MAX_GAP_STEPS
) -> AlignedSeries:
    """Read a timestamped CSV onto a uniform grid, applying the gap policy."""
    header, rows = _read_rows(path)
    names = [spec.name for spec in schema]
    _check_header(path, header, ["timestamp"] + names)
    if len(rows) < 2:
        raise SchemaError(f"{path}: need at least 2 data rows to establish the timestep")
    col_index = {name: header.index(name) for name in names}
    ts_index = header.index("timestamp")
    spec_by_name = {spec.name: spec for spec in schema}

    times: list[datetime] = []
    data: list[list[float]] = []
    for line, row in rows:
        if len(row) != len(header):
            raise SchemaError(f"line {line}: expected {len(header)} fields, got {len(row)}")
        times.append(parse_timestamp(row[ts_index], line))
        data.append(
            [spec_by_name[n].parse(row[col_index[n]], line) for n in names]
        )

    step = times[1] - times[0]
    if step <= timedelta(0):
        raise SchemaError(
            "line 3: timestamps must be strictly increasing"
            if times[1] == times[0]
            else "line 3: non-monotone timestamp"
        )
    timestep_h = step.total_seconds() / 3600.0

    filled: list[list[float]] = [data[0]]
    for i in range(1, len(times)):
        line = rows[i][0]
        delta = (times[i] - times[i - 1]).total_seconds() / 3600.0
        ratio = delta / timestep_h
        k = round(ratio)
        if abs(ratio - k) > 1e-6:
            raise SchemaError(
                f"line {line}: timestamp off the {timestep_h} h grid (gap of {delta} h)"
            )
        if k == 0:
            raise SchemaError(f"line {line}: duplicated timestamp {times[i].isoformat()}")
        if k < 0:
            raise SchemaError(f"line {line}: non-monotone timestamp {times[i].isoformat()}")
        if k - 1 > max_gap_steps:
            raise SchemaError(
                f"line {line}: gap of {k - 1} missing steps exceeds the "
                f"{max_gap_steps}-step interpolation limit"
            )
        prev = filled[-1]
        for j in range(1, k):
            frac = j / k
            filled.append(
                [p + (c - p) * frac for p, c in zip(prev, data[i])]
            )
        filled.append(data[i])

    arr = np.asarray(filled, dtype=float)
    columns = {name: arr[:, j].copy() for j, name in enumerate(names)}
    return AlignedSeries(start=times[0], timestep_h=timestep_h, columns=columns)


def read_loads_csv(path, max_gap_steps: int = DEFAULT_MAX_GAP_STEPS) -> AlignedSeries:
    return read_aligned_csv(path, LOADS_SCHEMA, max_gap_steps)


def read_pv_csv(path, max_gap_steps: int = DEFAULT_MAX_GAP_STEPS) -> AlignedSeries:
    return read_aligned_csv(path, PV_SCHEMA, max_gap_steps)


def read_irradiance_csv(path, max_gap_steps: int = DEFAULT_MAX_GAP_STEPS) -> AlignedSeries:
    return read_aligned_csv(path, IRRADIANCE_SCHEMA, max_gap_steps)


def irradiance_records(series: AlignedSeries) -> list[IrradianceRecord]:
    """View an irradiance AlignedSeries as typed records."""
    stamps = series.timestamps()
    ghi = series.column("ghi_w_m2")
    dni = series.column("dni_w_m2")
    dhi = series.column("dhi_w_m2")
    zen = series.column("zenith_deg")
    az = series.column("azimuth_deg")
    return [
        IrradianceRecord(stamps[i], ghi[i], dni[i], dhi[i], zen[i], az[i])
        for i in range(len(series))
    ]


def read_lab_csv(path) -> list[SteadyStateTestRecord]:
    header, rows = _read_rows(path)
    expected = [
        "test_label",
        "supply",
        "thermal_capacity_kw",
        "indoor_power_kw",
        "outdoor_power_kw",
        "total_power_kw",
    ]
    _check_header(path, header, expected)
    idx = {name: header.index(name) for name in expected}
    records = []
    for line, row in rows:
        if len(row) != len(header):
            raise SchemaError(f"line {line}: expected {len(header)} fields, got {len(row)}")
        values = {}
        for name in expected[2:]:
            values[name] = ColumnSpec(name, minimum=0.0).parse(row[idx[name]], line)
        supply = row[idx["supply"]].strip().lower()
        if supply not in ("ac", "dc"):
            raise SchemaError(f"line {line}: supply must be 'ac' or 'dc', got {supply!r}")
        records.append(
            SteadyStateTestRecord(
                test_label=row[idx["test_label"]].strip(),
                supply=supply,
                **values,
            )
        )
    return records


def read_field_csv(path) -> list[FieldSample]:
    header, rows = _read_rows(path)
    expected = ["timestamp", "supply", "power_kw", "t_out_c"]
    _check_header(path, header, expected)
    idx = {name: header.index(name) for name in expected}
    samples = []
    for line, row in rows:
        if len(row) != len(header):
            raise SchemaError(f"line {line}: expected {len(header)} fields, got {len(row)}")
        supply = row[idx["supply"]].strip().lower()
        if supply not in ("ac", "dc"):
            raise SchemaError(f"line {line}: supply must be 'ac' or 'dc', got {supply!r}")
        samples.append(
            FieldSample(
                timestamp=parse_timestamp(row[idx["timestamp"]], line),
                power_kw=ColumnSpec("power_kw", minimum=0.0).parse(
                    row[idx["power_kw"]], line
                ),
                t_out_c=ColumnSpec("t_out_c").parse(row[idx["t_out_c"]], line),
                supply=supply,
            )
        )
    return samples


def merge_aligned(*series: AlignedSeries) -> AlignedSeries:
    """Combine columns of series that share the same grid (start, step, length)."""
    first = series[0]
    columns = dict(first.columns)
    for other in series[1:]:
        if other.start != first.start or other.start.utcoffset() != first.start.utcoffset():
            raise SchemaError(
                f"misaligned series: starts {first.start.isoformat()} vs "
                f"{other.start.isoformat()}"
            )
        if abs(other.timestep_h - first.timestep_h) > 1e-9:
            raise SchemaError(
                f"misaligned series: timesteps {first.timestep_h} vs {other.timestep_h}"
            )
        if len(other) != len(first):
            raise SchemaError(
                f"misaligned series: lengths {len(first)} vs {len(other)}"
            )
        for name, col in other.columns.items():
            if name in columns:
                raise SchemaError(f"duplicate column {name!r} while merging")
            columns[name] = col
    return AlignedSeries(start=first.start, timestep_h=first.timestep_h, columns=columns)


def write_aligned_csv(series: AlignedSeries, path) -> None:
    names = list(series.columns)
    stamps = series.timestamps()
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["timestamp"] + names)
        cols = [series.columns[n] for n in names]
        for i, ts in enumerate(stamps):
            writer.writerow([ts.isoformat()] + [format_number(c[i]) for c in cols])


def write_flows_csv(flows, path) -> None:
    """Write a simulation result; column names follow the bus-balance fields."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            ["timestamp", "s", "d", "u", "b", "x", "p",
             "loss_pv", "loss_batt", "loss_hp", "loss_house"]
        )
        stamps = flows.timestamps()
        data = [
            flows.pv_supply_kw,
            flows.heat_pump_demand_kw,
            flows.chemical_power_kw,
            flows.battery_power_kw,
            flows.stored_energy_kwh,
            flows.export_kw,
            flows.loss_pv_kw,
            flows.loss_battery_kw,
            flows.loss_heat_pump_kw,
            flows.loss_house_kw,
        ]
        for i, ts in enumerate(stamps):
            writer.writerow([ts.isoformat()] + [format_number(col[i]) for col in data])


def write_bills_csv(bills, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["period", "import_kwh", "export_kwh", "amount_usd"])
        for bill in bills:
            writer.writerow(
                [
                    bill.period,
                    format_number(bill.import_kwh),
                    format_number(bill.export_kwh),
                    format_number(bill.amount_usd),
                ]
            )


def read_bills_csv(path) -> list[BillStatement]:
    header, rows = _read_rows(path)
    expected = ["period", "import_kwh", "export_kwh", "amount_usd"]
    _check_header(path, header, expected)
    idx = {name: header.index(name) for name in expected}
    bills = []
    for line, row in rows:
        bills.append(
            BillStatement(
                period=row[idx["period"]].strip(),
                import_kwh=ColumnSpec("import_kwh", minimum=0.0).parse(
                    row[idx["import_kwh"]], line
                ),
                export_kwh=ColumnSpec("export_kwh", minimum=0.0).parse(
                    row[idx["export_kwh"]], line
                ),
                amount_usd=ColumnSpec("amount_usd").parse(row[idx["amount_usd"]], line),
            )
        )
    return bills


def write_field_csv(timestamps, supply: str, power_kw, t_out_c, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["timestamp", "supply", "power_kw", "t_out_c"])
        for i, ts in enumerate(timestamps):
            writer.writerow(
                [ts.isoformat(), supply, format_number(power_kw[i]), format_number(t_out_c[i])]
            )


def write_report_csv(rows, path) -> None:
    """Write analysis output rows of (section, label, supply, metric, value)."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["section", "label", "supply", "metric", "value"])
        for section, label, supply, metric, value in rows:
            text = format_number(value) if isinstance(value, float) else str(value)
            writer.writerow([section, label, supply, metric, text])


# --- synthetic scenario generation -------------------------------------------

# Seasonal outdoor temperature (deg C): annual mean / swing, coldest mid-January.
_T_MEAN_C = 10.5
_T_SEASON_SWING_C = 13.5
_T_DIURNAL_SWING_C = 4.0
# Heat pump electrical draw vs temperature deficit (quadratic), capped below
# the heat-pump path capacity so every topology stays feasible.
_HP_LINEAR_KW_PER_C = 0.042
_HP_QUAD_KW_PER_C2 = 0.0030
_HP_MAX_KW = 4.4
# PV: scale applied to the 14.3 kW nameplate at solar noon on a clear day.
_PV_NOON_FRACTION = 0.72
_HOUSE_BASE_KW = 0.30


def synth_scenario(seed: int, days: int, timestep_h: float = 1.0) -> AlignedSeries:
    """Deterministic pseudo-random scenario: one row per step for `days` days.

    Columns: pv_dc_kw (zero at night, sinusoidal diurnal/seasonal shape with
    persistent cloudiness), t_out_c (seasonal + diurnal + AR(1) weather),
    hp_power_kw (quadratic in the temperature deficit), house_power_kw
    (base + morning/evening peaks + noise). Same seed, same output.
    """
    if days < 1:
        raise SchemaError(f"days must be >= 1, got {days!r}")
    rng = np.random.default_rng(seed)
    n = int(round(days * 24.0 / timestep_h))
    hours = np.arange(n) * timestep_h
    hod = hours % 24.0
    doy = np.floor(hours / 24.0) % 365.0

    season = -np.cos(2.0 * np.pi * (doy - 14.0) / 365.0)  # -1 mid-Jan, +1 mid-Jul
    t_base = _T_MEAN_C + _T_SEASON_SWING_C * season
    t_diurnal = _T_DIURNAL_SWING_C * np.sin(2.0 * np.pi * (hod - 9.0) / 24.0)
    shocks = rng.normal(0.0, 0.8, n)
    ar = np.empty(n)
    acc = 0.0
    for i in range(n):
        acc = 0.95 * acc + shocks[i]
        ar[i] = acc
    t_out = t_base + t_diurnal + ar

    # Daylight window widens in summer; elevation is a half-sine across it.
    half_width = 6.0 + 2.0 * season
    in_day = np.abs(hod + 0.5 * timestep_h - 12.0) < half_width
    elev = np.where(
        in_day,
        np.sin(np.pi * (hod + 0.5 * timestep_h - (12.0 - half_width)) / (2.0 * half_width)),
        0.0,
    )
    elev = np.maximum(elev, 0.0)
    n_days = int(np.ceil(n * timestep_h / 24.0))
    daily_cloud = rng.beta(2.2, 1.3, n_days)
    cloud = daily_cloud[np.floor(hours / 24.0).astype(int)]
    jitter = np.clip(rng.normal(1.0, 0.06, n), 0.8, 1.2)
    pv = 14.3 * _PV_NOON_FRACTION * (0.80 + 0.20 * season) * elev**1.3 * cloud * jitter
    pv = np.where(elev > 0.0, np.maximum(pv, 0.0), 0.0)

    deficit = np.maximum(0.0, 20.5 - t_out)
    hp_base = _HP_LINEAR_KW_PER_C * deficit + _HP_QUAD_KW_PER_C2 * deficit**2
    duty = np.clip(rng.normal(1.0, 0.10, n), 0.6, 1.4)
    hp = np.clip(hp_base * duty, 0.0, _HP_MAX_KW)

    evening = ((hod >= 17.0) & (hod < 22.0)).astype(float)
    morning = ((hod >= 6.0) & (hod < 9.0)).astype(float)
    house = (
        _HOUSE_BASE_KW
        + 0.30 * evening
        + 0.15 * morning
        + rng.gamma(2.0, 0.09, n)
    )
    house = np.clip(house, 0.0, 6.0)

    return AlignedSeries(
        start=SYNTH_START,
        timestep_h=timestep_h,
        columns={
            "pv_dc_kw": pv,
            "hp_power_kw": hp,
            "house_power_kw": house,
            "t_out_c": t_out,
        },
    )
