"""Shared fixtures: the bundled steady-state lab dataset and default params."""

import pytest

from nanogrid import BatteryParams, Tariff

# Steady-state heat pump test dataset (AHRI 210/240 points, label A2..H32).
# Columns: label, supply, thermal_capacity_kw, indoor_power_kw,
# outdoor_power_kw, total_power_kw, published_cop.
LAB_STEADY_STATE_ROWS = (
    ("A2", "ac", 12.75, 0.372, 3.474, 3.746, 3.40),
    ("B2", "ac", 13.78, 0.211, 3.038, 3.155, 4.36),
    ("B1", "ac", 4.45, 0.015, 0.684, 0.685, 6.49),
    ("Ev", "ac", 7.75, 0.092, 1.416, 1.471, 5.27),
    ("F", "ac", 5.15, 0.023, 0.529, 0.539, 9.55),
    ("H01", "ac", 4.30, 0.072, 0.660, 0.705, 6.09),
    ("H11", "ac", 3.51, 0.032, 0.702, 0.716, 4.90),
    ("H1n", "ac", 12.86, 0.256, 3.543, 3.799, 3.38),
    ("H2v", "ac", 6.98, 0.217, 1.736, 1.954, 3.57),
    ("H32", "ac", 10.32, 0.572, 4.292, 4.865, 2.12),
    ("A2", "dc", 12.44, 0.272, 3.293, 3.565, 3.49),
    ("B2", "dc", 13.60, 0.204, 2.840, 3.044, 4.47),
    ("B1", "dc", 4.57, 0.028, 0.716, 0.744, 6.14),
    ("Ev", "dc", 7.48, 0.078, 1.386, 1.464, 5.11),
    ("F", "dc", 5.03, 0.033, 0.517, 0.550, 9.15),
    ("H01", "dc", 4.58, 0.084, 0.665, 0.749, 6.11),
    ("H11", "dc", 3.56, 0.040, 0.714, 0.754, 4.72),
    ("H1n", "dc", 12.78, 0.383, 3.374, 3.757, 3.40),
    ("H2v", "dc", 6.98, 0.214, 1.727, 1.941, 3.60),
    ("H32", "dc", 10.49, 0.544, 4.241, 4.785, 2.19),
)


@pytest.fixture
def default_params() -> BatteryParams:
    return BatteryParams()


@pytest.fixture
def default_tariff() -> Tariff:
    return Tariff()


@pytest.fixture
def lab_csv(tmp_path):
    path = tmp_path / "lab.csv"
    lines = ["test_label,supply,thermal_capacity_kw,indoor_power_kw,outdoor_power_kw,total_power_kw"]
    for label, supply, cap, indoor, outdoor, total, _ in LAB_STEADY_STATE_ROWS:
        lines.append(f"{label},{supply},{cap},{indoor},{outdoor},{total}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
