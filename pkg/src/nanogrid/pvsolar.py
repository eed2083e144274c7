"""Simple plane-of-array transposition and PV array output.

Isotropic-sky model: beam irradiance projected by the incidence angle, sky
diffuse scaled by (1 + cos tilt)/2, ground-reflected by albedo * (1 - cos
tilt)/2. Solar position (zenith/azimuth) comes from the input data; no
ephemeris is computed here. Azimuth convention: 0 = north, 90 = east,
180 = south, 270 = west.

Array output is a lumped flat-plate model: nameplate watts scaled by
POA / 1000 W/m^2 and a constant derate, summed over sub-arrays and clipped
at total nameplate. Users with measured or externally modeled PV power can
bypass this module entirely by supplying a pv_dc_kw input column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .errors import InvalidInputError

GROUND_ALBEDO = 0.2
DEFAULT_DERATE = 0.86

# Rooftop geometry of the reference house: 42 modules, 14.3 kW nameplate.
_REFERENCE_ARRAY_KW = 14.3
_REFERENCE_MODULE_W = _REFERENCE_ARRAY_KW * 1000.0 / 42.0


@dataclass(frozen=True)
class SubArray:
    """One co-planar group of PV modules."""

    tilt_deg: float
    azimuth_deg: float
    module_count: int
    module_power_w: float = _REFERENCE_MODULE_W

    def __post_init__(self):
        if not 0.0 <= self.tilt_deg <= 90.0:
            raise InvalidInputError(f"tilt_deg must be in [0, 90], got {self.tilt_deg!r}")
        if not 0.0 <= self.azimuth_deg < 360.0:
            raise InvalidInputError(
                f"azimuth_deg must be in [0, 360), got {self.azimuth_deg!r}"
            )
        if self.module_count < 1:
            raise InvalidInputError("module_count must be >= 1")
        if not self.module_power_w > 0.0:
            raise InvalidInputError("module_power_w must be > 0")

    @property
    def nameplate_kw(self) -> float:
        return self.module_count * self.module_power_w / 1000.0


@dataclass(frozen=True)
class IrradianceRecord:
    """One timestamped irradiance and solar-position sample."""

    timestamp: datetime
    ghi_w_m2: float
    dni_w_m2: float
    dhi_w_m2: float
    solar_zenith_deg: float
    solar_azimuth_deg: float

    def __post_init__(self):
        for name in ("ghi_w_m2", "dni_w_m2", "dhi_w_m2"):
            if getattr(self, name) < 0.0:
                raise InvalidInputError(f"{name} must be >= 0")
        if not 0.0 <= self.solar_zenith_deg <= 180.0:
            raise InvalidInputError("solar_zenith_deg must be in [0, 180]")


def default_sub_arrays() -> tuple[SubArray, ...]:
    """Four-sub-array rooftop geometry of the reference house (14.3 kW)."""
    return (
        SubArray(tilt_deg=32.0, azimuth_deg=90.0, module_count=3),
        SubArray(tilt_deg=50.0, azimuth_deg=180.0, module_count=3),
        SubArray(tilt_deg=32.0, azimuth_deg=90.0, module_count=6),
        SubArray(tilt_deg=30.0, azimuth_deg=270.0, module_count=30),
    )


def incidence_cosine(zenith_deg, solar_azimuth_deg, tilt_deg, surface_azimuth_deg):
    """Cosine of the angle between the sun and the panel normal."""
    zen = np.radians(zenith_deg)
    tilt = np.radians(tilt_deg)
    az_diff = np.radians(solar_azimuth_deg - surface_azimuth_deg)
    return np.cos(zen) * np.cos(tilt) + np.sin(zen) * np.sin(tilt) * np.cos(az_diff)


def poa_irradiance(rec: IrradianceRecord, sub: SubArray) -> float:
    """Plane-of-array irradiance (W/m^2) via the isotropic-sky transposition."""
    cos_inc = incidence_cosine(
        rec.solar_zenith_deg, rec.solar_azimuth_deg, sub.tilt_deg, sub.azimuth_deg
    )
    cos_tilt = math.cos(math.radians(sub.tilt_deg))
    beam = rec.dni_w_m2 * max(0.0, float(cos_inc))
    sky = rec.dhi_w_m2 * (1.0 + cos_tilt) / 2.0
    ground = rec.ghi_w_m2 * GROUND_ALBEDO * (1.0 - cos_tilt) / 2.0
    return beam + sky + ground


def pv_power(records, arrays=None, derate: float = DEFAULT_DERATE) -> np.ndarray:
    """DC output (kW) of the whole array for each irradiance record.

    Sums module_count * module_power * (POA / 1000) * derate over sub-arrays
    and clips at the total nameplate. Pure map over records.
    """
    if arrays is None:
        arrays = default_sub_arrays()
    if not 0.0 < derate <= 1.0:
        raise InvalidInputError(f"derate must be in (0, 1], got {derate!r}")
    zen = np.array([r.solar_zenith_deg for r in records], dtype=float)
    saz = np.array([r.solar_azimuth_deg for r in records], dtype=float)
    ghi = np.array([r.ghi_w_m2 for r in records], dtype=float)
    dni = np.array([r.dni_w_m2 for r in records], dtype=float)
    dhi = np.array([r.dhi_w_m2 for r in records], dtype=float)

    total_kw = np.zeros(len(zen))
    nameplate = 0.0
    for sub in arrays:
        cos_inc = incidence_cosine(zen, saz, sub.tilt_deg, sub.azimuth_deg)
        cos_tilt = math.cos(math.radians(sub.tilt_deg))
        poa = (
            dni * np.maximum(0.0, cos_inc)
            + dhi * (1.0 + cos_tilt) / 2.0
            + ghi * GROUND_ALBEDO * (1.0 - cos_tilt) / 2.0
        )
        total_kw += sub.nameplate_kw * (poa / 1000.0) * derate
        nameplate += sub.nameplate_kw
    return np.clip(total_kw, 0.0, nameplate)
