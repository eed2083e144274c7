"""Power converter part-load efficiency curves and conversion-chain topologies.

Each converter has a rational part-load shape

    g(l) = l / (l + c0 + c1 * l^2),    l = throughput / rated power

normalized so efficiency equals the nameplate peak at full load:
eta(l) = peak * g(l) / g(1), capped at peak so mid-load efficiency never
exceeds the nameplate value (with the default coefficients the uncapped
ratio would overshoot by up to ~1.5% around l = 0.45; the cap turns the
curve into a steep rise followed by a flat plateau from l = c0/c1 up to 1).

A Topology bundles the ordered conversion chains for the four power paths
(PV to bus, battery to bus, bus to heat pump, bus to house) of one nanogrid
configuration. Power flowing through a chain is attenuated stage by stage,
with each stage's efficiency looked up at its own throughput.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleDemandError, InvalidInputError

CONVERTER_KINDS = frozenset(
    {"inverter", "rectifier", "mppt", "dc_dc", "hp_inverter", "none"}
)

# Nameplate peak efficiencies per converter kind.
DEFAULT_PEAK_EFFICIENCIES = {
    "inverter": 0.95,
    "rectifier": 0.95,
    "mppt": 0.98,
    "dc_dc": 0.98,
    "hp_inverter": 0.97,
}

# Rated power (kW) per path, used as the load-fraction basis.
DEFAULT_RATED_POWERS_KW = {
    "pv": 14.3,
    "battery": 12.5,
    "heat_pump": 5.0,
    "house": 10.0,
}

TOPOLOGY_NAMES = ("ac_baseline", "dc_retrofit", "dc_ideal")


@dataclass(frozen=True)
class ConverterSpec:
    """One converter stage: kind, nameplate peak, rating, curve coefficients."""

    kind: str
    peak_efficiency: float
    rated_power_kw: float
    fixed_loss_coeff: float = 0.01
    quadratic_loss_coeff: float = 0.05
    min_load_fraction: float = 0.01

    def __post_init__(self):
        if self.kind not in CONVERTER_KINDS:
            raise InvalidInputError(f"unknown converter kind {self.kind!r}")
        if not 0.0 < self.peak_efficiency <= 1.0:
            raise InvalidInputError(
                f"peak_efficiency must be in (0, 1], got {self.peak_efficiency!r}"
            )
        if not self.rated_power_kw > 0.0:
            raise InvalidInputError(
                f"rated_power_kw must be > 0, got {self.rated_power_kw!r}"
            )
        if self.fixed_loss_coeff < 0.0 or self.quadratic_loss_coeff < 0.0:
            raise InvalidInputError("loss coefficients must be >= 0")
        if not 0.0 < self.min_load_fraction <= 1.0:
            raise InvalidInputError(
                f"min_load_fraction must be in (0, 1], got {self.min_load_fraction!r}"
            )


@dataclass(frozen=True)
class Topology:
    """Ordered conversion chains for one nanogrid configuration.

    An empty chain is the identity path (no conversion, no loss). The battery
    chain is traversed in both directions with the same efficiency curve.
    """

    name: str
    pv_to_bus: tuple[ConverterSpec, ...]
    battery_to_bus: tuple[ConverterSpec, ...]
    bus_to_heat_pump: tuple[ConverterSpec, ...]
    bus_to_house: tuple[ConverterSpec, ...]


def _shape(l, c0: float, c1: float):
    return l / (l + c0 + c1 * l * l)


def efficiency_at(spec: ConverterSpec, throughput_kw):
    """Efficiency of one converter at the given throughput (kW).

    Accepts a float or an ndarray. The load fraction is clamped to
    [min_load_fraction, 1] for the curve lookup; zero throughput returns the
    peak efficiency by convention (no power, no loss). Negative throughput is
    invalid.
    """
    scalar = np.isscalar(throughput_kw) or getattr(throughput_kw, "ndim", 1) == 0
    p = np.asarray(throughput_kw, dtype=float)
    if np.any(p < 0.0) or not np.all(np.isfinite(p)):
        raise InvalidInputError("throughput must be finite and >= 0")
    if spec.kind == "none":
        eta = np.ones_like(p)
    else:
        l = np.clip(p / spec.rated_power_kw, spec.min_load_fraction, 1.0)
        g1 = _shape(1.0, spec.fixed_loss_coeff, spec.quadratic_loss_coeff)
        ratio = _shape(l, spec.fixed_loss_coeff, spec.quadratic_loss_coeff) / g1
        eta = spec.peak_efficiency * np.minimum(ratio, 1.0)
        eta = np.where(p == 0.0, spec.peak_efficiency, eta)
    return float(eta) if scalar else eta


def apply_path(path, input_kw):
    """Push power forward through a chain; returns (output_kw, loss_kw).

    Stage i's efficiency is evaluated at the power entering stage i, so an
    empty chain is the identity. Loss is always >= 0.
    """
    scalar = np.isscalar(input_kw) or getattr(input_kw, "ndim", 1) == 0
    p = np.asarray(input_kw, dtype=float)
    if np.any(p < 0.0) or not np.all(np.isfinite(p)):
        raise InvalidInputError("path input must be finite and >= 0")
    out = p
    for spec in path:
        out = out * efficiency_at(spec, out)
    loss = p - out
    if scalar:
        return float(out), float(loss)
    return out, loss


def _stage_inverse(spec: ConverterSpec, out):
    """Input power that makes one stage deliver `out` (exact piecewise inverse).

    The forward map is strictly increasing, built from three pieces: a linear
    low-load piece (lookup clamped at min_load_fraction), the rational middle,
    and the linear plateau where the peak cap binds (extends above rated power,
    where the lookup clamps the load fraction to 1).
    """
    if spec.kind == "none":
        return np.asarray(out, dtype=float).copy()
    c0, c1 = spec.fixed_loss_coeff, spec.quadratic_loss_coeff
    rated = spec.rated_power_kw
    peak = spec.peak_efficiency
    lmin = spec.min_load_fraction
    plateau_lo = min(c0 / c1, 1.0) if c1 > 0.0 else 1.0
    plateau_lo = max(plateau_lo, lmin)

    eta_low = efficiency_at(spec, lmin * rated)
    out_low_max = eta_low * lmin * rated
    out_plateau_min = peak * plateau_lo * rated

    out = np.asarray(out, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        # middle piece: out = A*l^2 / (l + c0 + c1*l^2), A = (peak/g(1))*rated
        a_coef = peak / _shape(1.0, c0, c1) * rated
        lead = a_coef - out * c1
        disc = out * out + 4.0 * lead * out * c0
        l_mid = (out + np.sqrt(np.maximum(disc, 0.0))) / (2.0 * lead)
        mid = l_mid * rated

    result = np.where(
        out >= out_plateau_min,
        out / peak,
        np.where(out <= out_low_max, out / eta_low, mid),
    )
    return np.where(out == 0.0, 0.0, result)


def path_capacity_kw(path) -> float:
    """Largest deliverable output, with the first converting stage at its rating."""
    for spec in path:
        if spec.kind != "none":
            return apply_path(path, spec.rated_power_kw)[0]
    return math.inf


def required_input(path, output_kw):
    """Input power that makes a chain deliver `output_kw` at its far end.

    Inverts the chain stage by stage (each stage's part-load curve has an
    exact piecewise inverse; apply_path(required_input(P)) round-trips to
    machine precision). Raises InfeasibleDemandError when the demanded output
    exceeds the chain's capacity at the first stage's rated power.
    """
    scalar = np.isscalar(output_kw) or getattr(output_kw, "ndim", 1) == 0
    out = np.asarray(output_kw, dtype=float)
    if np.any(out < 0.0) or not np.all(np.isfinite(out)):
        raise InvalidInputError("demanded output must be finite and >= 0")
    if not path:
        return float(out) if scalar else out.copy()

    cap = path_capacity_kw(path)
    tol = 1e-9 * max(1.0, cap)
    bad = out > cap + tol
    if np.any(bad):
        idx = int(np.argmax(bad))
        value = float(out.flat[idx] if out.ndim else out)
        raise InfeasibleDemandError(
            f"demanded output {value:.6g} kW exceeds path capacity {cap:.6g} kW",
            index=idx if out.ndim else None,
        )
    need = np.minimum(out, cap)
    for spec in reversed(path):
        need = _stage_inverse(spec, need)
    return float(need) if scalar else need


def builtin_topologies(
    peak_efficiencies: dict[str, float] | None = None,
    rated_powers_kw: dict[str, float] | None = None,
    fixed_loss_coeff: float = 0.01,
    quadratic_loss_coeff: float = 0.05,
) -> tuple[Topology, Topology, Topology]:
    """The three reference nanogrid configurations.

    ac_baseline: an AC bus. PV reaches the bus through MPPT and inverter, the
    battery through its inverter, and the heat pump draw passes an internal
    rectifier followed by the drive inverter. House loads are bus-native.

    dc_retrofit: a DC bus. PV passes MPPT and a DC-DC stage, the battery a
    DC-DC stage, and the heat pump feeds its drive inverter directly (the
    rectifier is bypassed). Power to the house must be inverted.

    dc_ideal: like dc_retrofit, but the heat pump motor runs on the bus
    directly, so its path is the identity.
    """
    peaks = dict(DEFAULT_PEAK_EFFICIENCIES)
    if peak_efficiencies:
        peaks.update(peak_efficiencies)
    rated = dict(DEFAULT_RATED_POWERS_KW)
    if rated_powers_kw:
        rated.update(rated_powers_kw)

    def spec(kind: str, path: str) -> ConverterSpec:
        return ConverterSpec(
            kind=kind,
            peak_efficiency=peaks[kind],
            rated_power_kw=rated[path],
            fixed_loss_coeff=fixed_loss_coeff,
            quadratic_loss_coeff=quadratic_loss_coeff,
        )

    ac = Topology(
        name="ac_baseline",
        pv_to_bus=(spec("mppt", "pv"), spec("inverter", "pv")),
        battery_to_bus=(spec("inverter", "battery"),),
        bus_to_heat_pump=(spec("rectifier", "heat_pump"), spec("hp_inverter", "heat_pump")),
        bus_to_house=(),
    )
    retrofit = Topology(
        name="dc_retrofit",
        pv_to_bus=(spec("mppt", "pv"), spec("dc_dc", "pv")),
        battery_to_bus=(spec("dc_dc", "battery"),),
        bus_to_heat_pump=(spec("hp_inverter", "heat_pump"),),
        bus_to_house=(spec("inverter", "house"),),
    )
    ideal = Topology(
        name="dc_ideal",
        pv_to_bus=retrofit.pv_to_bus,
        battery_to_bus=retrofit.battery_to_bus,
        bus_to_heat_pump=(),
        bus_to_house=retrofit.bus_to_house,
    )
    return ac, retrofit, ideal


def topology_by_name(name: str, **kwargs) -> Topology:
    """Look up one builtin topology by its name."""
    for topo in builtin_topologies(**kwargs):
        if topo.name == name:
            return topo
    raise InvalidInputError(
        f"unknown topology {name!r}; expected one of {', '.join(TOPOLOGY_NAMES)}"
    )
