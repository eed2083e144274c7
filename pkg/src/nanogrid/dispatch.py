"""Priority dispatch of the nanogrid bus and the per-step power balance.

Priority order: solar serves the heat pump first; surplus charges the
battery, then exports to the rest of the house. Deficits draw down the
battery first, then import through the house connection. The chemical
charging command is

    u = eta * min(s - d, b_cap, charge headroom)        when s >= d
    u = (1/eta) * max(s - d, -b_cap, -discharge headroom)  otherwise

with the state-of-charge headroom expressed in chemical power. The scaled
discharge branch can overdraw the store when the headroom term governs (the
1/eta factor is applied after the max), so the command is clamped to the
battery's safe chemical interval; everywhere else the formula is used as is.
A strict variant that converts every argument into chemical units before
comparing is available behind `strict_power_cap`.

All StepFlows quantities are measured at the bus: s (PV supply), d (heat
pump draw), b (battery electrical power, positive charging), and the export
p = s - b - d hold exactly as a balance every step. Conversion losses land
on the far side of each path and are reported per path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

from .battery import BatteryParams, BatteryState
from .converters import Topology, apply_path, required_input
from .errors import ContractViolationError, InfeasibleDemandError, InvalidInputError

_SOC_EPS = 1e-9


@dataclass(frozen=True)
class StepFlows:
    """Bus power balance for one step.

    export_kw is the bus-side export to the house (negative = import);
    stored_energy_kwh is the battery state at the end of the step. Losses are
    the conversion losses of each path; the battery's internal efficiency and
    self-dissipation are part of the battery model, not of loss_battery_kw.
    """

    timestamp: datetime
    pv_supply_kw: float
    heat_pump_demand_kw: float
    chemical_power_kw: float
    battery_power_kw: float
    stored_energy_kwh: float
    export_kw: float
    loss_pv_kw: float
    loss_battery_kw: float
    loss_heat_pump_kw: float
    loss_house_kw: float


class FlowsSeries:
    """Columnar sequence of StepFlows sharing one uniform time grid."""

    def __init__(self, start: datetime, timestep_h: float, **arrays):
        self.start = start
        self.timestep_h = timestep_h
        self.pv_supply_kw = arrays["pv_supply_kw"]
        self.heat_pump_demand_kw = arrays["heat_pump_demand_kw"]
        self.chemical_power_kw = arrays["chemical_power_kw"]
        self.battery_power_kw = arrays["battery_power_kw"]
        self.stored_energy_kwh = arrays["stored_energy_kwh"]
        self.export_kw = arrays["export_kw"]
        self.loss_pv_kw = arrays["loss_pv_kw"]
        self.loss_battery_kw = arrays["loss_battery_kw"]
        self.loss_heat_pump_kw = arrays["loss_heat_pump_kw"]
        self.loss_house_kw = arrays["loss_house_kw"]

    def __len__(self) -> int:
        return len(self.pv_supply_kw)

    def timestamp(self, index: int) -> datetime:
        return self.start + timedelta(hours=self.timestep_h * index)

    def timestamps(self) -> list[datetime]:
        dt = timedelta(hours=self.timestep_h)
        return [self.start + k * dt for k in range(len(self))]

    def __getitem__(self, index: int) -> StepFlows:
        if isinstance(index, slice):
            raise TypeError("slicing not supported; index steps individually")
        n = len(self)
        if index < 0:
            index += n
        if not 0 <= index < n:
            raise IndexError(index)
        return StepFlows(
            timestamp=self.timestamp(index),
            pv_supply_kw=float(self.pv_supply_kw[index]),
            heat_pump_demand_kw=float(self.heat_pump_demand_kw[index]),
            chemical_power_kw=float(self.chemical_power_kw[index]),
            battery_power_kw=float(self.battery_power_kw[index]),
            stored_energy_kwh=float(self.stored_energy_kwh[index]),
            export_kw=float(self.export_kw[index]),
            loss_pv_kw=float(self.loss_pv_kw[index]),
            loss_battery_kw=float(self.loss_battery_kw[index]),
            loss_heat_pump_kw=float(self.loss_heat_pump_kw[index]),
            loss_house_kw=float(self.loss_house_kw[index]),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]


def control(
    pv_supply_kw: float,
    heat_pump_demand_kw: float,
    state: BatteryState,
    params: BatteryParams,
    strict_power_cap: bool = False,
) -> float:
    """Chemical battery power commanded for one step (positive = charge)."""
    s = pv_supply_kw
    d = heat_pump_demand_kw
    if not (math.isfinite(s) and math.isfinite(d)) or s < 0.0 or d < 0.0:
        raise InvalidInputError(f"supply/demand must be finite and >= 0: s={s!r}, d={d!r}")
    x = state.stored_energy_kwh
    r = params.retention_factor
    denom = (1.0 - r) * params.dissipation_time_constant_h
    eta = params.efficiency
    b_cap = params.power_capacity_kw
    diff = s - d
    charge_headroom = (params.energy_capacity_kwh - r * x) / denom
    discharge_headroom = r * x / denom
    if strict_power_cap:
        if diff >= 0.0:
            return min(eta * diff, eta * b_cap, charge_headroom)
        return max(diff / eta, -b_cap / eta, -discharge_headroom)
    if diff >= 0.0:
        return eta * min(diff, b_cap, charge_headroom)
    u = max(diff, -b_cap, -discharge_headroom) / eta
    if u < -discharge_headroom:
        u = -discharge_headroom
    return u


def _stage_constants(path) -> list[tuple[float, float, float, float, float, float]]:
    constants = []
    for spec in path:
        if spec.kind == "none":
            continue
        g1 = 1.0 / (1.0 + spec.fixed_loss_coeff + spec.quadratic_loss_coeff)
        constants.append(
            (
                spec.rated_power_kw,
                spec.min_load_fraction,
                spec.fixed_loss_coeff,
                spec.quadratic_loss_coeff,
                spec.peak_efficiency,
                spec.peak_efficiency / g1,
            )
        )
    return constants


def _forward(constants, power: float) -> float:
    """Plain-float equivalent of apply_path for the sequential loop."""
    for rated, lmin, c0, c1, peak, cnorm in constants:
        if power <= 0.0:
            return 0.0
        l = power / rated
        if l < lmin:
            l = lmin
        elif l > 1.0:
            l = 1.0
        eff = cnorm * l / (l + c0 + c1 * l * l)
        if eff > peak:
            eff = peak
        power *= eff
    return power


def simulate(
    series,
    topology: Topology,
    params: BatteryParams,
    initial_state: BatteryState | None = None,
    strict_power_cap: bool = False,
) -> FlowsSeries:
    """Run the dispatch over an aligned scenario; returns per-step flows.

    `series` must carry pv_dc_kw (PV power at the array) and hp_power_kw
    (heat-pump draw at the load side) on a grid matching params.timestep_h.
    The PV column is converted to the bus through the topology's PV path; the
    heat-pump column is converted to a bus-side demand by inverting the
    heat-pump path (raising InfeasibleDemandError, naming the timestamp, when
    the draw exceeds that path's capacity).
    """
    pv = np.asarray(series.column("pv_dc_kw"), dtype=float)
    hp = np.asarray(series.column("hp_power_kw"), dtype=float)
    if not (np.all(np.isfinite(pv)) and np.all(np.isfinite(hp))):
        raise InvalidInputError("scenario series must be finite")
    if np.any(pv < 0.0) or np.any(hp < 0.0):
        raise InvalidInputError("pv and heat-pump series must be >= 0")
    if abs(series.timestep_h - params.timestep_h) > 1e-9:
        raise InvalidInputError(
            f"series timestep {series.timestep_h} h != battery timestep "
            f"{params.timestep_h} h"
        )

    s_arr, loss_pv = apply_path(topology.pv_to_bus, pv)
    try:
        d_arr = required_input(topology.bus_to_heat_pump, hp)
    except InfeasibleDemandError as exc:
        stamp = series.timestamp(exc.index or 0)
        raise InfeasibleDemandError(
            f"heat-pump demand at {stamp.isoformat()} is infeasible: {exc}",
            index=exc.index,
        ) from exc
    loss_hp = d_arr - hp

    state = initial_state or BatteryState(0.0)
    x = state.stored_energy_kwh
    cap = params.energy_capacity_kwh
    if not 0.0 <= x <= cap:
        raise InvalidInputError(f"initial stored energy {x!r} outside [0, {cap}]")

    r = params.retention_factor
    tau = params.dissipation_time_constant_h
    denom = (1.0 - r) * tau
    eta = params.efficiency
    inv_eta = 1.0 / eta
    b_cap = params.power_capacity_kw
    batt_stages = _stage_constants(topology.battery_to_bus)
    strict = strict_power_cap

    n = len(s_arr)
    s_list = s_arr.tolist()
    d_list = d_arr.tolist()
    u_out = [0.0] * n
    b_out = [0.0] * n
    x_out = [0.0] * n
    lb_out = [0.0] * n

    for k in range(n):
        diff = s_list[k] - d_list[k]
        charge_headroom = (cap - r * x) / denom
        if diff >= 0.0:
            if strict:
                u = min(eta * diff, eta * b_cap, charge_headroom)
            else:
                u = eta * min(diff, b_cap, charge_headroom)
            if u > 0.0:
                b = u * inv_eta
                received = _forward(batt_stages, b)
                u_eff = eta * received
                lb_out[k] = b - received
            else:
                b = 0.0
                u_eff = 0.0
        else:
            discharge_headroom = r * x / denom
            if strict:
                u = max(diff * inv_eta, -b_cap * inv_eta, -discharge_headroom)
            else:
                u = max(diff, -b_cap, -discharge_headroom) * inv_eta
                if u < -discharge_headroom:
                    u = -discharge_headroom
            if u < 0.0:
                sent = -u * eta
                delivered = _forward(batt_stages, sent)
                b = -delivered
                u_eff = u
                lb_out[k] = sent - delivered
            else:
                b = 0.0
                u_eff = 0.0
        x = r * x + denom * u_eff
        if x < 0.0:
            if x < -_SOC_EPS:
                raise ContractViolationError(f"stored energy {x!r} < 0 at step {k}")
            x = 0.0
        elif x > cap:
            if x > cap + _SOC_EPS:
                raise ContractViolationError(f"stored energy {x!r} > {cap} at step {k}")
            x = cap
        u_out[k] = u_eff
        b_out[k] = b
        x_out[k] = x

    b_arr = np.asarray(b_out)
    p_arr = s_arr - b_arr - d_arr

    exported = np.where(p_arr > 0.0, p_arr, 0.0)
    delivered, _ = apply_path(topology.bus_to_house, exported)
    imported = np.where(p_arr < 0.0, -p_arr, 0.0)
    try:
        drawn = required_input(topology.bus_to_house, imported)
    except InfeasibleDemandError as exc:
        stamp = series.timestamp(exc.index or 0)
        raise InfeasibleDemandError(
            f"grid import at {stamp.isoformat()} exceeds the house path capacity: {exc}",
            index=exc.index,
        ) from exc
    loss_house = np.where(p_arr > 0.0, exported - delivered, drawn - imported)

    return FlowsSeries(
        start=series.timestamp(0),
        timestep_h=series.timestep_h,
        pv_supply_kw=s_arr,
        heat_pump_demand_kw=d_arr,
        chemical_power_kw=np.asarray(u_out),
        battery_power_kw=b_arr,
        stored_energy_kwh=np.asarray(x_out),
        export_kw=p_arr,
        loss_pv_kw=loss_pv,
        loss_battery_kw=np.asarray(lb_out),
        loss_heat_pump_kw=loss_hp,
        loss_house_kw=loss_house,
    )
