"""Stationary battery model: first-order storage dynamics with charge efficiency.

The stored chemical energy x (kWh) obeys dx/dt = -x/tau + u, where u (kW) is
the chemical charging power (negative when discharging) and tau (h) is the
self-dissipation time constant. Over a step of length dt with u held constant
the solution is exact:

    x_next = r * x + (1 - r) * tau * u,    r = exp(-dt / tau)

Electrical power at the battery terminals maps to chemical power through a
single symmetric efficiency: charging draws u / eta from the terminals per
unit of chemical intake, discharging delivers eta * |u| per unit of chemical
outflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ContractViolationError, InvalidInputError

# Silent clamp width at the state bounds; larger excursions are errors.
SOC_CLAMP_EPS = 1e-9


@dataclass(frozen=True)
class BatteryParams:
    """Battery ratings and model constants.

    Attributes:
        energy_capacity_kwh: Maximum stored chemical energy.
        power_capacity_kw: Symmetric limit on electrical terminal power.
        dissipation_time_constant_h: Self-dissipation time constant (hours).
        efficiency: Charge/discharge efficiency, in (0, 1].
        timestep_h: Duration of one simulation step (hours).
    """

    energy_capacity_kwh: float = 20.0
    power_capacity_kw: float = 12.5
    dissipation_time_constant_h: float = 1600.0
    efficiency: float = 0.95
    timestep_h: float = 1.0

    def __post_init__(self):
        for name in (
            "energy_capacity_kwh",
            "power_capacity_kw",
            "dissipation_time_constant_h",
            "efficiency",
            "timestep_h",
        ):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise InvalidInputError(f"{name} must be finite and > 0, got {value!r}")
        if self.efficiency > 1.0:
            raise InvalidInputError(f"efficiency must be <= 1, got {self.efficiency!r}")
        r = self.retention_factor
        if not 0.0 < r < 1.0:
            raise InvalidInputError(
                f"timestep_h / dissipation_time_constant_h yields retention {r!r}, "
                "outside (0, 1)"
            )

    @property
    def retention_factor(self) -> float:
        """Fraction of stored energy kept over one step, exp(-dt/tau)."""
        return math.exp(-self.timestep_h / self.dissipation_time_constant_h)


@dataclass(frozen=True)
class BatteryState:
    """Stored chemical energy at a step boundary."""

    stored_energy_kwh: float = 0.0


def step(state: BatteryState, chemical_power_kw: float, params: BatteryParams) -> BatteryState:
    """Advance the stored energy one step under constant chemical power.

    Exact discretization of dx/dt = -x/tau + u. The caller is responsible for
    choosing u so the result stays within [0, capacity] (see
    chemical_power_bounds); results within SOC_CLAMP_EPS of a bound are
    clamped silently, anything further out raises ContractViolationError.
    """
    x = state.stored_energy_kwh
    u = chemical_power_kw
    if not (math.isfinite(x) and math.isfinite(u)):
        raise InvalidInputError(f"non-finite battery step input: x={x!r}, u={u!r}")
    r = params.retention_factor
    x_next = r * x + (1.0 - r) * params.dissipation_time_constant_h * u
    cap = params.energy_capacity_kwh
    if x_next < -SOC_CLAMP_EPS or x_next > cap + SOC_CLAMP_EPS:
        raise ContractViolationError(
            f"battery step left [0, {cap}] kWh: x={x!r}, u={u!r} -> {x_next!r}"
        )
    return BatteryState(min(max(x_next, 0.0), cap))


def electrical_power(chemical_power_kw: float, params: BatteryParams) -> float:
    """Electrical terminal power for a given chemical power.

    Charging (u > 0) draws u/eta from the terminals; discharging (u < 0)
    delivers eta*u. Continuous and monotone increasing, zero at zero.
    """
    u = chemical_power_kw
    if not math.isfinite(u):
        raise InvalidInputError(f"non-finite chemical power: {u!r}")
    eta = params.efficiency
    return max(eta * u, u / eta)


def chemical_power_bounds(state: BatteryState, params: BatteryParams) -> tuple[float, float]:
    """Chemical power interval [u_min, u_max] that is safe for one step.

    Combines the state-of-charge headroom (stepping at the bound lands the
    stored energy exactly on 0 or on the capacity) with the chemical
    equivalents of the electrical power limit: eta * power_capacity when
    charging, -power_capacity / eta when discharging.
    """
    x = state.stored_energy_kwh
    r = params.retention_factor
    denom = (1.0 - r) * params.dissipation_time_constant_h
    eta = params.efficiency
    b_cap = params.power_capacity_kw
    u_max = min(eta * b_cap, (params.energy_capacity_kwh - r * x) / denom)
    u_min = max(-b_cap / eta, -r * x / denom)
    return u_min, u_max
