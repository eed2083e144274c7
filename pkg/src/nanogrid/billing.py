"""Net-metering bills from simulated power flows.

Flat volumetric tariff with an export credit (both default to the same
retail rate, i.e. full net metering). The whole-house net grid draw per step
is house_load - (export after house-path conversion); positive net draw
accumulates into monthly imports, negative into exports. Partial months are
billed pro-rata; there is no fixed charge. Currency is only rounded at
presentation time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import timedelta

import numpy as np

from .errors import InvalidInputError, UndefinedBaselineError


@dataclass(frozen=True)
class Tariff:
    """Flat volumetric price and export credit (USD/kWh)."""

    volumetric_price_usd_per_kwh: float = 0.14
    export_credit_usd_per_kwh: float = 0.14

    def __post_init__(self):
        if self.volumetric_price_usd_per_kwh < 0.0 or self.export_credit_usd_per_kwh < 0.0:
            raise InvalidInputError("tariff rates must be >= 0")


@dataclass(frozen=True)
class BillStatement:
    """Energy totals and charge for one calendar month (negative = credit)."""

    period: str
    import_kwh: float
    export_kwh: float
    amount_usd: float


def monthly_bills(flows, house_load_kw, tariff: Tariff) -> list[BillStatement]:
    """Bill the whole house month by month.

    `flows` is a simulation result; `house_load_kw` is the rest-of-house load
    aligned with it. Month boundaries follow the calendar of the flows'
    timestamp offset.
    """
    house = np.asarray(house_load_kw, dtype=float)
    if len(house) != len(flows):
        raise InvalidInputError(
            f"house load length {len(house)} != flows length {len(flows)}"
        )
    if len(flows) == 0:
        return []
    # Export measured at the house side of the bus-to-house path.
    export_house_kw = flows.export_kw - flows.loss_house_kw
    net_kw = house - export_house_kw
    dt = flows.timestep_h

    labels: list[str] = []
    step = timedelta(hours=dt)
    ts = flows.start
    for _ in range(len(flows)):
        labels.append(f"{ts.year:04d}-{ts.month:02d}")
        ts = ts + step

    bills: list[BillStatement] = []
    current = labels[0]
    imp = exp = 0.0
    price = tariff.volumetric_price_usd_per_kwh
    credit = tariff.export_credit_usd_per_kwh

    def close(period: str, imp: float, exp: float):
        bills.append(
            BillStatement(
                period=period,
                import_kwh=imp,
                export_kwh=exp,
                amount_usd=imp * price - exp * credit,
            )
        )

    for label, net in zip(labels, net_kw):
        if label != current:
            close(current, imp, exp)
            current = label
            imp = exp = 0.0
        energy = float(net) * dt
        if energy >= 0.0:
            imp += energy
        else:
            exp -= energy
    close(current, imp, exp)
    return bills


def annual_summary(bills) -> tuple[float, list[BillStatement]]:
    """Total over the given statements, plus the statements themselves."""
    return sum(b.amount_usd for b in bills), list(bills)


def savings_percent(baseline_usd: float, variant_usd: float) -> float:
    """Percentage saved by the variant relative to the baseline bill."""
    if baseline_usd == 0.0 or not math.isfinite(baseline_usd):
        raise UndefinedBaselineError(
            f"cannot compute savings against baseline {baseline_usd!r}"
        )
    return 100.0 * (baseline_usd - variant_usd) / baseline_usd
