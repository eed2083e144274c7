"""Monthly net-metering bills and savings arithmetic."""

from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from nanogrid import (
    BatteryParams,
    BillStatement,
    Tariff,
    UndefinedBaselineError,
    annual_summary,
    monthly_bills,
    savings_percent,
    simulate,
    synth_scenario,
    topology_by_name,
)
from nanogrid.dispatch import FlowsSeries

TZ = timezone(timedelta(hours=-5))


def flows_of(export_kw, loss_house_kw=None, start=None, timestep_h=1.0) -> FlowsSeries:
    export_kw = np.asarray(export_kw, dtype=float)
    n = len(export_kw)
    zeros = np.zeros(n)
    return FlowsSeries(
        start=start or datetime(2024, 4, 1, tzinfo=TZ),
        timestep_h=timestep_h,
        pv_supply_kw=zeros,
        heat_pump_demand_kw=zeros,
        chemical_power_kw=zeros,
        battery_power_kw=zeros,
        stored_energy_kwh=zeros,
        export_kw=export_kw,
        loss_pv_kw=zeros,
        loss_battery_kw=zeros,
        loss_heat_pump_kw=zeros,
        loss_house_kw=zeros if loss_house_kw is None else np.asarray(loss_house_kw, float),
    )


def test_flat_import_bill(default_tariff):
    # 100 kWh of net import at 0.14 USD/kWh
    flows = flows_of(np.zeros(100))
    bills = monthly_bills(flows, np.ones(100), default_tariff)
    assert len(bills) == 1
    assert bills[0].import_kwh == pytest.approx(100.0)
    assert bills[0].export_kwh == 0.0
    assert bills[0].amount_usd == pytest.approx(14.00, abs=1e-9)


def test_thirty_day_constant_import(default_tariff):
    flows = flows_of(np.zeros(720))
    bills = monthly_bills(flows, np.ones(720), default_tariff)
    assert bills[0].import_kwh == pytest.approx(720.0)
    assert bills[0].amount_usd == pytest.approx(100.80, abs=1e-9)


def test_balanced_import_export_is_zero(default_tariff):
    export = np.concatenate([np.zeros(50), np.full(50, 2.0)])
    house = np.ones(100)
    bills = monthly_bills(flows_of(export), house, default_tariff)
    assert bills[0].import_kwh == pytest.approx(50.0)
    assert bills[0].export_kwh == pytest.approx(50.0)
    assert bills[0].amount_usd == pytest.approx(0.0, abs=1e-9)


def test_pure_export_month_is_negative(default_tariff):
    bills = monthly_bills(flows_of(np.full(48, 1.5)), np.zeros(48), default_tariff)
    assert bills[0].import_kwh == 0.0
    assert bills[0].export_kwh == pytest.approx(72.0)
    assert bills[0].amount_usd == pytest.approx(-10.08, abs=1e-9)


def test_house_side_loss_reduces_export(default_tariff):
    flows = flows_of(np.full(10, 2.0), loss_house_kw=np.full(10, 0.1))
    bills = monthly_bills(flows, np.zeros(10), default_tariff)
    assert bills[0].export_kwh == pytest.approx(19.0)


def test_import_conversion_loss_raises_bill(default_tariff):
    # importing: bus-side p = -1, house side must supply 1.1
    flows = flows_of(np.full(10, -1.0), loss_house_kw=np.full(10, 0.1))
    bills = monthly_bills(flows, np.zeros(10), default_tariff)
    assert bills[0].import_kwh == pytest.approx(11.0)


def test_calendar_month_split(default_tariff):
    # 40 days from April 1: April (30 d) then May (10 d)
    n = 40 * 24
    bills = monthly_bills(flows_of(np.zeros(n)), np.ones(n), default_tariff)
    assert [b.period for b in bills] == ["2024-04", "2024-05"]
    assert bills[0].import_kwh == pytest.approx(720.0)
    assert bills[1].import_kwh == pytest.approx(240.0)


def test_tariff_linearity():
    flows = flows_of(np.concatenate([np.full(30, -2.0), np.full(30, 3.0)]))
    house = np.full(60, 0.5)
    base = monthly_bills(flows, house, Tariff(0.14, 0.14))
    scaled = monthly_bills(flows, house, Tariff(0.42, 0.42))
    for b, s in zip(base, scaled):
        assert s.amount_usd == pytest.approx(3.0 * b.amount_usd, rel=1e-12)


def test_annual_decomposition(default_tariff):
    series = synth_scenario(2, 365)
    flows = simulate(series, topology_by_name("ac_baseline"), BatteryParams())
    bills = monthly_bills(flows, series.column("house_power_kw"), default_tariff)
    assert len(bills) == 12
    total, by_month = annual_summary(bills)
    assert total == pytest.approx(sum(b.amount_usd for b in by_month), abs=1e-9)
    # winter months dominate the bill; at least one summer month exports net
    assert bills[0].amount_usd > bills[6].amount_usd


def test_empty_flows_bill_nothing(default_tariff):
    assert monthly_bills(flows_of(np.zeros(0)), np.zeros(0), default_tariff) == []


def test_length_mismatch_rejected(default_tariff):
    from nanogrid import InvalidInputError

    with pytest.raises(InvalidInputError):
        monthly_bills(flows_of(np.zeros(5)), np.zeros(4), default_tariff)


def test_annual_summary_passthrough():
    bills = [BillStatement(f"2024-{m:02d}", 0.0, 0.0, 10.0) for m in range(1, 13)]
    total, detail = annual_summary(bills)
    assert total == pytest.approx(120.0)
    assert detail == bills


def test_savings_reference_values():
    assert savings_percent(367.4, 321.6) == pytest.approx(12.465977, abs=1e-5)
    assert savings_percent(367.4, 306.2) == pytest.approx(16.657594, abs=1e-5)
    assert savings_percent(250.0, 250.0) == 0.0


def test_savings_zero_baseline():
    with pytest.raises(UndefinedBaselineError):
        savings_percent(0.0, 10.0)


def test_tariff_validation():
    from nanogrid import InvalidInputError

    with pytest.raises(InvalidInputError):
        Tariff(-0.1, 0.14)
