"""Residential nanogrid simulation and heat-pump test-data analysis."""

from .analysis import (
    FieldSample,
    PolynomialFit,
    SteadyStateTestRecord,
    WelchResult,
    cop,
    daily_means,
    daily_temperature_deficit,
    energy_balance_check,
    fit_poly,
    student_t_two_tailed_p,
    temperature_deficit,
    weather_normalized_power,
    welch_t_test,
)
from .battery import BatteryParams, BatteryState, chemical_power_bounds, electrical_power, step
from .billing import BillStatement, Tariff, annual_summary, monthly_bills, savings_percent
from .converters import (
    ConverterSpec,
    Topology,
    apply_path,
    builtin_topologies,
    efficiency_at,
    required_input,
    topology_by_name,
)
from .dataio import AlignedSeries, merge_aligned, synth_scenario
from .dispatch import FlowsSeries, StepFlows, control, simulate
from .errors import (
    ContractViolationError,
    InfeasibleDemandError,
    InvalidInputError,
    NanogridError,
    SchemaError,
    SingularFitError,
    UndefinedBaselineError,
)
from .pvsolar import IrradianceRecord, SubArray, default_sub_arrays, poa_irradiance, pv_power

__version__ = "0.1.0"
