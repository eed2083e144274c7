"""Measurement reduction and statistics for heat-pump test data.

Covers the steady-state lab side (COP, energy-balance agreement) and the
field side (daily aggregation, weather normalization, Welch's unequal
variance t-test, polynomial fits with Gaussian confidence bands). The
t-distribution tail probability is evaluated in-repo through a regularized
incomplete beta (continued fraction), good to well below 1e-10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, datetime

import numpy as np

from .errors import InvalidInputError, SingularFitError

DEFAULT_SETPOINT_C = 20.5
# Indoor-outdoor temperature difference at which heat demand is ~zero.
ZERO_LOAD_DEFICIT_C = 8.0
# One-sided 5% Gaussian quantile used for the 90% confidence bands.
GAUSSIAN_90_MULTIPLIER = 1.645

SUPPLY_KINDS = frozenset({"ac", "dc"})


@dataclass(frozen=True)
class SteadyStateTestRecord:
    """One steady-state lab test row.

    thermal_capacity_kw is the delivered thermal capacity (indoor coil heat
    transfer plus indoor fan heat, as published); total_power_kw is the total
    electrical input. The indoor/outdoor split is informational: published
    datasets do not always sum exactly to the total column, so no balance is
    enforced here (see power_balance_gap_kw).
    """

    test_label: str
    supply: str
    thermal_capacity_kw: float
    indoor_power_kw: float
    outdoor_power_kw: float
    total_power_kw: float

    def __post_init__(self):
        if self.supply not in SUPPLY_KINDS:
            raise InvalidInputError(f"supply must be 'ac' or 'dc', got {self.supply!r}")
        for name in (
            "thermal_capacity_kw",
            "indoor_power_kw",
            "outdoor_power_kw",
            "total_power_kw",
        ):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise InvalidInputError(f"{name} must be finite and >= 0, got {value!r}")

    @property
    def power_balance_gap_kw(self) -> float:
        """total minus (indoor + outdoor); nonzero in some published rows."""
        return self.total_power_kw - (self.indoor_power_kw + self.outdoor_power_kw)


@dataclass(frozen=True)
class FieldSample:
    """One timestamped field measurement."""

    timestamp: datetime
    power_kw: float
    t_out_c: float
    supply: str
    setpoint_c: float = DEFAULT_SETPOINT_C

    def __post_init__(self):
        if self.supply not in SUPPLY_KINDS:
            raise InvalidInputError(f"supply must be 'ac' or 'dc', got {self.supply!r}")
        if not (math.isfinite(self.power_kw) and math.isfinite(self.t_out_c)):
            raise InvalidInputError("field sample values must be finite")


@dataclass(frozen=True)
class EnergyBalanceResult:
    relative_error: float
    passed: bool
    tolerance: float


@dataclass(frozen=True)
class WelchResult:
    """Welch's unequal-variance two-sample t-test outcome."""

    mean_a: float
    mean_d: float
    var_a: float
    var_d: float
    n_a: int
    n_d: int
    t_statistic: float
    degrees_of_freedom: float
    p_value: float


def cop(record: SteadyStateTestRecord) -> float:
    """Coefficient of performance: thermal capacity over total input power."""
    if record.total_power_kw <= 0.0:
        raise InvalidInputError("total_power_kw must be > 0 to compute COP")
    return record.thermal_capacity_kw / record.total_power_kw


def energy_balance_check(
    air_side_kw: float, refrigerant_side_kw: float, tolerance: float = 0.06
) -> EnergyBalanceResult:
    """Relative agreement between two capacity measurements of the same test.

    Error is |air - refrigerant| / refrigerant; passes when within tolerance.
    """
    if not refrigerant_side_kw > 0.0:
        raise InvalidInputError("refrigerant_side_kw must be > 0")
    rel = abs(air_side_kw - refrigerant_side_kw) / refrigerant_side_kw
    return EnergyBalanceResult(relative_error=rel, passed=rel <= tolerance, tolerance=tolerance)


def temperature_deficit(t_out_c, setpoint_c: float = DEFAULT_SETPOINT_C):
    """Indoor-outdoor temperature difference max(0, setpoint - T_out)."""
    return np.maximum(0.0, setpoint_c - np.asarray(t_out_c, dtype=float))


def daily_means(
    timestamps, values, min_samples_per_day: int = 20
) -> tuple[list[date], np.ndarray]:
    """Mean of `values` per calendar day of the timestamps' own offset.

    Days carrying fewer than min_samples_per_day samples are dropped (guards
    against partial first/last days skewing daily statistics on hourly data).
    """
    values = np.asarray(values, dtype=float)
    if len(timestamps) != len(values):
        raise InvalidInputError("timestamps and values must have equal length")
    sums: dict[date, float] = {}
    counts: dict[date, int] = {}
    for ts, v in zip(timestamps, values):
        day = ts.date()
        sums[day] = sums.get(day, 0.0) + float(v)
        counts[day] = counts.get(day, 0) + 1
    days = sorted(d for d, c in counts.items() if c >= min_samples_per_day)
    return days, np.array([sums[d] / counts[d] for d in days])


def daily_temperature_deficit(
    timestamps,
    t_out_c,
    setpoint_c: float = DEFAULT_SETPOINT_C,
    min_samples_per_day: int = 20,
) -> tuple[list[date], np.ndarray]:
    """Daily mean of max(0, setpoint - T_out); the clamp removes hours warmer
    than the setpoint, where heat demand is expected to be zero."""
    return daily_means(
        timestamps, temperature_deficit(t_out_c, setpoint_c), min_samples_per_day
    )


def weather_normalized_power(
    power_kw: float, deficit_c: float, zero_load_deficit_c: float = ZERO_LOAD_DEFICIT_C
) -> float | None:
    """Input power per degree of temperature deficit above the zero-load point.

    Returns None when the deficit is at or below the zero-load threshold:
    such samples carry no heat demand signal and are excluded, not an error.
    """
    if not (math.isfinite(power_kw) and math.isfinite(deficit_c)):
        raise InvalidInputError("power and deficit must be finite")
    if deficit_c <= zero_load_deficit_c:
        return None
    return power_kw / (deficit_c - zero_load_deficit_c)


def _log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _beta_cont_frac(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        numerator = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + numerator * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + numerator / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        numerator = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + numerator * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + numerator / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 3e-16:
            return h
    raise InvalidInputError(
        f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})"
    )


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), accurate to ~1e-14 over the parameter ranges used here."""
    if not (a > 0.0 and b > 0.0):
        raise InvalidInputError("incomplete beta requires a > 0 and b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = math.exp(a * math.log(x) + b * math.log1p(-x) - _log_beta(a, b))
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_frac(a, b, x) / a
    return 1.0 - front * _beta_cont_frac(b, a, 1.0 - x) / b


def student_t_two_tailed_p(t_statistic: float, degrees_of_freedom: float) -> float:
    """P(|T| >= |t|) for Student's t with the given degrees of freedom."""
    if not degrees_of_freedom > 0.0:
        raise InvalidInputError("degrees_of_freedom must be > 0")
    t = float(t_statistic)
    if t == 0.0:
        return 1.0
    df = float(degrees_of_freedom)
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def welch_t_test(sample_a, sample_d) -> WelchResult:
    """Two-sample two-tailed mean comparison without assuming equal variances.

    Uses unbiased (n-1) sample variances and the Welch-Satterthwaite
    degrees of freedom. Requires at least two samples per group and a nonzero
    pooled variance.
    """
    a = np.asarray(sample_a, dtype=float)
    d = np.asarray(sample_d, dtype=float)
    if a.ndim != 1 or d.ndim != 1 or len(a) < 2 or len(d) < 2:
        raise InvalidInputError("each sample must be 1-d with at least 2 values")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(d))):
        raise InvalidInputError("samples must be finite")
    n_a, n_d = len(a), len(d)
    mean_a, mean_d = float(a.mean()), float(d.mean())
    var_a = float(a.var(ddof=1))
    var_d = float(d.var(ddof=1))
    sa, sd = var_a / n_a, var_d / n_d
    pooled = sa + sd
    if pooled <= 0.0:
        raise InvalidInputError("degenerate samples: zero pooled variance")
    t = (mean_a - mean_d) / math.sqrt(pooled)
    df = pooled * pooled / (sa * sa / (n_a - 1) + sd * sd / (n_d - 1))
    return WelchResult(
        mean_a=mean_a,
        mean_d=mean_d,
        var_a=var_a,
        var_d=var_d,
        n_a=n_a,
        n_d=n_d,
        t_statistic=t,
        degrees_of_freedom=df,
        p_value=student_t_two_tailed_p(t, df),
    )


@dataclass(frozen=True)
class PolynomialFit:
    """Least-squares polynomial with its fit quality and band width.

    Coefficients are in ascending powers: predict(x) = sum(c[k] * x**k).
    """

    coefficients: tuple[float, ...]
    r_squared: float
    residual_sigma: float

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        result = np.zeros_like(x)
        for k, c in enumerate(self.coefficients):
            result = result + c * x**k
        return result

    def confidence_band(self, x, multiplier: float = GAUSSIAN_90_MULTIPLIER):
        """Pointwise band: prediction +/- multiplier * residual_sigma."""
        center = self.predict(x)
        half = multiplier * self.residual_sigma
        return center - half, center + half


def fit_poly(x, y, degree: int) -> PolynomialFit:
    """Least-squares polynomial fit of degree 1 or 2.

    R^2 is 1 - SS_res/SS_tot; residual_sigma is the dof-adjusted residual
    standard deviation sqrt(SS_res / (n - degree - 1)).
    """
    if degree not in (1, 2):
        raise InvalidInputError(f"degree must be 1 or 2, got {degree!r}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidInputError("x and y must be 1-d arrays of equal length")
    n = len(x)
    if n < degree + 2:
        raise InvalidInputError(f"need at least {degree + 2} points for degree {degree}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidInputError("fit data must be finite")
    design = np.vander(x, degree + 1, increasing=True)
    coef, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < degree + 1:
        raise SingularFitError(
            f"design matrix rank {rank} < {degree + 1}; abscissae not distinct enough"
        )
    residuals = y - design @ coef
    ss_res = float(residuals @ residuals)
    centered = y - y.mean()
    ss_tot = float(centered @ centered)
    if ss_tot > 0.0:
        r_squared = 1.0 - ss_res / ss_tot
    else:
        r_squared = 1.0 if ss_res <= 1e-20 else 0.0
    sigma = math.sqrt(ss_res / (n - degree - 1))
    return PolynomialFit(
        coefficients=tuple(float(c) for c in coef),
        r_squared=r_squared,
        residual_sigma=sigma,
    )
