"""Analytic optimal transfer prices and the policy thresholds derived from them."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

from .errors import DegenerateRates, OrderingNotApplicable, SlopeNotSupported, ZeroEnforcementWarning
from .model import (
    ShiftCase,
    TaxRegime,
    TradeScenario,
    alpha,
    classify_case,
    effective_differential,
    expected_penalty,
    objective,
)


class Boundary(enum.Enum):
    INTERIOR = "Interior"
    CORNER = "CornerAtLimit"
    NEUTRAL = "NeutralAtCenter"


@dataclass(frozen=True)
class DeviationReport:
    optimal_price: float
    deviation: float
    case: ShiftCase
    boundary: Boundary
    alpha_at_optimum: float
    objective_value: float
    penalty_expectation: float
    warnings: Tuple[str, ...] = ()


def interior_deviation_size(delta: float, gap: float, intensity: float, slope: float) -> float:
    """Unclamped ``|p - p_bar|`` solving the first-order condition on one side.

    Stationarity of ``delta*m*p - G*m*(|p - p_bar|/gap)**r`` gives
    ``|p - p_bar| = (|delta| * gap**r / (r*G)) ** (1/(r-1))``; for ``r == 2``
    this is ``|delta| * gap**2 / (2*G)``.
    """
    return (abs(delta) * gap**slope / (slope * intensity)) ** (1.0 / (slope - 1.0))


def optimal_deviation(scenario: TradeScenario, regime: TaxRegime) -> DeviationReport:
    """Profit-maximising transfer price on the accepted band.

    If the first-order solution reaches the band limit the price is pinned at
    the limit and flagged as a corner: beyond it the penalty probability is
    saturated and the objective grows without bound.
    """
    r = scenario.penalty.slope
    if r <= 1:
        raise SlopeNotSupported(f"closed forms need slope > 1, got {r!r}; use the numerical oracle")
    band = scenario.price_range
    delta = effective_differential(scenario, regime)
    case = classify_case(scenario, regime)
    notes = []

    if delta == 0:
        price, dev, boundary = band.p_bar, 0.0, Boundary.NEUTRAL
    else:
        direction = math.copysign(1.0, delta)
        gap = abs(band.limit_gap(direction))
        intensity = scenario.penalized(direction).penalty_intensity
        if intensity == 0:
            msg = "zero enforcement on the penalized side: incentive is unbounded, price pinned at band limit"
            warnings.warn(msg, ZeroEnforcementWarning, stacklevel=2)
            notes.append(msg)
            size = math.inf
        else:
            size = interior_deviation_size(delta, gap, intensity, r)
        if size >= gap:
            price = band.limit(direction)
            dev = price - band.p_bar
            boundary = Boundary.CORNER
            notes.append("optimum at band limit; model has no interior solution here")
        else:
            dev = direction * size
            price = band.p_bar + dev
            boundary = Boundary.INTERIOR

    return DeviationReport(
        optimal_price=price,
        deviation=dev,
        case=case,
        boundary=boundary,
        alpha_at_optimum=alpha(price, band, scenario.penalty),
        objective_value=objective(price, scenario, regime),
        penalty_expectation=expected_penalty(price, scenario),
        warnings=tuple(notes),
    )


def neutralizing_repatriation(t1: float, t2: float, tariff: float = 0.0) -> Optional[float]:
    """Repatriation rate at which the deduction rule removes the shifting incentive.

    Returns None when the required rate falls outside ``[0, 1]`` (for example
    ``t2 > t1`` without a tariff).
    """
    if t1 == 0 or t2 == 1:
        raise DegenerateRates(f"need t1 > 0 and t2 < 1, got t1={t1!r}, t2={t2!r}")
    b = (t1 - t2 * (1 + tariff) + tariff) / (t1 * (1 + tariff) * (1 - t2))
    if not 0 <= b <= 1:
        return None
    return b


def neutralizing_tariff(t1: float, t2: float) -> Optional[float]:
    """Tariff that cancels the incentive under exemption; None if it would be negative."""
    if t2 == 1:
        raise DegenerateRates("host tax rate of 1 leaves no after-tax profit")
    tau = (t2 - t1) / (1 - t2)
    if tau < 0:
        return None
    return tau


def switch_over_host_rate(t1: float, b: float) -> float:
    """Host tax rate at which the deduction rule switches from LTP to HTP (no tariff)."""
    if t1 * b >= 1:
        raise ValueError("need t1 * b < 1")
    return t1 * (1 - b) / (1 - t1 * b)


def credit_offset_repatriation(q: float, t1: float, t2: float) -> float:
    """Repatriation rate at which a limited credit at rate ``q`` exactly offsets home tax.

    May exceed 1; callers decide whether to clamp.
    """
    if t1 == 0:
        raise DegenerateRates("home tax rate must be positive")
    return q * t2 / t1


def regime_ordering(t1: float, t2: float, b: float) -> Tuple[float, float, float]:
    """Host-tax retention factors (limited credit, proportional credit, deduction).

    With the home rate above the host rate and some repatriation these are
    strictly increasing, i.e. the deduction rule moves the optimum furthest.
    """
    if not (0 < t2 < t1 < 1 and 0 < b <= 1):
        raise OrderingNotApplicable(
            f"ordering needs 0 < t2 < t1 < 1 and 0 < b <= 1, got t1={t1!r}, t2={t2!r}, b={b!r}"
        )
    return 1 - b * t1 / t2, 1 - b, 1 - t1 * b


def host_tax_factor(scenario: TradeScenario, regime: TaxRegime) -> float:
    """Multiplier on host taxation ``t2*(1+tau)`` inside the regime's differential.

    Every regime's differential has the form
    ``t2*(1+tau)*factor - t1*(1-b) - tau*(1-t1*b)``; this backs out ``factor``.
    NaN when the host rate is zero.
    """
    t1, t2, tau = scenario.home.tax_rate, scenario.host.tax_rate, scenario.tariff
    if t2 == 0:
        return math.nan
    b = getattr(regime, "repatriation", 0.0)
    delta = effective_differential(scenario, regime)
    return (delta + t1 * (1 - b) + tau * (1 - t1 * b)) / (t2 * (1 + tau))
