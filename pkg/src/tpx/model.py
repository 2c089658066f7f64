"""Domain types and primitive functions of the two-division transfer pricing model.

A parent (home country) sells ``volume`` units to its subsidiary (host country)
at transfer price ``p``. Division profits are affine in ``p``; the firm pays an
expected penalty that grows as ``p`` moves away from the central arm's length
price toward the edge of the accepted band. Four rules for taxing the
subsidiary's profit at home are supported.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import LimitedCreditConstraintViolated

# Relative slack when comparing home tax and claimed credit on the legality ridge.
CREDIT_RTOL = 1e-12
_EPS = np.finfo(float).eps


def _check_rate(name: str, value: float, *, upper_open: bool = False) -> None:
    if not math.isfinite(value) or value < 0 or value > 1 or (upper_open and value == 1):
        bound = "[0,1)" if upper_open else "[0,1]"
        raise ValueError(f"{name} must lie in {bound}, got {value!r}")


@dataclass(frozen=True)
class Jurisdiction:
    """One country's tax rate, enforcement probability and unit penalty."""

    tax_rate: float
    enforcement: float = 0.0
    unit_penalty: float = 0.0

    def __post_init__(self):
        _check_rate("tax_rate", self.tax_rate, upper_open=True)
        _check_rate("enforcement", self.enforcement)
        if not math.isfinite(self.unit_penalty) or self.unit_penalty < 0:
            raise ValueError(f"unit_penalty must be >= 0, got {self.unit_penalty!r}")

    @property
    def penalty_intensity(self) -> float:
        """Enforcement probability times unit penalty; the only combination the model uses."""
        return self.enforcement * self.unit_penalty


@dataclass(frozen=True)
class MarketPriceRange:
    p_min: float
    p_bar: float
    p_max: float

    def __post_init__(self):
        vals = (self.p_min, self.p_bar, self.p_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("price range must be finite")
        if not 0 < self.p_min < self.p_bar < self.p_max:
            raise ValueError(
                f"need 0 < p_min < p_bar < p_max, got {self.p_min!r}, {self.p_bar!r}, {self.p_max!r}"
            )

    def limit(self, direction: float) -> float:
        """Band limit on the side of ``direction`` (p_max if positive, p_min if negative)."""
        return self.p_max if direction > 0 else self.p_min

    def limit_gap(self, direction: float) -> float:
        """Signed distance from the central price to the limit on that side."""
        return self.limit(direction) - self.p_bar

    @property
    def width(self) -> float:
        return self.p_max - self.p_min


@dataclass(frozen=True)
class PenaltyModel:
    """Curvature of the detection probability inside the band."""

    slope: float = 2.0

    def __post_init__(self):
        if not math.isfinite(self.slope) or self.slope <= 0:
            raise ValueError(f"penalty slope must be > 0, got {self.slope!r}")


@dataclass(frozen=True)
class Exemption:
    """Foreign profit is taxed only at source."""

    kind = "exemption"


@dataclass(frozen=True)
class ProportionalCredit:
    repatriation: float

    kind = "proportional_credit"

    def __post_init__(self):
        _check_rate("repatriation", self.repatriation)


@dataclass(frozen=True)
class LimitedCredit:
    """Credit rate ``credit_rate`` on host tax, capped by home tax on repatriated profit.

    The cap depends on the subsidiary profit and is therefore checked whenever
    income is evaluated, not here.
    """

    repatriation: float
    credit_rate: float

    kind = "limited_credit"

    def __post_init__(self):
        _check_rate("repatriation", self.repatriation)
        _check_rate("credit_rate", self.credit_rate)


@dataclass(frozen=True)
class ForeignTaxDeduction:
    repatriation: float

    kind = "foreign_tax_deduction"

    def __post_init__(self):
        _check_rate("repatriation", self.repatriation)


TaxRegime = Union[Exemption, ProportionalCredit, LimitedCredit, ForeignTaxDeduction]
REGIME_KINDS = {
    cls.kind: cls for cls in (Exemption, ProportionalCredit, LimitedCredit, ForeignTaxDeduction)
}


@dataclass(frozen=True)
class TradeScenario:
    home: Jurisdiction
    host: Jurisdiction
    price_range: MarketPriceRange
    penalty: PenaltyModel = PenaltyModel()
    volume: float = 1.0
    baseline_profit_home: float = 0.0
    baseline_profit_host: float = 0.0
    tariff: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.volume) or self.volume <= 0:
            raise ValueError(f"volume must be > 0, got {self.volume!r}")
        if not math.isfinite(self.tariff) or self.tariff < 0:
            raise ValueError(f"tariff must be >= 0, got {self.tariff!r}")
        if not (math.isfinite(self.baseline_profit_home) and math.isfinite(self.baseline_profit_host)):
            raise ValueError("baseline profits must be finite")

    def penalized(self, direction: float) -> Jurisdiction:
        """Country that charges the penalty when the price deviates in ``direction``."""
        return self.host if direction > 0 else self.home


class ShiftCase(enum.Enum):
    HTP = "HTP"
    LTP = "LTP"
    NEUTRAL = "Neutral"


def alpha(p: float, price_range: MarketPriceRange, penalty: PenaltyModel) -> float:
    """Endogenous penalty probability at price ``p``.

    ``(|p - p_bar| / |p_c - p_bar|) ** r`` on the side of ``p``, zero at the
    central price and saturated at one from the band limit outward.
    """
    dev = p - price_range.p_bar
    if dev == 0:
        return 0.0
    ratio = abs(dev) / abs(price_range.limit_gap(dev))
    if ratio >= 1:
        return 1.0
    return ratio**penalty.slope


def expected_penalty(p: float, scenario: TradeScenario) -> float:
    dev = p - scenario.price_range.p_bar
    if dev == 0:
        return 0.0
    g = scenario.penalized(dev).penalty_intensity
    return alpha(p, scenario.price_range, scenario.penalty) * g * scenario.volume


def division_profits(p, scenario: TradeScenario):
    """Pre-tax profits ``(pi1, pi2)``; the subsidiary also pays the import tariff."""
    m = scenario.volume
    pi1 = scenario.baseline_profit_home + p * m
    pi2 = scenario.baseline_profit_host - p * (1 + scenario.tariff) * m
    return pi1, pi2


def _net_income(pi1, pi2, t1: float, t2: float, regime: TaxRegime):
    # Works elementwise on arrays as well as on floats.
    base = (1 - t1) * pi1 + (1 - t2) * pi2
    if isinstance(regime, Exemption):
        return base
    b = regime.repatriation
    if isinstance(regime, ProportionalCredit):
        # Credit cannot exceed home tax, so with t2 > t1 it cancels home tax exactly.
        return base - t1 * b * pi2 + min(t1, t2) * b * pi2
    if isinstance(regime, LimitedCredit):
        return base - t1 * b * pi2 + t2 * regime.credit_rate * pi2
    if isinstance(regime, ForeignTaxDeduction):
        return base - t1 * b * (pi2 - t2 * pi2)
    raise TypeError(f"unknown tax regime {regime!r}")


def credit_is_legal(pi2: float, t1: float, t2: float, regime: LimitedCredit) -> bool:
    home_tax = t1 * regime.repatriation * pi2
    claimed = t2 * regime.credit_rate * pi2
    return home_tax - claimed >= -CREDIT_RTOL * max(abs(home_tax), abs(claimed))


def global_net_income(p: float, scenario: TradeScenario, regime: TaxRegime, *, check_credit: bool = True) -> float:
    """After-tax profit of the whole firm at price ``p``.

    Raises LimitedCreditConstraintViolated when a limited credit claim exceeds
    home tax on repatriated profit at this price (unless ``check_credit`` is off).
    """
    t1, t2 = scenario.home.tax_rate, scenario.host.tax_rate
    pi1, pi2 = division_profits(p, scenario)
    if check_credit and isinstance(regime, LimitedCredit) and not credit_is_legal(pi2, t1, t2, regime):
        raise LimitedCreditConstraintViolated(
            t1 * regime.repatriation * pi2, t2 * regime.credit_rate * pi2, p
        )
    return _net_income(pi1, pi2, t1, t2, regime)


def objective(p: float, scenario: TradeScenario, regime: TaxRegime, *, check_credit: bool = True) -> float:
    """Global net income minus the expected penalty."""
    return global_net_income(p, scenario, regime, check_credit=check_credit) - expected_penalty(p, scenario)


def objective_grid(prices, scenario: TradeScenario, regime: TaxRegime, *, check_credit: bool = True) -> np.ndarray:
    """Vectorised :func:`objective` over an array of prices."""
    p = np.asarray(prices, dtype=float)
    rng = scenario.price_range
    t1, t2 = scenario.home.tax_rate, scenario.host.tax_rate
    pi1, pi2 = division_profits(p, scenario)
    if check_credit and isinstance(regime, LimitedCredit):
        home_tax = t1 * regime.repatriation * pi2
        claimed = t2 * regime.credit_rate * pi2
        bad = home_tax - claimed < -CREDIT_RTOL * np.maximum(np.abs(home_tax), np.abs(claimed))
        if bad.any():
            i = int(np.argmax(bad))
            raise LimitedCreditConstraintViolated(float(home_tax[i]), float(claimed[i]), float(p[i]))
    income = _net_income(pi1, pi2, t1, t2, regime)

    dev = p - rng.p_bar
    gap = np.where(dev > 0, rng.p_max - rng.p_bar, rng.p_bar - rng.p_min)
    ratio = np.minimum(np.abs(dev) / gap, 1.0)
    prob = ratio**scenario.penalty.slope
    g = np.where(dev > 0, scenario.host.penalty_intensity, np.where(dev < 0, scenario.home.penalty_intensity, 0.0))
    return income - prob * g * scenario.volume


def _snapped_sum(terms) -> float:
    """Exact sum of rounded terms, with cancellation noise at the ulp level mapped to zero."""
    total = math.fsum(terms)
    if abs(total) <= 4 * _EPS * math.fsum(abs(t) for t in terms):
        return 0.0
    return total


def effective_differential(scenario: TradeScenario, regime: TaxRegime) -> float:
    """Per-unit marginal after-tax gain of raising the transfer price.

    ``d(global_net_income)/dp == effective_differential * volume`` for every
    regime; its sign decides the direction of profit shifting.
    """
    t1, t2, tau = scenario.home.tax_rate, scenario.host.tax_rate, scenario.tariff
    # Expanded into monomials so exact cancellations come out as exactly zero.
    exempt = [t2, t2 * tau, -t1, -tau]
    if isinstance(regime, Exemption):
        terms = exempt
    elif isinstance(regime, ProportionalCredit):
        b = regime.repatriation
        if t2 > t1:
            terms = exempt
        else:
            # [t2(1+tau) - t1](1-b) - tau(1 - t1 b)
            terms = exempt + [-b * t2, -b * t2 * tau, b * t1, tau * t1 * b]
    elif isinstance(regime, LimitedCredit):
        b, q = regime.repatriation, regime.credit_rate
        # t2(1+tau)(1-q) - t1(1-b) - tau(1 - t1 b)
        terms = exempt + [-q * t2, -q * t2 * tau, t1 * b, tau * t1 * b]
    elif isinstance(regime, ForeignTaxDeduction):
        b = regime.repatriation
        # [t2(1+tau) - tau](1 - t1 b) - t1(1-b)
        terms = exempt + [-t1 * b * t2, -t1 * b * t2 * tau, tau * t1 * b, t1 * b]
    else:
        raise TypeError(f"unknown tax regime {regime!r}")
    return _snapped_sum(terms)


def classify_case(scenario: TradeScenario, regime: TaxRegime) -> ShiftCase:
    delta = effective_differential(scenario, regime)
    if delta > 0:
        return ShiftCase.HTP
    if delta < 0:
        return ShiftCase.LTP
    return ShiftCase.NEUTRAL
