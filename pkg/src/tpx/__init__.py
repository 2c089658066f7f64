"""Profit-maximising transfer prices under expected tax penalties and foreign profit taxation."""

from .closed_form import (
    Boundary,
    DeviationReport,
    credit_offset_repatriation,
    neutralizing_repatriation,
    neutralizing_tariff,
    optimal_deviation,
    regime_ordering,
    switch_over_host_rate,
)
from .model import (
    Exemption,
    ForeignTaxDeduction,
    Jurisdiction,
    LimitedCredit,
    MarketPriceRange,
    PenaltyModel,
    ProportionalCredit,
    ShiftCase,
    TradeScenario,
    alpha,
    classify_case,
    division_profits,
    effective_differential,
    expected_penalty,
    global_net_income,
    objective,
)
from .oracle import SolveSettings, kkt_residuals, maximize_joint, maximize_price

__version__ = "0.1.0"
