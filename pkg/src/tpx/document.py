"""JSON scenario documents: parsing, validation and normalised echo."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Dict, Literal, Optional, Tuple, Union

import pydantic
from pydantic import BaseModel, ConfigDict, Field

from .errors import TpxError
from .model import (
    Exemption,
    ForeignTaxDeduction,
    Jurisdiction,
    LimitedCredit,
    MarketPriceRange,
    PenaltyModel,
    ProportionalCredit,
    TaxRegime,
    TradeScenario,
)
from .oracle import SolveSettings


class ParseError(TpxError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}" if line else message)


class ValidationError(TpxError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True, allow_inf_nan=False)


class _Jurisdiction(_Strict):
    tax_rate: float = Field(ge=0, lt=1)
    enforcement: float = Field(0.0, ge=0, le=1)
    unit_penalty: float = Field(0.0, ge=0)


class _Range(_Strict):
    p_min: float = Field(gt=0)
    p_bar: float
    p_max: float


class _Penalty(_Strict):
    slope: float = Field(2.0, gt=0)


class _Trade(_Strict):
    volume: float = Field(gt=0)
    baseline_profit_home: float = 0.0
    baseline_profit_host: float = 0.0
    tariff: float = Field(0.0, ge=0)


class _Regime(_Strict):
    kind: Literal["exemption", "proportional_credit", "limited_credit", "foreign_tax_deduction"]
    repatriation: Optional[float] = Field(None, ge=0, le=1)
    credit_rate: Optional[float] = Field(None, ge=0, le=1)


class _Settings(_Strict):
    grid_points: int = Field(4096, ge=1000)
    refine_tolerance: float = Field(1e-9, gt=0)
    domain: Optional[Tuple[float, float]] = None
    widen: bool = False


class _Document(_Strict):
    home: _Jurisdiction
    host: _Jurisdiction
    range: _Range
    penalty: _Penalty = _Penalty()
    trade: _Trade
    regime: _Regime
    settings: _Settings = _Settings()


@dataclass(frozen=True)
class ScenarioDocument:
    scenario: TradeScenario
    regime: TaxRegime
    settings: SolveSettings
    # Normalised form with every default filled in; re-parses to the same document.
    normalized: Dict[str, Any]


def _build_regime(doc: _Regime) -> TaxRegime:
    if doc.kind == "exemption":
        return Exemption()
    if doc.repatriation is None:
        raise ValidationError("regime.repatriation", f"required for {doc.kind}")
    if doc.kind == "proportional_credit":
        return ProportionalCredit(doc.repatriation)
    if doc.kind == "foreign_tax_deduction":
        return ForeignTaxDeduction(doc.repatriation)
    if doc.credit_rate is None:
        raise ValidationError("regime.credit_rate", "required for limited_credit")
    return LimitedCredit(doc.repatriation, doc.credit_rate)


def from_mapping(data: Any) -> ScenarioDocument:
    """Validate an already-decoded JSON value."""
    try:
        # JSON-mode validation so arrays are accepted for tuples under strict typing.
        doc = _Document.model_validate_json(json.dumps(data))
    except pydantic.ValidationError as exc:
        err = exc.errors()[0]
        path = ".".join(str(part) for part in err["loc"]) or "<root>"
        raise ValidationError(path, err["msg"]) from None

    rng = doc.range
    if not rng.p_min < rng.p_bar:
        raise ValidationError("range.p_min", f"must be below p_bar ({rng.p_bar!r})")
    if not rng.p_bar < rng.p_max:
        raise ValidationError("range.p_max", f"must be above p_bar ({rng.p_bar!r})")
    if doc.settings.domain is not None:
        lo, hi = doc.settings.domain
        if not lo < hi:
            raise ValidationError("settings.domain", "lower bound must be below upper bound")
        if not doc.settings.widen and (lo < rng.p_min or hi > rng.p_max):
            raise ValidationError("settings.domain", "extends past the price band; set widen to true")

    scenario = TradeScenario(
        home=Jurisdiction(**doc.home.model_dump()),
        host=Jurisdiction(**doc.host.model_dump()),
        price_range=MarketPriceRange(rng.p_min, rng.p_bar, rng.p_max),
        penalty=PenaltyModel(doc.penalty.slope),
        volume=doc.trade.volume,
        baseline_profit_home=doc.trade.baseline_profit_home,
        baseline_profit_host=doc.trade.baseline_profit_host,
        tariff=doc.trade.tariff,
    )
    settings = SolveSettings(**doc.settings.model_dump())
    normalized = doc.model_dump(mode="json")
    return ScenarioDocument(scenario, _build_regime(doc.regime), settings, normalized)


def parse_scenario(text: Union[bytes, str]) -> ScenarioDocument:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc.reason}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return from_mapping(data)
