"""Numerical maximisation of the penalised objective, independent of the closed forms.

The objective kinks at the central price (the penalising country changes) and
at the band limits, so it is searched on a dense grid and then refined with a
golden-section search separately on each side of the central price, where it
is concave for slopes ``r >= 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, FrozenSet, Optional, Tuple

import numpy as np

from .errors import EmptyFeasibleSet, NonFiniteObjective
from .model import (
    ForeignTaxDeduction,
    LimitedCredit,
    ProportionalCredit,
    REGIME_KINDS,
    TaxRegime,
    TradeScenario,
    credit_is_legal,
    division_profits,
    objective,
    objective_grid,
)

INV_PHI = (math.sqrt(5) - 1) / 2
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SolveSettings:
    grid_points: int = 4096
    refine_tolerance: float = 1e-9
    domain: Optional[Tuple[float, float]] = None
    widen: bool = False

    def __post_init__(self):
        if self.grid_points < 1000:
            raise ValueError(f"grid_points must be >= 1000, got {self.grid_points}")
        if not self.refine_tolerance > 0:
            raise ValueError("refine_tolerance must be positive")
        if self.domain is not None and not self.domain[0] < self.domain[1]:
            raise ValueError(f"empty price domain {self.domain!r}")

    def resolve_domain(self, scenario: TradeScenario) -> Tuple[float, float]:
        band = scenario.price_range
        if self.domain is None:
            return band.p_min, band.p_max
        lo, hi = self.domain
        if not self.widen and (lo < band.p_min or hi > band.p_max):
            raise ValueError("domain extends past the price band; set widen=True to allow it")
        return float(lo), float(hi)


@dataclass(frozen=True)
class OracleResult:
    argmax_price: float
    value: float
    boundary_flags: FrozenSet[str] = frozenset()
    evaluations: int = 0
    argmax_controls: Optional[Tuple[float, float]] = None
    # Control points whose value ties the optimum (joint searches only).
    near_optimal_controls: Tuple[Tuple[float, float], ...] = ()
    excluded_controls: int = 0


@dataclass(frozen=True)
class KktReport:
    stationarity_residual: float
    multiplier: float
    complementary_slackness: float
    primal_feasibility: bool
    dual_feasibility: bool


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float):
    """Maximise a unimodal ``f`` on ``[lo, hi]``; returns ``(x, f(x), evaluations)``."""
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    n = 2
    while hi - lo > tol:
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = f(x2)
        n += 1
    if f1 >= f2:
        return x1, f1, n
    return x2, f2, n


def _pick(candidates, p_bar: float, scale: float):
    """Best (value, price); near-exact ties go to the central price, then the lowest price."""
    best = max(v for v, _ in candidates)
    tied = [(v, p) for v, p in candidates if v >= best - 8 * _EPS * scale]
    for v, p in tied:
        if p == p_bar:
            return v, p
    return min(tied, key=lambda vp: (vp[1], -vp[0]))


def maximize_price(
    scenario: TradeScenario,
    regime: TaxRegime,
    settings: Optional[SolveSettings] = None,
    *,
    check_credit: bool = True,
) -> OracleResult:
    settings = settings or SolveSettings()
    lo, hi = settings.resolve_domain(scenario)
    p_bar = scenario.price_range.p_bar

    grid = np.linspace(lo, hi, settings.grid_points)
    vals = objective_grid(grid, scenario, regime, check_credit=check_credit)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteObjective("objective is not finite on the price grid")
    evals = grid.size

    def f(p):
        v = objective(p, scenario, regime, check_credit=check_credit)
        if not math.isfinite(v):
            raise NonFiniteObjective(f"objective not finite at p={p!r}")
        return v

    candidates = []
    refine = scenario.penalty.slope >= 1
    for side_lo, side_hi in ((lo, min(p_bar, hi)), (max(p_bar, lo), hi)):
        if side_lo >= side_hi:
            continue
        idx = np.flatnonzero((grid >= side_lo) & (grid <= side_hi))
        if idx.size == 0:
            continue
        i = int(idx[np.argmax(vals[idx])])
        candidates.append((float(vals[i]), float(grid[i])))
        if refine:
            a = max(grid[i - 1], side_lo) if i > 0 else side_lo
            b = min(grid[i + 1], side_hi) if i + 1 < grid.size else side_hi
            tol = settings.refine_tolerance * max(1.0, abs(grid[i]))
            x, fx, k = golden_section_max(f, float(a), float(b), tol)
            candidates.append((fx, x))
            evals += k
    if lo <= p_bar <= hi:
        candidates.append((f(p_bar), p_bar))
        evals += 1

    pi1, pi2 = division_profits(p_bar, scenario)
    scale = abs(pi1) + abs(pi2) + max(abs(v) for v, _ in candidates)
    value, price = _pick(candidates, p_bar, scale)

    flags = set()
    if price <= lo:
        flags.add("lower_edge")
    if price >= hi:
        flags.add("upper_edge")
    if price == p_bar:
        flags.add("center")
    return OracleResult(argmax_price=price, value=value, boundary_flags=frozenset(flags), evaluations=evals)


def _family(regime_family):
    if isinstance(regime_family, str):
        regime_family = REGIME_KINDS[regime_family]
    if regime_family not in (ProportionalCredit, LimitedCredit, ForeignTaxDeduction):
        raise ValueError(f"joint search needs a repatriation regime, got {regime_family!r}")
    return regime_family


def maximize_joint(
    scenario: TradeScenario,
    regime_family,
    settings: Optional[SolveSettings] = None,
    control_points: int = 101,
) -> OracleResult:
    """Brute-force the repatriation rate (and credit rate for limited credit) on a grid.

    For limited credit, control pairs whose credit claim is illegal at their own
    inner-optimal price are dropped. Ties between control points go to the one
    met first in ascending order.
    """
    family = _family(regime_family)
    if control_points < 101:
        raise ValueError("control grid needs at least 101 points per control")
    settings = settings or SolveSettings()
    controls = np.linspace(0.0, 1.0, control_points)
    t1, t2 = scenario.home.tax_rate, scenario.host.tax_rate

    if family is LimitedCredit:
        pairs = [(float(b), float(q)) for b in controls for q in controls]
        lo, hi = settings.resolve_domain(scenario)
        pi2_edges = [division_profits(p, scenario)[1] for p in (lo, hi)]
        # With one sign of pi2 across the domain, legality does not depend on price.
        fixed_sign = min(pi2_edges) > 0 or max(pi2_edges) < 0
        sign_pi2 = 1.0 if pi2_edges[0] > 0 else -1.0
    else:
        pairs = [(float(b), math.nan) for b in controls]

    results = []
    excluded = 0
    evals = 0
    for b, q in pairs:
        if family is LimitedCredit:
            regime = LimitedCredit(b, q)
            if fixed_sign and not credit_is_legal(sign_pi2, t1, t2, regime):
                excluded += 1
                continue
        else:
            regime = family(b)
        res = maximize_price(scenario, regime, settings, check_credit=False)
        evals += res.evaluations
        if family is LimitedCredit:
            pi2 = division_profits(res.argmax_price, scenario)[1]
            if not credit_is_legal(pi2, t1, t2, regime):
                excluded += 1
                continue
        results.append(((b, q), res))

    if not results:
        raise EmptyFeasibleSet("every control point violates the credit limit")

    best_ctrl, best = results[0]
    for ctrl, res in results[1:]:
        if res.value > best.value + 1e-12 * max(1.0, abs(best.value)):
            best_ctrl, best = ctrl, res
    near = tuple(
        ctrl for ctrl, res in results if res.value >= best.value - 1e-10 * max(1.0, abs(best.value))
    )
    flags = set(best.boundary_flags)
    if excluded:
        flags.add("excluded_illegal_credit")
    return OracleResult(
        argmax_price=best.argmax_price,
        value=best.value,
        boundary_flags=frozenset(flags),
        evaluations=evals,
        argmax_controls=best_ctrl,
        near_optimal_controls=near,
        excluded_controls=excluded,
    )


def _penalty_slope(p: float, scenario: TradeScenario) -> float:
    """Derivative of the expected penalty per unit of trade."""
    band = scenario.price_range
    dev = p - band.p_bar
    if dev == 0:
        return 0.0
    gap = abs(band.limit_gap(dev))
    if abs(dev) >= gap:
        return 0.0
    r = scenario.penalty.slope
    g = scenario.penalized(dev).penalty_intensity
    return math.copysign(r * g * abs(dev) ** (r - 1) / gap**r, dev)


def kkt_residuals(p: float, b: float, q: float, scenario: TradeScenario) -> KktReport:
    """First-order and Kuhn-Tucker conditions of the limited-credit Lagrangian at ``(p, b, q)``.

    The multiplier is set to the subsidiary profit, which is what the
    conditions in ``b`` and ``q`` both require.
    """
    t1, t2, tau, m = scenario.home.tax_rate, scenario.host.tax_rate, scenario.tariff, scenario.volume
    _, pi2 = division_profits(p, scenario)
    lam = pi2
    slack = t1 * b - t2 * q
    income_slope = t2 * (1 + tau) * (1 - q) - t1 * (1 - b) - tau * (1 - t1 * b)
    stationarity = income_slope * m - _penalty_slope(p, scenario) * m - lam * slack * (1 + tau) * m
    return KktReport(
        stationarity_residual=stationarity,
        multiplier=lam,
        complementary_slackness=lam * slack * (1 + tau) * m,
        primal_feasibility=credit_is_legal(pi2, t1, t2, LimitedCredit(b, q)),
        dual_feasibility=lam >= 0,
    )


def finite_difference(f: Callable[[float], float], at: float, step: float) -> float:
    """Central difference ``(f(x+h) - f(x-h)) / 2h``."""
    if not step > 0:
        raise ValueError("step must be positive")
    hi, lo = f(at + step), f(at - step)
    if not (math.isfinite(hi) and math.isfinite(lo) and math.isfinite(f(at))):
        raise NonFiniteObjective(f"non-finite value near x={at!r}")
    return (hi - lo) / (2 * step)
