"""Randomised checks of every analytic result against independent computations.

Each check draws its own scenarios from a seeded generator and returns one
:class:`ClaimResult`. Identities are compared as relative residuals; sign and
zero-crossing conditions that fail make the residual infinite.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .closed_form import (
    Boundary,
    credit_offset_repatriation,
    host_tax_factor,
    neutralizing_repatriation,
    neutralizing_tariff,
    optimal_deviation,
    regime_ordering,
    switch_over_host_rate,
)
from .errors import InvalidSampleCount
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
    classify_case,
    division_profits,
    effective_differential,
    global_net_income,
    objective,
)
from .oracle import SolveSettings, finite_difference, kkt_residuals, maximize_joint, maximize_price

RTOL_IDENTITY = 1e-9
RTOL_FD = 1e-6
FD_STEP = 1e-5
ORACLE_BAND_TOL = 1e-6
GENERAL_SLOPE_BAND_TOL = 1e-5
SLOPES = (1.5, 2.0, 3.0)
MAX_TAU = 0.3
CONTROL_POINTS = 101
# Rate pairs with small-integer ratios so the credit ridge passes through many grid points.
_RIDGE_RATIOS = (1.5, 4 / 3, 5 / 3, 1.25, 2.0)


@dataclass(frozen=True)
class ClaimResult:
    claim_id: str
    passed: bool
    residual: float
    scenario_digest: str
    tolerance: float


def _result(claim_id: str, residual: float, tolerance: float, digest: str) -> ClaimResult:
    return ClaimResult(claim_id, bool(residual <= tolerance), float(residual), digest, tolerance)


def _rel(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


# --------------------------------------------------------------------------- sampling


def _jurisdiction(rng: np.random.Generator, tax_rate: float) -> Jurisdiction:
    g = rng.uniform(0.1, 2.0)
    phi = rng.uniform(0.1, 1.0)
    return Jurisdiction(float(tax_rate), float(phi), float(g / phi))


def random_rates(rng: np.random.Generator, order: Optional[str] = None, min_gap: float = 0.01):
    """Two tax rates in [0.05, 0.45]; ``order='ltp'`` gives t2 < t1, ``'htp'`` t2 > t1."""
    while True:
        t1, t2 = (float(x) for x in rng.uniform(0.05, 0.45, 2))
        if order is None or abs(t1 - t2) >= min_gap:
            break
    if order == "ltp" and t2 > t1 or order == "htp" and t2 < t1:
        t1, t2 = t2, t1
    return t1, t2


def random_tariff(rng: np.random.Generator) -> float:
    """Zero half of the time, otherwise uniform on (0, 0.3)."""
    return 0.0 if rng.random() < 0.5 else float(rng.uniform(0.0, MAX_TAU))


def random_scenario(
    rng: np.random.Generator,
    *,
    rates: Optional[Sequence[float]] = None,
    tariff: float = 0.0,
    slope: float = 2.0,
) -> TradeScenario:
    """A valid scenario with the subsidiary profitable everywhere on the band."""
    t1, t2 = rates if rates is not None else random_rates(rng)
    p_bar = float(rng.uniform(50, 200))
    width = float(rng.uniform(2, 40))
    split = float(rng.uniform(0.25, 0.75))
    band = MarketPriceRange(p_bar - split * width, p_bar, p_bar + (1 - split) * width)
    volume = float(rng.uniform(1, 100))
    return TradeScenario(
        home=_jurisdiction(rng, t1),
        host=_jurisdiction(rng, t2),
        price_range=band,
        penalty=PenaltyModel(slope),
        volume=volume,
        baseline_profit_home=float(rng.uniform(0, 1) * p_bar * volume),
        baseline_profit_host=float(band.p_max * (1 + tariff) * volume * rng.uniform(1.05, 1.5)),
        tariff=tariff,
    )


def random_regime(rng: np.random.Generator, scenario: TradeScenario):
    """One of the four regimes with a legal credit claim when limited."""
    t1, t2 = scenario.home.tax_rate, scenario.host.tax_rate
    b = float(rng.uniform(0, 1))
    kind = int(rng.integers(4))
    if kind == 0:
        return Exemption()
    if kind == 1:
        return ProportionalCredit(b)
    if kind == 2:
        return LimitedCredit(b, float(rng.uniform(0, 1) * min(1.0, t1 * b / t2)))
    return ForeignTaxDeduction(b)


def _draw_interior(rng, samples: int, make: Callable, budget: int = 200):
    """Rejection-sample ``samples`` draws accepted by ``make`` (which returns None to reject)."""
    out, rejected = [], 0
    while len(out) < samples:
        if rejected > budget * samples:
            raise RuntimeError("scenario sampler rejected too many draws")
        item = make(rng)
        if item is None:
            rejected += 1
        else:
            out.append(item)
    return out, rejected


def _digest(n: int, rejected: int, extra: str = "") -> str:
    total = n + rejected
    text = f"n={n} excluded={rejected} ({rejected / total:.1%})" if total else "n=0"
    return f"{text} {extra}".strip()


def _with_intensity(scenario: TradeScenario, direction: float, g: float) -> TradeScenario:
    who = "host" if direction > 0 else "home"
    j = getattr(scenario, who)
    return dataclasses.replace(scenario, **{who: dataclasses.replace(j, unit_penalty=g / j.enforcement)})


def _with_gap(scenario: TradeScenario, direction: float, gap: float) -> TradeScenario:
    band = scenario.price_range
    if direction > 0:
        new = dataclasses.replace(band, p_max=band.p_bar + gap)
    else:
        new = dataclasses.replace(band, p_min=band.p_bar - gap)
    return dataclasses.replace(scenario, price_range=new)


def _interior(scenario, regime) -> bool:
    return optimal_deviation(scenario, regime).boundary is Boundary.INTERIOR


# --------------------------------------------------------------------------- checks


def check_enforcement_monotonicity(samples: int, seed: int = 0) -> ClaimResult:
    """|deviation| falls as enforcement times penalty rises, for several slopes.

    The finite-difference slope is compared with ``-|dev| / ((r-1) G)``; the
    objective's sensitivity to enforcement at the optimum is only sign-checked,
    since ``alpha*m`` can sit at the rounding floor of the objective.
    """
    rng = np.random.default_rng(seed)

    def make(rng):
        slope = SLOPES[int(rng.integers(len(SLOPES)))]
        sc = random_scenario(rng, rates=random_rates(rng, "htp" if rng.random() < 0.5 else "ltp"),
                             tariff=random_tariff(rng), slope=slope)
        rep = optimal_deviation(sc, Exemption())
        if rep.boundary is not Boundary.INTERIOR:
            return None
        direction = math.copysign(1.0, rep.deviation)
        g = sc.penalized(direction).penalty_intensity
        h = FD_STEP * g
        if not all(_interior(_with_intensity(sc, direction, g + s), Exemption()) for s in (-h, h)):
            return None
        return sc, rep, direction, g, h

    draws, rejected = _draw_interior(rng, samples, make)
    residual = 0.0
    for sc, rep, direction, g, h in draws:
        r = sc.penalty.slope
        fd = finite_difference(lambda x: abs(optimal_deviation(_with_intensity(sc, direction, x), Exemption()).deviation), g, h)
        analytic = -abs(rep.deviation) / ((r - 1) * g)
        p = rep.optimal_price
        # Affine in G, so a wide step loses nothing to truncation and avoids cancellation.
        phi_g = finite_difference(lambda x: objective(p, _with_intensity(sc, direction, x), Exemption()), g, 0.1 * g)
        if not (fd < 0 and phi_g < 0):
            return _result("enforcement_monotonicity", math.inf, RTOL_FD, _digest(len(draws), rejected))
        residual = max(residual, _rel(fd, analytic))
    return _result("enforcement_monotonicity", residual, RTOL_FD, _digest(len(draws), rejected, "r in {1.5,2,3}"))


def check_range_monotonicity(samples: int, seed: int = 0) -> ClaimResult:
    """|deviation| grows with the distance from the central price to the band limit."""
    rng = np.random.default_rng(seed)

    def make(rng):
        slope = SLOPES[int(rng.integers(len(SLOPES)))]
        sc = random_scenario(rng, rates=random_rates(rng, "htp" if rng.random() < 0.5 else "ltp"),
                             tariff=random_tariff(rng), slope=slope)
        rep = optimal_deviation(sc, Exemption())
        if rep.boundary is not Boundary.INTERIOR:
            return None
        direction = math.copysign(1.0, rep.deviation)
        gap = abs(sc.price_range.limit_gap(direction))
        h = FD_STEP * gap
        if not all(_interior(_with_gap(sc, direction, gap + s), Exemption()) for s in (-h, h)):
            return None
        return sc, rep, direction, gap, h

    draws, rejected = _draw_interior(rng, samples, make)
    residual = 0.0
    for sc, rep, direction, gap, h in draws:
        r = sc.penalty.slope
        fd = finite_difference(lambda x: abs(optimal_deviation(_with_gap(sc, direction, x), Exemption()).deviation), gap, h)
        analytic = r / (r - 1) * abs(rep.deviation) / gap
        # Scaling the gap by 4 scales |deviation| by 4 ** (r/(r-1)) while interior.
        wide = optimal_deviation(_with_gap(sc, direction, gap / 4), Exemption())
        scaling = abs(rep.deviation) / abs(wide.deviation)
        if fd <= 0:
            return _result("range_monotonicity", math.inf, RTOL_FD, _digest(len(draws), rejected))
        residual = max(residual, _rel(fd, analytic), _rel(scaling, 4 ** (r / (r - 1))))
    return _result("range_monotonicity", residual, RTOL_FD, _digest(len(draws), rejected, "r in {1.5,2,3}"))


def check_deviation_structure(samples: int, seed: int = 0) -> ClaimResult:
    """With slope 2 the deviation is linear in the tax gap and in 1/G, quadratic in the band gap."""
    rng = np.random.default_rng(seed)

    def make(rng):
        sc = random_scenario(rng, rates=random_rates(rng, "htp" if rng.random() < 0.5 else "ltp"))
        rep = optimal_deviation(sc, Exemption())
        return (sc, rep) if rep.boundary is Boundary.INTERIOR else None

    draws, rejected = _draw_interior(rng, samples, make)
    residual = 0.0
    for sc, rep in draws:
        direction = math.copysign(1.0, rep.deviation)
        t1, t2 = sc.home.tax_rate, sc.host.tax_rate
        half_gap_tax = dataclasses.replace(sc, host=dataclasses.replace(sc.host, tax_rate=t1 + 0.5 * (t2 - t1)))
        g = sc.penalized(direction).penalty_intensity
        gap = abs(sc.price_range.limit_gap(direction))
        ratios = (
            optimal_deviation(half_gap_tax, Exemption()).deviation / rep.deviation,
            optimal_deviation(_with_intensity(sc, direction, 2 * g), Exemption()).deviation / rep.deviation,
            optimal_deviation(_with_gap(sc, direction, 0.5 * gap), Exemption()).deviation / rep.deviation,
        )
        expected_tax_ratio = (half_gap_tax.host.tax_rate - t1) / (t2 - t1)
        residual = max(residual, _rel(ratios[0], expected_tax_ratio), _rel(ratios[1], 0.5), _rel(ratios[2], 0.25))
    return _result("deviation_structure", residual, RTOL_IDENTITY, _digest(len(draws), rejected, "r=2"))


def check_credit_scaling(samples: int, seed: int = 0) -> ClaimResult:
    """Proportional credit scales the LTP deviation by (1 - b) and leaves HTP untouched."""
    rng = np.random.default_rng(seed)

    def make(rng):
        sc = random_scenario(rng, rates=random_rates(rng, "ltp"))
        base = optimal_deviation(sc, ProportionalCredit(0.0))
        return (sc, base) if base.boundary is Boundary.INTERIOR else None

    draws, rejected = _draw_interior(rng, samples, make)
    residual = 0.0
    for sc, base in draws:
        b = float(rng.uniform(0, 0.95))
        ratio = optimal_deviation(sc, ProportionalCredit(b)).deviation / base.deviation
        residual = max(residual, _rel(ratio, 1 - b))
        if abs(optimal_deviation(sc, ProportionalCredit(1.0)).deviation) > 1e-12:
            return _result("credit_scaling", math.inf, RTOL_IDENTITY, "full repatriation left a deviation")
        flipped = dataclasses.replace(sc, home=sc.host, host=sc.home)
        pc, ex = optimal_deviation(flipped, ProportionalCredit(b)), optimal_deviation(flipped, Exemption())
        if pc.optimal_price != ex.optimal_price or _rel(pc.objective_value, ex.objective_value) > RTOL_IDENTITY:
            return _result("credit_scaling", math.inf, RTOL_IDENTITY, "HTP deviation depends on b")

    joint = maximize_joint(draws[0][0], ProportionalCredit, control_points=CONTROL_POINTS)
    if joint.argmax_controls[0] != 0.0:
        return _result("credit_scaling", math.inf, RTOL_IDENTITY, "joint optimum has b > 0")
    return _result("credit_scaling", residual, RTOL_IDENTITY, _digest(len(draws), rejected, "tau=0"))


@functools.lru_cache(maxsize=16)
def _joint_limited_credit(scenario: TradeScenario):
    return maximize_joint(scenario, LimitedCredit, control_points=CONTROL_POINTS)


def _joint_scenarios(samples: int, seed: int) -> List[TradeScenario]:
    """HTP scenarios with interior optima and a credit ridge that hits many grid points."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < samples:
        t1 = float(rng.uniform(0.1, 0.22))
        t2 = t1 * _RIDGE_RATIOS[len(out) % len(_RIDGE_RATIOS)]
        tariff = 0.0 if len(out) % 2 == 0 else float(rng.uniform(0.0, 0.5 * (t2 - t1) / (1 - t2)))
        sc = random_scenario(rng, rates=(t1, t2), tariff=tariff)
        if classify_case(sc, Exemption()) is ShiftCase.HTP and _interior(sc, Exemption()):
            out.append(sc)
    return out


def check_limited_credit_offset(samples: int, seed: int = 0, joint_samples: int = 2) -> ClaimResult:
    """Limited credit: full offset on the ridge b = q t2/t1, shrinkage once b > t2/t1.

    The regime differential is compared with a finite difference of net income
    in price; the joint search over (p, b, q) is run on ``joint_samples``
    scenarios, alternating between zero and positive tariffs.
    """
    rng = np.random.default_rng(seed)
    residual = 0.0
    n_ltp = n_ridge = 0
    for k in range(samples):
        tariff = random_tariff(rng)
        if k % 2 == 0:
            # LTP with forced repatriation above t2/t1 at the full credit rate.
            t1, t2 = random_rates(rng, "ltp")
            sc = random_scenario(rng, rates=(t1, t2), tariff=tariff)
            b = float(rng.uniform(t2 / t1, 1.0))
            lc, ex = LimitedCredit(b, 1.0), Exemption()
            d_lc, d_ex = effective_differential(sc, lc), effective_differential(sc, ex)
            if not abs(d_lc) < abs(d_ex):
                return _result("limited_credit_offset", math.inf, RTOL_FD, "credit limit failed to shrink LTP incentive")
            p = sc.price_range.p_bar
            h = FD_STEP * p
            fd = finite_difference(lambda x: global_net_income(x, sc, lc), p, h) / sc.volume
            residual = max(residual, abs(fd - d_lc) / max(abs(d_lc), 1e-3))
            n_ltp += 1
        else:
            t1, t2 = random_rates(rng, "htp")
            sc = random_scenario(rng, rates=(t1, t2), tariff=tariff)
            q = float(rng.uniform(0, t1 / t2))
            b = min(1.0, credit_offset_repatriation(q, t1, t2))
            on_ridge = optimal_deviation(sc, LimitedCredit(b, q))
            ex = optimal_deviation(sc, Exemption())
            residual = max(residual, _rel(on_ridge.deviation, ex.deviation), _rel(on_ridge.objective_value, ex.objective_value))
            n_ridge += 1

    for sc in _joint_scenarios(joint_samples, seed + 1):
        joint = _joint_limited_credit(sc)
        ex = maximize_price(sc, Exemption())
        t1, t2 = sc.home.tax_rate, sc.host.tax_rate
        ridge_tol = max(t1, t2) / (CONTROL_POINTS - 1)
        for b, q in joint.near_optimal_controls:
            if abs(t1 * b - t2 * q) > ridge_tol:
                return _result("limited_credit_offset", math.inf, RTOL_FD, "near-optimal control off the credit ridge")
        if _rel(joint.value, ex.value) > RTOL_IDENTITY:
            return _result("limited_credit_offset", math.inf, RTOL_FD, "joint optimum below the exemption optimum")
    digest = f"ltp_shrink={n_ltp} ridge={n_ridge} joint={joint_samples}"
    return _result("limited_credit_offset", residual, RTOL_FD, digest)


def check_deduction_repatriation(samples: int, seed: int = 0) -> ClaimResult:
    """Deduction rule: deviation rises in b at rate t1(1+tau)(1-t2) P^2 / 2G; it vanishes at b*."""
    rng = np.random.default_rng(seed)
    residual = 0.0
    band_residual = 0.0
    rejected = 0
    n = 0
    while n < samples:
        if rejected > 200 * samples:
            raise RuntimeError("scenario sampler rejected too many draws")
        tariff = random_tariff(rng)
        t1, t2 = random_rates(rng)
        sc = random_scenario(rng, rates=(t1, t2), tariff=tariff)
        b = float(rng.uniform(0.05, 0.95))
        h = FD_STEP
        reports = [optimal_deviation(sc, ForeignTaxDeduction(x)) for x in (b - h, b, b + h)]
        cases = {rep.case for rep in reports}
        b_star = neutralizing_repatriation(t1, t2, tariff)
        if any(rep.boundary is not Boundary.INTERIOR for rep in reports) or len(cases) != 1 or b_star is None:
            rejected += 1
            continue
        direction = 1.0 if reports[1].case is ShiftCase.HTP else -1.0
        g = sc.penalized(direction).penalty_intensity
        gap = sc.price_range.limit_gap(direction)
        fd = finite_difference(lambda x: optimal_deviation(sc, ForeignTaxDeduction(x)).deviation, b, h)
        analytic = t1 * (1 + tariff) * (1 - t2) * gap**2 / (2 * g)
        if fd <= 0:
            return _result("deduction_repatriation", math.inf, RTOL_FD, "deviation not increasing in b")
        residual = max(residual, _rel(fd, analytic))

        band_residual = max(band_residual, abs(optimal_deviation(sc, ForeignTaxDeduction(b_star)).deviation) / sc.price_range.width)
        if tariff == 0:
            t2_switch = switch_over_host_rate(t1, b)
            switched = dataclasses.replace(sc, host=dataclasses.replace(sc.host, tax_rate=t2_switch))
            band_residual = max(band_residual, abs(optimal_deviation(switched, ForeignTaxDeduction(b)).deviation) / sc.price_range.width)
        n += 1

    joint = maximize_joint(random_scenario(rng, rates=random_rates(rng, "ltp")), ForeignTaxDeduction, control_points=CONTROL_POINTS)
    if band_residual > 1e-9 or joint.argmax_controls[0] != 0.0:
        return _result("deduction_repatriation", math.inf, RTOL_FD, f"neutralization residual {band_residual!r}")
    return _result("deduction_repatriation", residual, RTOL_FD, _digest(n, rejected, "tau in {0, U(0,0.3)}"))


def check_regime_ordering(samples: int, seed: int = 0) -> ClaimResult:
    """Host-tax factors order limited < proportional < deduction whenever LTP binds."""
    rng = np.random.default_rng(seed)
    residual = 0.0
    for _ in range(samples):
        tariff = random_tariff(rng)
        t1, t2 = random_rates(rng, "ltp")
        b = float(rng.uniform(0.01, 1.0))
        sc = random_scenario(rng, rates=(t1, t2), tariff=tariff)
        lim, prop, ded = regime_ordering(t1, t2, b)
        if not lim < prop < ded:
            return _result("regime_ordering", math.inf, RTOL_IDENTITY, f"ordering fails at t1={t1!r} t2={t2!r} b={b!r}")
        recovered = [(prop, ProportionalCredit(b)), (ded, ForeignTaxDeduction(b))]
        q = b * t1 / t2
        if q <= 1:
            recovered.append((lim, LimitedCredit(b, q)))
        for factor, regime in recovered:
            residual = max(residual, abs(host_tax_factor(sc, regime) - factor))
        differentials = [effective_differential(sc, r) for r in (LimitedCredit(b, min(q, 1.0)), ProportionalCredit(b), ForeignTaxDeduction(b))]
        if not differentials[0] <= differentials[1] < differentials[2]:
            return _result("regime_ordering", math.inf, RTOL_IDENTITY, "regime differentials out of order")
    return _result("regime_ordering", residual, RTOL_IDENTITY, f"n={samples} tau in {{0, U(0,0.3)}}")


def check_tariff_neutrality(samples: int, seed: int = 0) -> ClaimResult:
    """Under exemption the case flips from HTP to LTP exactly at tau = (t2 - t1)/(1 - t2)."""
    rng = np.random.default_rng(seed)
    residual = 0.0
    for _ in range(samples):
        t1, t2 = random_rates(rng, "htp")
        sc = random_scenario(rng, rates=(t1, t2))
        tau_star = neutralizing_tariff(t1, t2)
        if classify_case(dataclasses.replace(sc, tariff=tau_star), Exemption()) is not ShiftCase.NEUTRAL:
            return _result("tariff_neutrality", math.inf, 1e-9, "not neutral at the neutralizing tariff")
        lo, hi = 0.0, 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            case = classify_case(dataclasses.replace(sc, tariff=mid), Exemption())
            if case is ShiftCase.NEUTRAL:
                lo = hi = mid
                break
            if case is ShiftCase.HTP:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        residual = max(residual, abs(0.5 * (lo + hi) - tau_star))
    return _result("tariff_neutrality", residual, 1e-9, f"n={samples}")


def _agreement(claim_id: str, samples: int, seed: int, slopes, tolerance: float) -> ClaimResult:
    rng = np.random.default_rng(seed)

    def make(rng):
        slope = slopes[int(rng.integers(len(slopes)))]
        sc = random_scenario(rng, tariff=random_tariff(rng), slope=slope)
        regime = random_regime(rng, sc)
        rep = optimal_deviation(sc, regime)
        return (sc, regime, rep) if rep.boundary is Boundary.INTERIOR else None

    draws, rejected = _draw_interior(rng, samples, make)
    residual = 0.0
    settings = SolveSettings()
    for sc, regime, rep in draws:
        res = maximize_price(sc, regime, settings)
        residual = max(residual, abs(res.argmax_price - rep.optimal_price) / sc.price_range.width)
    slopes_txt = ",".join(f"{s:g}" for s in slopes)
    return _result(claim_id, residual, tolerance, _digest(len(draws), rejected, f"r in {{{slopes_txt}}} all regimes"))


def check_oracle_agreement(samples: int, seed: int = 0) -> ClaimResult:
    """Closed-form optimal price equals the numerical argmax (slope 2), in band-width units."""
    return _agreement("oracle_agreement", samples, seed, (2.0,), ORACLE_BAND_TOL)


def check_general_slope_agreement(samples: int, seed: int = 0) -> ClaimResult:
    return _agreement("general_slope_agreement", samples, seed, SLOPES, GENERAL_SLOPE_BAND_TOL)


def check_kkt(samples: int, seed: int = 0, joint_samples: int = 2) -> ClaimResult:
    """Kuhn-Tucker conditions at joint limited-credit optima and at closed-form ridge optima.

    The residual is the stationarity error in units of trade volume; a
    negative multiplier with positive subsidiary profit, or complementary
    slackness above 1e-9*m*max(t1,t2), fails the claim.
    """
    rng = np.random.default_rng(seed)
    residual = 0.0

    def violates(p, b, q, sc):
        rep = kkt_residuals(p, b, q, sc)
        t1, t2, m = sc.home.tax_rate, sc.host.tax_rate, sc.volume
        pi2 = division_profits(p, sc)[1]
        ok = (
            rep.primal_feasibility
            and (rep.dual_feasibility and rep.multiplier > 0 if pi2 > 0 else True)
            and abs(rep.complementary_slackness) <= 1e-9 * m * max(t1, t2)
        )
        return not ok, abs(rep.stationarity_residual) / m

    for sc in _joint_scenarios(joint_samples, seed + 1):
        joint = _joint_limited_credit(sc)
        for b, q in joint.near_optimal_controls:
            bad, stationarity = violates(joint.argmax_price, b, q, sc)
            if bad:
                return _result("kkt", math.inf, 1e-6, "Kuhn-Tucker condition fails at joint optimum")
            residual = max(residual, stationarity)

    n = 0
    while n < samples:
        t1, t2 = random_rates(rng, "htp")
        sc = random_scenario(rng, rates=(t1, t2), tariff=random_tariff(rng))
        q = float(rng.uniform(0, t1 / t2))
        b = min(1.0, credit_offset_repatriation(q, t1, t2))
        rep = optimal_deviation(sc, LimitedCredit(b, q))
        if rep.boundary is not Boundary.INTERIOR:
            continue
        bad, stationarity = violates(rep.optimal_price, b, q, sc)
        if bad or stationarity > 1e-9:
            return _result("kkt", math.inf, 1e-6, "Kuhn-Tucker condition fails at closed-form optimum")
        n += 1
    return _result("kkt", residual, 1e-6, f"joint={joint_samples} closed_form={samples}")


CHECKS = (
    check_oracle_agreement,
    check_general_slope_agreement,
    check_deviation_structure,
    check_enforcement_monotonicity,
    check_range_monotonicity,
    check_credit_scaling,
    check_limited_credit_offset,
    check_deduction_repatriation,
    check_regime_ordering,
    check_tariff_neutrality,
    check_kkt,
)


def run_all(seed: int, samples_per_claim: int) -> List[ClaimResult]:
    if samples_per_claim < 1:
        raise InvalidSampleCount(f"samples per claim must be >= 1, got {samples_per_claim}")
    children = np.random.SeedSequence(seed).generate_state(len(CHECKS))
    return [check(samples_per_claim, int(s)) for check, s in zip(CHECKS, children)]


def format_report(results: Sequence[ClaimResult]) -> str:
    lines = ["claim_id\tpassed\tresidual\ttolerance\tscenario"]
    for r in results:
        lines.append(f"{r.claim_id}\t{'pass' if r.passed else 'FAIL'}\t{r.residual!r}\t{r.tolerance!r}\t{r.scenario_digest}")
    return "\n".join(lines) + "\n"
