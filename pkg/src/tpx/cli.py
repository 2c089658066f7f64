"""Command line interface: ``tpx solve|sweep|compare-regimes|verify``.

Exit statuses: 0 success, 1 verification failure, 2 usage or input error,
3 solver error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import numpy as np

from . import verifier
from .closed_form import Boundary, host_tax_factor, optimal_deviation, regime_ordering
from .document import ParseError, ScenarioDocument, ValidationError, from_mapping, parse_scenario
from .errors import OrderingNotApplicable, TpxError, ZeroEnforcementWarning
from .model import (
    Exemption,
    ForeignTaxDeduction,
    LimitedCredit,
    ProportionalCredit,
    alpha,
    classify_case,
    division_profits,
)
from .oracle import maximize_price

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3

SWEEP_PARAMS = {
    "b": [("regime", "repatriation")],
    "q": [("regime", "credit_rate")],
    "tau": [("trade", "tariff")],
    "t1": [("home", "tax_rate")],
    "t2": [("host", "tax_rate")],
    "enforcement": [("home", "enforcement"), ("host", "enforcement")],
    "enforcement_home": [("home", "enforcement")],
    "enforcement_host": [("host", "enforcement")],
    "p_max": [("range", "p_max")],
    "p_min": [("range", "p_min")],
    "r": [("penalty", "slope")],
}
SWEEP_HEADER = ["param", "deviation", "optimal_price", "case", "boundary", "alpha", "objective"]


class UsageError(Exception):
    pass


class UnknownParameter(UsageError):
    pass


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("TPX_THREADS", "")))
    except ValueError:
        return os.cpu_count() or 1


def _load(path: str) -> ScenarioDocument:
    with open(path, "rb") as fh:
        return parse_scenario(fh.read())


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report_dict(rep) -> dict:
    return {
        "optimal_price": rep.optimal_price,
        "deviation": rep.deviation,
        "case": rep.case.value,
        "boundary": rep.boundary.value,
        "alpha_at_optimum": rep.alpha_at_optimum,
        "objective_value": rep.objective_value,
        "penalty_expectation": rep.penalty_expectation,
        "warnings": list(rep.warnings),
    }


def _closed_form(doc: ScenarioDocument):
    with warnings.catch_warnings():
        # The report carries the warning text itself.
        warnings.simplefilter("ignore", ZeroEnforcementWarning)
        return optimal_deviation(doc.scenario, doc.regime)


def _oracle_boundary(doc: ScenarioDocument, price: float) -> Boundary:
    band = doc.scenario.price_range
    if price == band.p_bar:
        return Boundary.NEUTRAL
    if price in (band.p_min, band.p_max):
        return Boundary.CORNER
    return Boundary.INTERIOR


def cmd_solve(args) -> int:
    doc = _load(args.config)
    out = {"scenario": doc.normalized}
    rep = None if args.oracle_only else _closed_form(doc)
    res = maximize_price(doc.scenario, doc.regime, doc.settings)
    out["closed_form"] = _report_dict(rep) if rep else None
    out["oracle"] = {
        "argmax_price": res.argmax_price,
        "deviation": res.argmax_price - doc.scenario.price_range.p_bar,
        "value": res.value,
        "boundary_flags": sorted(res.boundary_flags),
        "evaluations": res.evaluations,
    }
    if rep is not None:
        gap = abs(rep.optimal_price - res.argmax_price)
        out["disagreement"] = {"price": gap, "band_fraction": gap / doc.scenario.price_range.width}
    for note in rep.warnings if rep else ():
        print(f"warning: {note}", file=sys.stderr)
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def _sweep_point(base: dict, param: str, value: float, oracle_only: bool) -> List:
    data = copy.deepcopy(base)
    for section, key in SWEEP_PARAMS[param]:
        data[section][key] = value
    doc = from_mapping(data)
    if oracle_only:
        res = maximize_price(doc.scenario, doc.regime, doc.settings)
        price = res.argmax_price
        row = [
            price - doc.scenario.price_range.p_bar,
            price,
            classify_case(doc.scenario, doc.regime).value,
            _oracle_boundary(doc, price).value,
            alpha(price, doc.scenario.price_range, doc.scenario.penalty),
            res.value,
        ]
    else:
        rep = _closed_form(doc)
        row = [rep.deviation, rep.optimal_price, rep.case.value, rep.boundary.value, rep.alpha_at_optimum, rep.objective_value]
    return [value] + row


def cmd_sweep(args) -> int:
    if args.param not in SWEEP_PARAMS:
        raise UnknownParameter(f"unknown sweep parameter {args.param!r}; choose from {', '.join(SWEEP_PARAMS)}")
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    doc = _load(args.config)
    if args.param in ("b", "q") and doc.normalized["regime"]["kind"] == "exemption":
        raise UsageError(f"parameter {args.param!r} has no effect under exemption")
    if args.param == "q" and doc.normalized["regime"]["kind"] != "limited_credit":
        raise UsageError("parameter 'q' applies only to limited_credit")
    values = [float(v) for v in np.linspace(args.start, args.stop, args.steps)]
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(lambda v: _sweep_point(doc.normalized, args.param, v, args.oracle_only), values))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    writer.writerows(rows)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _recovered_home_tax(regime, t1: float, t2: float, pi2: float) -> float:
    if isinstance(regime, ProportionalCredit):
        return (t1 - min(t1, t2)) * regime.repatriation * pi2
    if isinstance(regime, LimitedCredit):
        return (t1 * regime.repatriation - t2 * regime.credit_rate) * pi2
    if isinstance(regime, ForeignTaxDeduction):
        return t1 * regime.repatriation * (1 - t2) * pi2
    return 0.0


def cmd_compare_regimes(args) -> int:
    doc = _load(args.config)
    sc = doc.scenario
    t1, t2 = sc.home.tax_rate, sc.host.tax_rate
    block = doc.normalized["regime"]
    b = block["repatriation"] if block["repatriation"] is not None else 0.0
    q = block["credit_rate"]
    if q is None:
        # Largest credit rate that stays legal.
        q = min(1.0, b * t1 / t2) if t2 > 0 else 0.0
    regimes = [Exemption(), ProportionalCredit(b), LimitedCredit(b, q), ForeignTaxDeduction(b)]
    reports = [_closed_form(ScenarioDocument(sc, reg, doc.settings, doc.normalized)) for reg in regimes]
    base_dev = reports[0].deviation

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["regime", "case", "deviation", "optimal_price", "boundary",
                     "host_tax_factor", "deviation_ratio", "recovered_home_tax"])
    for reg, rep in zip(regimes, reports):
        pi2 = division_profits(rep.optimal_price, sc)[1]
        writer.writerow([
            reg.kind,
            rep.case.value,
            rep.deviation,
            rep.optimal_price,
            rep.boundary.value,
            host_tax_factor(sc, reg),
            rep.deviation / base_dev if base_dev != 0 else math.nan,
            _recovered_home_tax(reg, t1, t2, pi2),
        ])
    _emit(buf.getvalue(), args.out)
    try:
        lim, prop, ded = regime_ordering(t1, t2, b)
        print(
            f"# LTP binds: host-tax factors limited_credit {lim!r} < proportional_credit {prop!r}"
            f" < foreign_tax_deduction {ded!r}",
            file=sys.stderr,
        )
    except OrderingNotApplicable:
        pass
    return EXIT_OK


def cmd_verify(args) -> int:
    results = verifier.run_all(args.seed, args.samples)
    _emit(verifier.format_report(results), args.out)
    failed = [r.claim_id for r in results if not r.passed]
    summary = f"{len(results) - len(failed)}/{len(results)} claims passed"
    if failed:
        summary += "; failed: " + ", ".join(failed)
    print(summary, file=sys.stderr)
    return EXIT_FAILED if failed else EXIT_OK


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tpx", description="Optimal transfer prices under tax penalties.")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="closed-form and numerical optimum for one scenario")
    solve.add_argument("--config", required=True)
    solve.add_argument("--oracle-only", action="store_true", help="skip closed forms (needed for slope <= 1)")
    solve.add_argument("--out")
    solve.set_defaults(func=cmd_solve)

    sweep = sub.add_parser("sweep", help="CSV of the optimum as one parameter varies")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--param", required=True)
    sweep.add_argument("--from", dest="start", type=float, required=True)
    sweep.add_argument("--to", dest="stop", type=float, required=True)
    sweep.add_argument("--steps", type=_positive_int, required=True)
    sweep.add_argument("--oracle-only", action="store_true")
    sweep.add_argument("--out")
    sweep.set_defaults(func=cmd_sweep)

    compare = sub.add_parser("compare-regimes", help="one row per taxation regime at shared rates")
    compare.add_argument("--config", required=True)
    compare.add_argument("--out")
    compare.set_defaults(func=cmd_compare_regimes)

    verify = sub.add_parser("verify", help="run every randomised claim check")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--samples", type=_positive_int, default=200)
    verify.add_argument("--out")
    verify.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, UsageError, OSError) as exc:
        print(f"tpx: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TpxError as exc:
        print(f"tpx: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
