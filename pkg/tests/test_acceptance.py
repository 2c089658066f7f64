"""Acceptance criteria 1-10, each at its stated tolerance and sample count.

Every test prints one ``[criterion N] PASS|FAIL`` line (capture disabled so the
line shows in plain ``pytest`` runs too).
"""

import subprocess
import sys
import time

import pytest

from tpx import verifier

SEED = 42


@pytest.fixture
def report(capsys):
    def emit(number, title, passed, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if passed else 'FAIL'} {title}: {detail}")
    return emit


def _claim(res):
    return f"residual={res.residual!r} tolerance={res.tolerance!r} ({res.scenario_digest})"


def test_criterion_01_closed_form_matches_oracle(report):
    start = time.perf_counter()
    res = verifier.check_oracle_agreement(1000, SEED)
    elapsed = time.perf_counter() - start
    ok = res.passed and res.tolerance == 1e-6 and elapsed < 60
    report(1, "closed form vs oracle, 1000 interior samples", ok, f"{_claim(res)} runtime={elapsed:.1f}s")
    assert res.passed
    assert elapsed < 60


def test_criterion_02_deviation_structure(report):
    res = verifier.check_deviation_structure(200, SEED)
    report(2, "linear in tax gap and 1/G, quadratic in band gap", res.passed, _claim(res))
    assert res.passed and res.tolerance == 1e-9


def test_criterion_03_proportional_credit_scaling(report):
    res = verifier.check_credit_scaling(200, SEED)
    report(3, "proportional credit scales LTP deviation by (1-b)", res.passed, _claim(res))
    assert res.passed and res.tolerance == 1e-9


def test_criterion_04_limited_credit_full_offset(report):
    res = verifier.check_limited_credit_offset(200, SEED)
    report(4, "joint limited-credit optimum equals exemption on the ridge", res.passed, _claim(res))
    assert res.passed


def test_criterion_05_deduction_slope_and_neutralization(report):
    res = verifier.check_deduction_repatriation(200, SEED)
    report(5, "deduction slope in b and zero at b*", res.passed, _claim(res))
    assert res.passed and res.tolerance == 1e-6


def test_criterion_06_regime_ordering(report):
    res = verifier.check_regime_ordering(500, SEED)
    report(6, "limited < proportional < deduction when LTP binds", res.passed, _claim(res))
    assert res.passed


def test_criterion_07_tariff_neutrality(report):
    res = verifier.check_tariff_neutrality(200, SEED)
    report(7, "case flips exactly at the neutralizing tariff", res.passed, _claim(res))
    assert res.passed and res.tolerance == 1e-9


def test_criterion_08_general_slope_signs(report):
    results = [
        verifier.check_enforcement_monotonicity(300, SEED),
        verifier.check_range_monotonicity(300, SEED),
        verifier.check_general_slope_agreement(300, SEED),
    ]
    ok = all(r.passed for r in results)
    detail = "; ".join(f"{r.claim_id} {_claim(r)}" for r in results)
    report(8, "signs in G and band gap, general-slope oracle agreement", ok, detail)
    assert ok
    assert results[2].tolerance == 1e-5


@pytest.mark.slow
def test_criterion_09_kuhn_tucker(report):
    res = verifier.check_kkt(200, SEED)
    report(9, "Kuhn-Tucker conditions at joint limited-credit optima", res.passed, _claim(res))
    assert res.passed and res.tolerance == 1e-6


def test_criterion_10_verify_is_deterministic(report):
    cmd = [sys.executable, "-m", "tpx", "verify", "--seed", "7", "--samples", "500"]
    first = subprocess.run(cmd, capture_output=True, timeout=600)
    second = subprocess.run(cmd, capture_output=True, timeout=600)
    same = first.stdout == second.stdout and len(first.stdout) > 0
    report(10, "verify --seed 7 twice is byte-identical", same,
           f"{len(first.stdout)} bytes, exit {first.returncode}/{second.returncode}")
    assert same
    assert first.returncode == second.returncode == 0
