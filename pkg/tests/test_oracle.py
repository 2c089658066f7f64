import dataclasses

import pytest

from tpx.closed_form import credit_offset_repatriation, optimal_deviation
from tpx.errors import LimitedCreditConstraintViolated
from tpx.model import (
    Exemption,
    ForeignTaxDeduction,
    LimitedCredit,
    ProportionalCredit,
    objective,
)
from tpx.oracle import (
    SolveSettings,
    finite_difference,
    golden_section_max,
    kkt_residuals,
    maximize_joint,
    maximize_price,
)

from conftest import make_scenario


class TestGoldenSection:
    def test_parabola(self):
        x, fx, n = golden_section_max(lambda x: -(x - 1.3) ** 2, 0.0, 4.0, 1e-10)
        assert x == pytest.approx(1.3, abs=1e-9)
        assert fx == pytest.approx(0.0, abs=1e-18)
        assert n > 2

    def test_monotone_goes_to_edge(self):
        x, _, _ = golden_section_max(lambda x: x, 0.0, 1.0, 1e-10)
        assert x == pytest.approx(1.0, abs=1e-9)


class TestMaximizePrice:
    def test_neutral_exact_center(self):
        sc = make_scenario(t1=0.3, t2=0.3)
        for n in (1000, 4096, 5001):
            res = maximize_price(sc, Exemption(), SolveSettings(grid_points=n))
            assert res.argmax_price == 100.0
            assert "center" in res.boundary_flags

    def test_eq5(self, eq5):
        res = maximize_price(eq5, Exemption())
        assert abs(res.argmax_price - 108.33333333333333) <= 1e-6 * 20
        assert res.value == pytest.approx(objective(res.argmax_price, eq5, Exemption()), rel=1e-15)
        assert res.evaluations > 4096

    def test_source_principle_tariff(self):
        sc = make_scenario(t1=0.25, t2=0.3, g1=0.5, tariff=0.1)
        assert abs(maximize_price(sc, Exemption()).argmax_price - 98.0) <= 1e-6 * 20

    def test_corner_flag(self):
        sc = make_scenario(t1=0.05, t2=0.45, g2=0.1)
        res = maximize_price(sc, Exemption())
        assert res.argmax_price == 110.0
        assert res.boundary_flags == {"upper_edge"}

    def test_domain(self, eq5):
        res = maximize_price(eq5, Exemption(), SolveSettings(domain=(100.0, 105.0)))
        assert res.argmax_price == 105.0
        assert "upper_edge" in res.boundary_flags

    def test_domain_outside_band_needs_widen(self, eq5):
        with pytest.raises(ValueError):
            maximize_price(eq5, Exemption(), SolveSettings(domain=(80.0, 120.0)))
        res = maximize_price(eq5, Exemption(), SolveSettings(domain=(80.0, 120.0), widen=True))
        assert res.argmax_price == 120.0

    def test_propagates_illegal_credit(self):
        sc = make_scenario(t1=0.2, t2=0.3)
        with pytest.raises(LimitedCreditConstraintViolated):
            maximize_price(sc, LimitedCredit(0.2, 1.0))

    def test_slope_below_one_grid_only(self):
        sc = make_scenario(slope=0.5)
        res = maximize_price(sc, Exemption())
        assert 90.0 <= res.argmax_price <= 110.0
        assert res.evaluations == 4096 + 1

    @pytest.mark.parametrize("grid_points", [999, 10])
    def test_settings_validation(self, grid_points):
        with pytest.raises(ValueError):
            SolveSettings(grid_points=grid_points)

    def test_bad_tolerance(self):
        with pytest.raises(ValueError):
            SolveSettings(refine_tolerance=0.0)


class TestMaximizeJoint:
    def test_proportional_credit_prefers_no_repatriation(self):
        sc = make_scenario(t1=0.35, t2=0.25)
        res = maximize_joint(sc, ProportionalCredit)
        assert res.argmax_controls[0] == 0.0

    def test_deduction_prefers_no_repatriation(self):
        sc = make_scenario(t1=0.3, t2=0.2)
        assert maximize_joint(sc, "foreign_tax_deduction").argmax_controls[0] == 0.0

    @pytest.mark.slow
    @pytest.mark.parametrize("tariff", [0.0, 0.05])
    def test_limited_credit_ridge(self, tariff):
        sc = make_scenario(t1=0.2, t2=0.3, tariff=tariff)
        res = maximize_joint(sc, LimitedCredit)
        ex = maximize_price(sc, Exemption())
        assert res.value == pytest.approx(ex.value, rel=1e-9)
        assert res.near_optimal_controls
        for b, q in res.near_optimal_controls:
            assert abs(0.2 * b - 0.3 * q) <= 0.01 * 0.3
        assert (0.75, 0.5) in res.near_optimal_controls
        assert res.excluded_controls > 0
        assert "excluded_illegal_credit" in res.boundary_flags

    def test_rejects_exemption(self, eq5):
        with pytest.raises(ValueError):
            maximize_joint(eq5, Exemption)

    def test_coarse_control_grid_rejected(self, eq5):
        with pytest.raises(ValueError):
            maximize_joint(eq5, ProportionalCredit, control_points=11)

    def test_loss_making_subsidiary_flips_legality(self):
        # With pi2 < 0 on the whole band the limit reads t1*b <= t2*q.
        sc = make_scenario(t1=0.2, t2=0.3, k2=0.0)
        res = maximize_joint(sc, LimitedCredit)
        b, q = res.argmax_controls
        assert 0.2 * b <= 0.3 * q + 1e-12


class TestKkt:
    def _ridge_optimum(self, tariff=0.0):
        sc = make_scenario(t1=0.2, t2=0.3, tariff=tariff)
        q = 0.5
        b = credit_offset_repatriation(q, 0.2, 0.3)
        p = optimal_deviation(sc, LimitedCredit(b, q)).optimal_price
        return sc, p, b, q

    @pytest.mark.parametrize("tariff", [0.0, 0.1])
    def test_stationary_on_ridge(self, tariff):
        sc, p, b, q = self._ridge_optimum(tariff)
        rep = kkt_residuals(p, b, q, sc)
        assert abs(rep.stationarity_residual) <= 1e-9 * sc.volume
        assert rep.complementary_slackness == pytest.approx(0.0, abs=1e-12)
        assert rep.primal_feasibility and rep.dual_feasibility
        assert rep.multiplier > 0

    def test_off_ridge_slack(self):
        sc, p, b, q = self._ridge_optimum()
        rep = kkt_residuals(p, b + 0.1, q, sc)
        assert rep.primal_feasibility
        assert abs(rep.complementary_slackness) > 1e-3
        assert abs(rep.stationarity_residual) > 1e-3

    def test_infeasible_point(self):
        sc, p, b, q = self._ridge_optimum()
        assert not kkt_residuals(p, b - 0.2, q, sc).primal_feasibility


class TestFiniteDifference:
    def test_square(self):
        assert finite_difference(lambda x: x * x, 3.0, 1e-4) == pytest.approx(6.0, abs=1e-7)

    def test_bad_step(self):
        with pytest.raises(ValueError):
            finite_difference(lambda x: x, 0.0, 0.0)

    def test_deviation_falls_with_enforcement(self, eq5):
        def dev(g):
            host = dataclasses.replace(eq5.host, unit_penalty=g / eq5.host.enforcement)
            return optimal_deviation(dataclasses.replace(eq5, host=host), Exemption()).deviation

        assert finite_difference(dev, 0.6, 1e-5) < 0

    def test_deviation_rises_with_band(self, eq5):
        def dev(gap):
            band = dataclasses.replace(eq5.price_range, p_max=100.0 + gap)
            return optimal_deviation(dataclasses.replace(eq5, price_range=band), Exemption()).deviation

        assert finite_difference(dev, 10.0, 1e-4) > 0

    def test_r3_slope_in_g(self):
        sc = make_scenario(g2=0.5, slope=3.0)

        def dev(g):
            host = dataclasses.replace(sc.host, unit_penalty=g / sc.host.enforcement)
            return optimal_deviation(dataclasses.replace(sc, host=host), Exemption()).deviation

        d = dev(0.5)
        assert finite_difference(dev, 0.5, 1e-6) == pytest.approx(-d / (2 * 0.5), rel=1e-6)
