import pytest

from tpx.model import Jurisdiction, MarketPriceRange, PenaltyModel, TradeScenario


def make_scenario(t1=0.25, t2=0.35, g1=0.6, g2=0.6, band=(90.0, 100.0, 110.0), slope=2.0,
                  volume=10.0, k1=500.0, k2=2000.0, tariff=0.0):
    """Scenario with penalty intensities given directly (enforcement 0.5)."""
    return TradeScenario(
        home=Jurisdiction(t1, 0.5, g1 / 0.5),
        host=Jurisdiction(t2, 0.5, g2 / 0.5),
        price_range=MarketPriceRange(*band),
        penalty=PenaltyModel(slope),
        volume=volume,
        baseline_profit_home=k1,
        baseline_profit_host=k2,
        tariff=tariff,
    )


@pytest.fixture
def eq5():
    # Exemption, t1=0.25, t2=0.35, G=0.6 on both sides, band 90/100/110.
    return make_scenario()
