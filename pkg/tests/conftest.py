"""Shared fixtures: the standard desk setup used across the suite.

5y illiquid CDS at 100 bp/yr against a 1-5y strip of 500 bp market CDSs
with the bundled upfronts, quarterly grid, r_f = 2%, PD_1 = 30%, and a
truncated-normal recovery law with mean near 20%.
"""

import numpy as np
import pytest

from cdshedge.hedging import hedged_position, multi_cds_bounds
from cdshedge.market import CdsSpec, MarketQuote, TenorGrid
from cdshedge.measure import (
    PhysicalMeasure,
    TruncatedNormalRecovery,
    hazard_from_pd1,
)

UPFRONTS_PCT = (5.25, 12.47, 18.08, 21.56, 24.05)
MARKET_SPREAD = 0.05

# Reference bound portfolios for the standard setup (published to four
# decimals; regression anchors for the LP vertex).
REF_LUB_ALPHAS = (-0.0319, -0.0342, -0.0368, -0.0395, 1.0000)
REF_LUB_DEPOSIT = 0.1720
REF_LUB_TOTAL = 0.8576
REF_GLB_ALPHAS = (-0.0403, -0.0431, -0.0462, -0.0495, 1.1791)
REF_GLB_DEPOSIT = 0.0000
REF_GLB_TOTAL = 1.0000


@pytest.fixture(scope="session")
def grid():
    return TenorGrid(n_quarters=20, quarter_length=0.25, risk_free_rate=0.02)


@pytest.fixture(scope="session")
def quotes():
    return tuple(
        MarketQuote(maturity_index=4 * (k + 1), upfront=u / 100.0, spread=MARKET_SPREAD)
        for k, u in enumerate(UPFRONTS_PCT)
    )


@pytest.fixture(scope="session")
def illiquid():
    return CdsSpec(maturity_index=20, spread=0.01, notional=1.0)


@pytest.fixture(scope="session")
def recovery20():
    return TruncatedNormalRecovery(0.15, 0.16)


@pytest.fixture(scope="session")
def measure(grid, recovery20):
    return PhysicalMeasure(hazard_from_pd1(0.30), grid.horizon, recovery20)


@pytest.fixture(scope="session")
def bounds(grid, illiquid, quotes):
    return multi_cds_bounds(grid, illiquid, quotes)


@pytest.fixture(scope="session")
def position_ask(illiquid, quotes, bounds):
    return hedged_position(illiquid, quotes, bounds.hedge_lub)


@pytest.fixture(scope="session")
def position_bid(illiquid, quotes, bounds):
    return hedged_position(illiquid, quotes, bounds.hedge_glb)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20080320)
