"""Hedging and good-deal bid/ask pricing of illiquid credit default swaps.

The package finds the cheapest static hedge of an illiquid CDS out of
liquid market CDSs plus cash (a small linear program over discretized
default scenarios), prices the hedged position's payoff distribution
under a physical measure, and turns the two into bid/ask quotes carrying
a required expected return on the capital at risk.
"""

from .gooddeal import (
    GoodDealResult,
    PriceOutOfRangeError,
    SweepRow,
    good_deal_quote,
    lambda_from_rt,
    lmax_from_sharpe,
    price_bounds,
    price_from_lambda,
    price_from_rt,
    robustness_sweep,
    rt_from_lambda,
    rt_from_price,
    sharpe_curves,
)
from .hedging import (
    NoArbBounds,
    ScaledSolution,
    UnmatchedMaturityError,
    hedged_position,
    multi_cds_bounds,
    plain_vanilla_bounds,
    reduce_to_scaled,
    scaled_from_hedge,
    scaled_position,
    vanilla_bounds,
)
from .lattice import ConstraintSystem, build_reduced_system, build_system, corner_states
from .lp import (
    LpSolution,
    LpStatusError,
    UniquenessProbe,
    solution_residuals,
    solve_glb,
    solve_lub,
    uniqueness_probe,
)
from .market import (
    SURVIVAL,
    CdsSpec,
    DefaultScenario,
    HedgePortfolio,
    HedgedPosition,
    MarketQuote,
    TenorGrid,
    annuity,
    default_payment,
    pathwise_pv,
    portfolio_pv,
    premium_payment,
)
from .measure import (
    PhysicalMeasure,
    TabulatedRecovery,
    TruncatedNormalRecovery,
    TwoPointRecovery,
    hazard_from_pd1,
    recovery_density,
    sample_scenario,
    sample_scenarios,
    standard_recoveries,
    survival_mass,
)
from .valuation import (
    DensityCurve,
    RiskSummary,
    density,
    density_mc_oracle,
    ks_statistic,
    loss_density,
    mean_pv,
    risk_summary,
    scale_density,
)

__version__ = "0.1.0"
