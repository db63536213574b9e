"""Good-deal bid/ask prices built on the bound hedges.

The dealer prices between the no-arbitrage bound V and the zero-profit
price by rebating a share ``lam`` of the hedged position's expected
payoff:

    price(lam) = V - side * lam * mean_pv,     0 <= lam <= 1,

side +1 for the ask (dealer sells protection, hedged short) and -1 for
the bid.  The rebate share maps one-to-one onto the expected return on
capital at risk, r_t = (1 - lam) / lam, with capital at risk
l_max = lam * mean_pv, and onto the effective Sharpe ratio
s_r = r_t / l_max.  All the conversions here are elementary algebra on
those three parameterizations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import hedging, valuation
from .market import CdsSpec, MarketQuote, TenorGrid
from .measure import PhysicalMeasure, RecoverySpec, hazard_from_pd1


class PriceOutOfRangeError(ValueError):
    """Price sits at or beyond the potentially acceptable range."""


def _check_side(side: int) -> None:
    if side not in (+1, -1):
        raise ValueError("side must be +1 (ask) or -1 (bid)")


def price_bounds(side: int, v_bound: float, mean_pv: float) -> tuple[float, float]:
    """(u_min, u_max) of the potentially acceptable price range."""
    _check_side(side)
    if side == +1:
        return v_bound - mean_pv, v_bound
    return v_bound, v_bound + mean_pv


def price_from_lambda(side: int, v_bound: float, mean_pv: float, lam: float) -> float:
    """Price at rebate share ``lam``; lam = 0 sits on the no-arbitrage bound."""
    _check_side(side)
    if not 0.0 <= lam <= 1.0:
        raise ValueError("rebate share must lie in [0, 1]")
    return v_bound - side * lam * mean_pv


def rt_from_lambda(lam: float) -> float:
    """Expected return on capital at risk for rebate share lam in (0, 1].

    lam = 0 returns math.inf (the no-arbitrage-bound limit).
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("rebate share must lie in [0, 1]")
    if lam == 0.0:
        return math.inf
    return (1.0 - lam) / lam


def lambda_from_rt(r_t: float) -> float:
    """Inverse of :func:`rt_from_lambda`; r_t = inf maps to lam = 0."""
    if r_t < 0.0:
        raise ValueError("expected return must be non-negative")
    if math.isinf(r_t):
        return 0.0
    return 1.0 / (1.0 + r_t)


def price_from_rt(side: int, v_bound: float, mean_pv: float, r_t: float) -> float:
    """Price at a required expected return on capital at risk."""
    u_min, u_max = price_bounds(side, v_bound, mean_pv)
    if math.isinf(r_t):
        return u_max if side == +1 else u_min
    if side == +1:
        return u_min + (u_max - u_min) * r_t / (1.0 + r_t)
    return u_min + (u_max - u_min) / (1.0 + r_t)


def rt_from_price(side: int, v_bound: float, mean_pv: float, price: float) -> float:
    """Expected return at a quoted price strictly inside the acceptable range."""
    u_min, u_max = price_bounds(side, v_bound, mean_pv)
    if not u_min < price < u_max:
        raise PriceOutOfRangeError(
            f"price {price} outside the open range ({u_min}, {u_max}); "
            "expected profit is non-positive there"
        )
    if side == +1:
        return (price - u_min) / (u_max - price)
    return (u_max - price) / (price - u_min)


@dataclass(frozen=True)
class SharpePoint:
    """Return, rebate share, capital at risk, and effective Sharpe ratio."""

    r_t: float
    lam: float
    l_max: float
    s_r: float


def sharpe_curves(side: int, v_bound: float, mean_pv: float, price: float) -> SharpePoint:
    """Risk/return coordinates of one quoted price."""
    r_t = rt_from_price(side, v_bound, mean_pv, price)
    lam = lambda_from_rt(r_t)
    l_max = lam * mean_pv
    s_r = math.inf if l_max == 0.0 else r_t / l_max
    return SharpePoint(r_t=r_t, lam=lam, l_max=l_max, s_r=s_r)


def lmax_from_sharpe(s_r: float, mean_pv: float) -> float:
    """Capital at risk implied by an effective Sharpe ratio.

    Positive root of s_r * l^2 + l - mean_pv = 0; the s_r -> 0 limit is
    mean_pv itself.
    """
    if s_r < 0.0:
        raise ValueError("Sharpe ratio must be non-negative")
    if mean_pv < 0.0:
        raise ValueError("mean PV must be non-negative")
    if s_r == 0.0:
        return mean_pv
    return (math.sqrt(1.0 + 4.0 * s_r * mean_pv) - 1.0) / (2.0 * s_r)


@dataclass(frozen=True)
class GoodDealResult:
    """One side's good-deal quote with its risk coordinates."""

    side: int
    v_bound: float
    mean_pv: float
    u_min: float
    u_max: float
    lam: float
    r_t: float
    price: float
    l_max: float
    s_r: float


def good_deal_quote(side: int, v_bound: float, mean_pv: float, r_t: float) -> GoodDealResult:
    """Assemble the full quote record for one side at a required return."""
    if r_t < 0.0:
        raise ValueError("expected return must be non-negative")
    u_min, u_max = price_bounds(side, v_bound, mean_pv)
    lam = lambda_from_rt(r_t)
    price = price_from_lambda(side, v_bound, mean_pv, lam)
    l_max = lam * mean_pv
    s_r = math.inf if l_max == 0.0 else r_t / l_max
    return GoodDealResult(
        side=side,
        v_bound=v_bound,
        mean_pv=mean_pv,
        u_min=u_min,
        u_max=u_max,
        lam=lam,
        r_t=r_t,
        price=price,
        l_max=l_max,
        s_r=s_r,
    )


@dataclass(frozen=True)
class SweepRow:
    """One cell of a robustness sweep over the physical measure."""

    pd1: float
    recovery_label: str
    bid: float
    ask: float


def robustness_sweep(
    grid: TenorGrid,
    illiquid: CdsSpec,
    quotes: tuple[MarketQuote, ...],
    pd1_grid,
    recovery_specs: dict[str, RecoverySpec],
    r_t: float,
) -> list[SweepRow]:
    """Bid/ask prices across default probabilities and recovery laws.

    The hedges derive from market prices only, so they are built once and
    held fixed; each cell re-prices the same hedged positions under its
    own measure.  Rows follow the input grid order.
    """
    bounds = hedging.multi_cds_bounds(grid, illiquid, quotes)
    pos_ask = hedging.hedged_position(illiquid, quotes, bounds.hedge_lub)
    pos_bid = hedging.hedged_position(illiquid, quotes, bounds.hedge_glb)
    rows = []
    for pd1 in pd1_grid:
        hazard = hazard_from_pd1(float(pd1))
        for label, spec in recovery_specs.items():
            measure = PhysicalMeasure(hazard, grid.horizon, spec)
            mean_ask = valuation.mean_pv(grid, pos_ask, measure)
            mean_bid = valuation.mean_pv(grid, pos_bid, measure)
            ask = price_from_rt(+1, bounds.v_lub, mean_ask, r_t)
            bid = price_from_rt(-1, bounds.v_glb, mean_bid, r_t)
            rows.append(SweepRow(pd1=float(pd1), recovery_label=label, bid=bid, ask=ask))
    return rows
