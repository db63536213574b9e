"""Hedge construction: multi-CDS and single-CDS bound portfolios.

Three hedge families are exposed:

* ``multi_cds_bounds``: the general bound portfolios over the whole quote
  set, found by linear programming.
* ``vanilla_bounds``: the same optimization restricted to the single
  market CDS sharing the illiquid maturity.
* ``plain_vanilla_bounds``: the industry hedge with the market-CDS
  notional pinned at exactly offsetting; only the deposit is optimized,
  which has a closed form, so no LP is needed.

When a market CDS shares the illiquid maturity, dividing the hedged
position by the spread gap W = |w_market - w_illiquid| produces a reduced
problem whose solution depends only on the sign product sigma * mu; the
helpers at the bottom move between the full and reduced parameterizations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lattice, lp
from .market import (
    CdsSpec,
    HedgePortfolio,
    HedgedPosition,
    MarketQuote,
    TenorGrid,
    annuity,
)


class UnmatchedMaturityError(ValueError):
    """No market quote shares the illiquid CDS maturity."""


@dataclass(frozen=True)
class NoArbBounds:
    """Arbitrage-free price bounds and the portfolios enforcing them.

    ``hedge_lub`` is the portfolio the dealer buys against an acquired
    short-protection contract; ``hedge_glb`` is the portfolio shorted
    against an acquired long-protection contract (stored as shorted, i.e.
    its deposit and notionals are the amounts sold).
    """

    v_lub: float
    v_glb: float
    hedge_lub: HedgePortfolio
    hedge_glb: HedgePortfolio
    solution_lub: lp.LpSolution | None = None
    solution_glb: lp.LpSolution | None = None

    def __post_init__(self):
        if self.v_glb > self.v_lub + 1e-9:
            raise ArithmeticError(
                f"bid bound {self.v_glb} exceeds ask bound {self.v_lub}"
            )


@dataclass(frozen=True)
class ScaledSolution:
    """Solution of the spread-gap-free reduced hedge problem.

    ``v_prime`` holds the reduced notionals and deposit; it depends on the
    product ``sigma_mu`` but not on the gap W.  The full bound price is
    recovered as sigma * W * (c . v_prime) + matched upfront.
    """

    v_prime: np.ndarray
    sigma: int
    mu: int
    sigma_mu: int
    w_diff: float
    u_match: float
    objective_prime: float

    def bound_value(self, w_diff: float | None = None) -> float:
        w = self.w_diff if w_diff is None else w_diff
        return self.sigma * w * self.objective_prime + self.u_match


def _solve_both_sides(grid, unit_illiquid, quotes):
    sys_ask = lattice.build_system(grid, unit_illiquid, quotes, +1)
    sys_bid = lattice.build_system(grid, unit_illiquid, quotes, -1)
    sol_ask = lp.solve_lub(sys_ask)
    if not sol_ask.optimal:
        raise lp.LpStatusError(sol_ask.status, +1)
    sol_bid = lp.solve_glb(sys_bid)
    if not sol_bid.optimal:
        raise lp.LpStatusError(sol_bid.status, -1)
    return sol_ask, sol_bid


def multi_cds_bounds(
    grid: TenorGrid, illiquid: CdsSpec, quotes: tuple[MarketQuote, ...]
) -> NoArbBounds:
    """Bound prices and portfolios over the full quote set.

    Solved per unit illiquid notional and scaled by |notional|; the sign
    of the illiquid notional is irrelevant because both sides are priced.
    """
    if not quotes:
        raise ValueError("quote set is empty")
    scale = abs(illiquid.notional)
    unit = CdsSpec(illiquid.maturity_index, illiquid.spread, 1.0)
    sol_ask, sol_bid = _solve_both_sides(grid, unit, quotes)
    v_ask = scale * sol_ask.variables
    v_bid = scale * sol_bid.variables
    return NoArbBounds(
        v_lub=scale * sol_ask.objective,
        v_glb=scale * sol_bid.objective,
        hedge_lub=HedgePortfolio(tuple(v_ask[:-1]), float(v_ask[-1]), +1),
        hedge_glb=HedgePortfolio(tuple(v_bid[:-1]), float(v_bid[-1]), -1),
        solution_lub=sol_ask,
        solution_glb=sol_bid,
    )


def _matched_quote(illiquid: CdsSpec, quotes: tuple[MarketQuote, ...]) -> int:
    for p, quote in enumerate(quotes):
        if quote.maturity_index == illiquid.maturity_index:
            return p
    raise UnmatchedMaturityError(
        f"no quote at maturity index {illiquid.maturity_index}"
    )


def vanilla_bounds(grid: TenorGrid, illiquid: CdsSpec, quote: MarketQuote) -> NoArbBounds:
    """Bound portfolios restricted to the maturity-matched market CDS.

    The optimizer chooses both the single notional and the deposit; for
    typical inputs it lands on the exactly offsetting notional, but other
    parameter sets may not, which is what distinguishes this from
    :func:`plain_vanilla_bounds`.
    """
    if quote.maturity_index != illiquid.maturity_index:
        raise UnmatchedMaturityError("vanilla hedge needs a maturity-matched quote")
    return multi_cds_bounds(grid, illiquid, (quote,))


def plain_vanilla_bounds(grid: TenorGrid, illiquid: CdsSpec, quote: MarketQuote) -> NoArbBounds:
    """Closed-form bounds with the market-CDS notional pinned at offsetting.

    With the loss legs cancelling exactly, the reduced payoff is
    deposit' - sigma*mu * annuity(tau), so the smallest feasible deposit
    is the full annuity on the sigma*mu = + side and zero on the - side.
    """
    if quote.maturity_index != illiquid.maturity_index:
        raise UnmatchedMaturityError("plain-vanilla hedge needs a maturity-matched quote")
    scale = abs(illiquid.notional)
    w_diff = abs(quote.spread - illiquid.spread)
    mu = +1 if quote.spread >= illiquid.spread else -1
    full_annuity = annuity(grid, illiquid.maturity_index)
    deposit_prime = {+1: full_annuity, -1: 0.0}
    v_lub = scale * (w_diff * deposit_prime[+1 * mu] + quote.upfront)
    v_glb = scale * (-w_diff * deposit_prime[-1 * mu] + quote.upfront)
    hedge_lub = HedgePortfolio((scale,), scale * w_diff * deposit_prime[+1 * mu], +1)
    # stored as the shorted portfolio: negate the position deposit
    hedge_glb = HedgePortfolio((scale,), -scale * w_diff * deposit_prime[-1 * mu], -1)
    return NoArbBounds(v_lub=v_lub, v_glb=v_glb, hedge_lub=hedge_lub, hedge_glb=hedge_glb)


def reduce_to_scaled(
    grid: TenorGrid,
    illiquid: CdsSpec,
    quotes: tuple[MarketQuote, ...],
    sigma: int,
) -> ScaledSolution:
    """Solve the reduced problem for one side of the market.

    Requires a quote at the illiquid maturity.  The reduced portfolio is
    independent of the spread gap; only sigma * mu enters.
    """
    if sigma not in (+1, -1):
        raise ValueError("sigma must be +1 or -1")
    p_match = _matched_quote(illiquid, quotes)
    matched = quotes[p_match]
    w_diff = abs(matched.spread - illiquid.spread)
    mu = +1 if matched.spread >= illiquid.spread else -1
    system = lattice.build_reduced_system(
        grid, quotes, illiquid.maturity_index, sigma * mu
    )
    sol = lp.solve_lub(system)
    if not sol.optimal:
        raise lp.LpStatusError(sol.status, sigma)
    return ScaledSolution(
        v_prime=sol.variables,
        sigma=sigma,
        mu=mu,
        sigma_mu=sigma * mu,
        w_diff=w_diff,
        u_match=matched.upfront,
        objective_prime=sol.objective,
    )


def scaled_from_hedge(
    illiquid: CdsSpec,
    quotes: tuple[MarketQuote, ...],
    hedge: HedgePortfolio,
) -> np.ndarray:
    """Map a full bound portfolio to reduced coordinates.

    Inverse of the W-scaling: divides everything by the spread gap after
    removing the offsetting unit of the maturity-matched CDS.
    """
    p_match = _matched_quote(illiquid, quotes)
    w_diff = abs(quotes[p_match].spread - illiquid.spread)
    if w_diff == 0.0:
        raise ValueError("reduced coordinates are undefined at zero spread gap")
    v = np.append(hedge.alphas, hedge.deposit).astype(float)
    if hedge.side == -1:
        v = -v
    v[p_match] -= hedge.side
    return v / w_diff


def hedged_position(
    illiquid: CdsSpec,
    quotes: tuple[MarketQuote, ...],
    hedge: HedgePortfolio,
) -> HedgedPosition:
    """The dealer's book after taking over the illiquid CDS and hedging.

    Side +1: short the illiquid contract, hold the hedge as stored.
    Side -1: long the illiquid contract, short the stored hedge.
    """
    if len(hedge.alphas) != len(quotes):
        raise ValueError("hedge and quote set have different lengths")
    flip = 1.0 if hedge.side == +1 else -1.0
    legs = [
        CdsSpec(q.maturity_index, q.spread, flip * a)
        for a, q in zip(hedge.alphas, quotes)
        if a != 0.0
    ]
    legs.append(
        CdsSpec(illiquid.maturity_index, illiquid.spread, -hedge.side * abs(illiquid.notional))
    )
    return HedgedPosition(deposit=flip * hedge.deposit, legs=tuple(legs))


def scaled_position(
    illiquid: CdsSpec,
    quotes: tuple[MarketQuote, ...],
    scaled: ScaledSolution,
    w_diff: float | None = None,
) -> HedgedPosition:
    """Full hedged position implied by a reduced solution at gap ``w_diff``.

    The illiquid spread is reconstructed as matched spread - mu * w_diff,
    so the position's payoff PV is exactly w_diff times the reduced one.
    """
    w = scaled.w_diff if w_diff is None else w_diff
    p_match = _matched_quote(illiquid, quotes)
    matched = quotes[p_match]
    w_old = matched.spread - scaled.mu * w
    if w_old < 0.0:
        raise ValueError("spread gap implies a negative illiquid spread")
    legs = []
    for p, quote in enumerate(quotes):
        alpha = w * float(scaled.v_prime[p]) + (scaled.sigma if p == p_match else 0.0)
        if alpha != 0.0:
            legs.append(CdsSpec(quote.maturity_index, quote.spread, alpha))
    legs.append(CdsSpec(illiquid.maturity_index, w_old, -scaled.sigma))
    return HedgedPosition(deposit=w * float(scaled.v_prime[-1]), legs=tuple(legs))
