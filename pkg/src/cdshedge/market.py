"""CDS contract terms, quarterly tenor grids, and pathwise payoff values.

A long-protection CDS of unit notional pays the running spread ``w`` on a
quarterly grid until default or maturity.  If the reference name defaults
at time ``tau`` in quarter ``i`` with recovery ``rho``, the holder
receives the loss payment ``1 - rho`` net of the premium accrued since the
last payment date.  Per unit notional the two discounted cash flows are

    g_i          = w * (T_i - T_{i-1}) * exp(-r * T_i)      (spread at T_i)
    h_i(tau,rho) = (1 - rho - w * (tau - T_{i-1})) * exp(-r * tau)

and the realized present value of the whole payoff stream is ``h_i`` minus
the spread payments already made, or minus the full premium leg if the
contract survives to maturity.

Everything here uses exact discounting ``exp(-r * tau)`` at the default
time.  The mid-quarter discount approximation used to linearize the
hedging constraints lives exclusively in :mod:`cdshedge.lattice`.

Default times are bucketed into quarters ``(T_{i-1}, T_i]``, closed on the
right: a default exactly on a payment date belongs to the quarter that
ends there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TenorGrid:
    """Quarterly payment grid with flat continuously compounded discounting.

    Args:
        n_quarters: number of payment dates; the grid covers (0, T_N].
        quarter_length: spacing of payment dates in years.
        risk_free_rate: continuously compounded rate per year.
    """

    n_quarters: int
    quarter_length: float = 0.25
    risk_free_rate: float = 0.02

    payment_times: np.ndarray = field(init=False, repr=False, compare=False)
    discounts: np.ndarray = field(init=False, repr=False, compare=False)
    # annuity_cumsum[m] = sum_{k<=m} (T_k - T_{k-1}) * d_k
    annuity_cumsum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_quarters < 1:
            raise ValueError("grid needs at least one payment date")
        if self.quarter_length <= 0.0:
            raise ValueError("quarter_length must be positive")
        if self.risk_free_rate < 0.0:
            raise ValueError("risk_free_rate must be non-negative")
        times = self.quarter_length * np.arange(1, self.n_quarters + 1)
        disc = np.exp(-self.risk_free_rate * times)
        cumsum = np.concatenate([[0.0], np.cumsum(self.quarter_length * disc)])
        object.__setattr__(self, "payment_times", times)
        object.__setattr__(self, "discounts", disc)
        object.__setattr__(self, "annuity_cumsum", cumsum)

    @property
    def horizon(self) -> float:
        """T_N, the last payment date covered by the grid."""
        return self.n_quarters * self.quarter_length

    def discount(self, t):
        """Discount factor exp(-r * t); accepts scalars or arrays."""
        return np.exp(-self.risk_free_rate * t)

    def interval_start(self, i: int) -> float:
        """T_{i-1}, the open left edge of quarter ``i``."""
        return (i - 1) * self.quarter_length

    def interval_of(self, tau: float) -> int:
        """Quarter index ``i`` with tau in (T_{i-1}, T_i], closed-right.

        May exceed ``n_quarters`` for tau beyond the grid; callers decide
        whether that is meaningful.
        """
        if tau <= 0.0:
            raise ValueError("default time must be positive")
        return int(math.ceil(tau / self.quarter_length - 1e-12))

    def interval_of_array(self, tau: np.ndarray) -> np.ndarray:
        return np.ceil(np.asarray(tau, dtype=float) / self.quarter_length - 1e-12).astype(int)


@dataclass(frozen=True)
class CdsSpec:
    """Terms of a single CDS contract.

    ``maturity_index`` counts quarters to maturity, ``spread`` is the
    running spread per year (fraction, not bp), and ``notional`` is signed:
    positive buys protection, negative sells it.
    """

    maturity_index: int
    spread: float
    notional: float = 1.0

    def __post_init__(self):
        if self.maturity_index < 1:
            raise ValueError("maturity_index must be at least 1")
        if self.spread < 0.0:
            raise ValueError("spread must be non-negative")


@dataclass(frozen=True)
class MarketQuote:
    """Liquid-market quote: upfront price of unit notional plus running spread."""

    maturity_index: int
    upfront: float
    spread: float

    def __post_init__(self):
        if self.maturity_index < 1:
            raise ValueError("maturity_index must be at least 1")
        if self.spread < 0.0:
            raise ValueError("spread must be non-negative")

    def unit_cds(self) -> CdsSpec:
        return CdsSpec(self.maturity_index, self.spread, 1.0)


@dataclass(frozen=True)
class DefaultScenario:
    """One realized path: default at (tau, rho), or survival past the grid.

    ``tau is None`` encodes survival beyond every maturity in the book.
    """

    tau: float | None = None
    rho: float | None = None

    def __post_init__(self):
        if self.tau is None:
            if self.rho is not None:
                raise ValueError("survival scenario carries no recovery rate")
        else:
            if self.tau <= 0.0:
                raise ValueError("default time must be positive")
            if self.rho is None or not 0.0 <= self.rho <= 1.0:
                raise ValueError("recovery rate must lie in [0, 1]")

    @property
    def defaulted(self) -> bool:
        return self.tau is not None


SURVIVAL = DefaultScenario()


@dataclass(frozen=True)
class HedgePortfolio:
    """Market-CDS notionals plus a cash deposit, one notional per quote.

    ``side`` labels the hedged position: +1 hedges a short-protection
    illiquid CDS (the portfolio is held long), -1 hedges a long-protection
    one (the portfolio stored here is the one the dealer shorts).
    """

    alphas: tuple[float, ...]
    deposit: float
    side: int = +1

    def __post_init__(self):
        if self.side not in (+1, -1):
            raise ValueError("side must be +1 or -1")
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))

    @property
    def total_notional(self) -> float:
        return float(sum(self.alphas))


@dataclass(frozen=True)
class HedgedPosition:
    """A static book of CDS legs plus a cash deposit.

    Legs carry signed notionals; the deposit is in currency units.  This is
    the object whose realized present value distribution gets analyzed.
    """

    deposit: float
    legs: tuple[CdsSpec, ...]

    def pv(self, grid: TenorGrid, scenario: DefaultScenario) -> float:
        return self.deposit + sum(pathwise_pv(grid, leg, scenario) for leg in self.legs)

    def pv_survived(self, grid: TenorGrid) -> float:
        return self.pv(grid, SURVIVAL)

    def pv_array(self, grid: TenorGrid, tau: np.ndarray, rho: np.ndarray) -> np.ndarray:
        """Vectorized PVs for defaulted scenarios given as arrays."""
        total = np.full(np.shape(tau), self.deposit, dtype=float)
        for leg in self.legs:
            total += pathwise_pv_array(grid, leg, tau, rho)
        return total


def premium_payment(grid: TenorGrid, cds: CdsSpec, i: int) -> float:
    """PV of the spread payment at T_i per unit notional; 0 past maturity."""
    if not 1 <= i <= grid.n_quarters:
        raise ValueError(f"payment index {i} outside 1..{grid.n_quarters}")
    if i > cds.maturity_index:
        return 0.0
    return cds.spread * grid.quarter_length * float(grid.discounts[i - 1])


def default_payment(grid: TenorGrid, cds: CdsSpec, tau: float, rho: float) -> float:
    """PV of the loss payment net of accrued spread at default, per unit notional.

    Exact discounting exp(-r * tau); zero if the contract matured before tau.
    """
    if tau <= 0.0:
        raise ValueError("default time must be positive")
    if not 0.0 <= rho <= 1.0:
        raise ValueError("recovery rate must lie in [0, 1]")
    i = grid.interval_of(tau)
    if i > cds.maturity_index:
        return 0.0
    accrual = tau - grid.interval_start(i)
    return (1.0 - rho - cds.spread * accrual) * float(grid.discount(tau))


def _premium_leg_cumsum(grid: TenorGrid, cds: CdsSpec) -> np.ndarray:
    """cumsum[k] = PV of the first k spread payments per unit notional."""
    m = min(cds.maturity_index, grid.n_quarters)
    paid = cds.spread * grid.quarter_length * grid.discounts
    out = np.zeros(grid.n_quarters + 1)
    out[1 : m + 1] = np.cumsum(paid[:m])
    out[m + 1 :] = out[m]
    return out


def pathwise_pv(grid: TenorGrid, cds: CdsSpec, scenario: DefaultScenario) -> float:
    """Realized PV of the contract's payoff stream on one path, times notional.

    Defaulted in quarter i:  h_i(tau, rho) - sum_{k<i} g_k.
    Survived (or defaulted past maturity): -sum_{k<=M} g_k.
    """
    gcum = _premium_leg_cumsum(grid, cds)
    if not scenario.defaulted:
        return cds.notional * -float(gcum[cds.maturity_index])
    i = grid.interval_of(scenario.tau)
    if i > cds.maturity_index:
        return cds.notional * -float(gcum[cds.maturity_index])
    h = default_payment(grid, cds, scenario.tau, scenario.rho)
    return cds.notional * (h - float(gcum[i - 1]))


def pathwise_pv_array(grid: TenorGrid, cds: CdsSpec, tau: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Vectorized :func:`pathwise_pv` for defaulted scenarios only."""
    tau = np.asarray(tau, dtype=float)
    rho = np.asarray(rho, dtype=float)
    gcum = _premium_leg_cumsum(grid, cds)
    i = grid.interval_of_array(tau)
    alive = i <= cds.maturity_index
    i_cap = np.minimum(i, cds.maturity_index + 1)
    start = (i_cap - 1) * grid.quarter_length
    h = (1.0 - rho - cds.spread * (tau - start)) * np.exp(-grid.risk_free_rate * tau)
    full_leg = float(gcum[cds.maturity_index])
    value = np.where(alive, h - gcum[i_cap - 1], -full_leg)
    return cds.notional * value


def portfolio_pv(
    grid: TenorGrid,
    illiquid: CdsSpec,
    quotes: tuple[MarketQuote, ...],
    hedge: HedgePortfolio,
    scenario: DefaultScenario,
) -> float:
    """PV of deposit + illiquid CDS + market CDSs at hedge notionals.

    The hedge is applied exactly as stored; for a shorted portfolio the
    caller passes negated notionals and deposit.
    """
    if len(hedge.alphas) != len(quotes):
        raise ValueError("hedge and quote set have different lengths")
    total = hedge.deposit + pathwise_pv(grid, illiquid, scenario)
    for alpha, quote in zip(hedge.alphas, quotes):
        leg = CdsSpec(quote.maturity_index, quote.spread, alpha)
        total += pathwise_pv(grid, leg, scenario)
    return total


def annuity(grid: TenorGrid, maturity_index: int, tau: float | None = None) -> float:
    """Unit-spread premium-leg annuity up to min(tau, maturity).

    For a default at tau this is the discounted year count actually paid,
    including the accrual (tau - T_{i-1}) * exp(-r * tau) in the default
    quarter.  For survival (tau None) or tau past maturity it is the full
    discounted annuity.  Continuous in tau across payment dates.
    """
    if not 1 <= maturity_index <= grid.n_quarters:
        raise ValueError("maturity_index outside the grid")
    full = float(grid.annuity_cumsum[maturity_index])
    if tau is None:
        return full
    if tau <= 0.0:
        raise ValueError("default time must be positive")
    i = grid.interval_of(tau)
    if i > maturity_index:
        return full
    accrued = (tau - grid.interval_start(i)) * float(grid.discount(tau))
    return float(grid.annuity_cumsum[i - 1]) + accrued
