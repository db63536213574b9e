"""Corner-state discretization of the hedging constraint.

The continuum requirement "hedged payoff PV >= 0 for every default time
and recovery rate" is linearized by replacing the default-time discount
factor inside the loss payment with its mid-quarter value
``exp(-r * (T_{i-1} + T_i) / 2)``.  Premium payments keep their exact
discount factors.  Under that substitution the position PV is affine in
``(tau, rho)`` on each rectangle ``(T_{i-1}, T_i] x [0, 1]``, so
non-negativity on the rectangle's four corners implies non-negativity
everywhere inside it.  The worst-case substitution error is
``0.5 * r * quarter_length`` per unit of loss payment.

States are indexed ``k = J * (i - 1) + j`` with ``J = 4`` corners per
quarter, ordered (T_{i-1}+0+, 0), (T_i, 0), (T_{i-1}+0+, 1), (T_i, 1),
plus one final row for survival past every maturity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .market import CdsSpec, DefaultScenario, MarketQuote, TenorGrid, _premium_leg_cumsum

CORNERS_PER_INTERVAL = 4
# Offset realizing tau -> T_{i-1} from the right; far below the quarter
# spacing, so PVs are unchanged at working precision.
EPSILON_TAU = 1e-9


@dataclass(frozen=True)
class ConstraintSystem:
    """Discretized payoff matrix, illiquid payoff vector, and cost vector.

    ``B`` has one row per discretized state (n_quarters * 4 corners plus
    the survival row) and one column per market CDS plus a final all-ones
    deposit column.  ``b`` holds the per-unit payoff of the illiquid CDS in
    the same states.  ``c = [u_1 .. u_K, 1]`` prices the portfolio.

    ``side`` +1 means the bound problem min c.v s.t. B v >= b (ask side);
    -1 means max c.v s.t. B v <= b (bid side).
    """

    B: np.ndarray = field(compare=False)
    b: np.ndarray = field(compare=False)
    c: np.ndarray = field(compare=False)
    side: int
    n_quarters: int
    n_quotes: int
    corners: int = CORNERS_PER_INTERVAL

    def __post_init__(self):
        rows = self.n_quarters * self.corners + 1
        cols = self.n_quotes + 1
        if self.B.shape != (rows, cols):
            raise ValueError(f"B must be {rows}x{cols}, got {self.B.shape}")
        if self.b.shape != (rows,) or self.c.shape != (cols,):
            raise ValueError("b or c has inconsistent length")
        if self.side not in (+1, -1):
            raise ValueError("side must be +1 or -1")

    @property
    def n_states(self) -> int:
        return self.n_quarters * self.corners + 1


def state_index(i: int, j: int, corners: int = CORNERS_PER_INTERVAL) -> int:
    """Row index (0-based) of corner j in quarter i, both 1-based."""
    return corners * (i - 1) + (j - 1)


def corner_states(grid: TenorGrid, i: int) -> tuple[DefaultScenario, ...]:
    """The four corner scenarios of quarter i's (tau, rho) rectangle."""
    if not 1 <= i <= grid.n_quarters:
        raise ValueError(f"interval {i} outside 1..{grid.n_quarters}")
    t_lo = grid.interval_start(i) + EPSILON_TAU
    t_hi = float(grid.payment_times[i - 1])
    return (
        DefaultScenario(t_lo, 0.0),
        DefaultScenario(t_hi, 0.0),
        DefaultScenario(t_lo, 1.0),
        DefaultScenario(t_hi, 1.0),
    )


def discretized_column(grid: TenorGrid, cds: CdsSpec) -> np.ndarray:
    """Per-unit payoff PVs of one CDS in every discretized state.

    Identical to the exact pathwise PV except that the discount factor on
    the loss payment is frozen at the quarter midpoint.
    """
    n = grid.n_quarters
    col = np.empty(n * CORNERS_PER_INTERVAL + 1)
    gcum = _premium_leg_cumsum(grid, cds)
    m = cds.maturity_index
    for i in range(1, n + 1):
        t_start = grid.interval_start(i)
        d_mid = float(grid.discount(t_start + 0.5 * grid.quarter_length))
        paid = float(gcum[min(i - 1, m)])
        for j, scenario in enumerate(corner_states(grid, i), start=1):
            if i <= m:
                accrual = scenario.tau - t_start
                h = (1.0 - scenario.rho - cds.spread * accrual) * d_mid
                value = h - paid
            else:
                value = -float(gcum[m])
            col[state_index(i, j)] = value
    col[-1] = -float(gcum[m])
    return col


def build_system(
    grid: TenorGrid,
    illiquid: CdsSpec,
    quotes: tuple[MarketQuote, ...],
    side: int,
) -> ConstraintSystem:
    """Assemble (B, b, c) for the bound problem on the requested side.

    The illiquid CDS must have unit notional magnitude; ``b`` is built for
    the long-protection convention and the side only selects the
    optimization sense.  Duplicate quote maturities are allowed (the
    uniqueness probe exploits them); ordering constraints belong to quote
    ingestion.
    """
    if abs(abs(illiquid.notional) - 1.0) > 1e-12:
        raise ValueError("constraint system is built per unit illiquid notional")
    if illiquid.maturity_index > grid.n_quarters:
        raise ValueError("illiquid maturity beyond the grid")
    for q in quotes:
        if q.maturity_index > grid.n_quarters:
            raise ValueError("quote maturity beyond the grid")
    n_states = grid.n_quarters * CORNERS_PER_INTERVAL + 1
    B = np.ones((n_states, len(quotes) + 1))
    for p, quote in enumerate(quotes):
        B[:, p] = discretized_column(grid, quote.unit_cds())
    b = discretized_column(grid, CdsSpec(illiquid.maturity_index, illiquid.spread, 1.0))
    c = np.append([q.upfront for q in quotes], 1.0)
    return ConstraintSystem(
        B=B, b=b, c=c, side=side, n_quarters=grid.n_quarters, n_quotes=len(quotes)
    )


def discretized_annuity_vector(grid: TenorGrid, maturity_index: int) -> np.ndarray:
    """Unit-spread annuity evaluated in every discretized state.

    The accrual term in the default quarter carries the same mid-quarter
    discount factor as the loss payments in :func:`discretized_column`, so
    that spread-leg differences of equal-maturity CDSs stay exact
    multiples of this vector after discretization.
    """
    if not 1 <= maturity_index <= grid.n_quarters:
        raise ValueError("maturity_index outside the grid")
    n = grid.n_quarters
    cumsum = grid.annuity_cumsum
    full = float(cumsum[maturity_index])
    out = np.empty(n * CORNERS_PER_INTERVAL + 1)
    for i in range(1, n + 1):
        t_start = grid.interval_start(i)
        d_mid = float(grid.discount(t_start + 0.5 * grid.quarter_length))
        for j, scenario in enumerate(corner_states(grid, i), start=1):
            if i <= maturity_index:
                value = float(cumsum[i - 1]) + (scenario.tau - t_start) * d_mid
            else:
                value = full
            out[state_index(i, j)] = value
    out[-1] = full
    return out


def build_reduced_system(
    grid: TenorGrid,
    quotes: tuple[MarketQuote, ...],
    maturity_index: int,
    sigma_mu: int,
) -> ConstraintSystem:
    """Constraint system of the spread-difference-free reduced problem.

    When a market CDS shares the illiquid maturity, dividing the hedged
    position by W = |market spread - illiquid spread| leaves a problem
    whose only memory of the spreads is the sign ``sigma_mu``: minimize
    c.v' subject to B v' >= sigma_mu * annuity vector.
    """
    if sigma_mu not in (+1, -1):
        raise ValueError("sigma_mu must be +1 or -1")
    n_states = grid.n_quarters * CORNERS_PER_INTERVAL + 1
    B = np.ones((n_states, len(quotes) + 1))
    for p, quote in enumerate(quotes):
        if quote.maturity_index > grid.n_quarters:
            raise ValueError("quote maturity beyond the grid")
        B[:, p] = discretized_column(grid, quote.unit_cds())
    b = sigma_mu * discretized_annuity_vector(grid, maturity_index)
    c = np.append([q.upfront for q in quotes], 1.0)
    return ConstraintSystem(
        B=B, b=b, c=c, side=+1, n_quarters=grid.n_quarters, n_quotes=len(quotes)
    )
