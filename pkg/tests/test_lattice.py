"""Corner-state discretization of the hedging constraints."""

import math

import numpy as np
import pytest

from cdshedge.lattice import (
    EPSILON_TAU,
    build_reduced_system,
    build_system,
    corner_states,
    discretized_annuity_vector,
    discretized_column,
    state_index,
)
from cdshedge.lp import solve_lub
from cdshedge.market import CdsSpec, DefaultScenario, MarketQuote, pathwise_pv


def midquarter_pv(grid, cds, tau, rho):
    """Position-free oracle: pathwise PV with the loss discount frozen mid-quarter."""
    r, q = grid.risk_free_rate, grid.quarter_length
    i = grid.interval_of(tau)
    gcum = [0.0]
    for k in range(1, grid.n_quarters + 1):
        g = cds.spread * q * math.exp(-r * q * k) if k <= cds.maturity_index else 0.0
        gcum.append(gcum[-1] + g)
    if i > cds.maturity_index:
        return -cds.notional * gcum[cds.maturity_index]
    d_mid = math.exp(-r * (q * (i - 1) + 0.5 * q))
    h = (1.0 - rho - cds.spread * (tau - q * (i - 1))) * d_mid
    return cds.notional * (h - gcum[i - 1])


class TestCornerStates:
    def test_first_interval(self, grid):
        states = corner_states(grid, 1)
        assert [s.tau for s in states] == [EPSILON_TAU, 0.25, EPSILON_TAU, 0.25]
        assert [s.rho for s in states] == [0.0, 0.0, 1.0, 1.0]

    def test_third_corner_full_recovery(self, grid):
        for i in (1, 7, 20):
            assert corner_states(grid, i)[2].rho == 1.0

    def test_out_of_range(self, grid):
        with pytest.raises(ValueError):
            corner_states(grid, 0)
        with pytest.raises(ValueError):
            corner_states(grid, 21)

    def test_state_index_bijection(self):
        seen = {state_index(i, j) for i in range(1, 21) for j in range(1, 5)}
        assert seen == set(range(80))


class TestBuildSystem:
    def test_standard_dimensions(self, grid, illiquid, quotes):
        system = build_system(grid, illiquid, quotes, +1)
        assert system.B.shape == (81, 6)
        assert system.b.shape == (81,)
        assert system.c.shape == (6,)

    def test_deposit_column_all_ones(self, grid, illiquid, quotes):
        system = build_system(grid, illiquid, quotes, +1)
        assert np.all(system.B[:, -1] == 1.0)

    def test_cost_vector(self, grid, illiquid, quotes):
        system = build_system(grid, illiquid, quotes, -1)
        np.testing.assert_allclose(system.c[:-1], [q.upfront for q in quotes])
        assert system.c[-1] == 1.0

    def test_survived_row_is_premium_leg(self, grid, illiquid, quotes):
        system = build_system(grid, illiquid, quotes, +1)
        for p, quote in enumerate(quotes):
            oracle = -sum(
                quote.spread * 0.25 * math.exp(-0.02 * 0.25 * k)
                for k in range(1, quote.maturity_index + 1)
            )
            assert system.B[-1, p] == pytest.approx(oracle, abs=1e-15)

    def test_unit_notional_required(self, grid, quotes):
        with pytest.raises(ValueError):
            build_system(grid, CdsSpec(20, 0.01, 2.0), quotes, +1)

    def test_quote_beyond_grid(self, grid, illiquid):
        far = (MarketQuote(24, 0.27, 0.05),)
        with pytest.raises(ValueError):
            build_system(grid, illiquid, far, +1)

    def test_duplicate_maturities_accepted(self, grid, illiquid, quotes):
        system = build_system(grid, illiquid, quotes + (quotes[-1],), +1)
        np.testing.assert_allclose(system.B[:, 4], system.B[:, 5])

    def test_columns_match_midquarter_oracle(self, grid, illiquid, quotes):
        system = build_system(grid, illiquid, quotes, +1)
        cds = quotes[2].unit_cds()
        for i in (1, 5, 12, 20):
            for j, state in enumerate(corner_states(grid, i), start=1):
                oracle = midquarter_pv(grid, cds, state.tau, state.rho)
                assert system.B[state_index(i, j), 2] == pytest.approx(oracle, abs=1e-14)


class TestApproximation:
    def test_midquarter_error_bound(self, grid, illiquid, quotes):
        # loss-discount substitution is off by at most 0.5 * r * quarter
        bound = 0.5 * grid.risk_free_rate * grid.quarter_length + 1e-12
        for quote in quotes:
            cds = quote.unit_cds()
            col = discretized_column(grid, cds)
            for i in range(1, 21):
                for j, state in enumerate(corner_states(grid, i), start=1):
                    exact = pathwise_pv(grid, cds, DefaultScenario(state.tau, state.rho))
                    assert abs(col[state_index(i, j)] - exact) <= bound

    def test_corner_feasibility_extends_inside_rectangles(self, grid, illiquid, quotes, bounds, rng):
        # a portfolio that clears the four corners clears the whole
        # rectangle under the mid-quarter approximation
        system = build_system(grid, illiquid, quotes, +1)
        v = np.append(bounds.hedge_lub.alphas, bounds.hedge_lub.deposit)
        assert (system.B @ v - system.b).min() >= -1e-12
        legs = [(alpha, q.unit_cds()) for alpha, q in zip(bounds.hedge_lub.alphas, quotes)] + [
            (-1.0, CdsSpec(illiquid.maturity_index, illiquid.spread, 1.0))
        ]
        tau = rng.uniform(1e-6, 5.0, 1000)
        rho = rng.uniform(0.0, 1.0, 1000)
        for t, p in zip(tau, rho):
            value = bounds.hedge_lub.deposit + sum(
                a * midquarter_pv(grid, cds, t, p) for a, cds in legs
            )
            assert value >= -1e-12


class TestReducedSystem:
    def test_annuity_vector_matches_column_differences(self, grid, quotes):
        # two same-maturity CDSs differ by (spread gap) * annuity vector
        lo = discretized_column(grid, CdsSpec(20, 0.01, 1.0))
        hi = discretized_column(grid, CdsSpec(20, 0.05, 1.0))
        t = discretized_annuity_vector(grid, 20)
        np.testing.assert_allclose(hi - lo, -0.04 * t, atol=1e-15)

    def test_reduced_solution_scales_to_full(self, grid, illiquid, quotes):
        # reduced bound * gap + matched upfront = full bound
        reduced = build_reduced_system(grid, quotes, 20, +1)
        sol = solve_lub(reduced)
        full = build_system(grid, illiquid, quotes, +1)
        sol_full = solve_lub(full)
        w_gap = quotes[-1].spread - illiquid.spread
        assert w_gap * sol.objective + quotes[-1].upfront == pytest.approx(
            sol_full.objective, abs=1e-10
        )

    def test_bad_sigma_mu(self, grid, quotes):
        with pytest.raises(ValueError):
            build_reduced_system(grid, quotes, 20, 0)
