"""Contract cash flows, pathwise PVs, and the annuity."""

import math

import numpy as np
import pytest

from cdshedge.market import (
    SURVIVAL,
    CdsSpec,
    DefaultScenario,
    HedgePortfolio,
    TenorGrid,
    annuity,
    default_payment,
    pathwise_pv,
    pathwise_pv_array,
    portfolio_pv,
    premium_payment,
)

UNIT_500 = CdsSpec(maturity_index=20, spread=0.05, notional=1.0)


def brute_force_pv(grid, cds, tau, rho):
    """Direct summation of the payoff stream, independent of the library path."""
    r, q = grid.risk_free_rate, grid.quarter_length

    def g(i):
        return cds.spread * q * math.exp(-r * q * i) if i <= cds.maturity_index else 0.0

    if tau is None:
        return -cds.notional * sum(g(k) for k in range(1, cds.maturity_index + 1))
    i = math.ceil(tau / q - 1e-12)
    if i > cds.maturity_index:
        return -cds.notional * sum(g(k) for k in range(1, cds.maturity_index + 1))
    h = (1.0 - rho - cds.spread * (tau - q * (i - 1))) * math.exp(-r * tau)
    return cds.notional * (h - sum(g(k) for k in range(1, i)))


class TestPremiumPayment:
    def test_undiscounted_quarter(self):
        grid = TenorGrid(20, 0.25, 0.0)
        assert premium_payment(grid, UNIT_500, 1) == pytest.approx(0.0125, abs=1e-15)

    def test_discounted_one_year(self, grid):
        assert premium_payment(grid, UNIT_500, 4) == pytest.approx(
            0.0125 * math.exp(-0.02), abs=1e-15
        )

    def test_zero_past_maturity(self, grid):
        short = CdsSpec(maturity_index=8, spread=0.05)
        assert premium_payment(grid, short, 9) == 0.0

    def test_index_out_of_range(self, grid):
        with pytest.raises(ValueError):
            premium_payment(grid, UNIT_500, 0)
        with pytest.raises(ValueError):
            premium_payment(grid, UNIT_500, 21)


class TestDefaultPayment:
    def test_first_instant_full_loss(self, grid):
        assert default_payment(grid, UNIT_500, 1e-12, 0.0) == pytest.approx(1.0, abs=1e-9)

    def test_full_recovery_pure_accrual(self, grid):
        # at tau = T_8 with rho = 1 only the accrued spread flows out
        expected = -0.05 * 0.25 * math.exp(-0.02 * 2.0)
        assert default_payment(grid, UNIT_500, 2.0, 1.0) == pytest.approx(expected, abs=1e-15)

    def test_zero_past_maturity(self, grid):
        short = CdsSpec(maturity_index=8, spread=0.05)
        assert default_payment(grid, short, 2.5, 0.3) == 0.0

    def test_argument_errors(self, grid):
        with pytest.raises(ValueError):
            default_payment(grid, UNIT_500, -1.0, 0.4)
        with pytest.raises(ValueError):
            default_payment(grid, UNIT_500, 1.0, 1.5)


class TestPathwisePv:
    def test_survived_long_cds(self, grid):
        value = pathwise_pv(grid, UNIT_500, SURVIVAL)
        assert value == pytest.approx(brute_force_pv(grid, UNIT_500, None, None), abs=1e-15)
        assert value == pytest.approx(-0.23731218441106705, abs=1e-12)

    def test_first_instant_default(self, grid):
        value = pathwise_pv(grid, UNIT_500, DefaultScenario(1e-12, 0.0))
        assert value == pytest.approx(1.0, abs=1e-9)

    def test_mid_life_default(self, grid):
        value = pathwise_pv(grid, UNIT_500, DefaultScenario(2.0, 0.4))
        assert value == pytest.approx(brute_force_pv(grid, UNIT_500, 2.0, 0.4), abs=1e-15)
        assert value == pytest.approx(0.4786921231559139, abs=1e-12)

    def test_default_past_maturity_is_premium_leg(self, grid):
        short = CdsSpec(maturity_index=8, spread=0.05, notional=-2.0)
        assert pathwise_pv(grid, short, DefaultScenario(3.0, 0.4)) == pytest.approx(
            pathwise_pv(grid, short, SURVIVAL), abs=1e-15
        )

    def test_vectorized_matches_scalar(self, grid, rng):
        tau = rng.uniform(0.01, 4.99, 64)
        rho = rng.uniform(0.0, 1.0, 64)
        vec = pathwise_pv_array(grid, UNIT_500, tau, rho)
        scal = [pathwise_pv(grid, UNIT_500, DefaultScenario(t, p)) for t, p in zip(tau, rho)]
        np.testing.assert_allclose(vec, scal, atol=1e-14)


class TestPortfolioPv:
    def test_deposit_only(self, grid, quotes):
        hedge = HedgePortfolio((0.0,) * 5, deposit=0.37, side=+1)
        zero_notional = CdsSpec(20, 0.01, notional=0.0)
        assert portfolio_pv(grid, zero_notional, quotes, hedge, SURVIVAL) == pytest.approx(0.37)

    def test_offsetting_hedge_kills_recovery_dependence(self, grid, quotes):
        # one long market CDS against the short illiquid: loss legs cancel
        illiquid = CdsSpec(20, 0.01, notional=-1.0)
        hedge = HedgePortfolio((0.0, 0.0, 0.0, 0.0, 1.0), deposit=0.0, side=+1)
        for tau in (0.3, 1.7, 4.2, 5.0):
            values = [
                portfolio_pv(grid, illiquid, quotes, hedge, DefaultScenario(tau, rho))
                for rho in (0.0, 0.35, 1.0)
            ]
            assert max(values) - min(values) < 1e-14

    def test_reference_bid_hedge_survival_value(self, grid, quotes):
        # dealer long the illiquid contract, short the reference bid hedge
        from tests.conftest import REF_GLB_ALPHAS

        illiquid = CdsSpec(20, 0.01, notional=1.0)
        hedge = HedgePortfolio(
            tuple(-a for a in REF_GLB_ALPHAS), deposit=0.0, side=-1
        )
        value = portfolio_pv(grid, illiquid, quotes, hedge, SURVIVAL)
        assert value == pytest.approx(0.210, abs=5e-4)

    def test_length_mismatch(self, grid, quotes):
        hedge = HedgePortfolio((1.0, 2.0), deposit=0.0, side=+1)
        with pytest.raises(ValueError):
            portfolio_pv(grid, UNIT_500, quotes, hedge, SURVIVAL)


class TestAnnuity:
    def test_vanishes_at_zero(self, grid):
        assert annuity(grid, 20, 1e-12) == pytest.approx(0.0, abs=1e-11)

    def test_undiscounted_year_count(self):
        grid = TenorGrid(20, 0.25, 0.0)
        assert annuity(grid, 20) == pytest.approx(5.0, abs=1e-12)

    def test_survived_direct_sum(self, grid):
        oracle = sum(0.25 * math.exp(-0.02 * 0.25 * k) for k in range(1, 21))
        assert annuity(grid, 20) == pytest.approx(oracle, abs=1e-15)
        assert annuity(grid, 20) == pytest.approx(4.746243688221339, abs=1e-12)

    def test_past_maturity_equals_survived(self, grid):
        assert annuity(grid, 8, 4.0) == annuity(grid, 8)


class TestInvariants:
    def test_premium_leg_continuous_across_payment_dates(self, grid, quotes, position_ask):
        eps = 1e-9
        for t in grid.payment_times[:-1]:
            left = position_ask.pv(grid, DefaultScenario(float(t) - eps, 1.0))
            right = position_ask.pv(grid, DefaultScenario(float(t) + eps, 1.0))
            assert abs(left - right) < 1e-7

    def test_single_cds_premium_leg_monotone(self, grid):
        taus = np.linspace(1e-6, 5.0, 4001)
        values = [pathwise_pv(grid, UNIT_500, DefaultScenario(t, 1.0)) for t in taus]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_rho_affine_midpoint(self, grid, quotes, position_bid):
        for tau in (0.1, 0.9, 2.5, 3.75, 5.0):
            lo = position_bid.pv(grid, DefaultScenario(tau, 0.0))
            hi = position_bid.pv(grid, DefaultScenario(tau, 1.0))
            mid = position_bid.pv(grid, DefaultScenario(tau, 0.5))
            assert mid == pytest.approx(0.5 * (lo + hi), abs=1e-12)

    def test_full_recovery_pv_is_spread_annuity(self, grid):
        for tau in (0.2, 1.0, 2.34, 4.99, 5.0):
            lhs = pathwise_pv(grid, UNIT_500, DefaultScenario(tau, 1.0))
            assert lhs == pytest.approx(-0.05 * annuity(grid, 20, tau), abs=1e-12)


class TestValidation:
    def test_grid_arguments(self):
        with pytest.raises(ValueError):
            TenorGrid(0)
        with pytest.raises(ValueError):
            TenorGrid(4, quarter_length=-0.25)
        with pytest.raises(ValueError):
            TenorGrid(4, risk_free_rate=-0.01)

    def test_scenario_arguments(self):
        with pytest.raises(ValueError):
            DefaultScenario(-1.0, 0.5)
        with pytest.raises(ValueError):
            DefaultScenario(1.0, None)
        with pytest.raises(ValueError):
            DefaultScenario(None, 0.5)

    def test_cds_arguments(self):
        with pytest.raises(ValueError):
            CdsSpec(0, 0.05)
        with pytest.raises(ValueError):
            CdsSpec(4, -0.01)

    def test_interval_closed_right(self, grid):
        assert grid.interval_of(0.25) == 1
        assert grid.interval_of(0.25 + 1e-9) == 2
        assert grid.interval_of(5.0) == 20
