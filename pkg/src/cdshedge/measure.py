"""Physical probability measure for default times and recovery rates.

Default times are exponential with a constant hazard rate ``h`` derived
from the one-year default probability, h = -log(1 - PD_1).  Paths with
default beyond the grid horizon T_N carry the survival mass
exp(-h * T_N) as a point mass.  Recovery rates are drawn independently of
the default time from a density on [0, 1]; three parameterizations are
supported (truncated normal, two-point, tabulated), all exposing the same
small interface: ``mean`` and inverse-CDF sampling, plus a pointwise
``density`` for the continuous kinds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

_INV_CDF_POINTS = 4096


def _norm_pdf(z):
    return np.exp(-0.5 * np.square(z)) / math.sqrt(2.0 * math.pi)


def _norm_cdf(z):
    return 0.5 * (1.0 + np.vectorize(math.erf)(np.asarray(z) / math.sqrt(2.0)))


@dataclass(frozen=True)
class TruncatedNormalRecovery:
    """Normal density restricted to [0, 1] and renormalized."""

    location: float
    scale: float

    def __post_init__(self):
        if self.scale <= 0.0:
            raise ValueError("scale must be positive")

    def _mass(self) -> float:
        a = (0.0 - self.location) / self.scale
        b = (1.0 - self.location) / self.scale
        return float(_norm_cdf(b) - _norm_cdf(a))

    def density(self, rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0.0) or np.any(rho > 1.0):
            raise ValueError("recovery rate must lie in [0, 1]")
        z = (rho - self.location) / self.scale
        out = _norm_pdf(z) / (self.scale * self._mass())
        return float(out) if out.ndim == 0 else out

    def mean(self) -> float:
        a = (0.0 - self.location) / self.scale
        b = (1.0 - self.location) / self.scale
        shift = (_norm_pdf(a) - _norm_pdf(b)) / self._mass()
        return float(self.location + self.scale * shift)

    def sample(self, u: np.ndarray) -> np.ndarray:
        grid, cdf = _inverse_cdf_table(self)
        return np.interp(u, cdf, grid)


@dataclass(frozen=True)
class TwoPointRecovery:
    """Two-atom recovery law: mass ``weight_low`` at ``low``, rest at ``high``.

    Useful for checks that only the mean recovery matters; it has no
    Lebesgue density.
    """

    low: float
    high: float
    weight_low: float

    def __post_init__(self):
        if not (0.0 <= self.low <= 1.0 and 0.0 <= self.high <= 1.0):
            raise ValueError("atoms must lie in [0, 1]")
        if not 0.0 <= self.weight_low <= 1.0:
            raise ValueError("weight must lie in [0, 1]")

    def density(self, rho):
        raise TypeError("two-point recovery law is atomic and has no density")

    def mean(self) -> float:
        return self.weight_low * self.low + (1.0 - self.weight_low) * self.high

    def sample(self, u: np.ndarray) -> np.ndarray:
        return np.where(np.asarray(u) < self.weight_low, self.low, self.high)


@dataclass(frozen=True)
class TabulatedRecovery:
    """Recovery density given on a grid, renormalized at construction."""

    grid: tuple[float, ...]
    values: tuple[float, ...]
    _density: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise ValueError("grid and values must be matching 1-d tables")
        if grid[0] != 0.0 or grid[-1] != 1.0 or np.any(np.diff(grid) <= 0.0):
            raise ValueError("grid must increase from 0 to 1")
        if np.any(values < 0.0):
            raise ValueError("density values must be non-negative")
        total = _trapezoid(values, grid)
        if total <= 0.0:
            raise ValueError("density table integrates to zero")
        object.__setattr__(self, "_density", values / total)

    def density(self, rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0.0) or np.any(rho > 1.0):
            raise ValueError("recovery rate must lie in [0, 1]")
        out = np.interp(rho, np.asarray(self.grid), self._density)
        return float(out) if out.ndim == 0 else out

    def mean(self) -> float:
        grid = np.asarray(self.grid)
        return float(_trapezoid(grid * self._density, grid))

    def sample(self, u: np.ndarray) -> np.ndarray:
        grid, cdf = _inverse_cdf_table(self)
        return np.interp(u, cdf, grid)


RecoverySpec = TruncatedNormalRecovery | TwoPointRecovery | TabulatedRecovery


def _trapezoid(y: np.ndarray, x: np.ndarray) -> float:
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


@lru_cache(maxsize=32)
def _inverse_cdf_table(spec) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-resolution CDF tabulation used for inverse-CDF sampling."""
    grid = np.linspace(0.0, 1.0, _INV_CDF_POINTS)
    dens = np.asarray(spec.density(grid), dtype=float)
    steps = 0.5 * (dens[1:] + dens[:-1]) * np.diff(grid)
    cdf = np.concatenate([[0.0], np.cumsum(steps)])
    cdf /= cdf[-1]
    return grid, cdf


def standard_recoveries() -> dict[str, TruncatedNormalRecovery]:
    """Bundled truncated-normal recovery laws with means near 20/25/40%."""
    return {
        "rho20": TruncatedNormalRecovery(0.15, 0.16),
        "rho25": TruncatedNormalRecovery(0.224, 0.16),
        "rho40": TruncatedNormalRecovery(0.396, 0.16),
    }


@dataclass(frozen=True)
class PhysicalMeasure:
    """Constant-hazard default law on [0, horizon] plus a recovery law."""

    hazard: float
    horizon: float
    recovery: RecoverySpec

    def __post_init__(self):
        if self.hazard < 0.0:
            raise ValueError("hazard rate must be non-negative")
        if self.horizon <= 0.0:
            raise ValueError("horizon must be positive")

    def default_density(self, tau):
        """h * exp(-h * tau) on [0, horizon]; zero beyond."""
        tau = np.asarray(tau, dtype=float)
        out = np.where(
            (tau >= 0.0) & (tau <= self.horizon),
            self.hazard * np.exp(-self.hazard * tau),
            0.0,
        )
        return float(out) if out.ndim == 0 else out

    def default_mass_between(self, t0: float, t1: float) -> float:
        """Probability of default inside (t0, t1] within the horizon."""
        t0 = min(max(t0, 0.0), self.horizon)
        t1 = min(max(t1, 0.0), self.horizon)
        return float(math.exp(-self.hazard * t0) - math.exp(-self.hazard * t1))


def hazard_from_pd1(pd1: float) -> float:
    """Constant hazard rate matching a one-year default probability."""
    if not 0.0 <= pd1 < 1.0:
        raise ValueError("one-year default probability must lie in [0, 1)")
    return -math.log1p(-pd1)


def survival_mass(measure: PhysicalMeasure) -> float:
    """Probability of no default before the horizon."""
    return math.exp(-measure.hazard * measure.horizon)


def recovery_density(spec: RecoverySpec, rho):
    """Pointwise recovery density; raises for atomic laws."""
    return spec.density(rho)


def _as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


def sample_scenarios(measure: PhysicalMeasure, n: int, seed_or_rng=0):
    """Draw ``n`` independent paths.

    Returns ``(tau, rho, survived)`` arrays; ``tau`` and ``rho`` are only
    meaningful where ``survived`` is False.  Reproducible from the seed
    and draw count.
    """
    rng = _as_rng(seed_or_rng)
    if measure.hazard == 0.0:
        tau = np.full(n, np.inf)
    else:
        tau = rng.exponential(1.0 / measure.hazard, size=n)
    survived = tau > measure.horizon
    rho = np.zeros(n)
    n_def = int((~survived).sum())
    if n_def:
        rho[~survived] = measure.recovery.sample(rng.random(n_def))
    return tau, rho, survived


def sample_scenario(measure: PhysicalMeasure, seed_or_rng=0):
    """Draw a single path as a :class:`~cdshedge.market.DefaultScenario`."""
    from .market import SURVIVAL, DefaultScenario

    tau, rho, survived = sample_scenarios(measure, 1, seed_or_rng)
    if survived[0]:
        return SURVIVAL
    return DefaultScenario(float(tau[0]), float(rho[0]))
