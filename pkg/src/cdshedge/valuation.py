"""Distribution of a hedged position's realized present value.

Within each quarter the position PV is affine in the recovery rate,

    PV(tau, rho) = f(tau) + (1 - rho) * exp(-r * tau) * S_i,

where ``f`` is the premium-leg curve (the rho = 1 boundary) and ``S_i``
the net notional of the legs still alive in quarter ``i``.  Changing
variables from (tau, rho) to (tau, PV) turns the joint density of default
time and recovery into a PV density with Jacobian exp(r * tau) / |S_i|:

    density(v) = sum_i  integral  Y(tau) gamma(rho(tau, v))
                        * exp(r * tau) / |S_i|  dtau

taken over the tau-range of quarter i where the implied recovery lies in
[0, 1].  Quarters with S_i = 0 have a rho-independent PV and contribute
the one-dimensional density Y(tau(v)) / |f'(tau(v))| instead; quarters
where the PV is entirely flat contribute point masses, as does survival
past the horizon.  The tau-limits come from bisection on the monotone
boundary curves, and each tau-integral uses fixed Gauss-Legendre nodes,
so results are deterministic.

The Monte Carlo histogram in :func:`density_mc_oracle` goes through the
exact pathwise PV instead and serves as an independent check on the
change-of-variables route.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market import HedgedPosition, TenorGrid
from .measure import PhysicalMeasure, TwoPointRecovery, _trapezoid, sample_scenarios, survival_mass

_GL64_NODES = np.polynomial.legendre.leggauss(32)
_GL16_NODES = np.polynomial.legendre.leggauss(16)

# Net notionals below this are treated as exactly cancelled; LP vertices
# reproduce offsetting notionals only to solver precision.
_NET_NOTIONAL_TOL = 1e-9
_BISECTION_ITERS = 60


@dataclass(frozen=True)
class DensityCurve:
    """Continuous PV density on a grid plus point masses.

    ``values`` give the continuous part only; ``atoms`` are (location,
    mass) pairs kept exact rather than smeared into the grid.
    """

    grid: np.ndarray
    values: np.ndarray
    atoms: tuple[tuple[float, float], ...]
    warning: bool = False

    def continuous_mass(self) -> float:
        return _trapezoid(self.values, self.grid)

    def atom_mass(self) -> float:
        return float(sum(m for _, m in self.atoms))

    def total_mass(self) -> float:
        return self.continuous_mass() + self.atom_mass()

    def mean(self) -> float:
        cont = _trapezoid(self.grid * self.values, self.grid)
        return cont + float(sum(loc * m for loc, m in self.atoms))

    def interquantile_range(self, lo: float = 0.01, hi: float = 0.99) -> float:
        """Width of the continuous part between two of its own quantiles.

        A pragmatic "overall spread of likely outcomes" figure: the
        default 1%-99% band of the continuous density, ignoring atoms.
        """
        if not 0.0 <= lo < hi <= 1.0:
            raise ValueError("quantile levels must satisfy 0 <= lo < hi <= 1")
        steps = 0.5 * (self.values[1:] + self.values[:-1]) * np.diff(self.grid)
        cdf = np.concatenate([[0.0], np.cumsum(steps)])
        if cdf[-1] <= 0.0:
            raise ValueError("curve has no continuous mass")
        cdf = cdf / cdf[-1]
        return float(np.interp(hi, cdf, self.grid) - np.interp(lo, cdf, self.grid))


@dataclass(frozen=True)
class RiskSummary:
    """Scalar risk measures of a priced hedged position."""

    mean_pv: float
    max_loss: float
    loss_prob: float
    cond_loss: float | None


@dataclass(frozen=True)
class _Piece:
    """One tau-segment with constant live-leg aggregates.

    The premium-leg boundary is f(tau) = level - spread_notional * accrual
    with accrual (tau - t_anchor) * exp(-r * tau); the rho = 0 boundary
    adds exp(-r * tau) * loss_notional.  Segments are split where the
    rho = 0 boundary changes direction so both boundaries are monotone.
    """

    t_anchor: float
    t0: float
    t1: float
    loss_notional: float
    spread_notional: float
    level: float


def _position_pieces(grid: TenorGrid, position: HedgedPosition) -> list[_Piece]:
    r = grid.risk_free_rate
    q = grid.quarter_length
    if r * q >= 1.0:
        raise ValueError("rate * quarter_length >= 1 breaks boundary monotonicity")
    cumsum = grid.annuity_cumsum
    pieces = []
    for i in range(1, grid.n_quarters + 1):
        t0 = grid.interval_start(i)
        t1 = float(grid.payment_times[i - 1])
        live = [leg for leg in position.legs if leg.maturity_index >= i]
        dead = [leg for leg in position.legs if leg.maturity_index < i]
        s_net = float(sum(leg.notional for leg in live))
        ws_net = float(sum(leg.notional * leg.spread for leg in live))
        level = (
            position.deposit
            - sum(leg.notional * leg.spread * float(cumsum[leg.maturity_index]) for leg in dead)
            - ws_net * float(cumsum[i - 1])
        )
        splits = [t0, t1]
        if r > 0.0 and abs(ws_net) > 0.0:
            # direction change of the rho = 0 boundary
            u_star = (ws_net + r * s_net) / (r * ws_net)
            if 0.0 < u_star < q:
                splits = [t0, t0 + u_star, t1]
        for lo, hi in zip(splits[:-1], splits[1:]):
            pieces.append(_Piece(t0, lo, hi, s_net, ws_net, level))
    return pieces


def _piece_f(piece: _Piece, grid: TenorGrid, tau):
    accrual = (tau - piece.t_anchor) * np.exp(-grid.risk_free_rate * tau)
    return piece.level - piece.spread_notional * accrual


def _piece_g(piece: _Piece, grid: TenorGrid, tau):
    return _piece_f(piece, grid, tau) + np.exp(-grid.risk_free_rate * tau) * piece.loss_notional


def _piece_f_slope(piece: _Piece, grid: TenorGrid, tau):
    r = grid.risk_free_rate
    return -piece.spread_notional * np.exp(-r * tau) * (1.0 - r * (tau - piece.t_anchor))


def _invert_monotone(fn, t0: float, t1: float, targets: np.ndarray) -> np.ndarray:
    """Bisection solve fn(tau) = target on [t0, t1] for a monotone fn."""
    lo = np.full(targets.shape, t0)
    hi = np.full(targets.shape, t1)
    increasing = fn(t1) >= fn(t0)
    y = np.clip(targets, min(fn(t0), fn(t1)), max(fn(t0), fn(t1)))
    for _ in range(_BISECTION_ITERS):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        go_right = fm < y if increasing else fm > y
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    return 0.5 * (lo + hi)


def _half_interval(fn, t0, t1, targets, want_leq):
    """Tau-interval where a monotone boundary is on one side of each target."""
    v0 = float(fn(np.asarray(t0)))
    v1 = float(fn(np.asarray(t1)))
    increasing = v1 >= v0
    root = _invert_monotone(fn, t0, t1, targets)
    if want_leq:
        if increasing:
            low = np.full(targets.shape, t0)
            high = np.where(targets >= v1, t1, np.where(targets <= v0, t0, root))
        else:
            high = np.full(targets.shape, t1)
            low = np.where(targets >= v0, t0, np.where(targets <= v1, t1, root))
    else:
        if increasing:
            high = np.full(targets.shape, t1)
            low = np.where(targets <= v0, t0, np.where(targets >= v1, t1, root))
        else:
            low = np.full(targets.shape, t0)
            high = np.where(targets <= v1, t1, np.where(targets >= v0, t0, root))
    return low, high


def _support_edges(piece: _Piece, grid: TenorGrid) -> tuple[float, float]:
    cands = [
        float(_piece_f(piece, grid, np.asarray(piece.t0))),
        float(_piece_f(piece, grid, np.asarray(piece.t1))),
    ]
    if abs(piece.loss_notional) > _NET_NOTIONAL_TOL:
        cands.append(float(_piece_g(piece, grid, np.asarray(piece.t0))))
        cands.append(float(_piece_g(piece, grid, np.asarray(piece.t1))))
    return min(cands), max(cands)


def _merge_atoms(atoms: list[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    merged: list[list[float]] = []
    for loc, mass in sorted(atoms):
        if merged and abs(loc - merged[-1][0]) <= 1e-12:
            merged[-1][1] += mass
        else:
            merged.append([loc, mass])
    return tuple((loc, mass) for loc, mass in merged if mass > 0.0)


def _check_horizon(grid: TenorGrid, measure: PhysicalMeasure) -> None:
    if abs(measure.horizon - grid.horizon) > 1e-9:
        raise ValueError(
            f"measure horizon {measure.horizon} does not match grid horizon {grid.horizon}"
        )


def density(
    grid: TenorGrid,
    position: HedgedPosition,
    measure: PhysicalMeasure,
    delta_grid: int | np.ndarray = 2001,
) -> DensityCurve:
    """Semi-analytic PV density of a hedged position.

    ``delta_grid`` is either a point count (grid spans the attainable PV
    range with a 1% margin) or an explicit array of abscissae.
    """
    _check_horizon(grid, measure)
    pieces = _position_pieces(grid, position)
    atoms = [(position.pv_survived(grid), survival_mass(measure))]
    flat, one_dim, two_dim = [], [], []
    for piece in pieces:
        if abs(piece.loss_notional) > _NET_NOTIONAL_TOL:
            two_dim.append(piece)
        elif abs(piece.spread_notional) > _NET_NOTIONAL_TOL:
            one_dim.append(piece)
        else:
            flat.append(piece)
    for piece in flat:
        atoms.append((piece.level, measure.default_mass_between(piece.t0, piece.t1)))
    atoms = _merge_atoms(atoms)

    if isinstance(delta_grid, np.ndarray):
        targets = np.asarray(delta_grid, dtype=float)
    else:
        edges = [_support_edges(p, grid) for p in one_dim + two_dim]
        cands = [loc for loc, _ in atoms]
        cands += [e for pair in edges for e in pair]
        lo, hi = min(cands), max(cands)
        if hi - lo < 1e-12:
            lo, hi = lo - 0.5, hi + 0.5
        margin = 0.01 * (hi - lo)
        targets = np.linspace(lo - margin, hi + margin, int(delta_grid))

    values = np.zeros(targets.shape)
    step = float(np.max(np.diff(targets))) if targets.size > 1 else np.inf
    warning = False
    r = grid.risk_free_rate

    for piece in two_dim:
        s_net = piece.loss_notional
        f = lambda tau, p=piece: _piece_f(p, grid, tau)
        g = lambda tau, p=piece: _piece_g(p, grid, tau)
        lo_f, hi_f = _half_interval(f, piece.t0, piece.t1, targets, want_leq=s_net > 0)
        lo_g, hi_g = _half_interval(g, piece.t0, piece.t1, targets, want_leq=s_net < 0)
        low = np.maximum(lo_f, lo_g)
        high = np.minimum(hi_f, hi_g)
        width = np.maximum(high - low, 0.0)
        mask = width > 0.0
        if not mask.any():
            continue
        e_lo, e_hi = _support_edges(piece, grid)
        warning = warning or (e_hi - e_lo) < 2.0 * step
        nodes, weights = _GL64_NODES
        tau = low[:, None] + 0.5 * (nodes[None, :] + 1.0) * width[:, None]
        f_tau = _piece_f(piece, grid, tau)
        rho = 1.0 - (targets[:, None] - f_tau) * np.exp(r * tau) / s_net
        rho = np.clip(rho, 0.0, 1.0)
        integrand = (
            measure.default_density(tau)
            * measure.recovery.density(rho)
            * np.exp(r * tau)
            / abs(s_net)
        )
        contrib = 0.5 * width * (integrand @ weights)
        values += np.where(mask, contrib, 0.0)

    for piece in one_dim:
        f = lambda tau, p=piece: _piece_f(p, grid, tau)
        v0 = float(f(np.asarray(piece.t0)))
        v1 = float(f(np.asarray(piece.t1)))
        # tau-range is open at t0, so the t0-value is excluded
        if v1 >= v0:
            mask = (targets > v0) & (targets <= v1)
        else:
            mask = (targets >= v1) & (targets < v0)
        if not mask.any():
            continue
        warning = warning or abs(v1 - v0) < 2.0 * step
        tau_star = _invert_monotone(f, piece.t0, piece.t1, targets)
        slope = _piece_f_slope(piece, grid, tau_star)
        dens = measure.default_density(tau_star) / np.abs(slope)
        values += np.where(mask, dens, 0.0)

    return DensityCurve(grid=targets, values=values, atoms=atoms, warning=warning)


def mean_pv(
    grid: TenorGrid,
    position: HedgedPosition,
    measure: PhysicalMeasure,
    collapse_recovery: bool = True,
) -> float:
    """Expected realized PV of the position under the physical measure.

    Because the PV is affine in the recovery rate, the recovery integral
    collapses exactly to the mean recovery; ``collapse_recovery=False``
    keeps the full tensor quadrature for validation (continuous recovery
    laws only).  Quadrature is Gauss-Legendre per quarter, summed in fixed
    order.
    """
    _check_horizon(grid, measure)
    total = survival_mass(measure) * position.pv_survived(grid)
    nodes, weights = _GL16_NODES
    if collapse_recovery:
        rho_bar = measure.recovery.mean()
    else:
        if isinstance(measure.recovery, TwoPointRecovery):
            raise TypeError("tensor quadrature needs a recovery density")
        rho_nodes = 0.5 * (nodes + 1.0)
        rho_weights = 0.5 * weights * measure.recovery.density(rho_nodes)
    for i in range(1, grid.n_quarters + 1):
        t0 = grid.interval_start(i)
        t1 = float(grid.payment_times[i - 1])
        tau = t0 + 0.5 * (nodes + 1.0) * (t1 - t0)
        w_tau = 0.5 * (t1 - t0) * weights * measure.default_density(tau)
        if collapse_recovery:
            pv = position.pv_array(grid, tau, np.full(tau.shape, rho_bar))
            total += float(pv @ w_tau)
        else:
            for rho, w_rho in zip(rho_nodes, rho_weights):
                pv = position.pv_array(grid, tau, np.full(tau.shape, rho))
                total += float(pv @ w_tau) * w_rho
    return total


def density_mc_oracle(
    grid: TenorGrid,
    position: HedgedPosition,
    measure: PhysicalMeasure,
    n_samples: int,
    seed: int = 0,
    bins: int = 400,
) -> DensityCurve:
    """Histogram density from exact pathwise PVs of sampled scenarios.

    Survived draws go straight into the survival atom; a degenerate
    defaulted-PV range collapses into an atom as well.  Deterministic
    given the seed.
    """
    _check_horizon(grid, measure)
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    tau, rho, survived = sample_scenarios(measure, n_samples, seed)
    atoms = [(position.pv_survived(grid), float(survived.sum()) / n_samples)]
    defaulted = ~survived
    pvs = position.pv_array(grid, tau[defaulted], rho[defaulted])
    if pvs.size == 0:
        return DensityCurve(np.array([0.0]), np.array([0.0]), _merge_atoms(atoms))
    span = float(pvs.max() - pvs.min())
    if span < 1e-12:
        atoms.append((float(pvs[0]), pvs.size / n_samples))
        return DensityCurve(np.array([0.0]), np.array([0.0]), _merge_atoms(atoms))
    counts, edges = np.histogram(pvs, bins=bins)
    centers = 0.5 * (edges[1:] + edges[:-1])
    widths = np.diff(edges)
    return DensityCurve(centers, counts / (n_samples * widths), _merge_atoms(atoms))


def scale_density(curve: DensityCurve, f: float) -> DensityCurve:
    """Density for a spread gap shrunk by ``f``: abscissae divide, values scale.

    The PV of a gap-scaled position is proportional to the gap, so
    density(v / f) at gap W / f equals f * density(v) at gap W; atom
    masses are gap-independent.
    """
    if f <= 0.0:
        raise ValueError("scale factor must be positive")
    return DensityCurve(
        grid=curve.grid / f,
        values=curve.values * f,
        atoms=tuple((loc / f, mass) for loc, mass in curve.atoms),
        warning=curve.warning,
    )


def loss_density(curve: DensityCurve, lam: float, mean_pv: float) -> DensityCurve:
    """Density of the realized loss L = lam * mean - PV.

    A reflection of the PV density; the loss support is capped at
    lam * mean for positions with non-negative payoffs.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("profit share must lie in [0, 1]")
    pivot = lam * mean_pv
    return DensityCurve(
        grid=(pivot - curve.grid)[::-1],
        values=curve.values[::-1].copy(),
        atoms=tuple(sorted((pivot - loc, mass) for loc, mass in curve.atoms)),
        warning=curve.warning,
    )


def _partial_lower_integrals(grid, values, cut):
    """(mass, first moment of (cut - x)) of the density below ``cut``."""
    mass = 0.0
    moment = 0.0
    for k in range(len(grid) - 1):
        x0, x1 = float(grid[k]), float(grid[k + 1])
        y0, y1 = float(values[k]), float(values[k + 1])
        if x0 >= cut:
            break
        if x1 > cut:
            # linear interpolation inside the crossing cell
            y_cut = y0 + (y1 - y0) * (cut - x0) / (x1 - x0)
            x1, y1 = cut, y_cut
        dx = x1 - x0
        mass += 0.5 * (y0 + y1) * dx
        # integral of (cut - x) * linear density over [x0, x1]
        moment += dx * (
            (cut - x0) * (y0 / 2.0 + y1 / 6.0 - y0 / 6.0)
            + (cut - x1) * (y1 / 2.0 + y0 / 6.0 - y1 / 6.0)
        )
    return mass, moment


def risk_summary(curve: DensityCurve, lam: float, mean_pv: float) -> RiskSummary:
    """Capital at risk, loss probability, and expected conditional loss.

    The maximum possible loss is lam * mean; losses occur where the PV
    falls short of it.  ``cond_loss`` is absent when the loss probability
    vanishes.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("profit share must lie in [0, 1]")
    cut = lam * mean_pv
    prob, moment = _partial_lower_integrals(curve.grid, curve.values, cut)
    for loc, mass in curve.atoms:
        if loc < cut:
            prob += mass
            moment += (cut - loc) * mass
    if prob < 1e-15:
        return RiskSummary(mean_pv=mean_pv, max_loss=cut, loss_prob=0.0, cond_loss=None)
    return RiskSummary(mean_pv=mean_pv, max_loss=cut, loss_prob=prob, cond_loss=moment / prob)


def ks_statistic(curve: DensityCurve, samples: np.ndarray) -> float:
    """Kolmogorov-Smirnov distance between the curve's continuous part and samples.

    Both sides are conditioned on the continuous event: the analytic CDF
    is normalized by its own mass, the samples are defaulted-path PVs.
    """
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.size
    if n == 0:
        raise ValueError("no samples to compare")
    steps = 0.5 * (curve.values[1:] + curve.values[:-1]) * np.diff(curve.grid)
    cdf = np.concatenate([[0.0], np.cumsum(steps)])
    if cdf[-1] <= 0.0:
        raise ValueError("curve has no continuous mass")
    analytic = np.interp(xs, curve.grid, cdf / cdf[-1], left=0.0, right=1.0)
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    return float(max(np.max(upper - analytic), np.max(analytic - lower)))
