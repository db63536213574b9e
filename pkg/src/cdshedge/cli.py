"""Command-line interface: reproducible CSV reports with optional figures.

    cdshedge <command> --out DIR [--config PATH] [--seed N] [--plots]

Commands:
    bounds      price bounds versus the illiquid spread (multi-CDS and
                single-CDS hedges)
    hedge       bound portfolios at the configured spread plus the
                uniqueness probe report
    density     semi-analytic and Monte Carlo PV densities with atoms
    gooddeal    bid/ask quotes and return / capital / Sharpe curves
    sweep       bid/ask robustness across default probability and
                recovery law
    scalecheck  spread-gap scaling invariance report

Exit codes: 0 success, 2 configuration error, 3 bound problem infeasible
or unbounded, 4 internal tolerance breach.  Identical config and seed
produce byte-identical CSVs; ``--plots`` renders figures from the CSVs
just written.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import gooddeal as gd
from . import hedging, lattice, lp, valuation
from .config import ConfigError, RunContext, build_context, parse_config, parse_float_list, parse_range
from .market import CdsSpec, HedgePortfolio, HedgedPosition
from .measure import standard_recoveries
from .output import write_csv


class ToleranceBreachError(RuntimeError):
    """An internal self-check failed beyond its documented tolerance."""


def _checked_solve(system) -> lp.LpSolution:
    sol = lp.solve(system)
    if not sol.optimal:
        raise lp.LpStatusError(sol.status, system.side)
    try:
        lp.check_solution(system, sol)
    except ArithmeticError as exc:
        raise ToleranceBreachError(str(exc)) from exc
    return sol


def _checked_bounds(ctx: RunContext, illiquid: CdsSpec, quotes) -> hedging.NoArbBounds:
    sys_ask = lattice.build_system(ctx.grid, _unit(illiquid), quotes, +1)
    sys_bid = lattice.build_system(ctx.grid, _unit(illiquid), quotes, -1)
    sol_ask = _checked_solve(sys_ask)
    sol_bid = _checked_solve(sys_bid)
    scale = abs(illiquid.notional)
    va, vb = scale * sol_ask.variables, scale * sol_bid.variables
    return hedging.NoArbBounds(
        v_lub=scale * sol_ask.objective,
        v_glb=scale * sol_bid.objective,
        hedge_lub=HedgePortfolio(tuple(va[:-1]), float(va[-1]), +1),
        hedge_glb=HedgePortfolio(tuple(vb[:-1]), float(vb[-1]), -1),
        solution_lub=sol_ask,
        solution_glb=sol_bid,
    )


def _unit(illiquid: CdsSpec) -> CdsSpec:
    return CdsSpec(illiquid.maturity_index, illiquid.spread, 1.0)


def _matched_quote(ctx: RunContext):
    for quote in ctx.quotes:
        if quote.maturity_index == ctx.illiquid.maturity_index:
            return quote
    return None


def cmd_bounds(ctx: RunContext, outdir: Path) -> list[Path]:
    w_grid_bp = parse_range(ctx.values["bounds.w_old_bp"], "bounds.w_old_bp")
    matched = _matched_quote(ctx)
    rows = []
    for w_bp in w_grid_bp:
        illiquid = CdsSpec(ctx.illiquid.maturity_index, w_bp / 1e4, ctx.illiquid.notional)
        bounds = _checked_bounds(ctx, illiquid, ctx.quotes)
        if matched is not None:
            vanilla = _checked_bounds(ctx, illiquid, (matched,))
            v_lub_v, v_glb_v = vanilla.v_lub, vanilla.v_glb
        else:
            v_lub_v, v_glb_v = float("nan"), float("nan")
        rows.append([w_bp, bounds.v_lub, bounds.v_glb, v_lub_v, v_glb_v])
    path = write_csv(
        outdir / "bounds.csv",
        ["w_old_bp", "v_lub", "v_glb", "v_lub_vanilla", "v_glb_vanilla"],
        rows,
    )
    return [path]


def cmd_hedge(ctx: RunContext, outdir: Path) -> list[Path]:
    trials = int(ctx.values["hedge.probe_trials"])
    scale = float(ctx.values["hedge.probe_scale"])
    sys_ask = lattice.build_system(ctx.grid, _unit(ctx.illiquid), ctx.quotes, +1)
    sys_bid = lattice.build_system(ctx.grid, _unit(ctx.illiquid), ctx.quotes, -1)
    rows, probe_rows = [], []
    for label, system in [("lub", sys_ask), ("glb", sys_bid)]:
        sol = _checked_solve(system)
        v = abs(ctx.illiquid.notional) * sol.variables
        rows.append([label, *v[:-1], v[-1], float(np.sum(v[:-1])), float(system.c @ sol.variables)])
        probe = lp.uniqueness_probe(system, sol, trials=trials, scale=scale, seed=ctx.seed)
        probe_rows.append(
            [label, probe.classification, probe.max_deviation, probe.trials, probe.n_failed]
        )
    alpha_cols = [f"alpha_{p + 1}" for p in range(len(ctx.quotes))]
    paths = [
        write_csv(
            outdir / "hedge_portfolios.csv",
            ["portfolio", *alpha_cols, "deposit", "alpha_total", "value"],
            rows,
        ),
        write_csv(
            outdir / "uniqueness_probe.csv",
            ["portfolio", "classification", "max_deviation", "trials", "n_failed"],
            probe_rows,
        ),
    ]
    return paths


def _density_positions(ctx: RunContext):
    matched = _matched_quote(ctx)
    single_quote = matched if matched is not None else ctx.quotes[-1]
    positions = [
        (
            "single_cds",
            HedgedPosition(
                0.0, (CdsSpec(single_quote.maturity_index, single_quote.spread, 1.0),)
            ),
        )
    ]
    bounds = _checked_bounds(ctx, ctx.illiquid, ctx.quotes)
    positions.append(
        ("multi_lub", hedging.hedged_position(ctx.illiquid, ctx.quotes, bounds.hedge_lub))
    )
    positions.append(
        ("multi_glb", hedging.hedged_position(ctx.illiquid, ctx.quotes, bounds.hedge_glb))
    )
    if matched is not None:
        vanilla = hedging.plain_vanilla_bounds(ctx.grid, ctx.illiquid, matched)
        positions.append(
            ("vanilla_lub", hedging.hedged_position(ctx.illiquid, (matched,), vanilla.hedge_lub))
        )
        positions.append(
            ("vanilla_glb", hedging.hedged_position(ctx.illiquid, (matched,), vanilla.hedge_glb))
        )
    return positions


def cmd_density(ctx: RunContext, outdir: Path) -> list[Path]:
    positions = _density_positions(ctx)
    seeds = np.random.SeedSequence(ctx.seed).spawn(len(positions))
    curve_rows, atom_rows, mc_rows = [], [], []
    for (name, position), seed in zip(positions, seeds):
        curve = valuation.density(ctx.grid, position, ctx.measure, ctx.delta_grid)
        # mass self-check on a fine grid, so a coarse output grid does not
        # masquerade as an inconsistency
        gate = (
            curve
            if ctx.delta_grid >= 2001
            else valuation.density(ctx.grid, position, ctx.measure, 2001)
        )
        total = gate.total_mass()
        if abs(total - 1.0) > 1e-3:
            raise ToleranceBreachError(
                f"density mass for {name} is {total}, off unity by more than 1e-3"
            )
        mc = valuation.density_mc_oracle(
            ctx.grid, position, ctx.measure, ctx.mc_samples, seed=np.random.default_rng(seed)
        )
        curve_rows += [[name, d, g] for d, g in zip(curve.grid, curve.values)]
        atom_rows += [[name, "analytic", loc, mass] for loc, mass in curve.atoms]
        atom_rows += [[name, "mc", loc, mass] for loc, mass in mc.atoms]
        mc_rows += [[name, d, g] for d, g in zip(mc.grid, mc.values)]
    paths = [
        write_csv(outdir / "density_analytic.csv", ["position", "delta", "density"], curve_rows),
        write_csv(outdir / "density_atoms.csv", ["position", "source", "location", "mass"], atom_rows),
        write_csv(outdir / "density_mc.csv", ["position", "delta", "density"], mc_rows),
    ]
    return paths


def cmd_gooddeal(ctx: RunContext, outdir: Path) -> list[Path]:
    matched = _matched_quote(ctx)
    hedge_sets = [("multi", ctx.quotes, _checked_bounds(ctx, ctx.illiquid, ctx.quotes))]
    if matched is not None:
        hedge_sets.append(
            ("vanilla", (matched,), _checked_bounds(ctx, ctx.illiquid, (matched,)))
        )
    quote_rows, ret_rows, cap_rows, sharpe_rows = [], [], [], []
    for name, quotes, bounds in hedge_sets:
        for side, v_bound, hedge in [
            (+1, bounds.v_lub, bounds.hedge_lub),
            (-1, bounds.v_glb, bounds.hedge_glb),
        ]:
            position = hedging.hedged_position(ctx.illiquid, quotes, hedge)
            mean = valuation.mean_pv(ctx.grid, position, ctx.measure)
            if ctx.s_r is not None:
                # Sharpe criterion: back out the per-side return level
                l_max = gd.lmax_from_sharpe(ctx.s_r, mean)
                r_t = gd.rt_from_lambda(l_max / mean) if mean > 0 else ctx.r_t
            else:
                r_t = ctx.r_t
            result = gd.good_deal_quote(side, v_bound, mean, r_t)
            side_label = "ask" if side == +1 else "bid"
            quote_rows.append(
                [
                    name,
                    side_label,
                    result.v_bound,
                    result.mean_pv,
                    result.u_min,
                    result.u_max,
                    result.r_t,
                    result.lam,
                    result.price,
                    result.l_max,
                    result.s_r,
                ]
            )
            span = result.u_max - result.u_min
            for k in range(1, 100):
                price = result.u_min + span * k / 100.0
                point = gd.sharpe_curves(side, v_bound, mean, price)
                ret_rows.append([name, side_label, price, point.r_t])
                sharpe_rows.append([name, side_label, price, point.s_r])
            for k in range(1, 201):
                r_t = 0.01 * k
                lam = gd.lambda_from_rt(r_t)
                cap_rows.append([name, side_label, r_t, lam * mean])
    paths = [
        write_csv(
            outdir / "gooddeal_quotes.csv",
            ["hedge", "side", "v_bound", "mean_pv", "u_min", "u_max", "r_t", "lambda", "price", "l_max", "s_r"],
            quote_rows,
        ),
        write_csv(outdir / "gooddeal_return_curve.csv", ["hedge", "side", "price", "r_t"], ret_rows),
        write_csv(outdir / "gooddeal_capital_curve.csv", ["hedge", "side", "r_t", "l_max"], cap_rows),
        write_csv(outdir / "gooddeal_sharpe_curve.csv", ["hedge", "side", "price", "s_r"], sharpe_rows),
    ]
    return paths


def cmd_sweep(ctx: RunContext, outdir: Path) -> list[Path]:
    pd1_grid = parse_range(ctx.values["sweep.pd1"], "sweep.pd1")
    presets = standard_recoveries()
    labels = [s.strip() for s in ctx.values["sweep.recoveries"].split(",") if s.strip()]
    unknown = [label for label in labels if label not in presets]
    if unknown:
        raise ConfigError(f"unknown recovery presets in sweep.recoveries: {unknown}")
    specs = {label: presets[label] for label in labels}
    rows = gd.robustness_sweep(ctx.grid, ctx.illiquid, ctx.quotes, pd1_grid, specs, ctx.r_t)
    path = write_csv(
        outdir / "sweep.csv",
        ["pd1", "recovery", "bid", "ask"],
        [[r.pd1, r.recovery_label, r.bid, r.ask] for r in rows],
    )
    return [path]


def cmd_scalecheck(ctx: RunContext, outdir: Path) -> list[Path]:
    matched = _matched_quote(ctx)
    if matched is None:
        raise ConfigError("scalecheck needs a market quote at the illiquid maturity")
    w_list = sorted(parse_float_list(ctx.values["scalecheck.w_bp"], "scalecheck.w_bp"))
    if len(w_list) < 2:
        raise ConfigError("scalecheck.w_bp needs at least two gap values")
    mu = +1 if matched.spread >= ctx.illiquid.spread else -1
    if mu == +1 and max(w_list) / 1e4 > matched.spread:
        raise ConfigError(
            "scalecheck.w_bp exceeds the matched market spread; the implied "
            "illiquid spread would be negative"
        )
    rows = []
    failed = False

    def record(check: str, sigma: int, w_bp: float, value: float, limit: float):
        nonlocal failed
        ok = value <= limit
        failed = failed or not ok
        rows.append([check, sigma, w_bp, value, limit, "pass" if ok else "fail"])

    for sigma in (+1, -1):
        scaled = hedging.reduce_to_scaled(ctx.grid, ctx.illiquid, ctx.quotes, sigma)
        w_hi = max(w_list) / 1e4
        pos_hi = hedging.scaled_position(ctx.illiquid, ctx.quotes, scaled, w_hi)
        curve_hi = valuation.density(ctx.grid, pos_hi, ctx.measure, ctx.delta_grid)
        mean_hi = valuation.mean_pv(ctx.grid, pos_hi, ctx.measure)
        for w_bp in w_list:
            w = w_bp / 1e4
            w_old = matched.spread - mu * w
            illiquid_w = CdsSpec(ctx.illiquid.maturity_index, w_old, 1.0)
            bounds = _checked_bounds(ctx, illiquid_w, ctx.quotes)
            hedge = bounds.hedge_lub if sigma == +1 else bounds.hedge_glb
            direct = bounds.v_lub if sigma == +1 else bounds.v_glb
            v_prime = hedging.scaled_from_hedge(illiquid_w, ctx.quotes, hedge)
            record(
                "v_prime_invariance", sigma, w_bp,
                float(np.abs(v_prime - scaled.v_prime).max()), 1e-8,
            )
            record(
                "bound_reconstruction", sigma, w_bp,
                abs(scaled.bound_value(w) - direct), 1e-8,
            )
            pos_w = hedging.scaled_position(ctx.illiquid, ctx.quotes, scaled, w)
            record(
                "mean_linearity", sigma, w_bp,
                abs(valuation.mean_pv(ctx.grid, pos_w, ctx.measure) - (w / w_hi) * mean_hi),
                1e-10,
            )
            if w_bp != max(w_list):
                f = w_hi / w
                curve_w = valuation.density(ctx.grid, pos_w, ctx.measure, curve_hi.grid / f)
                rescaled = valuation.scale_density(curve_hi, f)
                record(
                    "density_scaling", sigma, w_bp,
                    float(np.abs(rescaled.values - curve_w.values).max()), 1e-8,
                )
    path = write_csv(
        outdir / "scalecheck.csv",
        ["check", "sigma", "w_bp", "value", "limit", "status"],
        rows,
    )
    if failed:
        raise ToleranceBreachError("scaling invariance checks failed; see scalecheck.csv")
    return [path]


_COMMANDS = {
    "bounds": cmd_bounds,
    "hedge": cmd_hedge,
    "density": cmd_density,
    "gooddeal": cmd_gooddeal,
    "sweep": cmd_sweep,
    "scalecheck": cmd_scalecheck,
}


def run(
    command: str,
    config_path: str | None,
    output_dir: str,
    seed: int | None = None,
    plots: bool = False,
) -> int:
    """Execute one command; returns the process exit code."""
    try:
        values = parse_config(config_path)
        ctx = build_context(values, seed_override=seed)
        outdir = Path(output_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        written = _COMMANDS[command](ctx, outdir)
        if plots:
            from . import plots as plotting

            written += plotting.render(command, outdir)
        for path in written:
            print(path)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except lp.LpStatusError as exc:
        print(f"bound problem failed: {exc}", file=sys.stderr)
        return 3
    except ToleranceBreachError as exc:
        print(f"self-check failed: {exc}", file=sys.stderr)
        return 4


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cdshedge",
        description="Bound hedges and good-deal bid/ask prices for illiquid CDSs",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", default=None, help="key-value config file")
    parser.add_argument("--out", required=True, help="output directory for CSVs")
    parser.add_argument("--seed", type=int, default=None, help="override run.seed")
    parser.add_argument("--plots", action="store_true", help="render figures from the CSVs")
    args = parser.parse_args(argv)
    return run(args.command, args.config, args.out, seed=args.seed, plots=args.plots)


if __name__ == "__main__":
    sys.exit(main())
