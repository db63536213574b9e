"""Figure rendering for the CLI: every plot is drawn from the CSVs on disk.

Figures are static SVGs written next to the CSVs they visualize; nothing
is computed here beyond parsing the files back.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .output import read_csv


def _rows_as_floats(path, text_cols=()):
    header, rows = read_csv(path)
    out = []
    for row in rows:
        rec = {}
        for key, cell in zip(header, row):
            rec[key] = cell if key in text_cols else float(cell)
        out.append(rec)
    return out


def _grouped(rows, key):
    groups = defaultdict(list)
    for row in rows:
        groups[row[key]].append(row)
    return groups


def plot_bounds(outdir: Path) -> list[Path]:
    rows = _rows_as_floats(outdir / "bounds.csv")
    fig, ax = plt.subplots(figsize=(7, 5))
    x = [r["w_old_bp"] for r in rows]
    for col, style in [
        ("v_lub", "b-"),
        ("v_glb", "r-"),
        ("v_lub_vanilla", "b--"),
        ("v_glb_vanilla", "r--"),
    ]:
        ax.plot(x, [r[col] for r in rows], style, label=col)
    ax.set_xlabel("illiquid spread (bp/yr)")
    ax.set_ylabel("price bound per unit notional")
    ax.legend()
    target = outdir / "bounds.svg"
    fig.savefig(target)
    plt.close(fig)
    return [target]


def plot_hedge(outdir: Path) -> list[Path]:
    header, rows = read_csv(outdir / "hedge_portfolios.csv")
    fig, ax = plt.subplots(figsize=(7, 5))
    labels = header[1:-2]
    width = 0.35
    for k, row in enumerate(rows):
        values = [float(v) for v in row[1:-2]]
        ax.bar([i + k * width for i in range(len(values))], values, width, label=row[0])
    ax.set_xticks([i + width / 2 for i in range(len(labels))])
    ax.set_xticklabels(labels)
    ax.set_ylabel("notional / deposit")
    ax.legend()
    target = outdir / "hedge_portfolios.svg"
    fig.savefig(target)
    plt.close(fig)
    return [target]


def plot_density(outdir: Path) -> list[Path]:
    analytic = _grouped(_rows_as_floats(outdir / "density_analytic.csv", ("position",)), "position")
    mc = _grouped(_rows_as_floats(outdir / "density_mc.csv", ("position",)), "position")
    atoms = _grouped(
        _rows_as_floats(outdir / "density_atoms.csv", ("position", "source")), "position"
    )
    names = sorted(analytic)
    fig, axes = plt.subplots(len(names), 1, figsize=(7, 3 * len(names)), squeeze=False)
    for ax, name in zip(axes[:, 0], names):
        rows = analytic[name]
        ax.plot([r["delta"] for r in rows], [r["density"] for r in rows], "b-", label="analytic")
        rows = mc.get(name, [])
        ax.plot(
            [r["delta"] for r in rows],
            [r["density"] for r in rows],
            "g.",
            markersize=2,
            label="monte carlo",
        )
        for atom in atoms.get(name, []):
            if atom["source"] == "analytic" and atom["mass"] > 0:
                ax.axvline(atom["location"], color="k", linestyle=":",
                           label=f"atom mass {atom['mass']:.3f}")
        ax.set_title(name)
        ax.set_xlabel("realized PV")
        ax.set_ylabel("density")
        ax.legend(fontsize=8)
    fig.tight_layout()
    target = outdir / "density.svg"
    fig.savefig(target)
    plt.close(fig)
    return [target]


def _plot_curve_file(path: Path, x_col: str, y_col: str, target: Path) -> Path:
    rows = _rows_as_floats(path, ("hedge", "side"))
    fig, ax = plt.subplots(figsize=(7, 5))
    for (hedge, side), group in _grouped(
        [dict(r, key=(r["hedge"], r["side"])) for r in rows], "key"
    ).items():
        ax.plot([r[x_col] for r in group], [r[y_col] for r in group], label=f"{hedge} {side}")
    ax.set_xlabel(x_col)
    ax.set_ylabel(y_col)
    ax.legend()
    fig.savefig(target)
    plt.close(fig)
    return target


def plot_gooddeal(outdir: Path) -> list[Path]:
    return [
        _plot_curve_file(
            outdir / "gooddeal_return_curve.csv", "price", "r_t", outdir / "gooddeal_return_curve.svg"
        ),
        _plot_curve_file(
            outdir / "gooddeal_capital_curve.csv", "r_t", "l_max", outdir / "gooddeal_capital_curve.svg"
        ),
        _plot_curve_file(
            outdir / "gooddeal_sharpe_curve.csv", "price", "s_r", outdir / "gooddeal_sharpe_curve.svg"
        ),
    ]


def plot_sweep(outdir: Path) -> list[Path]:
    rows = _rows_as_floats(outdir / "sweep.csv", ("recovery",))
    fig, ax = plt.subplots(figsize=(7, 5))
    for label, group in _grouped(rows, "recovery").items():
        x = [r["pd1"] for r in group]
        ax.plot(x, [r["ask"] for r in group], label=f"ask {label}")
        ax.plot(x, [r["bid"] for r in group], "--", label=f"bid {label}")
    ax.set_xlabel("one-year default probability")
    ax.set_ylabel("price per unit notional")
    ax.legend(fontsize=8)
    target = outdir / "sweep.svg"
    fig.savefig(target)
    plt.close(fig)
    return [target]


def plot_scalecheck(outdir: Path) -> list[Path]:
    rows = _rows_as_floats(outdir / "scalecheck.csv", ("check", "status"))
    fig, ax = plt.subplots(figsize=(8, 5))
    labels = [f"{r['check']}\nsigma={r['sigma']:+.0f} W={r['w_bp']:.0f}bp" for r in rows]
    ax.bar(range(len(rows)), [max(r["value"], 1e-18) for r in rows])
    ax.plot(range(len(rows)), [r["limit"] for r in rows], "r_", markersize=14, label="limit")
    ax.set_yscale("log")
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, fontsize=5, rotation=90)
    ax.set_ylabel("deviation")
    ax.legend()
    fig.tight_layout()
    target = outdir / "scalecheck.svg"
    fig.savefig(target)
    plt.close(fig)
    return [target]


_RENDERERS = {
    "bounds": plot_bounds,
    "hedge": plot_hedge,
    "density": plot_density,
    "gooddeal": plot_gooddeal,
    "sweep": plot_sweep,
    "scalecheck": plot_scalecheck,
}


def render(command: str, outdir: str | Path) -> list[Path]:
    return _RENDERERS[command](Path(outdir))
