"""End-to-end CLI runs: artifacts, determinism, exit codes."""

import numpy as np
import pytest

from cdshedge import cli
from cdshedge.output import read_csv

FAST_CFG = "run.mc_samples = 20000\nrun.delta_grid = 401\nhedge.probe_trials = 20\n"


def _write_cfg(tmp_path, extra=""):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(FAST_CFG + extra)
    return str(cfg)


def _rows(path, *float_cols):
    header, raw = read_csv(path)
    out = []
    for row in raw:
        rec = dict(zip(header, row))
        for col in float_cols:
            rec[col] = float(rec[col])
        out.append(rec)
    return out


class TestHedgeCommand:
    def test_portfolios_and_probe(self, tmp_path):
        out = tmp_path / "out"
        assert cli.run("hedge", _write_cfg(tmp_path), str(out)) == 0
        rows = _rows(out / "hedge_portfolios.csv",
                     "alpha_1", "alpha_5", "deposit", "alpha_total", "value")
        by_name = {r["portfolio"]: r for r in rows}
        assert by_name["lub"]["alpha_5"] == pytest.approx(1.0, abs=2e-3)
        assert by_name["lub"]["deposit"] == pytest.approx(0.1720, abs=2e-3)
        assert by_name["glb"]["alpha_total"] == pytest.approx(1.0, abs=2e-3)
        probe = {r["portfolio"]: r for r in _rows(out / "uniqueness_probe.csv")}
        assert probe["lub"]["classification"] == "unique"
        assert probe["glb"]["classification"] == "unique"


class TestBoundsCommand:
    def test_standard_row_and_determinism(self, tmp_path):
        cfg = _write_cfg(tmp_path, "bounds.w_old_bp = 50:500:50\n")
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert cli.run("bounds", cfg, str(out_a)) == 0
        assert cli.run("bounds", cfg, str(out_b)) == 0
        assert (out_a / "bounds.csv").read_bytes() == (out_b / "bounds.csv").read_bytes()
        rows = _rows(out_a / "bounds.csv", "w_old_bp", "v_lub", "v_glb")
        [row] = [r for r in rows if r["w_old_bp"] == 100.0]
        assert row["v_lub"] == pytest.approx(0.3914, abs=2.5e-3)
        assert row["v_glb"] == pytest.approx(0.2571, abs=2.5e-3)


class TestGoodDealCommand:
    def test_quote_anchors(self, tmp_path):
        out = tmp_path / "out"
        assert cli.run("gooddeal", _write_cfg(tmp_path), str(out)) == 0
        rows = _rows(out / "gooddeal_quotes.csv", "price", "r_t")
        cell = {(r["hedge"], r["side"]): r for r in rows}
        assert cell[("multi", "ask")]["price"] == pytest.approx(0.3668, abs=0.0025)
        assert cell[("multi", "bid")]["price"] == pytest.approx(0.3056, abs=0.0025)
        for path in ("gooddeal_return_curve.csv", "gooddeal_capital_curve.csv",
                     "gooddeal_sharpe_curve.csv"):
            assert (out / path).exists()

    def test_sharpe_criterion_quotes(self, tmp_path):
        out = tmp_path / "out"
        cfg = _write_cfg(tmp_path, "gooddeal.s_r = 8.0\n")
        assert cli.run("gooddeal", cfg, str(out)) == 0
        rows = _rows(out / "gooddeal_quotes.csv", "s_r", "r_t", "l_max")
        for row in rows:
            assert row["s_r"] == pytest.approx(8.0, rel=1e-9)
            assert row["r_t"] == pytest.approx(8.0 * row["l_max"], rel=1e-9)


class TestDensityCommand:
    def test_curves_atoms_and_seed_effect(self, tmp_path):
        cfg = _write_cfg(tmp_path)
        out = tmp_path / "out"
        assert cli.run("density", cfg, str(out), seed=1) == 0
        atoms = _rows(out / "density_atoms.csv", "location", "mass")
        analytic = [r for r in atoms if r["position"] == "multi_glb" and r["source"] == "analytic"]
        assert analytic[0]["mass"] == pytest.approx(0.16807, abs=1e-9)
        assert analytic[0]["location"] == pytest.approx(0.210, abs=5e-4)
        names = {r["position"] for r in atoms}
        assert names == {"single_cds", "multi_lub", "multi_glb", "vanilla_lub", "vanilla_glb"}

        out2 = tmp_path / "out2"
        assert cli.run("density", cfg, str(out2), seed=2) == 0
        a = (out / "density_analytic.csv").read_bytes()
        b = (out2 / "density_analytic.csv").read_bytes()
        assert a == b  # analytic path ignores the seed
        mc_a = (out / "density_mc.csv").read_bytes()
        mc_b = (out2 / "density_mc.csv").read_bytes()
        assert mc_a != mc_b


class TestSweepCommand:
    def test_table_shape(self, tmp_path):
        cfg = _write_cfg(tmp_path, "sweep.pd1 = 0.2:0.4:0.1\n")
        out = tmp_path / "out"
        assert cli.run("sweep", cfg, str(out)) == 0
        rows = _rows(out / "sweep.csv", "pd1", "bid", "ask")
        assert len(rows) == 9
        assert all(np.isfinite(r["bid"]) and np.isfinite(r["ask"]) for r in rows)


class TestScaleCheckCommand:
    def test_all_rows_pass(self, tmp_path):
        out = tmp_path / "out"
        assert cli.run("scalecheck", _write_cfg(tmp_path), str(out)) == 0
        rows = _rows(out / "scalecheck.csv", "value", "limit")
        assert rows and all(r["status"] == "pass" for r in rows)


class TestExitCodes:
    def test_config_error(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("not.a.key = 1\n")
        assert cli.run("hedge", str(cfg), str(tmp_path / "out")) == 2

    def test_unbounded_problem(self, tmp_path):
        # inverted upfronts: shorting rich short protection against cheap
        # long protection is a free lunch, so no finite bound exists
        cfg = _write_cfg(
            tmp_path,
            "market.quotes_inline = 1:90:500;5:1:500\nmarket.maturities_years = 1,5\n",
        )
        assert cli.run("hedge", cfg, str(tmp_path / "out")) == 3

    def test_tolerance_breach(self, tmp_path, monkeypatch):
        def exploding(ctx, outdir):
            raise cli.ToleranceBreachError("synthetic breach")

        monkeypatch.setitem(cli._COMMANDS, "hedge", exploding)
        assert cli.run("hedge", _write_cfg(tmp_path), str(tmp_path / "out")) == 4


class TestPlots:
    def test_bounds_figure_rendered(self, tmp_path):
        cfg = _write_cfg(tmp_path, "bounds.w_old_bp = 100:500:100\n")
        out = tmp_path / "out"
        assert cli.run("bounds", cfg, str(out), plots=True) == 0
        assert (out / "bounds.svg").exists()

    def test_density_figure_rendered(self, tmp_path):
        cfg = _write_cfg(tmp_path, "run.mc_samples = 5000\nrun.delta_grid = 101\n")
        out = tmp_path / "out"
        assert cli.run("density", cfg, str(out), plots=True) == 0
        assert (out / "density.svg").exists()

    def test_main_entry_point(self, tmp_path):
        out = tmp_path / "out"
        code = cli.main(["sweep", "--config", _write_cfg(tmp_path, "sweep.pd1 = 0.3:0.3:0.1\n"),
                         "--out", str(out)])
        assert code == 0
        assert (out / "sweep.csv").exists()
