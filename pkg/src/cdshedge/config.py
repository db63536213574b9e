"""Run configuration: flat dotted key-value files plus quote ingestion.

A config file holds ``section.key = value`` lines, ``#`` comments, and
nothing else.  Every key has a default taken from the standard parameter
set (5y illiquid CDS at 100 bp against the bundled 1-5y quote strip at
500 bp running, r_f = 2%, PD_1 = 30%, truncated-normal recovery with mean
near 20%, required return 25%), so an empty or missing file runs the
standard setup.  Unknown keys are rejected.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path


from .market import CdsSpec, MarketQuote, TenorGrid
from .measure import (
    PhysicalMeasure,
    RecoverySpec,
    TabulatedRecovery,
    TruncatedNormalRecovery,
    TwoPointRecovery,
    hazard_from_pd1,
    standard_recoveries,
)


class ConfigError(ValueError):
    """Malformed configuration file, key, or value."""


_DEFAULTS: dict[str, str] = {
    "illiquid.maturity_years": "5",
    "illiquid.spread_bp": "100",
    "illiquid.notional": "1.0",
    "market.quotes_file": "",
    "market.quotes_inline": "",
    "market.maturities_years": "1,2,3,4,5",
    "grid.quarter_years": "0.25",
    "grid.r_f": "0.02",
    "measure.pd1": "0.30",
    "measure.recovery_kind": "truncated-normal",
    "measure.recovery_location": "0.15",
    "measure.recovery_scale": "0.16",
    "measure.recovery_low": "0.10",
    "measure.recovery_high": "0.30",
    "measure.recovery_weight_low": "0.5",
    "measure.recovery_preset": "rho20",
    "measure.recovery_table": "",
    "gooddeal.r_t": "0.25",
    "gooddeal.s_r": "",
    "run.seed": "20080320",
    "run.mc_samples": "1000000",
    "run.delta_grid": "2001",
    "bounds.w_old_bp": "50:900:50",
    "sweep.pd1": "0.20:0.60:0.05",
    "sweep.recoveries": "rho20,rho25,rho40",
    "hedge.probe_trials": "100",
    "hedge.probe_scale": "1e-7",
    "scalecheck.w_bp": "100,200,400",
}


def parse_config(path: str | Path | None) -> dict[str, str]:
    """Read a key-value file onto the defaults; None means pure defaults."""
    values = dict(_DEFAULTS)
    if path is None:
        return values
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
        values[key] = value.strip()
    return values


def _as_float(values, key) -> float:
    try:
        return float(values[key])
    except ValueError as exc:
        raise ConfigError(f"{key}: not a number: {values[key]!r}") from exc


def _as_int(values, key) -> int:
    try:
        return int(values[key])
    except ValueError as exc:
        raise ConfigError(f"{key}: not an integer: {values[key]!r}") from exc


def parse_float_list(text: str, key: str = "") -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"{key}: not a comma-separated number list: {text!r}") from exc


def parse_range(text: str, key: str = "") -> list[float]:
    """Inclusive 'start:stop:step' grid, or a plain comma list."""
    if ":" not in text:
        return parse_float_list(text, key)
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{key}: expected 'start:stop:step', got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"{key}: non-numeric range bound in {text!r}") from exc
    if step <= 0.0 or stop < start:
        raise ConfigError(f"{key}: empty or descending range {text!r}")
    n = int(round((stop - start) / step))
    return [start + k * step for k in range(n + 1) if start + k * step <= stop + 1e-12]


def bundled_quotes_path() -> Path:
    return Path(resources.files("cdshedge").joinpath("data/gm_cds_quotes_2008-03-20.csv"))


def load_quotes_csv(path: str | Path, quarter_years: float) -> tuple[MarketQuote, ...]:
    """Quote strip from CSV with header maturity_years,upfront_pct,spread_bp."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"quote file not found: {path}")
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["maturity_years", "upfront_pct", "spread_bp"]:
            raise ConfigError(f"{path}: expected header maturity_years,upfront_pct,spread_bp")
        quotes = []
        for row in reader:
            if not row:
                continue
            if len(row) != 3:
                raise ConfigError(f"{path}: malformed row {row!r}")
            years, upfront_pct, spread_bp = (float(x) for x in row)
            quotes.append(
                MarketQuote(
                    maturity_index=_maturity_index(years, quarter_years, str(path)),
                    upfront=upfront_pct / 100.0,
                    spread=spread_bp / 1e4,
                )
            )
    _check_increasing(quotes)
    return tuple(quotes)


def parse_inline_quotes(text: str, quarter_years: float) -> tuple[MarketQuote, ...]:
    """Inline strip 'years:upfront_pct:spread_bp;...'."""
    quotes = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 3:
            raise ConfigError(f"inline quote needs years:upfront_pct:spread_bp, got {item!r}")
        years, upfront_pct, spread_bp = (float(p) for p in parts)
        quotes.append(
            MarketQuote(
                maturity_index=_maturity_index(years, quarter_years, "inline quotes"),
                upfront=upfront_pct / 100.0,
                spread=spread_bp / 1e4,
            )
        )
    _check_increasing(quotes)
    return tuple(quotes)


def _maturity_index(years: float, quarter_years: float, where: str) -> int:
    index = years / quarter_years
    if abs(index - round(index)) > 1e-9 or round(index) < 1:
        raise ConfigError(f"{where}: maturity {years}y is not a whole number of quarters")
    return int(round(index))


def _check_increasing(quotes) -> None:
    for a, b in zip(quotes, quotes[1:]):
        if b.maturity_index <= a.maturity_index:
            raise ConfigError("quote maturities must be strictly increasing")


def _build_recovery(values: dict[str, str]) -> RecoverySpec:
    kind = values["measure.recovery_kind"]
    if kind == "truncated-normal":
        return TruncatedNormalRecovery(
            _as_float(values, "measure.recovery_location"),
            _as_float(values, "measure.recovery_scale"),
        )
    if kind == "two-point":
        return TwoPointRecovery(
            _as_float(values, "measure.recovery_low"),
            _as_float(values, "measure.recovery_high"),
            _as_float(values, "measure.recovery_weight_low"),
        )
    if kind == "preset":
        presets = standard_recoveries()
        name = values["measure.recovery_preset"]
        if name not in presets:
            raise ConfigError(f"unknown recovery preset '{name}'; have {sorted(presets)}")
        return presets[name]
    if kind == "tabulated":
        pairs = []
        for item in values["measure.recovery_table"].split(";"):
            item = item.strip()
            if not item:
                continue
            parts = item.split(":")
            if len(parts) != 2:
                raise ConfigError(f"recovery table entries are rho:density, got {item!r}")
            pairs.append((float(parts[0]), float(parts[1])))
        if len(pairs) < 2:
            raise ConfigError("measure.recovery_table needs at least two rho:density pairs")
        try:
            return TabulatedRecovery(
                tuple(p[0] for p in pairs), tuple(p[1] for p in pairs)
            )
        except ValueError as exc:
            raise ConfigError(f"measure.recovery_table: {exc}") from exc
    raise ConfigError(f"unknown recovery kind '{kind}'")


@dataclass(frozen=True)
class RunContext:
    """Resolved objects shared by every CLI command.

    ``s_r`` is the alternative good-deal criterion: when set, quotes are
    priced at that effective Sharpe ratio instead of the expected return.
    """

    grid: TenorGrid
    illiquid: CdsSpec
    quotes: tuple[MarketQuote, ...]
    measure: PhysicalMeasure
    r_t: float
    s_r: float | None
    seed: int
    mc_samples: int
    delta_grid: int
    values: dict[str, str]


def build_context(values: dict[str, str], seed_override: int | None = None) -> RunContext:
    quarter = _as_float(values, "grid.quarter_years")
    if quarter <= 0:
        raise ConfigError("grid.quarter_years must be positive")
    r_f = _as_float(values, "grid.r_f")
    if r_f < 0:
        raise ConfigError("grid.r_f must be non-negative")

    if values["market.quotes_inline"]:
        all_quotes = parse_inline_quotes(values["market.quotes_inline"], quarter)
    else:
        quote_path = values["market.quotes_file"] or bundled_quotes_path()
        all_quotes = load_quotes_csv(quote_path, quarter)
    wanted = parse_float_list(values["market.maturities_years"], "market.maturities_years")
    if wanted:
        index = {q.maturity_index: q for q in all_quotes}
        selected = []
        for years in wanted:
            key = _maturity_index(years, quarter, "market.maturities_years")
            if key not in index:
                raise ConfigError(f"no quote at maturity {years}y in the quote file")
            selected.append(index[key])
        quotes = tuple(selected)
    else:
        quotes = all_quotes

    notional = _as_float(values, "illiquid.notional")
    if notional == 0.0:
        raise ConfigError("illiquid.notional must be non-zero")
    illiquid = CdsSpec(
        maturity_index=_maturity_index(
            _as_float(values, "illiquid.maturity_years"), quarter, "illiquid.maturity_years"
        ),
        spread=_as_float(values, "illiquid.spread_bp") / 1e4,
        notional=notional,
    )
    n_quarters = max(illiquid.maturity_index, max(q.maturity_index for q in quotes))
    grid = TenorGrid(n_quarters=n_quarters, quarter_length=quarter, risk_free_rate=r_f)

    pd1 = _as_float(values, "measure.pd1")
    if not 0.0 <= pd1 < 1.0:
        raise ConfigError("measure.pd1 must lie in [0, 1)")
    measure = PhysicalMeasure(hazard_from_pd1(pd1), grid.horizon, _build_recovery(values))

    r_t = _as_float(values, "gooddeal.r_t")
    if r_t < 0:
        raise ConfigError("gooddeal.r_t must be non-negative")
    s_r = None
    if values["gooddeal.s_r"]:
        s_r = _as_float(values, "gooddeal.s_r")
        if s_r <= 0:
            raise ConfigError("gooddeal.s_r must be positive")

    seed = seed_override if seed_override is not None else _as_int(values, "run.seed")
    mc_samples = _as_int(values, "run.mc_samples")
    delta_grid = _as_int(values, "run.delta_grid")
    if mc_samples < 1 or delta_grid < 2:
        raise ConfigError("run.mc_samples and run.delta_grid must be positive")
    return RunContext(
        grid=grid,
        illiquid=illiquid,
        quotes=quotes,
        measure=measure,
        r_t=r_t,
        s_r=s_r,
        seed=seed,
        mc_samples=mc_samples,
        delta_grid=delta_grid,
        values=values,
    )
