"""TOML application config: run settings, providers, prices and paths.

Schema (every section optional except ``[run]`` and ``[model]``)::

    [run]     run_id, universe, initial_cash, start_date, end_date,
              planner_mode, analysts, decision_memory_size, max_workers
    [risk]    tilt_factor, max_weight
    [model]   provider, model_id, temperature, max_retries, timeout
    [providers.<id>]
              kind = "stub":  script, default, seed, failure_rates
              kind = "http":  endpoint, api_key_env, auth_header, auth_prefix,
                              request_style, response_path, prompt_tokens_path,
                              completion_tokens_path, max_tokens, rate_limit
    [prices.<model_id>]  prompt_per_1k, completion_per_1k
    [data]    fixtures, benchmark, ohlcv_window, news_count, insider_count, macro_count
    [data.live]  kind, api_key_env, base_url, attempts, backoff
    [paths]   runs
    [logging] level

Relative paths resolve against the config file's directory. Unknown keys
and wrongly typed values raise :class:`ConfigError` naming the file and
the dotted key.
"""

from __future__ import annotations

import datetime as dt
import os
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Any, Callable, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from livefund.domain import AnalystKind, to_decimal
from livefund.errors import ConfigError
from livefund.llm.client import LlmFactory, ModelPrice, ModelProfile
from livefund.llm.http import HttpChatProvider, HttpProfile
from livefund.llm.stub import ScriptedStub, load_script
from livefund.market.gateway import MarketGateway, register_provider
from livefund.workflow import DataParams, PlannerMode, RiskParams, RunConfig

BUNDLED_DIR = Path(__file__).parent / "data"
BUNDLED_CONFIG = BUNDLED_DIR / "default.toml"


def _is_str(v):
    return isinstance(v, str) and v != ""


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_date(v):
    return isinstance(v, dt.date) and not isinstance(v, dt.datetime) or (
        isinstance(v, str) and _parses_date(v)
    )


def _parses_date(v: str) -> bool:
    try:
        dt.date.fromisoformat(v)
        return True
    except ValueError:
        return False


def _is_str_list(v):
    return isinstance(v, list) and all(_is_str(x) for x in v)


def _is_rates(v):
    return isinstance(v, dict) and all(_is_num(x) and 0 <= x <= 1 for x in v.values())


_TYPE_NAMES = {
    _is_str: "a non-empty string",
    _is_int: "an integer",
    _is_num: "a number",
    _is_date: "a date (YYYY-MM-DD)",
    _is_str_list: "a list of strings",
    _is_rates: "a table of probabilities in [0, 1]",
}

Schema = Mapping[str, Callable[[Any], bool]]

RUN_SCHEMA: Schema = {
    "run_id": _is_str,
    "universe": _is_str_list,
    "initial_cash": _is_num,
    "start_date": _is_date,
    "end_date": _is_date,
    "planner_mode": _is_str,
    "analysts": _is_str_list,
    "decision_memory_size": _is_int,
    "max_workers": _is_int,
}
RISK_SCHEMA: Schema = {"tilt_factor": _is_num, "max_weight": _is_num}
MODEL_SCHEMA: Schema = {
    "provider": _is_str,
    "model_id": _is_str,
    "temperature": _is_num,
    "max_retries": _is_int,
    "timeout": _is_num,
}
STUB_SCHEMA: Schema = {
    "kind": _is_str,
    "script": _is_str,
    "default": _is_str,
    "seed": _is_int,
    "failure_rates": _is_rates,
}
HTTP_SCHEMA: Schema = {
    "kind": _is_str,
    "endpoint": _is_str,
    "api_key_env": _is_str,
    "auth_header": _is_str,
    "auth_prefix": lambda v: isinstance(v, str),
    "request_style": _is_str,
    "response_path": _is_str,
    "prompt_tokens_path": _is_str,
    "completion_tokens_path": _is_str,
    "max_tokens": _is_int,
    "rate_limit": _is_num,
}
PRICE_SCHEMA: Schema = {"prompt_per_1k": _is_num, "completion_per_1k": _is_num}
DATA_SCHEMA: Schema = {
    "fixtures": _is_str,
    "benchmark": _is_str,
    "ohlcv_window": _is_int,
    "news_count": _is_int,
    "insider_count": _is_int,
    "macro_count": _is_int,
}
LIVE_SCHEMA: Schema = {
    "kind": _is_str,
    "api_key_env": _is_str,
    "base_url": _is_str,
    "attempts": _is_int,
    "backoff": _is_num,
}
PATHS_SCHEMA: Schema = {"runs": _is_str}
LOGGING_SCHEMA: Schema = {"level": _is_str}


class _Checker:
    def __init__(self, source: str):
        self.source = source

    def fail(self, where: str, msg: str):
        raise ConfigError(f"{self.source}: {where}: {msg}")

    def table(self, doc: Any, where: str, schema: Schema, required=(), nested=()) -> dict:
        if not isinstance(doc, dict):
            self.fail(where, "expected a table")
        for key, value in doc.items():
            path = f"{where}.{key}" if where else key
            if key in nested:
                continue
            if key not in schema:
                self.fail(path, "unknown key")
            if not schema[key](value):
                self.fail(path, f"expected {_TYPE_NAMES.get(schema[key], 'a valid value')}, got {value!r}")
        for key in required:
            if key not in doc:
                self.fail(f"{where}.{key}" if where else key, "missing required key")
        return doc


def _date(v) -> dt.date:
    return v if isinstance(v, dt.date) else dt.date.fromisoformat(v)


@dataclass(frozen=True)
class AppConfig:
    run: RunConfig
    providers: Mapping[str, Mapping[str, Any]]
    prices: Mapping[str, ModelPrice]
    fixtures: Path | None
    runs_dir: Path
    benchmark: str = "SPY"
    live_data: Mapping[str, Any] = field(default_factory=dict)
    log_level: str = "INFO"
    source: Path | None = None


def load_config(path: str | os.PathLike, run_id: str | None = None, fixtures: str | None = None,
                runs_dir: str | None = None) -> AppConfig:
    """Parse and validate ``path``; keyword arguments override file values."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"{path}: config file not found") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(doc, path, run_id=run_id, fixtures=fixtures, runs_dir=runs_dir)


def parse_config(doc: Mapping, path: Path | None = None, run_id: str | None = None,
                 fixtures: str | None = None, runs_dir: str | None = None) -> AppConfig:
    src = str(path) if path else "<config>"
    base = path.parent if path else Path.cwd()
    c = _Checker(src)
    sections = {"run", "risk", "model", "providers", "prices", "data", "paths", "logging"}
    for key in doc:
        if key not in sections:
            c.fail(key, "unknown section")

    run = c.table(doc.get("run"), "run", RUN_SCHEMA, required=("run_id", "universe", "start_date", "end_date"))
    risk = c.table(doc.get("risk", {}), "risk", RISK_SCHEMA)
    model = c.table(doc.get("model"), "model", MODEL_SCHEMA, required=("provider", "model_id"))
    data = c.table(doc.get("data", {}), "data", DATA_SCHEMA, nested=("live",))
    live = c.table(data.get("live", {}), "data.live", LIVE_SCHEMA)
    paths = c.table(doc.get("paths", {}), "paths", PATHS_SCHEMA)
    logging_ = c.table(doc.get("logging", {}), "logging", LOGGING_SCHEMA)

    providers = doc.get("providers", {})
    if not isinstance(providers, dict):
        c.fail("providers", "expected a table of provider profiles")
    resolved_providers = {}
    for pid, prof in providers.items():
        where = f"providers.{pid}"
        kind = prof.get("kind") if isinstance(prof, dict) else None
        if kind == "stub":
            prof = dict(c.table(prof, where, STUB_SCHEMA))
            if "script" in prof:
                prof["script"] = str(base / prof["script"])
            if prof.get("default", "neutral") not in ("neutral", "rules"):
                c.fail(f"{where}.default", "expected 'neutral' or 'rules'")
        elif kind == "http":
            prof = dict(c.table(prof, where, HTTP_SCHEMA, required=("endpoint", "api_key_env")))
            if prof.get("request_style", "openai") not in ("openai", "anthropic"):
                c.fail(f"{where}.request_style", "expected 'openai' or 'anthropic'")
        else:
            c.fail(f"{where}.kind", f"expected 'stub' or 'http', got {kind!r}")
        resolved_providers[pid] = prof
    if model["provider"] not in resolved_providers:
        c.fail("model.provider", f"no profile named {model['provider']!r} under [providers]")

    prices = {}
    raw_prices = doc.get("prices", {})
    if not isinstance(raw_prices, dict):
        c.fail("prices", "expected a table")
    for mid, entry in raw_prices.items():
        entry = c.table(entry, f"prices.{mid}", PRICE_SCHEMA, required=("prompt_per_1k", "completion_per_1k"))
        prices[mid] = ModelPrice(to_decimal(entry["prompt_per_1k"]), to_decimal(entry["completion_per_1k"]))

    try:
        analysts = tuple(AnalystKind.parse(a) for a in run.get("analysts", ["Technical", "CompanyNews", "Policy", "Insider"]))
    except ValueError as exc:
        c.fail("run.analysts", str(exc))
    try:
        planner_mode = PlannerMode(run.get("planner_mode", "deterministic").lower())
    except ValueError:
        c.fail("run.planner_mode", "expected 'deterministic' or 'dynamic'")

    defaults = DataParams()
    try:
        profile = ModelProfile(
            provider_id=model["provider"],
            model_id=model["model_id"],
            temperature=float(model.get("temperature", 0.5)),
            max_retries=model.get("max_retries", 3),
            timeout=float(model.get("timeout", 60.0)),
        )
        rc = RunConfig(
            run_id=run_id or run["run_id"],
            universe=tuple(run["universe"]),
            start_date=_date(run["start_date"]),
            end_date=_date(run["end_date"]),
            model_profile=profile,
            initial_cash=to_decimal(run.get("initial_cash", 100000)),
            planner_mode=planner_mode,
            analyst_set=analysts,
            decision_memory_size=run.get("decision_memory_size", 5),
            risk_params=RiskParams(
                tilt_factor=to_decimal(risk.get("tilt_factor", Decimal("0.5"))),
                max_weight=to_decimal(risk.get("max_weight", Decimal("0.30"))),
            ),
            data_params=DataParams(
                technical_window=data.get("ohlcv_window", defaults.technical_window),
                news_count=data.get("news_count", defaults.news_count),
                insider_count=data.get("insider_count", defaults.insider_count),
                macro_count=data.get("macro_count", defaults.macro_count),
            ),
            max_workers=run.get("max_workers", 4),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{src}: run: {exc}") from exc

    if fixtures:
        fixture_dir = Path(fixtures)
    else:
        fixture_dir = base / data["fixtures"] if "fixtures" in data else None
    if runs_dir:
        runs = Path(runs_dir)
    else:
        runs = base / paths["runs"] if "runs" in paths else Path("runs")
    return AppConfig(
        run=rc,
        providers=resolved_providers,
        prices=prices,
        fixtures=fixture_dir,
        runs_dir=runs,
        benchmark=data.get("benchmark", "SPY"),
        live_data=dict(live),
        log_level=str(logging_.get("level", "INFO")).upper(),
        source=path,
    )


def build_llm(app: AppConfig, env: Mapping[str, str] | None = None) -> LlmFactory:
    """Instantiate the provider the run's model profile points at."""
    factory = LlmFactory(prices=dict(app.prices))
    pid = app.run.model_profile.provider_id
    prof = dict(app.providers[pid])
    kind = prof.pop("kind")
    if kind == "stub":
        script = load_script(prof["script"]) if "script" in prof else ()
        factory.register(pid, ScriptedStub(script, prof.get("default", "neutral"),
                                           prof.get("failure_rates"), prof.get("seed", 0)))
    else:
        rate = prof.pop("rate_limit", None)
        factory.backoff = 1.0
        factory.register(pid, HttpChatProvider(HttpProfile(**prof), env=env), rate_limit=rate)
    return factory


def build_gateway(app: AppConfig, mode: str = "replay", env: Mapping[str, str] | None = None) -> MarketGateway:
    if mode == "replay":
        if app.fixtures is None:
            raise ConfigError(f"{app.source}: data.fixtures: replay mode needs a fixture directory")
        if not app.fixtures.is_dir():
            raise ConfigError(f"{app.source}: data.fixtures: no such directory {app.fixtures}")
        return register_provider("replay", app.fixtures)
    settings = dict(app.live_data)
    kind = settings.pop("kind", "alpha-vantage")
    return register_provider(kind, settings, env=env)
