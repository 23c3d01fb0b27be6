import csv
import io
import json
from decimal import Decimal

import pytest

from conftest import BUNDLED_FIXTURES
from livefund.cli import main
from livefund.config import BUNDLED_CONFIG, build_llm, load_config
from livefund.errors import ConfigError, MissingCredential

SHORT_RUN = """
[run]
run_id = "{run_id}"
universe = ["AAPL", "KO", "CVX"]
start_date = 2025-03-17
end_date = 2025-03-28

[model]
provider = "stub"
model_id = "{model}"

[providers.stub]
kind = "stub"
default = "{default}"

[data]
fixtures = "{fixtures}"
"""


def write_config(tmp_path, run_id="short", default="rules", model="scripted-stub", extra=""):
    path = tmp_path / f"{run_id}.toml"
    path.write_text(SHORT_RUN.format(run_id=run_id, default=default, model=model, fixtures=BUNDLED_FIXTURES) + extra)
    return path


class TestConfig:
    def test_bundled_config_loads(self):
        app = load_config(BUNDLED_CONFIG)
        assert app.run.run_id == "stub-rules" and len(app.run.universe) == 5
        assert app.run.risk_params.max_weight == Decimal("0.30")
        assert app.fixtures.is_dir()

    def test_unknown_key_names_location(self, tmp_path):
        path = write_config(tmp_path, extra="\n[risk]\ntilt = 0.5\n")
        with pytest.raises(ConfigError, match=r"short\.toml: risk\.tilt: unknown key"):
            load_config(path)

    def test_unknown_section(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown section"):
            load_config(write_config(tmp_path, extra="\n[extras]\nx = 1\n"))

    def test_bad_value_type(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text(write_config(tmp_path).read_text().replace('universe = ["AAPL", "KO", "CVX"]', "universe = 5"))
        with pytest.raises(ConfigError, match="run.universe"):
            load_config(path)

    def test_missing_section(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text('[run]\nrun_id = "x"\n')
        with pytest.raises(ConfigError):
            load_config(path)

    def test_overrides(self, tmp_path):
        app = load_config(write_config(tmp_path), run_id="other", runs_dir=str(tmp_path / "r"))
        assert app.run.run_id == "other" and app.runs_dir == tmp_path / "r"

    def test_http_provider_needs_key(self, tmp_path):
        extra = '\n[providers.live]\nkind = "http"\nendpoint = "https://x"\napi_key_env = "NOPE_KEY"\n'
        path = write_config(tmp_path, extra=extra)
        path.write_text(path.read_text().replace('provider = "stub"', 'provider = "live"'))
        with pytest.raises(MissingCredential):
            build_llm(load_config(path), env={})


def cli(*args):
    return main([*map(str, args)])


class TestRun:
    def test_bundled_run(self, tmp_path, capsys):
        assert cli("run", "--runs-dir", tmp_path) == 0
        out = capsys.readouterr().out
        assert "days: 24" in out and "signals: 480" in out and "decisions: 120" in out

    def test_live_without_key_exits_5(self, tmp_path, monkeypatch, capsys):
        monkeypatch.delenv("ALPHAVANTAGE_API_KEY", raising=False)
        assert cli("run", "--mode", "live", "--runs-dir", tmp_path) == 5
        assert "ALPHAVANTAGE_API_KEY" in capsys.readouterr().err

    def test_bad_config_exits_2(self, tmp_path):
        assert cli("run", "--config", tmp_path / "missing.toml") == 2

    def test_missing_ticker_is_named(self, tmp_path, capsys):
        path = write_config(tmp_path)
        path.write_text(path.read_text().replace('"CVX"]', '"ZZZZ"]'))
        code = cli("run", "--config", path, "--runs-dir", tmp_path / "runs")
        assert code == 8 and "ZZZZ" in capsys.readouterr().err


class TestValidateFixtures:
    def test_bundled_ok(self, capsys):
        assert cli("validate-fixtures", BUNDLED_FIXTURES) == 0

    def test_broken_file_exits_7(self, fixtures_copy, capsys):
        (fixtures_copy / "KO" / "ohlcv.jsonl").write_text('{"date": "2025-01-02", "close": "x"}\n')
        assert cli("validate-fixtures", fixtures_copy) == 7
        assert "FAIL" in capsys.readouterr().out


class TestMetricsAndReport:
    @pytest.fixture
    def two_runs(self, tmp_path):
        runs = tmp_path / "runs"
        for rid, default in (("rules", "rules"), ("idle", "neutral")):
            assert cli("run", "--config", write_config(tmp_path, rid, default, model=f"m-{rid}"), "--runs-dir", runs) == 0
        return tmp_path, runs

    def test_metrics_files(self, two_runs, capsys):
        tmp, runs = two_runs
        cfg = write_config(tmp, "rules")
        assert cli("metrics", "--config", cfg, "--runs-dir", runs, "--run-id", "rules") == 0
        body = json.loads((runs / "metrics" / "rules.json").read_text())
        assert body["rows"][0]["model"] == "m-rules" and body["rows"][0]["signals"] == 120
        assert (runs / "metrics" / "rules.csv").read_text().startswith("model,cr_pct")

    def test_zero_trade_run_has_blank_win_rate(self, two_runs):
        tmp, runs = two_runs
        cli("metrics", "--config", write_config(tmp, "idle", "neutral"), "--runs-dir", runs, "--run-id", "idle")
        rows = list(csv.DictReader(io.StringIO((runs / "metrics" / "idle.csv").read_text())))
        assert rows[0]["wr_pct"] == "" and float(rows[0]["cr_pct"]) == 0.0

    def test_report_is_idempotent_and_ranked(self, two_runs):
        tmp, runs = two_runs
        cfg = write_config(tmp, "rules")
        args = ["report", "--config", cfg, "--runs-dir", runs, "--run-id", "idle", "--run-id", "rules", "--no-timestamp"]
        assert cli(*args) == 0
        out = runs / "report"
        first = {p.name: p.read_bytes() for p in out.rglob("*") if p.is_file()}
        assert cli(*args) == 0
        assert {p.name: p.read_bytes() for p in out.rglob("*") if p.is_file()} == first
        rows = list(csv.DictReader(io.StringIO((out / "leaderboard.csv").read_text())))
        crs = [float(r["cr_pct"]) for r in rows]
        assert crs == sorted(crs, reverse=True) and len(rows) == 2
        assert {"leaderboard.html", "rules.csv", "idle.csv"} <= set(first)

    def test_unknown_run_exits_6(self, tmp_path):
        assert cli("metrics", "--runs-dir", tmp_path, "--run-id", "ghost") == 6

    def test_report_without_runs_exits_2(self, tmp_path, capsys):
        assert cli("report", "--runs-dir", tmp_path) == 2
        assert "usage" in capsys.readouterr().err
