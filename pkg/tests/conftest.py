from __future__ import annotations

import shutil
from datetime import date
from pathlib import Path

import pytest

from livefund.config import BUNDLED_DIR
from livefund.domain import AnalystKind
from livefund.ledger import Ledger
from livefund.llm import LlmFactory, ModelProfile
from livefund.llm.stub import ScriptedStub, ScriptEntry
from livefund.market.gateway import register_provider
from livefund.workflow import RunConfig, run_period

BUNDLED_FIXTURES = BUNDLED_DIR / "fixtures"
UNIVERSE = ("AAPL", "AXP", "BAC", "KO", "CVX")
START, END = date(2025, 3, 17), date(2025, 4, 17)
STUB_PROFILE = ModelProfile("stub", "scripted-stub")
FOUR_ANALYSTS = (AnalystKind.TECHNICAL, AnalystKind.COMPANY_NEWS, AnalystKind.POLICY, AnalystKind.INSIDER)


def make_config(run_id="test-run", **overrides) -> RunConfig:
    kwargs = dict(
        run_id=run_id,
        universe=UNIVERSE,
        start_date=START,
        end_date=END,
        model_profile=STUB_PROFILE,
        analyst_set=FOUR_ANALYSTS,
    )
    kwargs.update(overrides)
    return RunConfig(**kwargs)


def make_llm(script=(), default="rules", failure_rates=None, seed=0) -> LlmFactory:
    entries = [e if isinstance(e, ScriptEntry) else ScriptEntry.from_dict(e) for e in script]
    llm = LlmFactory()
    llm.register("stub", ScriptedStub(entries, default, failure_rates, seed))
    return llm


def replay(config: RunConfig, runs_dir: Path, llm: LlmFactory | None = None, fixtures: Path = BUNDLED_FIXTURES):
    ledger = Ledger(runs_dir, fsync=False)
    gateway = register_provider("replay", fixtures)
    summary = run_period(config, gateway, llm or make_llm(), ledger)
    return summary, ledger


@pytest.fixture
def fixtures_copy(tmp_path) -> Path:
    dst = tmp_path / "fixtures"
    shutil.copytree(BUNDLED_FIXTURES, dst)
    return dst


@pytest.fixture
def runs_dir(tmp_path) -> Path:
    return tmp_path / "runs"


