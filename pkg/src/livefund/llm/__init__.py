"""LLM factory: providers, prompt rendering, reply parsing and a scripted stub."""

from livefund.llm.client import (
    ChatExchange,
    Completion,
    LlmFactory,
    ModelPrice,
    ModelProfile,
    ProviderError,
    RequestTag,
    TokenBucket,
)
from livefund.llm.parsing import (
    ParsedDecision,
    parse_decision_response,
    parse_planner_response,
    parse_signal_response,
)
from livefund.llm.prompts import render_analyst_prompt, render_manager_prompt, render_planner_prompt
from livefund.llm.stub import ROLE_MANAGER, ROLE_PLANNER, ScriptedStub, ScriptEntry, load_script


def scripted_stub(script=(), default="neutral", failure_rates=None, seed=0) -> ScriptedStub:
    """Build a scripted provider from entries or dicts in the script format."""
    entries = [e if isinstance(e, ScriptEntry) else ScriptEntry.from_dict(e) for e in script]
    return ScriptedStub(entries, default=default, failure_rates=failure_rates, seed=seed)


__all__ = [
    "ChatExchange",
    "Completion",
    "LlmFactory",
    "ModelPrice",
    "ModelProfile",
    "ParsedDecision",
    "ProviderError",
    "ROLE_MANAGER",
    "ROLE_PLANNER",
    "RequestTag",
    "ScriptEntry",
    "ScriptedStub",
    "TokenBucket",
    "load_script",
    "parse_decision_response",
    "parse_planner_response",
    "parse_signal_response",
    "render_analyst_prompt",
    "render_manager_prompt",
    "render_planner_prompt",
    "scripted_stub",
]
