"""Robot service market simulator: cost models, contract market and hash-chained ledger."""

from __future__ import annotations

import json
from pathlib import Path

from ._core import ConfigError, EconError, LedgerError, ScenarioError, format_dollars
from . import _core

__all__ = [
    "ConfigError",
    "EconError",
    "LedgerError",
    "ScenarioError",
    "canonical_block",
    "econ_report",
    "format_dollars",
    "run_scenario",
    "verify_chain",
]


def _text(config) -> str:
    if isinstance(config, Path):
        return config.read_text()
    if isinstance(config, dict):
        return json.dumps(config)
    return config


def econ_report(config) -> dict:
    """Closed-form manual vs robot budgets for a scenario with an econ section."""
    return json.loads(_core.econ_report(_text(config)))


def run_scenario(config, seed: int | None = None, difficulty: int | None = None, trace: bool = False) -> dict:
    """Run a scenario. Returns the report dict, the chain export and optionally the trace lines."""
    raw = _core.simulate(_text(config), seed=seed, difficulty=difficulty, trace=trace)
    out = {"report": json.loads(raw["report"]), "chain": raw["chain"]}
    if trace:
        out["trace"] = [json.loads(line) for line in raw["trace"].splitlines()]
    return out


def verify_chain(jsonl: str, seed: int | None = None) -> dict:
    return _core.verify_chain(jsonl, seed=seed)


def canonical_block(block) -> bytes:
    """Bytes hashed for a block, from its exported JSON form."""
    return _core.canonical_block(block if isinstance(block, str) else json.dumps(block))
