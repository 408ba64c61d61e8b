import json
from pathlib import Path

import pytest

import roboecon

SCENARIOS = Path(__file__).resolve().parents[2] / "scenarios"


def test_econ_report_matches_closed_form():
    econ = roboecon.econ_report(SCENARIOS / "cleaner.json")["econ"]
    assert econ["manual"]["total"] == 1_560_000
    assert econ["robot"]["capital"] == 1_180_000
    assert roboecon.format_dollars(econ["robot"]["labor"]) == "$2,600.00"


def test_run_verify_roundtrip():
    run = roboecon.run_scenario(SCENARIOS / "marketplace.json", difficulty=2, trace=True)
    sim = run["report"]["simulation"]
    assert sim["chain"]["replicas_converged"]
    assert sim["conservation"]["final_total"] == sim["conservation"]["genesis_total"]
    assert any(rec["type"] == "contract" for rec in run["trace"])

    ok = roboecon.verify_chain(run["chain"], seed=run["report"]["seed"])
    assert ok["accepted"] and ok["signatures_checked"]
    bad = roboecon.verify_chain(run["chain"], seed=run["report"]["seed"] + 1)
    assert not bad["accepted"]
    assert bad["reason"] == "BadSignature"


def test_same_seed_same_run():
    a = roboecon.run_scenario(SCENARIOS / "marketplace.json", seed=3, difficulty=2)
    b = roboecon.run_scenario(SCENARIOS / "marketplace.json", seed=3, difficulty=2)
    assert a["chain"] == b["chain"]


def test_canonical_block_is_sorted_compact_json():
    chain = roboecon.run_scenario(SCENARIOS / "marketplace.json", difficulty=0)["chain"]
    genesis = json.loads(chain.splitlines()[0])
    raw = roboecon.canonical_block(genesis)
    decoded = json.loads(raw)
    assert "block_hash" not in decoded
    assert raw == json.dumps(decoded, sort_keys=True, separators=(",", ":")).encode()


def test_errors_are_typed():
    with pytest.raises(roboecon.ConfigError):
        roboecon.run_scenario("{}")
    with pytest.raises(roboecon.ConfigError):
        roboecon.econ_report(SCENARIOS / "marketplace.json")
    with pytest.raises(ValueError):
        roboecon.verify_chain("{not json\n")
