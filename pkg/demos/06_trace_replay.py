"""Traces are the unit of reproduction.

A trace records the scenario header, every applied event, and a verdict
with a 64-bit canonical hash of the final configuration.  Re-running the
header with the recorded events as a script must land on the same hash
bit-for-bit; anything else is a determinism bug.  The same files drive
the command line:

    consensuslab run scenario.json --trace out.jsonl
    consensuslab replay out.jsonl
"""

import tempfile
from pathlib import Path

from consensuslab.findings import racing_scenario
from consensuslab.scenario import Scenario, SchedulerSpec, default_values
from consensuslab.trace import Trace, replay, run

scenario = Scenario(
    n=5,
    values=tuple(default_values(5)),
    scheduler=SchedulerSpec(type="seeded-random", seed=42, fairness_bound=64),
)
trace = run(scenario)
print(f"run: {trace.verdict.event_count} events, hash {trace.verdict.config_hash}")

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "run.jsonl"
    trace.save(path)
    print(f"saved {path.stat().st_size} bytes of JSONL ({len(trace.events)} event records)")
    loaded = Trace.load(path)
    again = replay(loaded)
    print(
        "replayed hash:", again.verdict.config_hash,
        "(match)" if again.verdict.config_hash == trace.verdict.config_hash else "(MISMATCH)",
    )

print()
print("counterexample traces replay the same way:")
witness = run(racing_scenario())
again = replay(witness)
print(
    f"  racing schedule: {witness.verdict.config_hash} -> {again.verdict.config_hash}",
    "(match)" if again.verdict.config_hash == witness.verdict.config_hash else "(MISMATCH)",
)
