"""Seeded schedule fuzzing across the crash grid.

Each seed drives one deterministic run: a crash cell taken round-robin
from the grid (no crash, then every victim x broadcast point x delivery
subset), single-bit input values derived from the seed, uniformly random
delivery with a fairness guard.  Every finished run is checked against
agreement, validity, termination, and the two structural guarantees of
the proposal stage.

On this protocol the campaign ends with a real counterexample: a
schedule in which exactly one process finishes the proposal stage with
the full vector.  The witness trace replays bit-exactly and shrinks to a
couple dozen events.
"""

from consensuslab.explore import fuzz, minimize
from consensuslab.properties import check_properties
from consensuslab.scenario import Scenario, SchedulerSpec, default_values
from consensuslab.trace import replays_identically

base = Scenario(
    n=5,
    values=tuple(default_values(5)),
    scheduler=SchedulerSpec(type="seeded-random", seed=0, fairness_bound=64),
)

verdict = fuzz(base, 2_000, values_mode="bits")
print("verdict:", verdict.summary())

if verdict.trace is not None:
    print()
    report = check_properties(verdict.trace)
    print("witness property report:", report.summary())
    for name in report.failures():
        print(f"  {name}: {report.check(name).detail}")
    print("replays bit-exactly:", replays_identically(verdict.trace))

    small = minimize(verdict.trace)
    print(f"minimized witness: {len(verdict.trace.events)} -> {len(small.events)} events")
    small_report = check_properties(small)
    print("minimized witness still fails:", small_report.failures())
    print()
    print("minimized schedule:")
    for ev in small.events:
        print("  ", ev.to_dict())
