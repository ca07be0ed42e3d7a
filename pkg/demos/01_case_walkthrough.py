"""Walk through the scripted reference scenarios.

Each scenario pins one exact interleaving for a five-process system:
who receives which message, in what order, and where the one allowed
crash bites.  The run prints every process's proposal-stage result
(full vector or gapped), its final decision, and the property verdicts.
"""

from consensuslab.cases import outcome_label, run_case_suite

results = run_case_suite()

print(f"{'case':9s} {'crash':28s} {'entries':38s} decisions")
print("-" * 110)
for res in results:
    case = res.case
    crash = "-" if case.crash is None else (
        f"P{case.crash.victim} {case.crash.point.value} {case.crash.kind.name.lower()}"
    )
    entries = " ".join(
        (outcome_label(v) or "x") for v in res.trace.verdict.entered
    )
    decisions = " ".join(
        (outcome_label(v) or "x") for v in res.trace.verdict.decided
    )
    state = "ok " if res.ok else "FAIL"
    print(f"{case.case_id:9s} {crash:28s} {entries:38s} {decisions}  [{state}]")
    if case.note:
        print(f"{'':9s} note: {case.note}")

print()
print("Observations worth pausing on:")
by_id = {r.case.case_id: r for r in results}

c11 = by_id["case11"]
upgraded = [
    f"P{pid}"
    for pid in range(5)
    if c11.trace.verdict.decided[pid] != c11.trace.verdict.entered[pid]
]
print(
    f"- case11: two processes enter deciding with the full vector without seeing "
    f"each other; {', '.join(upgraded)} start gapped and upgrade on the first full "
    f"final message they collect."
)

c2 = by_id["case02"]
p4_entry = outcome_label(c2.trace.verdict.entered[4])
print(
    f"- case02: even the process whose own proposal had a different gap finishes with "
    f"the common gapped vector ({p4_entry}); completion adopts the quorum's value, "
    f"not one's own."
)

c4c = by_id["case04c"]
print(
    "- case04c: with a single early receiver of the crashed process's value, that "
    "receiver is forced to finish the proposal stage gapped; 'everyone ends up full' "
    "holds for the decisions, not for every proposal-stage completion."
)
