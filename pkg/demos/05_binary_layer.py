"""Binary decisions on top of vector agreement.

A binary consensus round can finish in two orders: interpret your own
vector and then agree on the bit, or agree on the vector and then
interpret it locally.  With a deterministic interpretation (majority with
a fixed tie rule) the two orders commute -- checked here by exhaustive
enumeration -- which is what lets a protocol terminate with a vector
agreement first and derive the bit afterwards.

The same interpretation rides on the asynchronous protocol's decided
vectors: one agreed vector in, one bit out, on every process, ties
included.
"""

from consensuslab.binary import bf, binary_from_async, commutativity_check
from consensuslab.cases import run_case_suite
from consensuslab.scenario import bit_values

print("exhaustive commutativity enumeration (all bit patterns x faults):")
for n in (5, 6):
    for tie in (0, 1):
        print("  ", commutativity_check(n, tie).summary())

print()
print("tie handling on a gapped vector (1, 1, 0, 0, _):")
gapped = (b"\x01", b"\x01", b"\x00", b"\x00", None)
print(f"   tie rule 0 -> {bf(gapped, 0)},  tie rule 1 -> {bf(gapped, 1)}")

print()
print("lifting the asynchronous case suite (single-bit inputs 1,1,0,1,0):")
values = bit_values(5, 0b01011)
for result in run_case_suite(values=values):
    lifts = [binary_from_async(result.trace, tie).bit for tie in (0, 1)]
    deciders = sum(1 for v in result.trace.verdict.decided if v is not None)
    print(
        f"   {result.case.case_id}: {deciders} deciders -> "
        f"bit {lifts[0]} (tie 0) / {lifts[1]} (tie 1)"
    )
