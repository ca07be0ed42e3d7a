"""Adversarial schedules discovered while building the laboratory.

The racing schedule below is a legal, crash-free, fair execution in which
exactly one process finishes the proposal stage with the full vector while
everyone else finishes gapped -- and the decision stage then splits.  It
needs four processes to miss the same input value, plus one process that
gathers three second proposals before its third equal first proposal
(in-order delivery only constrains messages from the *same* sender, so
second proposals from early responders can overtake first proposals of
third parties).

The scripted reference scenarios never hit this interleaving; the fuzzer
and the exhaustive search reach it on their own.  It is packaged here so
tests and demonstrations can reproduce the violation deterministically.
"""

from __future__ import annotations

from .cases import EARLY_FINISH, FULL_ORDER, Script, _seed_round, _trios
from .scenario import Scenario, SchedulerSpec, default_values


def racing_scenario(values=None) -> Scenario:
    """A deterministic schedule whose run violates agreement.

    Geometry: P0..P3 all propose without P4's value (one shared gap), P4
    proposes without P0's value (a different gap).  P0 races to three
    second proposals (from P4, P1, P2, each preceded by that sender's own
    first proposal, as ordering demands) while holding only two of the
    three equal first proposals -- so it finishes full, alone.  Everyone
    else finishes gapped, nobody's first three final messages include
    P0's, and the decision splits: P0 decides the full vector, P1..P4 the
    gapped one.
    """
    profiles = {0: FULL_ORDER, 1: FULL_ORDER, 2: FULL_ORDER, 3: EARLY_FINISH, 4: FULL_ORDER}
    sc = Script(5, profiles)
    _trios(sc, {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 2), 4: (1, 2, 3)})
    sc.first(4, 1)  # P1's obligation fires on the odd proposal
    sc.first(4, 2)  # P2's too
    sc.first(0, 4)  # P4's fires on any of the equal ones
    # The race: P0 alternates first/second deliveries and reaches three
    # second proposals while holding only two equal first proposals.
    sc.first(4, 0).second(4, 0)
    sc.first(1, 0).second(1, 0)
    sc.first(2, 0).second(2, 0)
    # Everyone else gathers the three equal gapped proposals and finishes.
    sc.first(0, 1).first(2, 1).first(3, 1)
    sc.first(0, 2).first(1, 2).first(3, 2)
    sc.first(0, 3).first(1, 3).first(2, 3)
    sc.first(1, 4).first(2, 4)
    # Final messages: nobody's first three include P0's full vector.
    _seed_round(sc, {0: (1, 2, 3), 1: (2, 3, 4), 2: (1, 3, 4), 3: (1, 2, 4), 4: (1, 2, 3)})
    vals = tuple(default_values(5)) if values is None else tuple(values)
    return Scenario(
        n=5,
        values=vals,
        scheduler=SchedulerSpec(
            type="scripted",
            script=tuple(tuple(item) for item in sc.items),
            drain_rest=True,
        ),
    )
