"""Scripted reproduction of the fifteen reference scenarios.

Each case pins one concrete interleaving (who receives what, in which
order) for N=5, runs it, and checks every process's proposal-stage
result and final decision against the documented outcome.  Cases 1-2
cover crash-free proposal races, 3-10 crashes around the initial-value
and proposal broadcasts, 11-12 the two crash-free decision mixes, and
13-15 crashes around the final broadcast.  Cases 4, 5, 7, and 13-15
carry lettered sub-scenarios.

Scripts name only the deliveries that matter; the builder auto-inserts
whatever same-sender prefix deliveries the in-order rule requires (a
late initial value, a first proposal before its second, ...).  Every
script ends by draining the buffer, so all messages to live processes
are delivered eventually.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .properties import PropertyReport, report_for_config
from .protocol import MsgKind, Vector, gap_indices, is_full
from .scenario import Scenario, SchedulerSpec, default_values
from .simulation import CrashSpec, CrashPoint
from .trace import Trace, run, run_config

IV, FP, SP, FIN = MsgKind.INITIAL, MsgKind.FIRST, MsgKind.SECOND, MsgKind.FINAL

# Send-order profile of a process that broadcasts all four kinds the usual way.
FULL_ORDER = (IV, FP, SP, FIN)
# A process that completed on equal first proposals sends its final vector
# before any (post-completion) second proposal.
EARLY_FINISH = (IV, FP, FIN, SP)


class Script:
    """Collects deliveries and fills in per-sender prefixes automatically.

    ``profiles`` gives each sender's broadcast order for this scenario, so
    scripting ``final(s, d)`` first inserts s's earlier messages to d if
    they have not been delivered yet.  Explicit ``iv`` calls form each
    destination's first three initial values; an auto-inserted initial
    value is only legal once its destination has left the collection
    stage, which the builder asserts.
    """

    def __init__(self, n: int, profiles: dict):
        self.n = n
        self.profiles = profiles
        self.items: list = []
        self.delivered: set = set()
        self.explicit_ivs = {d: 0 for d in range(n)}

    def iv(self, s: int, d: int) -> "Script":
        self.explicit_ivs[d] += 1
        self._add(IV, s, d)
        return self

    def first(self, s: int, d: int) -> "Script":
        self._deliver(FP, s, d)
        return self

    def second(self, s: int, d: int) -> "Script":
        self._deliver(SP, s, d)
        return self

    def final(self, s: int, d: int) -> "Script":
        self._deliver(FIN, s, d)
        return self

    def _deliver(self, kind: MsgKind, s: int, d: int) -> None:
        if (kind, s, d) in self.delivered:
            return  # idempotent: repeated mentions in overlapping stages are fine
        for earlier in self.profiles[s]:
            if earlier == kind:
                break
            if (earlier, s, d) not in self.delivered:
                if earlier == IV and self.explicit_ivs[d] < 3:
                    raise AssertionError(
                        f"script bug: auto initial value {s}->{d} before P{d} finished collecting"
                    )
                self._add(earlier, s, d)
        self._add(kind, s, d)

    def _add(self, kind: MsgKind, s: int, d: int) -> None:
        key = (kind, s, d)
        if key in self.delivered:
            raise AssertionError(f"script bug: duplicate delivery {key}")
        self.delivered.add(key)
        self.items.append(("deliver", s, kind.name.lower(), d))


def _trios(sc: Script, trios: dict) -> None:
    for d, senders in trios.items():
        for s in senders:
            sc.iv(s, d)


def _seed_round(sc: Script, receivers: dict) -> None:
    for d, senders in receivers.items():
        for s in senders:
            sc.final(s, d)


FULL = "full"


def gap(k: int) -> str:
    return f"gap@{k}"


def outcome_label(vec: Optional[Vector]) -> Optional[str]:
    if vec is None:
        return None
    return FULL if is_full(vec) else gap(gap_indices(vec)[0])


@dataclass
class Case:
    case_id: str
    title: str
    crash: Optional[CrashSpec]
    script: list
    expected_entry: dict  # pid -> FULL | "gap@k" | None
    expected_decided: dict  # pid -> FULL | "gap@k" | None
    first_proposals: Optional[dict] = None  # pid -> expected gap slot
    upgraded: frozenset = frozenset()  # pids whose decision improved on their entry
    note: Optional[str] = None

    def scenario(self, values=None) -> Scenario:
        values = tuple(default_values(5)) if values is None else tuple(values)
        return Scenario(
            n=5,
            values=values,
            crash=self.crash,
            scheduler=SchedulerSpec(
                type="scripted",
                script=tuple(tuple(item) for item in self.script),
                drain_rest=True,
            ),
        )


@dataclass
class CaseResult:
    case: Case
    trace: Trace
    report: PropertyReport
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


# ---------------------------------------------------------------------------
# Crash-free proposal races
# ---------------------------------------------------------------------------

# Shared geometry for most cases: everyone misses P4's value except where a
# case says otherwise, so the "standard" first proposal is (v0..v3, gap).
STD_TRIOS = {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 2), 4: (0, 1, 2)}


def _case1() -> Case:
    # P3 learned P4's value before proposing, so three proposal shapes exist:
    # three processes miss slot 4, P3 misses slot 2, P4 misses slot 3.
    sc = Script(5, {p: FULL_ORDER for p in range(5)})
    _trios(sc, {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 4), 4: (0, 1, 2)})
    # P3 and P4 gather the three equal first proposals first and finish gapped.
    for d in (3, 4):
        sc.first(0, d).first(1, d).first(2, d)
    # The differing proposal draws a second proposal out of P0..P2.
    for d in (0, 1, 2):
        sc.first(3, d)
    # P0..P2 then gather three second proposals each, in per-sender order.
    for d, a in ((0, 1), (1, 0), (2, 0)):
        sc.second(3, d)
        sc.first(4, d).second(4, d)
        sc.first(a, d).second(a, d)
    _seed_round(sc, {3: (0, 1, 2), 4: (0, 1, 2), 0: (3, 4, 1), 1: (3, 4, 0), 2: (3, 4, 0)})
    return Case(
        case_id="case01",
        title="no crash; one early and one slow learner finish gapped, the rest full",
        crash=None,
        script=sc.items,
        expected_entry={0: FULL, 1: FULL, 2: FULL, 3: gap(4), 4: gap(4)},
        expected_decided={p: FULL for p in range(5)},
        first_proposals={0: 4, 1: 4, 2: 4, 3: 2, 4: 3},
        upgraded=frozenset({3, 4}),
    )


def _case2() -> Case:
    # P3 learned P4's value only after proposing: four equal proposals exist
    # and every process finishes gapped on the same slot.
    profiles = {p: EARLY_FINISH for p in range(4)}
    profiles[4] = FULL_ORDER
    sc = Script(5, profiles)
    _trios(sc, STD_TRIOS)
    for d in range(4):
        for s in range(4):
            if s != d:
                sc.first(s, d)
    sc.first(0, 4).first(1, 4).first(2, 4)
    # Obligations survive completion: the late differing proposal still
    # draws a second proposal out of every finished process.
    for d in range(4):
        sc.first(4, d)
    _seed_round(sc, {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 2), 4: (0, 1, 2)})
    return Case(
        case_id="case02",
        title="no crash; everyone gathers the same three first proposals and finishes gapped",
        crash=None,
        script=sc.items,
        expected_entry={p: gap(4) for p in range(5)},
        expected_decided={p: gap(4) for p in range(5)},
        first_proposals={0: 4, 1: 4, 2: 4, 3: 4, 4: 3},
    )


# ---------------------------------------------------------------------------
# Crashes around the initial value and the proposals
# ---------------------------------------------------------------------------


def _correct_quartet(sc: Script) -> None:
    trios = {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 2)}
    _trios(sc, trios)
    for d in range(4):
        for s in range(4):
            if s != d:
                sc.first(s, d)
    _seed_round(sc, {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 2)})


def _case3() -> Case:
    sc = Script(5, {p: (IV, FP, FIN) for p in range(4)})
    _correct_quartet(sc)
    return Case(
        case_id="case03",
        title="crash before the initial value; survivors agree without the victim's input",
        crash=CrashSpec(4, CrashPoint.BEFORE, IV),
        script=sc.items,
        expected_entry={0: gap(4), 1: gap(4), 2: gap(4), 3: gap(4), 4: None},
        expected_decided={0: gap(4), 1: gap(4), 2: gap(4), 3: gap(4), 4: None},
    )


def _case4a() -> Case:
    profiles = {p: (IV, FP, FIN) for p in range(4)}
    profiles[4] = (IV,)
    sc = Script(5, profiles)
    trios = {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 2)}
    _trios(sc, trios)
    sc._add(IV, 4, 0)  # the one surviving copy, arriving too late to count
    for d in range(4):
        for s in range(4):
            if s != d:
                sc.first(s, d)
    _seed_round(sc, {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 2)})
    return Case(
        case_id="case04a",
        title="crash during the initial value, received only after proposing: all gapped",
        crash=CrashSpec(4, CrashPoint.DURING, IV, frozenset({0})),
        script=sc.items,
        expected_entry={0: gap(4), 1: gap(4), 2: gap(4), 3: gap(4), 4: None},
        expected_decided={0: gap(4), 1: gap(4), 2: gap(4), 3: gap(4), 4: None},
    )


def _pairwise_full_square(sc: Script) -> None:
    # Four distinct proposal shapes: everyone must gather three second
    # proposals, so all four survivors finish with the full vector.
    sc.first(1, 0).first(0, 1).first(0, 2).first(0, 3)  # all obligations fire
    for d, triggers in ((0, (1, 2, 3)), (1, (0, 2, 3)), (2, (0, 1, 3)), (3, (0, 1, 2))):
        for s in triggers:
            sc.first(s, d)
            sc.second(s, d)
    _seed_round(sc, {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 2)})


def _case4b() -> Case:
    sc = Script(5, {p: FULL_ORDER for p in range(4)})
    _trios(sc, {0: (4, 1, 2), 1: (4, 0, 3), 2: (0, 1, 3), 3: (0, 1, 2)})
    _pairwise_full_square(sc)
    return Case(
        case_id="case04b",
        title="crash during the initial value, two early receivers: all survivors full",
        crash=CrashSpec(4, CrashPoint.DURING, IV, frozenset({0, 1})),
        script=sc.items,
        expected_entry={0: FULL, 1: FULL, 2: FULL, 3: FULL, 4: None},
        expected_decided={0: FULL, 1: FULL, 2: FULL, 3: FULL, 4: None},
    )


def _case4c() -> Case:
    sc = Script(5, {p: FULL_ORDER for p in range(4)})
    _trios(sc, {0: (4, 1, 2), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 2)})
    sc.first(1, 0).first(2, 0).first(3, 0)  # three equal proposals finish P0 gapped
    sc.first(0, 1).first(0, 2).first(0, 3)  # the odd proposal draws out S1..S3
    for d, triggers in ((1, (0, 2, 3)), (2, (0, 1, 3)), (3, (0, 1, 2))):
        for s in triggers:
            sc.first(s, d)
            sc.second(s, d)
    _seed_round(sc, {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 2)})
    return Case(
        case_id="case04c",
        title="crash during the initial value, a single early receiver: it is forced gapped",
        crash=CrashSpec(4, CrashPoint.DURING, IV, frozenset({0})),
        script=sc.items,
        expected_entry={0: gap(4), 1: FULL, 2: FULL, 3: FULL, 4: None},
        expected_decided={0: FULL, 1: FULL, 2: FULL, 3: FULL, 4: None},
        upgraded=frozenset({0}),
        note=(
            "a single early receiver cannot finish the proposal stage full: in-order "
            "processing hands it the three equal gapped proposals first; it still "
            "decides the full vector"
        ),
    )


def _case5a() -> Case:
    profiles = {p: (IV, FP, FIN) for p in range(4)}
    profiles[4] = (IV,)
    sc = Script(5, profiles)
    trios = {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 2)}
    _trios(sc, trios)
    for d in range(4):
        sc._add(IV, 4, d)  # full broadcast, but everywhere late
    for d in range(4):
        for s in range(4):
            if s != d:
                sc.first(s, d)
    _seed_round(sc, {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 2)})
    return Case(
        case_id="case05a",
        title="crash after the initial value, received everywhere too late: all gapped",
        crash=CrashSpec(4, CrashPoint.AFTER, IV),
        script=sc.items,
        expected_entry={0: gap(4), 1: gap(4), 2: gap(4), 3: gap(4), 4: None},
        expected_decided={0: gap(4), 1: gap(4), 2: gap(4), 3: gap(4), 4: None},
    )


def _case5b() -> Case:
    sc = Script(5, {p: FULL_ORDER for p in range(4)})
    _trios(sc, {0: (4, 1, 2), 1: (4, 0, 3), 2: (0, 1, 3), 3: (0, 1, 2)})
    _pairwise_full_square(sc)
    return Case(
        case_id="case05b",
        title="crash after the initial value, two early receivers: all survivors full",
        crash=CrashSpec(4, CrashPoint.AFTER, IV),
        script=sc.items,
        expected_entry={0: FULL, 1: FULL, 2: FULL, 3: FULL, 4: None},
        expected_decided={0: FULL, 1: FULL, 2: FULL, 3: FULL, 4: None},
    )


def _case6() -> Case:
    profiles = {p: (IV, FP, FIN) for p in range(4)}
    profiles[4] = (IV,)
    sc = Script(5, profiles)
    trios = {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 2), 4: (0, 1, 2)}
    _trios(sc, trios)  # the victim's third initial value triggers its fatal proposal
    for d in range(4):
        for s in range(4):
            if s != d:
                sc.first(s, d)
    _seed_round(sc, {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 2)})
    return Case(
        case_id="case06",
        title="crash before the first proposal: survivors agree gapped",
        crash=CrashSpec(4, CrashPoint.BEFORE, FP),
        script=sc.items,
        expected_entry={0: gap(4), 1: gap(4), 2: gap(4), 3: gap(4), 4: None},
        expected_decided={0: gap(4), 1: gap(4), 2: gap(4), 3: gap(4), 4: None},
    )


def _case7_scenario1() -> Case:
    # Victim P0's proposal reaches only P1.  P1 and P4 learned the victim's
    # value early, so four distinct shapes exist and all survivors go full.
    profiles = {0: (IV, FP), 1: FULL_ORDER, 2: FULL_ORDER, 3: FULL_ORDER, 4: FULL_ORDER}
    sc = Script(5, profiles)
    _trios(sc, {0: (1, 2, 3), 1: (0, 3, 4), 2: (1, 3, 4), 3: (1, 2, 4), 4: (0, 1, 2)})
    sc.first(2, 1)  # P1's trigger
    sc.first(1, 2).first(1, 3).first(1, 4)  # triggers for the others
    sc.first(0, 1)  # the one delivered copy of the victim's proposal
    sc.second(2, 1).first(3, 1).second(3, 1).first(4, 1).second(4, 1)
    for d, triggers in ((2, (1, 3, 4)), (3, (1, 2, 4)), (4, (1, 2, 3))):
        for s in triggers:
            sc.first(s, d)
            sc.second(s, d)
    _seed_round(sc, {1: (2, 3, 4), 2: (1, 3, 4), 3: (1, 2, 4), 4: (1, 2, 3)})
    return Case(
        case_id="case07a",
        title="crash during the first proposal, value known early by two: all survivors full",
        crash=CrashSpec(0, CrashPoint.DURING, FP, frozenset({1})),
        script=sc.items,
        expected_entry={0: None, 1: FULL, 2: FULL, 3: FULL, 4: FULL},
        expected_decided={0: None, 1: FULL, 2: FULL, 3: FULL, 4: FULL},
        first_proposals={0: 4, 1: 2, 2: 0, 3: 0, 4: 3},
    )


def _case7_scenario2() -> Case:
    # Three survivors miss the victim's value and propose identically; the
    # one process that knew it is forced to finish gapped on the victim's
    # slot, then upgrades to full while deciding.
    profiles = {0: (IV, FP), 1: FULL_ORDER, 2: FULL_ORDER, 3: FULL_ORDER, 4: FULL_ORDER}
    sc = Script(5, profiles)
    _trios(sc, {0: (1, 2, 3), 1: (0, 3, 4), 2: (1, 3, 4), 3: (1, 2, 4), 4: (1, 2, 3)})
    sc.first(2, 1).first(3, 1).first(4, 1)  # three equal proposals: P1 gapped
    sc.first(1, 2).first(1, 3).first(1, 4)  # its differing proposal draws out S2..S4
    for d, triggers in ((2, (1, 3, 4)), (3, (1, 2, 4)), (4, (1, 2, 3))):
        for s in triggers:
            sc.first(s, d)
            sc.second(s, d)
    _seed_round(sc, {1: (2, 3, 4), 2: (1, 3, 4), 3: (1, 2, 4), 4: (1, 2, 3)})
    return Case(
        case_id="case07b",
        title="crash during the first proposal, value known early by one: it finishes gapped",
        crash=CrashSpec(0, CrashPoint.DURING, FP, frozenset({1})),
        script=sc.items,
        expected_entry={0: None, 1: gap(0), 2: FULL, 3: FULL, 4: FULL},
        expected_decided={0: None, 1: FULL, 2: FULL, 3: FULL, 4: FULL},
        first_proposals={0: 4, 1: 2, 2: 0, 3: 0, 4: 0},
        upgraded=frozenset({1}),
    )


def _case8() -> Case:
    # Case 1 geometry; the slow proposer dies right after its first proposal,
    # so its second proposal never exists.  Outcomes match case 1 minus one.
    profiles = {p: FULL_ORDER for p in range(4)}
    profiles[4] = (IV, FP)
    sc = Script(5, profiles)
    _trios(sc, {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 4), 4: (0, 1, 2)})
    sc.first(0, 3).first(1, 3).first(2, 3)  # P3 finishes gapped (its obligation fired first)
    sc.first(3, 0).first(3, 1).first(3, 2)  # P3's differing proposal draws out S0..S2
    for d, others in ((0, (1, 2)), (1, (0, 2)), (2, (0, 1))):
        sc.second(3, d)
        sc.first(4, d)  # delivered, but no second will follow
        a, b = others
        sc.first(a, d).second(a, d)
        sc.first(b, d).second(b, d)
    _seed_round(sc, {3: (0, 1, 2), 0: (3, 1, 2), 1: (3, 0, 2), 2: (3, 0, 1)})
    return Case(
        case_id="case08",
        title="crash after the first proposal: outcomes as in case 1, one participant short",
        crash=CrashSpec(4, CrashPoint.AFTER, FP),
        script=sc.items,
        expected_entry={0: FULL, 1: FULL, 2: FULL, 3: gap(4), 4: None},
        expected_decided={0: FULL, 1: FULL, 2: FULL, 3: FULL, 4: None},
        upgraded=frozenset({3}),
    )


def _case9() -> Case:
    # Case 1 geometry; the early learner dies midway through its second
    # proposal, which reaches P0 alone.
    profiles = {0: FULL_ORDER, 1: FULL_ORDER, 2: FULL_ORDER, 3: (IV, FP, SP), 4: FULL_ORDER}
    sc = Script(5, profiles)
    _trios(sc, {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 4), 4: (0, 1, 2)})
    sc.first(0, 3)  # triggers the fatal second proposal
    sc.first(0, 4).first(1, 4).first(2, 4)  # P4 finishes gapped, obligation fired on F0
    sc.first(4, 1).first(4, 2)  # P4's differing proposal draws out S1, S2
    sc.first(3, 0).second(3, 0)  # the surviving copy
    sc.first(4, 0).second(4, 0).first(1, 0).second(1, 0)
    for d, others in ((1, (0, 2)), (2, (0, 1))):
        sc.second(4, d)
        a, b = others
        sc.first(a, d).second(a, d)
        sc.first(b, d).second(b, d)
    _seed_round(sc, {4: (0, 1, 2), 0: (4, 1, 2), 1: (4, 0, 2), 2: (4, 0, 1)})
    return Case(
        case_id="case09",
        title="crash during the second proposal: outcomes unchanged for the survivors",
        crash=CrashSpec(3, CrashPoint.DURING, SP, frozenset({0})),
        script=sc.items,
        expected_entry={0: FULL, 1: FULL, 2: FULL, 3: None, 4: gap(4)},
        expected_decided={0: FULL, 1: FULL, 2: FULL, 3: None, 4: FULL},
        upgraded=frozenset({4}),
    )


def _case10() -> Case:
    profiles = {0: FULL_ORDER, 1: FULL_ORDER, 2: FULL_ORDER, 3: (IV, FP, SP), 4: FULL_ORDER}
    sc = Script(5, profiles)
    _trios(sc, {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 4), 4: (0, 1, 2)})
    sc.first(0, 3)  # triggers the last full broadcast before the crash
    sc.first(0, 4).first(1, 4).first(2, 4)  # P4 finishes gapped
    sc.first(3, 0).first(3, 1).first(3, 2)  # the differing proposal draws out S0..S2
    for d, others in ((0, (1, 2)), (1, (0, 2)), (2, (0, 1))):
        sc.second(3, d)
        a, b = others
        sc.first(a, d).second(a, d)
        sc.first(b, d).second(b, d)
    _seed_round(sc, {4: (0, 1, 2), 0: (4, 1, 2), 1: (4, 0, 2), 2: (4, 0, 1)})
    return Case(
        case_id="case10",
        title="crash after the second proposal: outcomes unchanged for the survivors",
        crash=CrashSpec(3, CrashPoint.AFTER, SP),
        script=sc.items,
        expected_entry={0: FULL, 1: FULL, 2: FULL, 3: None, 4: gap(4)},
        expected_decided={0: FULL, 1: FULL, 2: FULL, 3: None, 4: FULL},
        upgraded=frozenset({4}),
    )


# ---------------------------------------------------------------------------
# Decision-stage mixes and crashes
# ---------------------------------------------------------------------------


def _case11() -> Case:
    # Two processes enter deciding with the full vector but miss each
    # other's final messages; the three gapped processes upgrade.
    sc = Script(5, {p: FULL_ORDER for p in range(5)})
    _trios(sc, STD_TRIOS)
    sc.first(0, 4)  # P4's trigger
    sc.first(4, 0).first(4, 1).first(4, 2).first(4, 3)  # everyone's obligation fires
    for d, other in ((0, 1), (1, 0)):
        sc.second(4, d)
        sc.first(other, d).second(other, d)
        sc.first(2, d).second(2, d)
    sc.first(0, 2).first(1, 2).first(3, 2)
    sc.first(0, 3).first(1, 3).first(2, 3)
    sc.first(1, 4).first(2, 4)
    _seed_round(sc, {0: (2, 3, 4), 1: (2, 3, 4), 2: (1, 3, 4), 3: (1, 2, 4), 4: (1, 2, 3)})
    return Case(
        case_id="case11",
        title="two full entrants that never see each other; gapped entrants upgrade",
        crash=None,
        script=sc.items,
        expected_entry={0: FULL, 1: FULL, 2: gap(4), 3: gap(4), 4: gap(4)},
        expected_decided={p: FULL for p in range(5)},
        first_proposals={0: 4, 1: 4, 2: 4, 3: 4, 4: 3},
        upgraded=frozenset({2, 3, 4}),
    )


def _case12() -> Case:
    # Everyone enters deciding gapped; each collects three gapped finals and
    # concludes nobody can hold the full vector.
    profiles = {p: EARLY_FINISH for p in range(4)}
    profiles[4] = FULL_ORDER
    sc = Script(5, profiles)
    _trios(sc, STD_TRIOS)
    for d in range(4):
        for s in range(4):
            if s != d:
                sc.first(s, d)
    sc.first(0, 4).first(1, 4).first(2, 4)
    _seed_round(sc, {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 2), 4: (1, 2, 3)})
    for d in range(4):
        sc.first(4, d)  # post-completion obligations, exercised during deciding
    return Case(
        case_id="case12",
        title="all five enter deciding gapped and stay gapped",
        crash=None,
        script=sc.items,
        expected_entry={p: gap(4) for p in range(5)},
        expected_decided={p: gap(4) for p in range(5)},
    )


def _case1_proposals(sc: Script) -> None:
    # Case 1 geometry reused by the decision-crash cases: P0 dies around its
    # final broadcast, P1/P2 finish full, P3/P4 finish gapped.
    _trios(sc, {0: (1, 2, 3), 1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 4), 4: (0, 1, 2)})
    sc.first(0, 3)  # P3's trigger
    sc.first(0, 4)  # P4's trigger
    sc.first(3, 1)  # P1's trigger
    sc.first(3, 2)  # P2's trigger
    sc.first(3, 0).second(3, 0).first(4, 0).second(4, 0).first(1, 0).second(1, 0)
    sc.first(1, 3).first(2, 3)
    sc.first(1, 4).first(2, 4)
    sc.second(3, 1).first(4, 1).second(4, 1).first(0, 1).second(0, 1)
    sc.second(3, 2).first(4, 2).second(4, 2).first(0, 2).second(0, 2)


def _case2_proposals(sc: Script) -> None:
    # Case 2 geometry for the all-gapped decision-crash variants.
    _trios(sc, STD_TRIOS)
    for d in range(4):
        for s in range(4):
            if s != d:
                sc.first(s, d)
    sc.first(0, 4).first(1, 4).first(2, 4)


def _case13a() -> Case:
    profiles = {0: (IV, FP, SP), 1: FULL_ORDER, 2: FULL_ORDER, 3: FULL_ORDER, 4: FULL_ORDER}
    sc = Script(5, profiles)
    _case1_proposals(sc)
    _seed_round(sc, {1: (2, 3, 4), 2: (1, 3, 4), 3: (1, 2, 4), 4: (1, 2, 3)})
    return Case(
        case_id="case13a",
        title="crash before the final broadcast, full entrants remain: all survivors full",
        crash=CrashSpec(0, CrashPoint.BEFORE, FIN),
        script=sc.items,
        expected_entry={0: FULL, 1: FULL, 2: FULL, 3: gap(4), 4: gap(4)},
        expected_decided={0: None, 1: FULL, 2: FULL, 3: FULL, 4: FULL},
        upgraded=frozenset({3, 4}),
    )


def _case13b() -> Case:
    profiles = {p: EARLY_FINISH for p in range(4)}
    profiles[0] = (IV, FP)
    profiles[4] = FULL_ORDER
    sc = Script(5, profiles)
    _case2_proposals(sc)
    _seed_round(sc, {1: (2, 3, 4), 2: (1, 3, 4), 3: (1, 2, 4), 4: (1, 2, 3)})
    return Case(
        case_id="case13b",
        title="crash before the final broadcast, all entrants gapped: survivors stay gapped",
        crash=CrashSpec(0, CrashPoint.BEFORE, FIN),
        script=sc.items,
        expected_entry={0: gap(4), 1: gap(4), 2: gap(4), 3: gap(4), 4: gap(4)},
        expected_decided={0: None, 1: gap(4), 2: gap(4), 3: gap(4), 4: gap(4)},
    )


def _case14a() -> Case:
    profiles = {0: FULL_ORDER, 1: FULL_ORDER, 2: FULL_ORDER, 3: FULL_ORDER, 4: FULL_ORDER}
    sc = Script(5, profiles)
    _case1_proposals(sc)
    _seed_round(sc, {3: (0, 1, 2), 1: (2, 3, 4), 2: (1, 3, 4), 4: (1, 2, 3)})
    return Case(
        case_id="case14a",
        title="crash during the final broadcast, full entrants remain: all survivors full",
        crash=CrashSpec(0, CrashPoint.DURING, FIN, frozenset({3})),
        script=sc.items,
        expected_entry={0: FULL, 1: FULL, 2: FULL, 3: gap(4), 4: gap(4)},
        expected_decided={0: None, 1: FULL, 2: FULL, 3: FULL, 4: FULL},
        upgraded=frozenset({3, 4}),
    )


def _case14b() -> Case:
    profiles = {p: EARLY_FINISH for p in range(4)}
    profiles[4] = FULL_ORDER
    sc = Script(5, profiles)
    _case2_proposals(sc)
    _seed_round(sc, {1: (0, 2, 3), 2: (1, 3, 4), 3: (1, 2, 4), 4: (1, 2, 3)})
    return Case(
        case_id="case14b",
        title="crash during the final broadcast, all entrants gapped: survivors stay gapped",
        crash=CrashSpec(0, CrashPoint.DURING, FIN, frozenset({1})),
        script=sc.items,
        expected_entry={0: gap(4), 1: gap(4), 2: gap(4), 3: gap(4), 4: gap(4)},
        expected_decided={0: None, 1: gap(4), 2: gap(4), 3: gap(4), 4: gap(4)},
    )


def _case15a() -> Case:
    sc = Script(5, {p: FULL_ORDER for p in range(5)})
    _case1_proposals(sc)
    _seed_round(sc, {1: (0, 3, 4), 2: (0, 3, 4), 3: (0, 1, 2), 4: (0, 1, 2)})
    return Case(
        case_id="case15a",
        title="crash after the final broadcast, full entrants remain: all survivors full",
        crash=CrashSpec(0, CrashPoint.AFTER, FIN),
        script=sc.items,
        expected_entry={0: FULL, 1: FULL, 2: FULL, 3: gap(4), 4: gap(4)},
        expected_decided={0: None, 1: FULL, 2: FULL, 3: FULL, 4: FULL},
        upgraded=frozenset({3, 4}),
    )


def _case15b() -> Case:
    profiles = {p: EARLY_FINISH for p in range(4)}
    profiles[4] = FULL_ORDER
    sc = Script(5, profiles)
    _case2_proposals(sc)
    _seed_round(sc, {1: (0, 2, 3), 2: (0, 1, 3), 3: (0, 1, 2), 4: (0, 1, 2)})
    return Case(
        case_id="case15b",
        title="crash after the final broadcast, all entrants gapped: survivors stay gapped",
        crash=CrashSpec(0, CrashPoint.AFTER, FIN),
        script=sc.items,
        expected_entry={0: gap(4), 1: gap(4), 2: gap(4), 3: gap(4), 4: gap(4)},
        expected_decided={0: None, 1: gap(4), 2: gap(4), 3: gap(4), 4: gap(4)},
    )


_BUILDERS = (
    _case1,
    _case2,
    _case3,
    _case4a,
    _case4b,
    _case4c,
    _case5a,
    _case5b,
    _case6,
    _case7_scenario1,
    _case7_scenario2,
    _case8,
    _case9,
    _case10,
    _case11,
    _case12,
    _case13a,
    _case13b,
    _case14a,
    _case14b,
    _case15a,
    _case15b,
)


def all_cases() -> list:
    return [build() for build in _BUILDERS]


def run_case(case: Case, values=None) -> CaseResult:
    scenario = case.scenario(values)
    trace = run(scenario)
    cfg = run_config(scenario, trace.events)  # doubles as a replay check
    report = report_for_config(cfg, list(scenario.values), trace.verdict.status)
    mismatches = []
    if cfg.config_hash() != trace.verdict.config_hash:
        mismatches.append("replay hash mismatch")
    for pid in range(scenario.n):
        proc = cfg.processes[pid]
        got_entry = outcome_label(proc.decision_entry)
        if got_entry != case.expected_entry[pid]:
            mismatches.append(
                f"P{pid} entered deciding with {got_entry}, expected {case.expected_entry[pid]}"
            )
        got_decided = outcome_label(proc.decided)
        if got_decided != case.expected_decided[pid]:
            mismatches.append(
                f"P{pid} decided {got_decided}, expected {case.expected_decided[pid]}"
            )
        if case.first_proposals is not None and proc.first_proposal is not None:
            want_gap = case.first_proposals[pid]
            if outcome_label(proc.first_proposal) != gap(want_gap):
                mismatches.append(
                    f"P{pid}'s first proposal is {outcome_label(proc.first_proposal)}, "
                    f"expected gap@{want_gap}"
                )
    upgraded = {
        pid
        for pid in range(scenario.n)
        if cfg.processes[pid].decided is not None
        and cfg.processes[pid].decided != cfg.processes[pid].decision_entry
    }
    if upgraded != set(case.upgraded):
        mismatches.append(f"upgraded set {sorted(upgraded)} != expected {sorted(case.upgraded)}")
    if not report.all_ok:
        mismatches.append(f"property failures: {', '.join(report.failures())}")
    return CaseResult(case=case, trace=trace, report=report, mismatches=mismatches)


def run_case_suite(values=None) -> list:
    return [run_case(case, values) for case in all_cases()]
