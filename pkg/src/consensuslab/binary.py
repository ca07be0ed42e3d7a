"""Binary decisions on top of vector agreement.

A deterministic interpretation function turns an agreed vector of single
bits into one bit: majority over the filled slots, with an exact tie
resolved by a preconfigured rule.  Two ways of finishing a synchronous
binary consensus round are implemented side by side:

* traditional -- every process first interprets its own vector, then the
  system agrees on the resulting bit;
* vector-first -- the system first agrees on the vector, then every
  process interprets it locally.

``commutativity_check`` verifies by exhaustive enumeration that the two
orders produce identical outcomes, and ``binary_from_async`` rides the
same interpretation on decided vectors from the asynchronous protocol.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .errors import ConfigError, MalformedMessage, ModelViolation
from .properties import check_properties
from .protocol import Vector, gap_indices
from .trace import Trace

BIT_BYTES = (b"\x00", b"\x01")


def bf(vec: Vector, tie_rule: int) -> int:
    """Majority bit of the filled slots; an exact tie yields ``tie_rule``."""
    if tie_rule not in (0, 1):
        raise ConfigError("tie rule must be 0 or 1")
    if len(gap_indices(vec)) > 1:
        raise MalformedMessage("interpretation needs a vector with at most one empty slot")
    ones = zeros = 0
    for slot in vec:
        if slot is None:
            continue
        if slot == b"\x01":
            ones += 1
        elif slot == b"\x00":
            zeros += 1
        else:
            raise MalformedMessage(f"slot value {slot!r} is not a single bit")
    if ones > zeros:
        return 1
    if zeros > ones:
        return 0
    return tie_rule


@dataclass(frozen=True)
class SyncSystem:
    """A lock-step synchronous round system with crash-silent faults.

    Faulty processes are silent from the start; every message between
    correct processes arrives within its round.  A majority of correct
    processes is required, which at these sizes means at most one fault.
    """

    n: int
    correct: frozenset
    bits: tuple

    def validate(self) -> None:
        if self.n < 3:
            raise ModelViolation("synchronous system needs at least 3 processes")
        if len(self.bits) != self.n or any(b not in (0, 1) for b in self.bits):
            raise ModelViolation("bits must be one 0/1 value per process")
        if not self.correct or any(not 0 <= p < self.n for p in self.correct):
            raise ModelViolation("correct set out of range")
        if len(self.correct) < self.n / 2 + 1:
            raise ModelViolation(
                f"quorum unreachable: {len(self.correct)} correct of {self.n}"
            )

    def shared_vector(self) -> Vector:
        """The vector every correct process assembles after the exchange
        rounds: a bit per correct process, an empty slot per silent one."""
        return tuple(
            BIT_BYTES[self.bits[i]] if i in self.correct else None for i in range(self.n)
        )


def _agree(rows: dict, quorum: int):
    """Pick the value held identically by at least ``quorum`` row entries."""
    counts: dict = {}
    for value in rows.values():
        counts[value] = counts.get(value, 0) + 1
    for value, count in counts.items():
        if count >= quorum:
            return value
    raise ModelViolation("no value reached the required quorum")


def run_traditional(sys: SyncSystem, tie_rule: int = 0, interpret=bf) -> int:
    """Interpret first, then agree on the bit.

    ``interpret`` may be any pure, deterministic replacement for the
    majority rule; the commutativity enumeration must stay green for it.
    """
    sys.validate()
    vector = sys.shared_vector()
    local_bits = {p: interpret(vector, tie_rule) for p in sorted(sys.correct)}
    # Each correct process broadcasts its bit and looks for a quorum of
    # equal entries in its row; rows are identical under this fault model.
    quorum = len(sys.correct)
    agreed = {p: _agree(local_bits, quorum) for p in sys.correct}
    bits = set(agreed.values())
    if len(bits) != 1:
        raise ModelViolation("correct processes disagreed on the bit")
    return bits.pop()


def run_new_paradigm(sys: SyncSystem, tie_rule: int = 0, interpret=bf) -> int:
    """Agree on the vector, then interpret locally."""
    sys.validate()
    rows = {p: sys.shared_vector() for p in sorted(sys.correct)}
    agreed_vector = _agree(rows, len(sys.correct))
    bits = {interpret(agreed_vector, tie_rule) for _ in sys.correct}
    if len(bits) != 1:
        raise ModelViolation("correct processes disagreed on the bit")
    return bits.pop()


@dataclass
class CommutReport:
    n: int
    tie_rule: int
    instances: int
    mismatches: list

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def summary(self) -> str:
        state = "ok" if self.ok else f"{len(self.mismatches)} MISMATCHES"
        return f"n={self.n} tie_rule={self.tie_rule}: {self.instances} instances, {state}"


def commutativity_check(n: int, tie_rule: int, interpret=bf) -> CommutReport:
    """Enumerate all bit assignments x (no fault + each single silent fault)
    and compare the two finishing orders on every instance."""
    if not 5 <= n <= 7:
        raise ConfigError("commutativity enumeration supports n between 5 and 7")
    faults = [None] + list(range(n))
    mismatches = []
    instances = 0
    for bits in product((0, 1), repeat=n):
        for fault in faults:
            correct = frozenset(p for p in range(n) if p != fault)
            sys = SyncSystem(n=n, correct=correct, bits=bits)
            instances += 1
            a = run_traditional(sys, tie_rule, interpret)
            b = run_new_paradigm(sys, tie_rule, interpret)
            if a != b:
                mismatches.append({"bits": bits, "fault": fault, "traditional": a, "vector_first": b})
    return CommutReport(n=n, tie_rule=tie_rule, instances=instances, mismatches=mismatches)


@dataclass
class LiftReport:
    bit: int
    deciders: list
    tie_rule: int

    def summary(self) -> str:
        who = ", ".join(f"P{p}" for p in self.deciders)
        return f"bit {self.bit} for {who} (tie rule {self.tie_rule})"


def binary_from_async(trace: Trace, tie_rule: int) -> LiftReport:
    """Interpret every decider's agreed vector from an asynchronous run.

    Requires the trace to satisfy agreement; all deciders then obtain the
    same bit because they interpret equal vectors with the same pure
    function.
    """
    report = check_properties(trace)
    if not report.agreement.ok:
        raise ConfigError(f"trace fails agreement: {report.agreement.detail}")
    deciders = [i for i, vec in enumerate(trace.verdict.decided) if vec is not None]
    if not deciders:
        raise ConfigError("trace contains no decided process")
    bits = {i: bf(trace.verdict.decided[i], tie_rule) for i in deciders}
    distinct = set(bits.values())
    if len(distinct) != 1:
        raise ModelViolation(f"deciders produced different bits: {bits}")
    return LiftReport(bit=distinct.pop(), deciders=deciders, tie_rule=tie_rule)
