"""Binary interpretation: majority with a tie rule, both finishing orders,
and the lift from asynchronous traces."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from consensuslab.binary import (
    SyncSystem,
    bf,
    binary_from_async,
    commutativity_check,
    run_new_paradigm,
    run_traditional,
)
from consensuslab.cases import run_case_suite
from consensuslab.errors import ConfigError, MalformedMessage, ModelViolation
from consensuslab.findings import racing_scenario
from consensuslab.scenario import bit_values
from consensuslab.trace import run

B = lambda bit: bytes([bit])


def vec(*bits):
    return tuple(None if b is None else B(b) for b in bits)


class TestBf:
    def test_strict_majority(self):
        assert bf(vec(1, 1, 1, 0, 0), 0) == 1

    def test_tie_resolves_to_rule(self):
        assert bf(vec(1, 1, 0, 0, None), 0) == 0
        assert bf(vec(1, 1, 0, 0, None), 1) == 1

    def test_majority_beats_tie_rule(self):
        assert bf(vec(None, 0, 0, 0, 0), 1) == 0

    def test_non_bit_slot_rejected(self):
        with pytest.raises(MalformedMessage):
            bf((b"\x05", B(0), B(1), B(0), B(1)), 0)

    def test_two_gaps_rejected(self):
        with pytest.raises(MalformedMessage):
            bf(vec(None, None, 1, 1, 0), 0)

    @given(
        st.lists(st.sampled_from([0, 1]), min_size=3, max_size=9),
        st.integers(min_value=-1, max_value=8),
        st.sampled_from([0, 1]),
    )
    @settings(max_examples=200, deadline=None)
    def test_total_over_vectors_with_at_most_one_gap(self, bits, gap_at, tie):
        slots = [B(b) for b in bits]
        if 0 <= gap_at < len(slots):
            slots[gap_at] = None
        out = bf(tuple(slots), tie)
        assert out in (0, 1)
        ones = sum(1 for s in slots if s == B(1))
        zeros = sum(1 for s in slots if s == B(0))
        if ones != zeros:
            assert out == (1 if ones > zeros else 0)
        else:
            assert out == tie


class TestSyncRounds:
    def test_all_correct_majority(self):
        sys = SyncSystem(n=5, correct=frozenset(range(5)), bits=(1, 1, 0, 1, 0))
        assert run_traditional(sys, 0) == 1
        assert run_new_paradigm(sys, 0) == 1

    def test_silent_fault_forces_tie_rule(self):
        sys = SyncSystem(n=5, correct=frozenset({0, 1, 2, 3}), bits=(1, 1, 0, 0, 1))
        assert run_traditional(sys, 0) == 0
        assert run_traditional(sys, 1) == 1
        assert run_new_paradigm(sys, 0) == 0
        assert run_new_paradigm(sys, 1) == 1

    def test_unanimity_small_system(self):
        sys = SyncSystem(n=3, correct=frozenset(range(3)), bits=(0, 0, 0))
        assert run_traditional(sys, 1) == 0

    def test_quorum_unreachable_rejected(self):
        sys = SyncSystem(n=3, correct=frozenset({0, 1}), bits=(0, 1, 0))
        with pytest.raises(ModelViolation):
            run_traditional(sys, 0)


class TestCommutativity:
    def test_n5_instance_count_and_no_mismatches(self):
        report = commutativity_check(5, 0)
        assert report.instances == 32 * 6 == 192
        assert report.ok

    def test_n6_instance_count_and_no_mismatches(self):
        report = commutativity_check(6, 1)
        assert report.instances == 64 * 7 == 448
        assert report.ok

    def test_out_of_range_rejected(self):
        with pytest.raises(ConfigError):
            commutativity_check(4, 0)


class TestAsyncLift:
    def test_every_case_trace_lifts_to_one_bit(self):
        values = bit_values(5, 0b01011)
        for result in run_case_suite(values=values):
            assert result.ok
            for tie in (0, 1):
                lift = binary_from_async(result.trace, tie)
                deciders = [
                    pid for pid, v in enumerate(result.trace.verdict.decided) if v is not None
                ]
                assert lift.deciders == deciders
                assert lift.bit in (0, 1)

    def test_gapped_decision_ties_follow_the_rule(self):
        # All-gapped decision over bits (1, 0, 1, 0, gap): a 2-2 tie.
        values = bit_values(5, 0b01010)  # process i gets bit i of the pattern
        by_id = {r.case.case_id: r for r in run_case_suite(values=values)}
        trace = by_id["case02"].trace  # everyone decides with slot 4 empty
        assert binary_from_async(trace, 0).bit == 0
        assert binary_from_async(trace, 1).bit == 1

    def test_agreement_failing_trace_rejected(self):
        trace = run(racing_scenario(values=bit_values(5, 0b00111)))
        with pytest.raises(ConfigError):
            binary_from_async(trace, 0)
