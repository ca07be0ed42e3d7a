"""Replayable traces and the run loop that produces them.

A trace is one header record, one record per applied event, and one
verdict record carrying per-process outcomes plus the 64-bit canonical
hash of the final configuration.  Re-running the header with the event
list as a script reproduces the verdict and the hash bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import ConfigError, SimulatorBug
from .protocol import decode_vector, encode_vector
from .scenario import Scenario, SchedulerSpec
from .schedulers import ScriptedScheduler, scheduler_from_spec
from .simulation import (
    Configuration,
    CrashBite,
    Deliver,
    ReceiveEmpty,
    apply_deliver,
    apply_receive_empty,
    enabled_deliveries,
    event_from_dict,
    new_configuration,
)

# Run end states: every live process decided and the buffer drained
# ("complete"), no deliverable entry left with someone undecided
# ("stuck"), the event budget was hit ("bound"), or a finite script ran
# out ("script_end").
STATUS_COMPLETE = "complete"
STATUS_STUCK = "stuck"
STATUS_BOUND = "bound"
STATUS_SCRIPT_END = "script_end"


def _vec_hex(vec) -> Optional[str]:
    return None if vec is None else encode_vector(vec).hex()


def _vec_unhex(h):
    return None if h is None else decode_vector(bytes.fromhex(h))


@dataclass
class Verdict:
    status: str
    decided: list  # per-process vector or None
    entered: list  # vector each process entered the decision stage with
    crashed: Optional[int]
    undelivered: list  # (sender, seq, dest) triples left in the buffer
    event_count: int
    config_hash: str

    def to_dict(self) -> dict:
        return {
            "type": "verdict",
            "status": self.status,
            "decided": [_vec_hex(v) for v in self.decided],
            "entered": [_vec_hex(v) for v in self.entered],
            "crashed": self.crashed,
            "undelivered": [list(t) for t in self.undelivered],
            "events": self.event_count,
            "config_hash": self.config_hash,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Verdict":
        return cls(
            status=d["status"],
            decided=[_vec_unhex(v) for v in d["decided"]],
            entered=[_vec_unhex(v) for v in d["entered"]],
            crashed=d["crashed"],
            undelivered=[tuple(t) for t in d["undelivered"]],
            event_count=int(d["events"]),
            config_hash=d["config_hash"],
        )

    @classmethod
    def from_config(cls, cfg: Configuration, status: str) -> "Verdict":
        return cls(
            status=status,
            decided=[p.decided for p in cfg.processes],
            entered=[p.decision_entry for p in cfg.processes],
            crashed=cfg.crashed,
            undelivered=sorted(
                (e.message.sender, e.message.seq, e.message.dest) for e in cfg.buffer.values()
            ),
            event_count=cfg.event_count,
            config_hash=cfg.config_hash(),
        )


@dataclass
class Trace:
    scenario: Scenario
    events: list
    verdict: Verdict

    def header_dict(self) -> dict:
        d = self.scenario.to_dict()
        d["type"] = "header"
        return d

    def to_jsonl(self) -> str:
        lines = [json.dumps(self.header_dict(), sort_keys=True)]
        lines.extend(json.dumps(ev.to_dict(), sort_keys=True) for ev in self.events)
        lines.append(json.dumps(self.verdict.to_dict(), sort_keys=True))
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, text: str) -> "Trace":
        records = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not records or records[0].get("type") != "header":
            raise ConfigError("trace must start with a header record")
        if records[-1].get("type") != "verdict":
            raise ConfigError("trace must end with a verdict record")
        scenario = Scenario.from_dict(records[0])
        events = [event_from_dict(d) for d in records[1:-1]]
        return cls(scenario=scenario, events=events, verdict=Verdict.from_dict(records[-1]))

    @classmethod
    def load(cls, path) -> "Trace":
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"trace file not found: {p}")
        return cls.from_jsonl(p.read_text())


# Run loop ---------------------------------------------------------------------


def run_raw(scenario: Scenario, scheduler=None, record_events: bool = True) -> tuple:
    """Execute a scenario and return ``(final configuration, events, status)``.

    The loop keeps delivering after everyone decided until no deliverable
    entry remains, because a decided process may still owe a second
    proposal to a slower peer; only entries addressed to a crashed process
    may be left over.
    """
    scenario.validate()
    if scheduler is None:
        scheduler = scheduler_from_spec(scenario.scheduler.to_dict())
    cfg, start_events = new_configuration(
        scenario.n,
        list(scenario.values),
        crash=scenario.crash,
        rules=scenario.rules,
        final_quorum=scenario.final_quorum,
    )
    events = list(start_events) if record_events else []
    status = None
    while True:
        if cfg.event_count >= scenario.max_events:
            status = STATUS_BOUND
            break
        delivers = enabled_deliveries(cfg)
        if not delivers:
            status = STATUS_COMPLETE if cfg.all_alive_decided() else STATUS_STUCK
            break
        choice = scheduler.next(cfg, delivers)
        if choice is None:
            status = STATUS_SCRIPT_END
            break
        if isinstance(choice, ReceiveEmpty):
            apply_receive_empty(cfg, choice.dest)
            if record_events:
                events.append(choice)
            continue
        m = choice.message
        bites = apply_deliver(cfg, choice)
        if record_events:
            events.append(Deliver(m.sender, m.seq, m.dest, m.kind))
            events.extend(bites)
    return cfg, events, status


def run(scenario: Scenario, scheduler=None, record_events: bool = True) -> Trace:
    """Execute a scenario to completion and package the result as a trace."""
    cfg, events, status = run_raw(scenario, scheduler, record_events)
    return Trace(scenario=scenario, events=events, verdict=Verdict.from_config(cfg, status))


def run_config(trace_scenario: Scenario, events: list) -> Configuration:
    """Re-apply a recorded event list and return the final configuration."""
    cfg, _ = new_configuration(
        trace_scenario.n,
        list(trace_scenario.values),
        crash=trace_scenario.crash,
        rules=trace_scenario.rules,
        final_quorum=trace_scenario.final_quorum,
    )
    for ev in events:
        if isinstance(ev, CrashBite):
            continue  # informational; re-triggered by the deliveries themselves
        if isinstance(ev, ReceiveEmpty):
            apply_receive_empty(cfg, ev.dest)
            continue
        matches = [
            e
            for e in enabled_deliveries(cfg)
            if e.message.sender == ev.sender
            and e.message.seq == ev.seq
            and e.message.dest == ev.dest
        ]
        if len(matches) != 1:
            raise SimulatorBug(f"replayed event {ev} matched {len(matches)} enabled entries")
        apply_deliver(cfg, matches[0])
    return cfg


def replay(trace: Trace) -> Trace:
    """Re-run a trace's schedule from its header; the result must match it."""
    script = []
    for ev in trace.events:
        if isinstance(ev, Deliver):
            script.append(("deliver_seq", ev.sender, ev.seq, ev.dest))
        elif isinstance(ev, ReceiveEmpty):
            script.append(("empty", ev.dest))
    scripted = Scenario(
        n=trace.scenario.n,
        values=trace.scenario.values,
        crash=trace.scenario.crash,
        scheduler=SchedulerSpec(type="scripted", script=tuple(script)),
        max_events=trace.scenario.max_events,
        rules=trace.scenario.rules,
        final_quorum=trace.scenario.final_quorum,
    )
    return run(scripted, scheduler=ScriptedScheduler(script, drain_rest=False))


def replays_identically(trace: Trace) -> bool:
    again = replay(trace)
    return (
        again.verdict.config_hash == trace.verdict.config_hash
        and again.verdict.to_dict() == trace.verdict.to_dict()
    )
