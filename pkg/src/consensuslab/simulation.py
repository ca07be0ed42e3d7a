"""Executable model of the asynchronous message system.

The message buffer is a multiset of sent-but-undelivered messages; a run
repeatedly lets a scheduler pick one deliverable entry (or an empty
receive, when enabled) and applies it atomically: the destination releases
whatever the sequencing rule allows, processes it, and all resulting
broadcasts are appended to the buffer before the next pick.

At most one process may crash.  The crash is anchored to the victim's own
broadcast sequence: before / during / after broadcasting a given message
kind.  A "during" crash places copies only for a chosen subset of
destinations.  Anchoring makes the injected fault deterministic for a
given schedule, so every run is replayable from its event list alone.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Optional

from .errors import ConfigError, SimulatorBug
from .protocol import (
    KIND_BY_NAME,
    KIND_NAMES,
    Broadcast,
    Message,
    MsgKind,
    Process,
    Rules,
    encode_message,
)

_ACC_MASK = (1 << 128) - 1


@lru_cache(maxsize=65536)
def _entry_digest(message: Message) -> int:
    return int.from_bytes(
        hashlib.blake2b(encode_message(message), digest_size=16).digest(), "big"
    )


class CrashPoint(str, Enum):
    BEFORE = "before"
    DURING = "during"
    AFTER = "after"


@dataclass(frozen=True)
class CrashSpec:
    """One crash fault: victim dies around its own broadcast of ``kind``."""

    victim: int
    point: CrashPoint
    kind: MsgKind
    delivered_to: Optional[frozenset] = None  # required for DURING

    def validate(self, n: int) -> None:
        if not 0 <= self.victim < n:
            raise ConfigError(f"crash victim {self.victim} out of range")
        if self.point == CrashPoint.DURING:
            dests = self.delivered_to
            if not dests:
                raise ConfigError("a mid-broadcast crash must deliver to at least one process")
            if self.victim in dests or any(not 0 <= d < n for d in dests):
                raise ConfigError("delivered_to must be a subset of the other processes")
            if len(dests) >= n - 1:
                raise ConfigError("a mid-broadcast crash must miss at least one process")
        elif self.delivered_to is not None:
            raise ConfigError("delivered_to only applies to mid-broadcast crashes")

    def to_dict(self) -> dict:
        d = {"victim": self.victim, "point": self.point.value, "kind": KIND_NAMES[self.kind]}
        if self.delivered_to is not None:
            d["delivered_to"] = sorted(self.delivered_to)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CrashSpec":
        return cls(
            victim=int(d["victim"]),
            point=CrashPoint(d["point"]),
            kind=KIND_BY_NAME[d["kind"]],
            delivered_to=(
                frozenset(d["delivered_to"]) if d.get("delivered_to") is not None else None
            ),
        )


@dataclass(frozen=True)
class BufferEntry:
    message: Message
    send_index: int


# Trace events ---------------------------------------------------------------


@dataclass(frozen=True)
class Deliver:
    sender: int
    seq: int
    dest: int
    kind: MsgKind

    def to_dict(self) -> dict:
        return {
            "type": "deliver",
            "sender": self.sender,
            "seq": self.seq,
            "dest": self.dest,
            "kind": KIND_NAMES[self.kind],
        }


@dataclass(frozen=True)
class ReceiveEmpty:
    dest: int

    def to_dict(self) -> dict:
        return {"type": "receive_empty", "dest": self.dest}


@dataclass(frozen=True)
class CrashBite:
    """Marks the step at which the configured crash took effect."""

    victim: int
    point: CrashPoint
    kind: MsgKind

    def to_dict(self) -> dict:
        return {
            "type": "crash",
            "victim": self.victim,
            "point": self.point.value,
            "kind": KIND_NAMES[self.kind],
        }


def event_from_dict(d: dict):
    t = d["type"]
    if t == "deliver":
        return Deliver(int(d["sender"]), int(d["seq"]), int(d["dest"]), KIND_BY_NAME[d["kind"]])
    if t == "receive_empty":
        return ReceiveEmpty(int(d["dest"]))
    if t == "crash":
        return CrashBite(int(d["victim"]), CrashPoint(d["point"]), KIND_BY_NAME[d["kind"]])
    raise ConfigError(f"unknown trace event type {t!r}")


# Configuration ---------------------------------------------------------------


@dataclass
class Configuration:
    """All process states plus the message buffer; one node of the run graph."""

    processes: list
    buffer: dict = field(default_factory=dict)  # send_index -> BufferEntry
    next_send_index: int = 0
    crashed: Optional[int] = None
    crash_pending: Optional[CrashSpec] = None
    event_count: int = 0
    empties_used: dict = field(default_factory=dict)
    shared: bool = False  # processes are shared with another configuration
    buf_acc: int = 0  # order-independent multiset digest of the buffer
    proc_acc: Optional[int] = None  # lazy sum of per-process state digests

    @property
    def n(self) -> int:
        return len(self.processes)

    def clone(self) -> "Configuration":
        # Copy-on-write: both configurations share the process objects until
        # one of them delivers a message, which replaces the one touched
        # process.  This keeps state-space branching cheap.
        self.shared = True
        return Configuration(
            processes=list(self.processes),
            buffer=dict(self.buffer),
            next_send_index=self.next_send_index,
            crashed=self.crashed,
            crash_pending=self.crash_pending,
            event_count=self.event_count,
            empties_used=dict(self.empties_used),
            shared=True,
            buf_acc=self.buf_acc,
            proc_acc=self.proc_acc,
        )

    def all_alive_decided(self) -> bool:
        return all(
            p.decided is not None for i, p in enumerate(self.processes) if i != self.crashed
        )

    def canonical_bytes(self) -> bytes:
        """Deterministic image of the configuration.

        The buffer is keyed by (sender, seq, dest), not by send index, and
        the event count is excluded: configurations reached by different
        but equivalent histories collapse to the same image.
        """
        parts = [p.canonical_bytes() for p in self.processes]
        parts.append(b"#%d#%d" % (-1 if self.crashed is None else self.crashed,
                                  0 if self.crash_pending is None else 1))
        entries = sorted(
            self.buffer.values(),
            key=lambda e: (e.message.sender, e.message.seq, e.message.dest),
        )
        parts.extend(encode_message(e.message) for e in entries)
        return b"\x1e".join(parts)

    def config_hash(self) -> str:
        """Lowercase hex of the 64-bit canonical hash (used in traces)."""
        return hashlib.blake2b(self.canonical_bytes(), digest_size=8).hexdigest()

    def dedupe_digest(self) -> int:
        """128-bit digest used for state-space deduplication.

        Equivalent configurations collapse: both the buffer and the process
        states enter through order-independent accumulators maintained
        incrementally, so expanding one delivery re-hashes only the one
        process it touched.
        """
        if self.proc_acc is None:
            self.proc_acc = sum(p.state_key() for p in self.processes) & _ACC_MASK
        tail = (
            (0 if self.crashed is None else self.crashed + 1)
            | ((0 if self.crash_pending is None else 1) << 8)
        )
        return (self.proc_acc + 0x9E3779B97F4A7C15 * self.buf_acc + tail) & _ACC_MASK


def new_configuration(
    n: int,
    values: list,
    crash: Optional[CrashSpec] = None,
    rules: Rules = Rules(),
    final_quorum: Optional[int] = None,
) -> tuple:
    """Build the starting configuration and return it with its start events.

    Every process is started (broadcasting its input value) except a victim
    configured to die before that broadcast.
    """
    if len(values) != n:
        raise ConfigError(f"expected {n} input values, got {len(values)}")
    if crash is not None:
        crash.validate(n)
    cfg = Configuration(
        processes=[Process(i, n, values[i], rules=rules, final_quorum=final_quorum) for i in range(n)]
    )
    cfg.crash_pending = crash
    events = []
    for pid in range(n):
        spec = cfg.crash_pending
        if (
            spec is not None
            and spec.victim == pid
            and spec.point == CrashPoint.BEFORE
            and spec.kind == MsgKind.INITIAL
        ):
            cfg.crashed = pid
            cfg.crash_pending = None
            events.append(CrashBite(pid, spec.point, spec.kind))
            continue
        broadcasts = cfg.processes[pid].start()
        events.extend(_materialize(cfg, pid, broadcasts))
    return cfg, events


def _materialize(cfg: Configuration, sender: int, broadcasts: list) -> list:
    """Append a process's broadcasts to the buffer, applying the crash anchor.

    Copies go to all other processes in destination-index order.  Returns
    the crash events that took effect (empty for a healthy sender).
    """
    events = []
    for b in broadcasts:
        spec = cfg.crash_pending
        bite = spec is not None and spec.victim == sender and spec.kind == b.kind
        dests = [d for d in range(cfg.n) if d != sender]
        if bite:
            if spec.point == CrashPoint.BEFORE:
                dests = []
            elif spec.point == CrashPoint.DURING:
                dests = [d for d in dests if d in spec.delivered_to]
        for d in dests:
            msg = Message(sender, d, b.seq, b.kind, b.payload)
            cfg.buffer[cfg.next_send_index] = BufferEntry(msg, cfg.next_send_index)
            cfg.next_send_index += 1
            cfg.buf_acc = (cfg.buf_acc + _entry_digest(msg)) & _ACC_MASK
        if bite:
            cfg.crashed = sender
            cfg.crash_pending = None
            events.append(CrashBite(sender, spec.point, spec.kind))
            break  # the victim emits nothing further
    return events


def enabled_deliveries(cfg: Configuration) -> list:
    """Buffer entries whose destination can still take a step, in send order."""
    crashed = cfg.crashed
    return [e for e in cfg.buffer.values() if e.message.dest != crashed]


def apply_deliver(cfg: Configuration, entry: BufferEntry) -> list:
    """Deliver one entry atomically; returns any crash events it triggered."""
    if cfg.buffer.get(entry.send_index) is not entry:
        raise SimulatorBug("delivery of an entry that is not in the buffer")
    if entry.message.dest == cfg.crashed:
        raise SimulatorBug("delivery to a crashed process")
    del cfg.buffer[entry.send_index]
    cfg.buf_acc = (cfg.buf_acc - _entry_digest(entry.message)) & _ACC_MASK
    dest = entry.message.dest
    proc = cfg.processes[dest]
    if cfg.shared:
        proc = cfg.processes[dest] = proc.clone()
    old_key = proc.state_key() if cfg.proc_acc is not None else 0
    events = []
    for msg in proc.ingest(entry.message):
        broadcasts = proc.process(msg)
        events.extend(_materialize(cfg, dest, broadcasts))
        if cfg.crashed == dest:
            break  # victim died mid-step; it takes no further steps
    if cfg.proc_acc is not None:
        cfg.proc_acc = (cfg.proc_acc - old_key + proc.state_key()) & _ACC_MASK
    cfg.event_count += 1
    return events


def apply_receive_empty(cfg: Configuration, dest: int) -> None:
    """An empty receive: observationally a no-op on process state."""
    if dest == cfg.crashed:
        raise SimulatorBug("empty receive at a crashed process")
    cfg.empties_used[dest] = cfg.empties_used.get(dest, 0) + 1
    cfg.event_count += 1
