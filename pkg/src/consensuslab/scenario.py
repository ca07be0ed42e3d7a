"""Scenario configuration: what to run, with which fault and scheduler.

Scenario files are JSON with the fields::

    {
      "n": 5,
      "initial_values": ["01", "02", "03", "04", "05"],   // hex strings
      "crash": {"victim": 4, "point": "during", "kind": "first",
                "delivered_to": [0]},                      // or null
      "scheduler": {"type": "seeded-random", "seed": 7, "fairness_bound": 64},
      "bounds": {"max_events": 10000}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .protocol import MIN_PROCESSES, MsgKind, Rules
from .simulation import CrashSpec, CrashPoint

DEFAULT_MAX_EVENTS = 10_000


def default_values(n: int) -> list:
    """Distinct one-byte values 0x01..0x0N; readable in dumps and strict for validity checks."""
    return [bytes([i + 1]) for i in range(n)]


def bit_values(n: int, pattern: int) -> list:
    """Single-bit values taken from the low n bits of ``pattern``."""
    return [bytes([(pattern >> i) & 1]) for i in range(n)]


@dataclass(frozen=True)
class SchedulerSpec:
    type: str = "seeded-random"
    seed: int = 0
    fairness_bound: int = 64
    starve: Optional[int] = None
    empty_probability: float = 0.0
    empty_limit: int = 0
    script: tuple = ()
    drain_rest: bool = False

    def to_dict(self) -> dict:
        d = {"type": self.type, "seed": self.seed, "fairness_bound": self.fairness_bound}
        if self.starve is not None:
            d["starve"] = self.starve
        if self.empty_probability:
            d["empty_probability"] = self.empty_probability
            d["empty_limit"] = self.empty_limit
        if self.type == "scripted":
            d["script"] = [list(item) for item in self.script]
            d["drain_rest"] = self.drain_rest
        return d


@dataclass(frozen=True)
class Scenario:
    n: int
    values: tuple
    crash: Optional[CrashSpec] = None
    scheduler: SchedulerSpec = SchedulerSpec()
    max_events: int = DEFAULT_MAX_EVENTS
    rules: Rules = Rules()
    final_quorum: Optional[int] = None

    def validate(self) -> None:
        if self.n < MIN_PROCESSES:
            raise ConfigError(f"field n: need at least {MIN_PROCESSES}, got {self.n}")
        if len(self.values) != self.n:
            raise ConfigError(
                f"field initial_values: expected {self.n} entries, got {len(self.values)}"
            )
        if self.max_events < 1:
            raise ConfigError("field bounds.max_events: must be positive")
        if self.crash is not None:
            self.crash.validate(self.n)

    def with_crash(self, crash: Optional[CrashSpec]) -> "Scenario":
        return replace(self, crash=crash)

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, scheduler=replace(self.scheduler, seed=seed))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "initial_values": [v.hex() for v in self.values],
            "crash": None if self.crash is None else self.crash.to_dict(),
            "scheduler": self.scheduler.to_dict(),
            "bounds": {"max_events": self.max_events},
            "rules": self.rules.to_dict(),
            "final_quorum": self.final_quorum,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        try:
            n = int(d["n"])
            raw_values = d.get("initial_values")
            values = (
                tuple(default_values(n))
                if raw_values is None
                else tuple(bytes.fromhex(v) for v in raw_values)
            )
            crash = d.get("crash")
            sched = d.get("scheduler", {})
            bounds = d.get("bounds", {})
            scenario = cls(
                n=n,
                values=values,
                crash=None if crash is None else CrashSpec.from_dict(crash),
                scheduler=SchedulerSpec(
                    type=sched.get("type", "seeded-random"),
                    seed=int(sched.get("seed", 0)),
                    fairness_bound=int(sched.get("fairness_bound", 64)),
                    starve=sched.get("starve"),
                    empty_probability=float(sched.get("empty_probability", 0.0)),
                    empty_limit=int(sched.get("empty_limit", 0)),
                    script=tuple(tuple(item) for item in sched.get("script", [])),
                    drain_rest=bool(sched.get("drain_rest", False)),
                ),
                max_events=int(bounds.get("max_events", DEFAULT_MAX_EVENTS)),
                rules=Rules.from_dict(d["rules"]) if "rules" in d else Rules(),
                final_quorum=d.get("final_quorum"),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"bad scenario: {exc}") from exc
        scenario.validate()
        return scenario

    @classmethod
    def load(cls, path) -> "Scenario":
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"scenario file not found: {p}")
        try:
            data = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"scenario file {p} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


# Crash grid ------------------------------------------------------------------


def delivered_to_subsets(n: int, victim: int, exhaustive: bool = False) -> list:
    """Representative destination subsets for mid-broadcast crashes.

    Default: the first destination, the first half, and all but the last.
    With ``exhaustive`` every nonempty proper subset is produced instead.
    """
    dests = [d for d in range(n) if d != victim]
    if exhaustive:
        subsets = []
        for mask in range(1, (1 << len(dests)) - 1):
            subsets.append(frozenset(d for i, d in enumerate(dests) if mask >> i & 1))
        return subsets
    picks = [dests[:1], dests[: len(dests) // 2], dests[:-1]]
    seen, out = set(), []
    for p in picks:
        fs = frozenset(p)
        if fs and len(fs) < len(dests) + 1 and fs not in seen:
            seen.add(fs)
            out.append(fs)
    return out


def crash_grid(n: int, exhaustive_subsets: bool = False) -> list:
    """All crash cells checked by the fuzzer: no crash, then every victim x
    kind x point, with representative subsets for mid-broadcast crashes."""
    cells = [None]
    for victim in range(n):
        for kind in (MsgKind.INITIAL, MsgKind.FIRST, MsgKind.SECOND, MsgKind.FINAL):
            cells.append(CrashSpec(victim, CrashPoint.BEFORE, kind))
            for subset in delivered_to_subsets(n, victim, exhaustive_subsets):
                cells.append(CrashSpec(victim, CrashPoint.DURING, kind, subset))
            cells.append(CrashSpec(victim, CrashPoint.AFTER, kind))
    return cells
