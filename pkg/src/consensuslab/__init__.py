"""Deterministic laboratory for a crash-tolerant vector agreement protocol.

The package simulates an asynchronous system of N >= 5 processes (one may
crash) agreeing on a vector of everyone's input values, and machine-checks
the protocol's safety, validity, and termination claims by scripted
scenarios, seeded schedule fuzzing, and bounded exhaustive interleaving
search.  Failures come with replayable, minimizable counterexample traces.
"""

__version__ = "0.1.0"

from .binary import SyncSystem, bf, binary_from_async, commutativity_check, run_new_paradigm, run_traditional
from .cases import all_cases, run_case, run_case_suite
from .errors import (
    ConfigError,
    ConsensusLabError,
    MalformedMessage,
    ModelViolation,
    ProtocolViolation,
    SimulatorBug,
)
from .explore import MUTANTS, ExploreBounds, explore, fuzz, minimize
from .properties import PropertyReport, check_properties, report_for_config
from .protocol import Message, MsgKind, Phase, Process, Rules
from .scenario import Scenario, SchedulerSpec, bit_values, crash_grid, default_values
from .schedulers import AdversarialLifoScheduler, ScriptedScheduler, SeededRandomScheduler
from .simulation import Configuration, CrashSpec, CrashPoint, new_configuration
from .trace import Trace, replay, replays_identically, run

__all__ = [
    "AdversarialLifoScheduler",
    "ConfigError",
    "Configuration",
    "ConsensusLabError",
    "CrashSpec",
    "CrashPoint",
    "ExploreBounds",
    "MUTANTS",
    "MalformedMessage",
    "Message",
    "ModelViolation",
    "MsgKind",
    "Phase",
    "Process",
    "PropertyReport",
    "ProtocolViolation",
    "Rules",
    "Scenario",
    "SchedulerSpec",
    "ScriptedScheduler",
    "SeededRandomScheduler",
    "SimulatorBug",
    "SyncSystem",
    "Trace",
    "all_cases",
    "bf",
    "binary_from_async",
    "bit_values",
    "check_properties",
    "commutativity_check",
    "crash_grid",
    "default_values",
    "explore",
    "fuzz",
    "minimize",
    "new_configuration",
    "replay",
    "replays_identically",
    "report_for_config",
    "run",
    "run_case",
    "run_case_suite",
    "run_new_paradigm",
    "run_traditional",
]
