"""Error taxonomy shared across the package."""


class ConsensusLabError(Exception):
    """Base class for all errors raised by this package."""


class ModelViolation(ConsensusLabError):
    """The system model was violated (bad N, duplicate delivery, self-delivery, ...)."""


class ProtocolViolation(ConsensusLabError):
    """A process was driven outside its contract (double start, broken internal invariant)."""


class MalformedMessage(ConsensusLabError):
    """A message payload has an illegal shape (wrong number of empty slots, non-bit value)."""


class SimulatorBug(ConsensusLabError):
    """The simulator or a scheduler made an impossible choice; fail fast."""


class ConfigError(ConsensusLabError):
    """A scenario or trace file is missing, malformed, or inconsistent."""
