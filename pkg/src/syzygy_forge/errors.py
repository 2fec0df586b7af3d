"""Engine error hierarchy.

Every error carries a short machine-parseable ``code`` next to the human
message, so the CLI can print ``error[<code>]: <text>`` and map families of
failures onto stable exit codes.
"""

from __future__ import annotations


class EngineError(Exception):
    code = "engine"


class ParseError(EngineError):
    code = "parse"


class PreconditionError(EngineError):
    """An operation was called on an input that violates its contract."""

    code = "precondition"


class BoundTooSmall(EngineError):
    """Kernel generators still appear at the top of the degree window."""

    code = "bound_too_small"


class StabilizationFailure(EngineError):
    """Koszul-limit images did not stabilize within the configured cap."""

    code = "stabilization_failure"


class NotSaturated(PreconditionError):
    code = "not_saturated"


class NotSOP(PreconditionError):
    code = "not_sop"


class NotNZD(PreconditionError):
    code = "not_nzd"


class NotNormalized(PreconditionError):
    code = "not_normalized"


class NotAModuleMap(PreconditionError):
    code = "not_a_module_map"


class WrongRank(PreconditionError):
    code = "wrong_rank"


class EvenN(PreconditionError):
    code = "even_n"


class BadIdeal(PreconditionError):
    code = "bad_ideal"


class BandViolation(PreconditionError):
    code = "band_violation"
