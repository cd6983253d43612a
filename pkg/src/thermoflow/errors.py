"""Exception hierarchy.

Every error raised by the library derives from :class:`ThermoflowError`; the
class name doubles as the documented error name reported by the CLI.
"""


class ThermoflowError(Exception):
    """Base class for all library errors."""

    exit_code = 1

    @property
    def name(self):
        return type(self).__name__


class ValidationError(ThermoflowError):
    """A value violates a type invariant."""


class ParseError(ThermoflowError):
    """A model file could not be parsed."""


class PreconditionError(ThermoflowError):
    """An operation was called outside its domain."""


class ToleranceBreach(ThermoflowError):
    """A numerical post-condition failed its tolerance."""

    exit_code = 2


# -- invariant failures -------------------------------------------------------

class StrandedState(ValidationError):
    def __init__(self, state, direction="outgoing"):
        super().__init__(f"state {state!r} has no {direction} edge")
        self.state = state


class DuplicateState(ValidationError):
    def __init__(self, state):
        super().__init__(f"state {state!r} listed more than once")
        self.state = state


class UnknownState(ValidationError):
    def __init__(self, state):
        super().__init__(f"edge references unknown state {state!r}")
        self.state = state


class InadmissibleWord(ValidationError):
    pass


class InvalidPotential(ValidationError):
    pass


class NonpositiveRoof(ValidationError):
    pass


class InvalidCode(ValidationError):
    pass


class InvalidPseudoOrbit(ValidationError):
    pass


# -- precondition failures ----------------------------------------------------

class EmptyShift(PreconditionError):
    pass


class NotIrreducible(PreconditionError):
    pass


class NotAperiodic(PreconditionError):
    pass


class WindowMismatch(PreconditionError):
    pass


class IncompatibleRecoding(PreconditionError):
    pass


class NonpositiveDenominator(PreconditionError):
    pass


class NonUniqueEquilibrium(PreconditionError):
    pass


class NonpositiveRate(PreconditionError):
    pass


class NotHyperbolicAtHorizon(PreconditionError):
    def __init__(self, max_value, pressure, horizon=None):
        super().__init__(
            f"max time-average {max_value:.12g} is not below pressure {pressure:.12g}"
            + (f" at horizon {horizon:g}" if horizon is not None else "")
        )
        self.max_value = max_value
        self.pressure = pressure
        self.horizon = horizon


class WindowExplosion(PreconditionError):
    pass


class DeltaTooLarge(PreconditionError):
    def __init__(self, required, available):
        super().__init__(
            f"symbolic agreement window {available} is below the required {required}"
        )
        self.required = required
        self.available = available


class HorizonTooShort(PreconditionError):
    pass


class RoofNotFiberConstant(PreconditionError):
    pass


class NotFiniteToOne(PreconditionError):
    pass
