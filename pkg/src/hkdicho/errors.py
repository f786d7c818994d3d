"""Exception types shared across the package."""


class HkdichoError(Exception):
    """Base class for all errors raised by this package."""


class NonMonotoneError(HkdichoError):
    """A rate table decreases somewhere on its window."""


class BelowOneError(HkdichoError):
    """A rate value drops below 1 somewhere on its window."""


class EvolutionOverflowError(HkdichoError):
    """A non-finite entry appeared while accumulating the transition table."""


class RankMismatchError(HkdichoError):
    """Kernel dimension of the projector sequence varies with the index."""


class SingularRestrictionError(HkdichoError):
    """A one-step kernel-restricted map is too close to singular to invert."""


class DegenerateSubspaceError(HkdichoError):
    """A subspace basis with zero or dependent columns was supplied."""


class MalformedCandidateError(HkdichoError):
    """A candidate coefficient sequence is decreasing or drops below 1."""


class WindowTooSmallError(HkdichoError):
    """The window is too short for a nested-window trend diagnostic."""


class BoundViolatedError(HkdichoError):
    """Partial sums of a companion rate exceed the declared bound."""


class HFamilyViolationError(HkdichoError):
    """Rate pair fails the finite-window trend required by a generator."""


class LowerBoundViolationError(HkdichoError):
    """A constructed norm fell below the base norm; the construction is broken."""


class SpecParseError(HkdichoError):
    """The input description file could not be read or decoded."""


class SpecValidationError(HkdichoError):
    """The input description is well-formed but violates an invariant."""

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)
