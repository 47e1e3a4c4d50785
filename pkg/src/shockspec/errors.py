"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`ShockSpecError`,
so callers (and the command-line front end) can catch one base class.
"""


class ShockSpecError(Exception):
    """Base class for all package errors."""


# model construction
class SymmetryError(ShockSpecError):
    pass


class NonHyperbolic(ShockSpecError):
    pass


class ModelGeometry(ShockSpecError):
    pass


class Transversality(ShockSpecError):
    pass


class NoConnection(ShockSpecError):
    pass


# spectral problem
class DegenerateField(ShockSpecError):
    pass


class OutOfDomain(ShockSpecError):
    pass


class WrongTopology(ShockSpecError):
    pass


class Degenerate(ShockSpecError):
    pass


class Boundary(ShockSpecError):
    pass


# root finding
class ContourHitsRoot(ShockSpecError):
    pass


class TraceLost(ShockSpecError):
    """Continuation could not follow the branch.

    ``last_s`` and ``last_lambda`` hold the last accepted sample.
    """

    def __init__(self, message, last_s=None, last_lambda=None):
        super().__init__(message)
        self.last_s = last_s
        self.last_lambda = last_lambda


# smoothing oracle
class LayerOverlap(ShockSpecError):
    pass


class Stiffness(ShockSpecError):
    pass


class FitFailed(ShockSpecError):
    def __init__(self, message, mu=None, errors=None):
        super().__init__(message)
        self.mu = mu
        self.errors = errors


class Overflow(ShockSpecError):
    pass


# input files
class MalformedInput(ShockSpecError):
    """Input file could not be parsed; ``location`` names the offending field."""

    def __init__(self, message, location=None):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location
