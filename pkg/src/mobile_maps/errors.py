"""Exception hierarchy for mobile_maps."""


class MobileMapsError(Exception):
    """Base class for every error raised by the library."""

    exit_code = 1


class DomainError(MobileMapsError, ValueError):
    """An argument lies outside the domain of an operation."""

    exit_code = 2


class ShapeMismatchError(MobileMapsError, ValueError):
    """A permutation vector is bound to a different tree shape."""

    exit_code = 2


class UnknownAddressError(MobileMapsError, KeyError):
    """An Ulam-Harris address does not exist in the tree."""

    exit_code = 2

    def __init__(self, address):
        super().__init__(address)
        self.address = address

    def __str__(self):
        return f"unknown address {format_address(self.address)}"


class MissingEntryError(MobileMapsError, KeyError):
    """A displacement law is missing for a realized (type, child types) key."""

    exit_code = 2

    def __init__(self, key):
        super().__init__(key)
        self.key = key

    def __str__(self):
        return f"no displacement law for {self.key!r}"


class InvalidParamsError(MobileMapsError, ValueError):
    """Weight sequence or mobile parameters are unusable."""

    exit_code = 2


class ExhaustionError(MobileMapsError):
    """A rejection sampler used up its attempt budget."""

    def __init__(self, message, attempts):
        super().__init__(message)
        self.attempts = attempts


class OverflowSignal(MobileMapsError):
    """A Galton-Watson population exceeded its vertex cap."""

    def __init__(self, count):
        super().__init__(f"population exceeded cap at {count} vertices")
        self.count = count


class EnumerationOverflowError(MobileMapsError):
    """An exact enumeration produced more outcomes than allowed."""

    def __init__(self, message, reached):
        super().__init__(message)
        self.reached = reached


class SizeCapError(MobileMapsError, ValueError):
    """Input too large for an exact solver."""

    exit_code = 2


class InvalidMobileError(MobileMapsError):
    """A labeled tree violates a clause of the mobile definition."""

    def __init__(self, clause, message):
        super().__init__(f"[{clause}] {message}")
        self.clause = clause


class InvalidMapError(MobileMapsError, ValueError):
    """A rotation system does not describe a rooted planar map."""

    exit_code = 2


class ConvergenceError(MobileMapsError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, residual):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def format_address(address):
    """Render an Ulam-Harris address, the root as '∅'."""
    if not address:
        return "∅"
    return ".".join(str(i) for i in address)
