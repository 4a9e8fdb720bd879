"""Exception hierarchy shared by every stage.

The CLI maps these onto exit codes: invalid input -> 2, capacity or
infeasibility -> 3, invariant breach -> 4.
"""


class LayoutError(Exception):
    """Base class for all qlayout errors."""

    exit_code = 1


class InvalidArgumentError(LayoutError, ValueError):
    exit_code = 2


class PreconditionError(LayoutError):
    exit_code = 2


class CapacityError(LayoutError):
    """Not enough substrate for the requested components."""

    exit_code = 3

    def __init__(self, message, required=None, available=None, edge=None):
        super().__init__(message)
        self.required = required
        self.available = available
        self.edge = edge


class InfeasibleError(CapacityError):
    """A constraint graph has a source-to-sink path longer than the extent."""

    def __init__(self, message, path=None, length=None, extent=None):
        super().__init__(message, required=length, available=extent)
        self.path = list(path or [])


class RouteFailure(LayoutError):
    exit_code = 3


class InvariantError(LayoutError):
    exit_code = 4


class EmptyIndexError(CapacityError):
    pass
