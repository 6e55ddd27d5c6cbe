"""Exception types shared across the package."""


class SubgapError(Exception):
    """Base class for all errors raised by subgap."""


class SizeError(SubgapError, ValueError):
    """An exhaustive routine was asked to run above its ground-set cap."""


class ConstructionError(SubgapError, ValueError):
    """Invalid input to a constructor (negative table, bad matroid, ...)."""


class ContractError(SubgapError, ValueError):
    """A point violates the precondition of a routine (e.g. not in the polytope)."""


class InfeasibleError(SubgapError, ValueError):
    """The requested polytope is empty.

    ``nu`` carries the fractional base packing number when it is known.
    """

    def __init__(self, message, nu=None):
        super().__init__(message)
        self.nu = nu


class NotInvariantError(SubgapError, ValueError):
    """An instance is not invariant (or not strongly symmetric) under a group."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
