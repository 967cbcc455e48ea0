"""Exceptions shared across the package.

The CLI maps these onto its exit codes: usage problems exit 2, violated
math preconditions exit 3, bad or missing data exits 4.
"""


class PreconditionError(Exception):
    """A mathematical precondition of an operation does not hold."""


class NotFactorable(PreconditionError):
    """The mask symbol has no (1 + z) factor."""


class NotConvergent(PreconditionError):
    """The mask fails the necessary convergence conditions."""


class NotRefinable(PreconditionError):
    """The activation admits no two-scale relation."""


class DegreeTooSmall(PreconditionError):
    """Fewer summands requested than the activation's degree allows."""


class NoFollowingLayer(PreconditionError):
    """Widening needs a next layer to absorb the recombination weights."""


class PositionOutOfRange(PreconditionError):
    """Layer, neuron, or insertion index outside the network."""


class UnsupportedDegree(PreconditionError):
    """No closed form is known at this degree."""


class DomainError(PreconditionError):
    """Input outside the domain where the formula is valid."""


class UsageError(Exception):
    """Structurally invalid input (exit code 2 territory)."""


class ParseError(UsageError):
    """A network file could not be parsed; message carries line/field context."""


class DimensionMismatch(UsageError):
    """Shapes of weights, biases, or inputs do not line up."""


class EmptyArchitecture(UsageError):
    """A network needs at least two widths."""


class DataError(Exception):
    """Dataset-level problem (exit code 4 territory)."""


class DatasetError(DataError):
    """A dataset file is malformed; message carries line context."""


class EmptyDataset(DataError):
    """An operation that calibrates against data received none."""
