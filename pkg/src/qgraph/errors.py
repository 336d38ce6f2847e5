"""Exception hierarchy shared by all qgraph modules."""


class QGraphError(Exception):
    """Base class for all library errors."""


class InputError(QGraphError):
    """Malformed input: bad files, invalid graphs, violated preconditions."""


class NumericError(QGraphError):
    """A numeric procedure failed or produced inconsistent results."""


class InconclusiveError(QGraphError):
    """A bounded search hit its cap without reaching a verdict."""
