"""Exception types shared across the package."""


class UnboundVariableError(KeyError):
    """A polynomial was evaluated without a value for one of its variables."""

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"no value bound for variable {self.name!r}"


class DimensionError(ValueError):
    pass


class NullConditioningError(ZeroDivisionError):
    """Conditioning on an event of probability zero (F0(b) = 0)."""


class UnsupportedShapeError(ValueError):
    """The fast path does not apply to this constraint matrix."""


class DiscreteSingularityError(ZeroDivisionError):
    """Leading recurrence coefficient vanishes at the stepping point."""

    def __init__(self, direction: int, point: tuple):
        super().__init__(f"leading coefficient of the direction-{direction + 1} recurrence vanishes at b={point}")
        self.direction = direction
        self.point = point


class NetworkSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
