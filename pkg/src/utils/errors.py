"""Exceptions raised by the discovery toolkit"""


class BoostDagError(Exception):
    """Base class of every error raised on purpose by this package"""


class ConfigError(BoostDagError, ValueError):
    """Invalid configuration value. The command line maps it to exit code 2."""


class DimensionError(BoostDagError, ValueError):
    pass


class DegenerateVariableError(BoostDagError):
    def __init__(self, column, message="degenerate variable"):
        self.column = column
        self.message = message
        super().__init__(f"{message}: column {column} has zero variance after centering")

    def __reduce__(self):
        return type(self), (self.column, self.message)


class EigenSolverError(BoostDagError):
    def __init__(self, columns, reason):
        self.columns = tuple(columns)
        self.reason = reason
        super().__init__(f"eigendecomposition failed for columns {self.columns}: {reason}")

    def __reduce__(self):
        return type(self), (self.columns, self.reason)


class NumericalBreakdownError(BoostDagError):
    pass


class InsufficientDofError(BoostDagError):
    pass


class SearchLimitError(BoostDagError):
    pass


class CycleError(BoostDagError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        message = "Adding arc(s) causes the cycle " + "->".join(map(str, self.cycle))
        super().__init__(message)

    def __reduce__(self):
        return type(self), (self.cycle,)
