"""
Exceptions raised by weightlab.
"""


class WeightLabError(Exception):
    """Base class for every weightlab failure."""


class NonIntegrableCell(WeightLabError, ValueError):
    def __init__(self, cell_index, cell_left, cell_right, detail=""):
        self.cell_index = cell_index
        self.cell_left = cell_left
        self.cell_right = cell_right
        message = (
            f"Cell {cell_index} [{cell_left:g}, {cell_right:g}] has no finite average.\n"
            "The function has a non-integrable singularity inside this cell.\n"
            "Mask it with Restrict, Min or a cell-scale cap before sampling."
        )
        if detail:
            message += f"\n{detail}"
        super().__init__(message)


class DepthMismatch(WeightLabError, ValueError):
    pass


class NonPositiveWeight(WeightLabError, ValueError):
    pass


class NoExponentFound(WeightLabError):
    pass


class DeltaOutOfRange(WeightLabError, ValueError):
    pass


class NotInLp(WeightLabError):
    def __init__(self, message, trend=None):
        super().__init__(message)
        self.trend = trend


class TailNotSmall(WeightLabError):
    def __init__(self, message, terms=None):
        super().__init__(message)
        self.terms = terms


class BTooSmall(WeightLabError):
    def __init__(self, message, observed=None):
        super().__init__(message)
        self.observed = observed


class RHFailed(WeightLabError):
    pass


class ChainBroken(WeightLabError):
    pass


class SzegoFailed(WeightLabError):
    pass


class NonPositiveSample(WeightLabError, ValueError):
    pass


class UnknownScenario(WeightLabError, ValueError):
    pass


class CheckFailed(WeightLabError):
    def __init__(self, check_id, detail=""):
        self.check_id = check_id
        super().__init__(f"Check {check_id} failed. {detail}".strip())


class ConfigError(WeightLabError, ValueError):
    pass
