"""Exception hierarchy shared by every gripforce module.

The CLI maps these onto exit codes: ``DegenerateStatistics`` -> 3,
``StorageError`` / ``SinkError`` -> 1, everything else under
``GripForceError`` -> 2.
"""


class GripForceError(Exception):
    """Base class for all package errors."""


class InvalidData(GripForceError, ValueError):
    """Input violates a documented range or format."""


# -- wire protocol ---------------------------------------------------------

class FrameError(InvalidData):
    pass


class InvalidReading(FrameError):
    pass


class BadLength(FrameError):
    pass


class BadSync(FrameError):
    pass


class BadChecksum(FrameError):
    pass


class FieldOutOfRange(FrameError):
    pass


# -- calibration -----------------------------------------------------------

class NegativeResistance(InvalidData):
    pass


class OutOfRangeVoltage(InvalidData):
    pass


# -- datamodel -------------------------------------------------------------

class MalformedRow(InvalidData):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class InconsistentMetadata(InvalidData):
    pass


class EmptyFile(InvalidData):
    pass


class StepError(InvalidData):
    pass


class OverlappingSteps(StepError):
    pass


class StepOutOfSession(StepError):
    pass


class StepsOutOfOrder(StepError):
    pass


class StorageError(GripForceError, OSError):
    """Reading or writing a file failed at the OS level."""


# -- stats -----------------------------------------------------------------

class EmptyInput(InvalidData):
    pass


class InvalidDf(InvalidData):
    pass


class InvalidModel(InvalidData):
    pass


class DegenerateStatistics(GripForceError):
    """The data cannot support the requested statistic."""


class SingletonSem(DegenerateStatistics):
    pass


class ZeroResidualVariance(DegenerateStatistics):
    pass


class RankDeficientDesign(DegenerateStatistics):
    pass


class InsufficientResidualDf(DegenerateStatistics):
    pass


# -- profiles --------------------------------------------------------------

class BoundaryBeyondProfile(InvalidData):
    pass


# -- simulator -------------------------------------------------------------

class InvalidConfig(InvalidData):
    pass


class SinkError(GripForceError, OSError):
    """Writing to the emission sink failed; ``report`` says how far it got."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
