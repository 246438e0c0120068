"""Exception hierarchy.

Every error belongs to one of three families so the CLI can map it to an exit
code: configuration problems (2), bad or insufficient data (3), and algorithmic
failures such as too few similar days (4).
"""


class CvrError(Exception):
    exit_code = 1


class ConfigError(CvrError):
    exit_code = 2


class DataError(CvrError):
    exit_code = 3


class AlgorithmError(CvrError):
    exit_code = 4


# timeseries
class NonDivisibleResolution(ConfigError):
    pass


class OutOfBounds(DataError):
    pass


class MissingChannel(DataError):
    pass


class TooShort(DataError):
    pass


# ingest
class MalformedRow(DataError):
    def __init__(self, line, reason=""):
        self.line = line
        super().__init__(f"malformed row at line {line}: {reason}" if reason else f"malformed row at line {line}")


class WrongSampleCount(DataError):
    def __init__(self, date, found, expected):
        self.date = date
        super().__init__(f"{date}: {found} usable samples, expected {expected}")


class UnsortedTimestamps(DataError):
    pass


class UnknownDate(DataError):
    pass


class WindowDoesNotFit(DataError):
    pass


# similar / eval
class LengthMismatch(DataError):
    pass


class ZeroMeanTarget(DataError):
    pass


class ZeroActual(DataError):
    pass


class ZeroVoltageDelta(DataError):
    pass


class EmptyInput(DataError):
    pass


class InsufficientSimilarDays(AlgorithmError):
    def __init__(self, direction, found, required):
        self.direction = direction
        self.found = found
        self.required = required
        super().__init__(f"{direction}: {found} similar days found, {required} required")


# gbt
class EmptyTrainingSet(AlgorithmError):
    pass


class NonFiniteInput(DataError):
    pass


class FeatureCountMismatch(DataError):
    pass


# bidir
class PoolTooSmall(AlgorithmError):
    pass


class EmptyHistory(DataError):
    pass


class InsufficientVirtualDays(AlgorithmError):
    pass


class InconsistentWeightSchedule(ConfigError):
    pass


# synth
class InvalidConfig(ConfigError):
    pass
