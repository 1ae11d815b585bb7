"""Exception hierarchy.

``DataError`` subclasses signal bad or insufficient input data, the CLI maps
them to exit code 2. ``InvariantViolation`` maps to exit code 3.
"""


class FreqXaiError(Exception):
    pass


class DataError(FreqXaiError, ValueError):
    pass


class InvariantViolation(FreqXaiError, RuntimeError):
    pass


class MissingData(DataError):
    pass


class EmptyTrace(DataError):
    pass


class IrregularCadence(DataError):
    pass


class NoRegions(DataError):
    pass


class UnknownFeatureName(DataError, KeyError):
    pass


class TooFewRows(DataError):
    pass


class FeatureMismatch(DataError):
    pass


class EmptyGrid(DataError):
    pass


class EmptyBackground(DataError):
    pass


class ZeroCoverNode(DataError):
    pass


class UnknownFeature(DataError, KeyError):
    pass


class MisalignedRows(DataError):
    pass


class ConstantFeature(DataError):
    pass


class ZeroVariance(DataError):
    pass


class MissingHourBin(DataError):
    pass


class EmptySeries(DataError):
    pass
