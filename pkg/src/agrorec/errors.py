"""Exception types raised by the pipeline.

Each class corresponds to one contract violation; callers can catch
``AgroRecError`` to handle any pipeline failure uniformly.
"""

from __future__ import annotations


class AgroRecError(Exception):
    """Base class for all pipeline errors."""


# -- dataset ----------------------------------------------------------------


class MissingFile(AgroRecError):
    pass


class HeaderMismatch(AgroRecError):
    def __init__(self, missing: list[str], path: str = ""):
        self.missing = list(missing)
        super().__init__(f"required columns absent: {', '.join(missing)}"
                         + (f" in {path}" if path else ""))


class RaggedRow(AgroRecError):
    def __init__(self, line_number: int, expected: int, got: int):
        self.line_number = line_number
        super().__init__(
            f"line {line_number}: expected {expected} cells, got {got}")


class TypeCoercion(AgroRecError):
    def __init__(self, row_number: int, column: str, value: str):
        self.row_number = row_number
        self.column = column
        super().__init__(
            f"row {row_number}, column {column!r}: cannot interpret {value!r}")


class EmptyJoin(AgroRecError):
    pass


class TooMuchMissing(AgroRecError):
    pass


class EmptyDataset(AgroRecError):
    pass


class UnknownSeason(AgroRecError):
    pass


# -- eda --------------------------------------------------------------------


class TooFewValues(AgroRecError):
    pass


class ZeroVariance(AgroRecError):
    pass


class LengthMismatch(AgroRecError):
    pass


class RankDeficient(AgroRecError):
    pass


class DimensionMismatch(AgroRecError):
    pass


class UnknownColumn(AgroRecError):
    pass


# -- features ---------------------------------------------------------------


class NotSorted(AgroRecError):
    pass


class NonNumericColumn(AgroRecError):
    pass


class EmptyTraining(AgroRecError):
    pass


class UnknownLabel(AgroRecError):
    pass


# -- learners ---------------------------------------------------------------


class EmptyNode(AgroRecError):
    pass


class EmptyInput(AgroRecError):
    pass


class BadParams(AgroRecError):
    pass


class ArityMismatch(AgroRecError):
    pass


class SingleClass(AgroRecError):
    pass


class VersionMismatch(AgroRecError):
    pass


class CorruptFile(AgroRecError):
    pass


# -- evaluation -------------------------------------------------------------


class BadK(AgroRecError):
    pass


class EmptySide(AgroRecError):
    pass


class EmptyMatrix(AgroRecError):
    pass


class BadLevel(AgroRecError):
    pass


class ProtocolMisuse(AgroRecError):
    pass


# -- cli --------------------------------------------------------------------


class UnknownCommand(AgroRecError):
    pass


class ConfigInvalid(AgroRecError):
    def __init__(self, key: str, reason: str):
        self.key = key
        super().__init__(f"{key}: {reason}")


class BadSpec(AgroRecError):
    pass


class IncompleteInput(AgroRecError):
    def __init__(self, missing: list[str]):
        self.missing = list(missing)
        super().__init__(f"missing fields: {', '.join(missing)}")


class ModelLoad(AgroRecError):
    pass
