"""Exception hierarchy.

Every error raised by the package derives from :class:`GrademinerError`.
The three intermediate classes map onto CLI exit codes: input/validation
problems (2), configuration problems (3) and broken internal invariants (4).
"""


class GrademinerError(Exception):
    exit_code = 1


class InputError(GrademinerError, ValueError):
    exit_code = 2


class ConfigError(GrademinerError, ValueError):
    exit_code = 3


class InvariantViolation(GrademinerError, AssertionError):
    exit_code = 4


class RowError(InputError):
    """An ingestion error tied to a line of the input."""

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        self.detail = message
        super().__init__(self._format())

    def _format(self):
        where = ""
        if self.source is not None:
            where = str(self.source)
        if self.line is not None:
            where = f"{where}:{self.line}" if where else f"line {self.line}"
        return f"{where}: {self.detail}" if where else self.detail

    def with_source(self, source):
        self.source = source
        self.args = (self._format(),)
        return self


# records
class EmptyDataset(RowError):
    pass


class MalformedRow(RowError):
    pass


class RangeViolation(RowError):
    pass


class DuplicateRoll(RowError):
    pass


class UnknownEnumValue(RowError):
    pass


class OutOfRange(InputError):
    pass


class InvalidSpec(ConfigError):
    pass


# kmeans
class TooFewDistinctPoints(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class InvalidAssignmentIndex(InputError):
    pass


# dtree
class AllZeroCounts(InputError):
    pass


class UnknownAttribute(InputError):
    pass


class EmptyTrainingSet(InputError):
    pass


class MissingAttribute(InputError):
    pass


# advisor
class UnknownLetter(InputError):
    pass


class AllZero(InputError):
    pass


# report
class GpaOutsideEdges(InputError):
    pass
