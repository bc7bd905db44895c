"""Exception types shared across the package."""


class TrajMineError(Exception):
    """Base class for data errors raised by trajmine."""


class CoordinateError(TrajMineError, ValueError):
    pass


class ParseError(TrajMineError, ValueError):
    """A log file could not be parsed.

    ``line`` and ``field`` locate the problem when known.
    """

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class EmptyInputError(ParseError):
    pass


class GpxSyntaxError(ParseError):
    pass


class GpxMissingFieldError(ParseError):
    pass


class GpxTimestampError(ParseError):
    pass


class UnknownPoiError(TrajMineError, KeyError):
    def __init__(self, poi_id):
        self.poi_id = poi_id
        super().__init__(f"unknown POI id: {poi_id!r}")

    def __str__(self):
        return self.args[0]


class PipelineError(TrajMineError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")
