"""Exception types raised by the freelab services"""


class FreeLabError(ValueError):
    """Base class for every domain error"""


class MetricError(FreeLabError):
    pass


class MeasureError(FreeLabError):
    pass


class RetractionError(FreeLabError):
    pass


class BasisError(FreeLabError):
    pass


class SearchError(FreeLabError):
    pass


class ParseError(FreeLabError):
    """Malformed input file; `location` points at the offending entry"""

    def __init__(self, location: str, message: str):
        self.location = location
        self.message = message
        super().__init__(f"{location}: {message}")
