"""Exception types raised across the package.

Every error carries a short machine-readable ``code`` (the class name) so the
CLI can report failures as JSON.
"""


class WincastError(Exception):
    @property
    def code(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


# ingest
class MalformedHeader(WincastError):
    pass


class RaggedRow(WincastError):
    pass


class NonNumericCount(WincastError):
    pass


class NonMonotoneDates(WincastError):
    pass


class UnknownCountry(WincastError):
    def __init__(self, name, known=()):
        self.name = name
        self.known = sorted(known)
        super().__init__(f"unknown country {name!r}")

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["known"] = self.known
        return d


class AllZero(WincastError):
    pass


# series / linalg / models
class WindowOutOfRange(WincastError):
    pass


class SingularSystem(WincastError):
    pass


class NonFiniteInput(WincastError):
    pass


class EmptyTrainingSet(WincastError):
    pass


class DimensionMismatch(WincastError):
    pass


class InsufficientHistory(WincastError):
    pass


# backtest
class EmptyRecords(WincastError):
    pass
