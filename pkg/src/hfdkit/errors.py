"""Exception hierarchy.

``ValidationError`` subclasses signal bad input (CLI exit code 1); anything
else raised from inside a run is treated as a runtime failure (exit code 2).
"""

from __future__ import annotations


class HfdkitError(Exception):
    pass


class ValidationError(HfdkitError, ValueError):
    pass


class MissingChannel(ValidationError):
    def __init__(self, labels):
        self.labels = tuple(labels)
        super().__init__(f"missing channel(s): {', '.join(self.labels)}")


class WindowTooShort(ValidationError):
    pass


class InvalidOffset(ValidationError):
    pass


class SignalTooShort(ValidationError):
    pass


class DegenerateCurveLength(ValidationError):
    def __init__(self, k: int):
        self.k = k
        super().__init__(f"curve length L(k) is zero at k={k}")


class ChannelErrors(ValidationError):
    """Per-channel (optionally per-window) failures collected into one error."""

    def __init__(self, failures: dict):
        self.failures = dict(failures)
        parts = [f"{key}: {err}" for key, err in self.failures.items()]
        super().__init__("HFD failed on " + "; ".join(parts))


class EmptyVector(ValidationError):
    pass


class GridInfeasible(ValidationError):
    pass


class ChannelMismatch(ValidationError):
    def __init__(self, difference):
        self.difference = tuple(sorted(difference))
        super().__init__(f"channel sets differ: {', '.join(self.difference)}")


class DegenerateVariance(ValidationError):
    pass


class MissingStyle(ValidationError):
    pass


class HeterogeneousWidth(ValidationError):
    def __init__(self, offenders):
        self.offenders = tuple(offenders)
        super().__init__(f"feature width differs for samples: {', '.join(map(str, self.offenders))}")


class TooFewSubjects(ValidationError):
    pass


class TooFewRows(ValidationError):
    pass


class SingleClassTrainingSet(ValidationError):
    pass


class InvalidParameter(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, path, line, message: str = ""):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}".rstrip(": "))


class ManifestConflict(ValidationError):
    pass


class DatasetErrors(ValidationError):
    """Load failures from several files, reported together."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(str(e) for e in self.errors))
