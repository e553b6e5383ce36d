"""Exception taxonomy shared across the engine."""


class EditRecError(Exception):
    """Base class for all engine errors."""


class MalformedDiff(EditRecError):
    """Raised when unified-diff text is structurally inconsistent."""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class InvalidAnchor(EditRecError):
    """Raised when an edit anchor falls outside the legal range."""


class StaleEdit(EditRecError):
    """Raised when an edit's before-image no longer matches the snapshot."""


class InsufficientNegatives(EditRecError):
    """Raised when a sample requests more negative files than exist."""

    def __init__(self, requested: int, available: int):
        self.requested = requested
        self.available = available
        super().__init__(f"requested {requested} negatives, only {available} available")


class BackendUnavailable(EditRecError):
    """Raised when an external scoring backend times out or misbehaves."""


class WindowTooLarge(EditRecError):
    """Raised when a code window alone exceeds the serialization budget."""


class RegionTooLarge(EditRecError):
    """Raised when a target region alone exceeds the serialization budget."""


class NoCandidate(EditRecError):
    """Raised when no edit candidate can be produced for a region."""


class RevisionMismatch(EditRecError):
    """Raised when a request references a revision other than the current one."""

    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"session is at revision {expected}, request referenced {got}")


class PreconditionFailed(EditRecError):
    """Raised when an operation is invoked before its inputs exist."""


class UnknownSession(EditRecError):
    """Raised when a session id is not present in the store."""


class UnknownRegion(EditRecError):
    """Raised when a region reference is not part of the current report."""


class EmptyGroundTruth(EditRecError):
    """Raised when a metric would divide by an empty ground-truth set."""


class EmptyReference(EditRecError):
    """Raised when a text metric receives an empty reference."""


class CoverageMismatch(EditRecError):
    """Raised when predictions and ground truth cover different line sets."""
