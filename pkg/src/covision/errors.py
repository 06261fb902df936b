"""Exception types shared across the toolkit."""


class CovisionError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(CovisionError):
    """An argument violates a documented precondition or invariant."""


class InvalidPoseError(CovisionError):
    """A camera pose is outside the room or inside an obstacle."""


class RegionExhaustedError(CovisionError):
    """Every admissible candidate position has been pruned."""


class PartialScenarioError(CovisionError):
    """Generation hit its iteration cap before reaching the coverage target.

    Carries the partial scenario so callers can inspect or keep it.
    """

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


class StoreError(CovisionError):
    """Base class for persistence failures."""


class MissingFileError(StoreError):
    """A file referenced by a manifest or command does not exist."""


class FormatError(StoreError):
    """A file exists but its magic, version, or structure is wrong."""


class NotFoundError(CovisionError):
    """An unknown scenario, view, or annotator was requested."""
