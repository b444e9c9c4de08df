"""Exception hierarchy shared across the toolkit.

Parse-type failures derive from IngestError so callers (and the CLI exit-code
mapping) can distinguish malformed inputs from semantic mismatches between
otherwise well-formed inputs.
"""

from __future__ import annotations


class ReefSurveyError(Exception):
    """Base class for all toolkit errors."""


class IngestError(ReefSurveyError):
    """A file could not be parsed (syntax, encoding, or value errors)."""


class FormatError(IngestError):
    """Malformed record; carries the source name and 1-based line number."""

    def __init__(self, message: str, source: str = "", line: int | None = None):
        loc = source
        if line is not None:
            loc = f"{source or '<input>'}:{line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.source = source
        self.line = line


class MeshIndexError(IngestError):
    """A face references a vertex index outside the vertex table."""


class TruncatedFileError(IngestError):
    """Binary payload ended before the declared element counts were read."""


class PoseFileError(IngestError):
    """A pose row violates the trajectory contract (e.g. bad quaternion norm)."""


class DuplicateFrameError(IngestError):
    """The same frame_id appears more than once in a trajectory."""


class DetectionRangeError(IngestError):
    """A detection coordinate or confidence is outside its allowed range."""


class ScenarioConfigError(ReefSurveyError):
    """Simulator scenario config violates the schema; names the failing key path."""

    def __init__(self, key_path: str, message: str):
        super().__init__(f"{key_path}: {message}")
        self.key_path = key_path


class SemanticError(ReefSurveyError):
    """Well-formed inputs that do not fit together."""


class FrameMappingError(SemanticError):
    """Detection frames reference frame_ids absent from the trajectory."""

    def __init__(self, orphans: list[int]):
        self.orphans = sorted(orphans)
        shown = ", ".join(str(f) for f in self.orphans[:10])
        more = "" if len(self.orphans) <= 10 else f" (+{len(self.orphans) - 10} more)"
        super().__init__(f"detection frames missing from trajectory: {shown}{more}")


class GridShapeError(SemanticError):
    """Two grids that must share origin, cell size, and dimensions do not."""


class DomainError(SemanticError):
    """A value is outside the mathematical domain of an operation."""
