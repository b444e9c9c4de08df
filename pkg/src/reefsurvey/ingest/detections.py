"""YOLO-format detection file reader/writer.

One text file per frame, named ``<frame_id>.txt``, one detection per line:
``class cx cy w h [conf]`` with normalized center-size coordinates. Ground
truth files have 5 fields; prediction files add a confidence. An empty file
means the frame was observed with zero detections, which is distinct from
the frame having no file at all.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from ..errors import DetectionRangeError, FormatError

__all__ = [
    "Detection",
    "DetectionSet",
    "parse_detection_text",
    "parse_yolo_detections",
    "write_yolo_detections",
]

logger = logging.getLogger(__name__)

# Coordinates this far outside [0, 1] are treated as print truncation and
# clamped; anything worse is a range error.
COORD_SLACK = 1e-6


@dataclass(frozen=True)
class Detection:
    """One normalized bounding box; class 0 is fish."""

    class_id: int
    cx: float
    cy: float
    w: float
    h: float
    confidence: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.cx <= 1.0 and 0.0 <= self.cy <= 1.0):
            raise ValueError(f"box center ({self.cx}, {self.cy}) outside unit square")
        if not (0.0 < self.w <= 1.0 and 0.0 < self.h <= 1.0):
            raise ValueError(f"box size ({self.w}, {self.h}) outside (0, 1]")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")

    def corners(self) -> tuple[float, float, float, float]:
        """(x_min, y_min, x_max, y_max) in normalized image coordinates."""
        return (
            self.cx - self.w / 2,
            self.cy - self.h / 2,
            self.cx + self.w / 2,
            self.cy + self.h / 2,
        )


# frame_id -> detections observed in that frame (possibly an empty list)
DetectionSet = dict[int, list[Detection]]


def _clamp_unit(value: float, what: str, source: str, line_no: int, strict_positive: bool = False) -> float:
    lo = 0.0
    if value < lo - COORD_SLACK or value > 1.0 + COORD_SLACK:
        raise DetectionRangeError(f"{source}:{line_no}: {what} {value!r} outside [0, 1]")
    clamped = min(max(value, lo), 1.0)
    if strict_positive and clamped <= 0.0:
        raise DetectionRangeError(f"{source}:{line_no}: {what} {value!r} must be > 0")
    return clamped


def parse_detection_text(text: str, source: str = "<detections>") -> list[Detection]:
    """Parse one YOLO label file; empty text yields an empty list."""
    detections = []
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (5, 6):
            raise FormatError(f"expected 5 or 6 fields, got {len(fields)}", source, line_no)
        try:
            class_id = int(fields[0])
            cx, cy, w, h = (float(f) for f in fields[1:5])
            conf = float(fields[5]) if len(fields) == 6 else 1.0
        except ValueError:
            raise FormatError(f"bad numeric field in {line!r}", source, line_no) from None

        detections.append(
            Detection(
                class_id=class_id,
                cx=_clamp_unit(cx, "cx", source, line_no),
                cy=_clamp_unit(cy, "cy", source, line_no),
                w=_clamp_unit(w, "w", source, line_no, strict_positive=True),
                h=_clamp_unit(h, "h", source, line_no, strict_positive=True),
                confidence=_clamp_unit(conf, "confidence", source, line_no),
            )
        )
    return detections


def parse_yolo_detections(directory: str | Path) -> DetectionSet:
    """Parse every ``<frame_id>.txt`` in a directory into a DetectionSet.

    ``.txt`` files whose stem is not a plain integer (e.g. ``classes.txt``)
    are skipped. An empty file marks its frame observed-empty.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FormatError(f"detection directory {directory} does not exist", str(directory))
    detections: DetectionSet = {}
    for path in sorted(directory.glob("*.txt")):
        if not path.stem.isdigit():
            logger.debug("skipping non-frame label file %s", path.name)
            continue
        frame_id = int(path.stem)
        detections[frame_id] = parse_detection_text(path.read_text(encoding="ascii"), str(path))
    return detections


def write_yolo_detections(detections: DetectionSet, directory: str | Path) -> None:
    """Write one label file per frame; observed-empty frames get empty files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for frame_id, frame in sorted(detections.items()):
        lines = [
            f"{d.class_id} {d.cx:.6f} {d.cy:.6f} {d.w:.6f} {d.h:.6f} {d.confidence:.6f}"
            for d in frame
        ]
        (directory / f"{frame_id}.txt").write_text("".join(line + "\n" for line in lines), encoding="ascii")
