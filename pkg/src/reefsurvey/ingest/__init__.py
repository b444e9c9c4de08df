"""Parsers and writers for the external file formats the pipeline consumes.

All parsers are pure functions of their input bytes/text; multiple files may
be parsed concurrently. Parsing is locale-independent (decimal points only).
"""

from .detections import (
    Detection,
    DetectionSet,
    parse_detection_text,
    parse_yolo_detections,
    write_yolo_detections,
)
from .obj import parse_obj
from .ply import parse_ply, write_ply
from .poses import (
    POSE_CSV_HEADER,
    FramePose,
    parse_pose_trajectory,
    write_pose_trajectory,
)

__all__ = [
    "Detection",
    "DetectionSet",
    "FramePose",
    "POSE_CSV_HEADER",
    "parse_detection_text",
    "parse_obj",
    "parse_ply",
    "parse_pose_trajectory",
    "parse_yolo_detections",
    "write_ply",
    "write_pose_trajectory",
    "write_yolo_detections",
]
