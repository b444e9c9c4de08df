"""Camera trajectory CSV reader/writer.

The pose file is a purpose-built CSV with the exact header
``frame_id,timestamp,tx,ty,tz,qw,qx,qy,qz`` and one row per image frame.
Poses are camera-to-world: the translation is the camera position in the
world frame, and the quaternion is scalar-first. Comment lines starting with
``#`` are skipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import DuplicateFrameError, FormatError, PoseFileError
from ..geom import QUAT_NORM_TOLERANCE, PoseSE3, Vec3

__all__ = ["FramePose", "POSE_CSV_HEADER", "parse_pose_trajectory", "write_pose_trajectory"]

POSE_CSV_HEADER = "frame_id,timestamp,tx,ty,tz,qw,qx,qy,qz"


@dataclass(frozen=True)
class FramePose:
    """Camera pose for one image frame."""

    frame_id: int
    timestamp: float
    pose: PoseSE3

    def __post_init__(self):
        if self.frame_id < 0:
            raise ValueError(f"frame_id must be non-negative, got {self.frame_id}")


def parse_pose_trajectory(text: str, source: str = "<poses>") -> list[FramePose]:
    """Parse a trajectory CSV into FramePose records sorted by frame_id.

    Quaternions whose norm is within 1e-3 of 1 are renormalized; worse norms
    raise PoseFileError naming the frame. Duplicate frame_ids raise
    DuplicateFrameError, and any other malformed row raises FormatError with
    its 1-based line number.
    """
    poses: dict[int, FramePose] = {}
    header_seen = False

    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != POSE_CSV_HEADER:
                raise FormatError(
                    f"expected header {POSE_CSV_HEADER!r}, got {line!r}", source, line_no
                )
            header_seen = True
            continue

        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 9:
            raise FormatError(f"expected 9 columns, got {len(fields)}", source, line_no)
        try:
            frame_id = int(fields[0])
            timestamp = float(fields[1])
            tx, ty, tz, qw, qx, qy, qz = (float(f) for f in fields[2:])
        except ValueError:
            raise FormatError(f"bad numeric field in row {line!r}", source, line_no) from None

        if frame_id < 0:
            raise FormatError(f"frame_id must be non-negative, got {frame_id}", source, line_no)
        norm = math.sqrt(qw * qw + qx * qx + qy * qy + qz * qz)
        if abs(norm - 1.0) > QUAT_NORM_TOLERANCE:
            raise PoseFileError(
                f"{source}:{line_no}: frame {frame_id} quaternion norm {norm:.6g} "
                f"is outside the 1e-3 unit tolerance"
            )
        if frame_id in poses:
            raise DuplicateFrameError(f"{source}:{line_no}: duplicate frame_id {frame_id}")

        poses[frame_id] = FramePose(frame_id, timestamp, PoseSE3(Vec3(tx, ty, tz), (qw, qx, qy, qz)))

    if not header_seen:
        raise FormatError("file has no header row", source, 1)

    trajectory = [poses[fid] for fid in sorted(poses)]
    for prev, cur in zip(trajectory, trajectory[1:]):
        if cur.timestamp < prev.timestamp:
            raise PoseFileError(
                f"{source}: frame {cur.frame_id} timestamp {cur.timestamp!r} is earlier than "
                f"frame {prev.frame_id} timestamp {prev.timestamp!r}"
            )
    return trajectory


def write_pose_trajectory(trajectory: list[FramePose]) -> str:
    """Serialize a trajectory to CSV text that parse_pose_trajectory round-trips."""
    lines = [POSE_CSV_HEADER]
    for fp in sorted(trajectory, key=lambda p: p.frame_id):
        t = fp.pose.translation
        w, x, y, z = fp.pose.rotation
        lines.append(
            f"{fp.frame_id},{fp.timestamp!r},{t.x!r},{t.y!r},{t.z!r},{w!r},{x!r},{y!r},{z!r}"
        )
    return "\n".join(lines) + "\n"
