"""Parsers and writers for trajectories, checkpoint surveys, and RTK logs.

Input formats:
  trajectory   TUM text, one pose per line "t tx ty tz qx qy qz qw",
               whitespace separated, '#' starts a comment line
  checkpoints  CSV with header "id,easting,northing,height" (meters, UTM)
  rtk log      CSV with header "t,lat_deg,lon_deg,height,status",
               status one of FIX, FLOAT, DGPS, SINGLE, NONE (case-insensitive)

``source`` arguments accept a filesystem path (str or Path), raw bytes, or a
readable file object. Parsers are pure and never raise anything but the
structured errors below on bad input; floats are re-serialized with repr so
write-then-parse is bit identical.
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Sequence, Union

import numpy as np

from .errors import (
    DuplicateId,
    EmptyFile,
    MalformedLine,
    NoFixAvailable,
    NonMonotonicTimestamp,
    UnknownStatus,
)
from .geodesy import EnuOrigin, GeodeticCoord, UtmCoord

Source = Union[str, Path, bytes, IO]

QUAT_NORM_TOLERANCE = 1e-3


class FrameTag(enum.Enum):
    ENU_LOCAL = "enu_local"
    UTM = "utm"


class GnssStatus(enum.IntEnum):
    """GNSS solution quality, ordered worst to best."""

    NONE = 0
    SINGLE = 1
    DGPS = 2
    RTK_FLOAT = 3
    RTK_FIX = 4

    @property
    def token(self) -> str:
        return _STATUS_TO_TOKEN[self]


_TOKEN_TO_STATUS = {
    "FIX": GnssStatus.RTK_FIX,
    "FLOAT": GnssStatus.RTK_FLOAT,
    "DGPS": GnssStatus.DGPS,
    "SINGLE": GnssStatus.SINGLE,
    "NONE": GnssStatus.NONE,
}
_STATUS_TO_TOKEN = {v: k for k, v in _TOKEN_TO_STATUS.items()}


@dataclass(eq=False)
class Pose:
    """Timestamped position plus body-to-world rotation.

    ``q`` is a Hamilton unit quaternion stored as (x, y, z, w), the TUM
    component order.
    """

    t: float
    p: np.ndarray
    q: np.ndarray

    def rotation_matrix(self) -> np.ndarray:
        x, y, z, w = self.q
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])


@dataclass(eq=False)
class Trajectory:
    poses: list[Pose]
    frame_tag: FrameTag = FrameTag.ENU_LOCAL

    def __len__(self) -> int:
        return len(self.poses)

    @property
    def timestamps(self) -> np.ndarray:
        return np.array([pose.t for pose in self.poses])

    @property
    def positions(self) -> np.ndarray:
        return np.array([pose.p for pose in self.poses])

    @property
    def quaternions(self) -> np.ndarray:
        return np.array([pose.q for pose in self.poses])

    @classmethod
    def from_arrays(cls, t: np.ndarray, p: np.ndarray, q: np.ndarray,
                    frame_tag: FrameTag = FrameTag.ENU_LOCAL) -> "Trajectory":
        poses = [Pose(float(ti), np.asarray(pi, dtype=float), np.asarray(qi, dtype=float))
                 for ti, pi, qi in zip(t, p, q)]
        return cls(poses, frame_tag)


@dataclass(frozen=True)
class Checkpoint:
    id: str
    coord: UtmCoord


@dataclass(eq=False)
class RtkRecord:
    t: float
    g: GeodeticCoord
    status: GnssStatus


@dataclass(eq=False)
class RtkLog:
    records: list[RtkRecord]


@dataclass(eq=False)
class DeviceCalibration:
    """Reference-point offsets from the IMU origin, body frame, meters."""

    t_imu_to_base: np.ndarray
    t_imu_to_antenna: np.ndarray

    def __post_init__(self):
        for name in ("t_imu_to_base", "t_imu_to_antenna"):
            vec = np.asarray(getattr(self, name), dtype=float)
            if vec.shape != (3,) or not np.all(np.isfinite(vec)):
                raise ValueError(f"{name} must be a finite 3-vector")
            # Handheld pole: offsets beyond 2 m are a config mistake.
            if np.linalg.norm(vec) >= 2.0:
                raise ValueError(f"{name} magnitude {np.linalg.norm(vec):.3f} m >= 2 m")
            setattr(self, name, vec)

    @classmethod
    def zero(cls) -> "DeviceCalibration":
        return cls(np.zeros(3), np.zeros(3))

    @classmethod
    def from_dict(cls, d: dict) -> "DeviceCalibration":
        return cls(np.asarray(d["t_imu_to_base"], dtype=float),
                   np.asarray(d["t_imu_to_antenna"], dtype=float))


def _iter_lines(source: Source) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", errors="replace") as fh:
            yield from fh
    elif isinstance(source, bytes):
        yield from io.StringIO(source.decode("utf-8", errors="replace"))
    else:
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8", errors="replace")
        yield from io.StringIO(data)


def _parse_float(token: str, line_no: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise MalformedLine(line_no, f"unparseable {what}: {token!r}") from None
    if not math.isfinite(value):
        raise MalformedLine(line_no, f"non-finite {what}: {token!r}")
    return value


def parse_trajectory(source: Source, frame_tag: FrameTag = FrameTag.ENU_LOCAL) -> Trajectory:
    """Parse a TUM-format trajectory.

    Quaternions off unit norm by at most 1e-3 are normalized; worse ones are
    rejected as malformed. Timestamps must be strictly increasing.
    """
    poses: list[Pose] = []
    prev_t = None
    for line_no, raw in enumerate(_iter_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 8:
            raise MalformedLine(line_no, f"expected 8 fields, got {len(fields)}")
        values = [_parse_float(tok, line_no, f"field {i+1}")
                  for i, tok in enumerate(fields)]
        t = values[0]
        p = np.array(values[1:4])
        q = np.array(values[4:8])
        norm = float(np.linalg.norm(q))
        if abs(norm - 1.0) > QUAT_NORM_TOLERANCE:
            raise MalformedLine(line_no, f"quaternion norm {norm:.6f} off unit by more "
                                         f"than {QUAT_NORM_TOLERANCE}")
        if prev_t is not None and t <= prev_t:
            raise NonMonotonicTimestamp(line_no)
        prev_t = t
        # Leave already-normalized quaternions untouched so that parsing a
        # file we wrote reproduces it bit for bit.
        if abs(norm - 1.0) > 1e-12:
            q = q / norm
        poses.append(Pose(t, p, q))
    if len(poses) < 2:
        raise EmptyFile(f"trajectory needs at least 2 poses, found {len(poses)}")
    return Trajectory(poses, frame_tag)


def write_trajectory(traj: Trajectory, sink: Union[str, Path, IO]) -> None:
    lines = ["# t tx ty tz qx qy qz qw"]
    for pose in traj.poses:
        fields = [pose.t, *pose.p, *pose.q]
        lines.append(" ".join(repr(float(v)) for v in fields))
    _write_text(sink, "\n".join(lines) + "\n")


def parse_checkpoints(source: Source, zone: int, hemisphere: str = "north") -> list[Checkpoint]:
    """Parse the checkpoint survey CSV. Zone/hemisphere come from the run
    config, not the file."""
    checkpoints: list[Checkpoint] = []
    seen: set[str] = set()
    header_seen = False
    for line_no, raw in enumerate(_iter_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split(",")]
        if not header_seen:
            if [f.lower() for f in fields] != ["id", "easting", "northing", "height"]:
                raise MalformedLine(line_no, "expected header 'id,easting,northing,height'")
            header_seen = True
            continue
        if len(fields) != 4:
            raise MalformedLine(line_no, f"expected 4 fields, got {len(fields)}")
        cp_id = fields[0]
        if not cp_id:
            raise MalformedLine(line_no, "empty checkpoint id")
        if cp_id in seen:
            raise DuplicateId(f"checkpoint id {cp_id!r} repeated at line {line_no}")
        seen.add(cp_id)
        easting = _parse_float(fields[1], line_no, "easting")
        northing = _parse_float(fields[2], line_no, "northing")
        height = _parse_float(fields[3], line_no, "height")
        try:
            coord = UtmCoord(easting, northing, height, zone, hemisphere)
        except ValueError as exc:
            raise MalformedLine(line_no, str(exc)) from None
        checkpoints.append(Checkpoint(cp_id, coord))
    if not header_seen:
        raise EmptyFile("checkpoint file has no header line")
    return checkpoints


def write_checkpoints(checkpoints: Sequence[Checkpoint], sink: Union[str, Path, IO]) -> None:
    lines = ["id,easting,northing,height"]
    for cp in checkpoints:
        lines.append(f"{cp.id},{cp.coord.easting!r},{cp.coord.northing!r},"
                     f"{cp.coord.height!r}")
    _write_text(sink, "\n".join(lines) + "\n")


def parse_rtk_log(source: Source) -> RtkLog:
    records: list[RtkRecord] = []
    header_seen = False
    prev_t = None
    for line_no, raw in enumerate(_iter_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split(",")]
        if not header_seen:
            if [f.lower() for f in fields] != ["t", "lat_deg", "lon_deg", "height", "status"]:
                raise MalformedLine(line_no, "expected header 't,lat_deg,lon_deg,height,status'")
            header_seen = True
            continue
        if len(fields) != 5:
            raise MalformedLine(line_no, f"expected 5 fields, got {len(fields)}")
        t = _parse_float(fields[0], line_no, "timestamp")
        lat = _parse_float(fields[1], line_no, "latitude")
        lon = _parse_float(fields[2], line_no, "longitude")
        height = _parse_float(fields[3], line_no, "height")
        token = fields[4].upper()
        if token not in _TOKEN_TO_STATUS:
            raise UnknownStatus(line_no, fields[4])
        if prev_t is not None and t < prev_t:
            raise NonMonotonicTimestamp(line_no)
        prev_t = t
        try:
            g = GeodeticCoord.from_degrees(lat, lon, height)
        except ValueError as exc:
            raise MalformedLine(line_no, str(exc)) from None
        records.append(RtkRecord(t, g, _TOKEN_TO_STATUS[token]))
    if not header_seen:
        raise EmptyFile("RTK log has no header line")
    return RtkLog(records)


def write_rtk_log(log: RtkLog, sink: Union[str, Path, IO]) -> None:
    lines = ["t,lat_deg,lon_deg,height,status"]
    for rec in log.records:
        lines.append(f"{rec.t!r},{rec.g.lat_deg!r},{rec.g.lon_deg!r},"
                     f"{rec.g.h!r},{rec.status.token}")
    _write_text(sink, "\n".join(lines) + "\n")


def first_rtk_fix(log: RtkLog) -> EnuOrigin:
    """World origin from the earliest RTK_FIX record."""
    for rec in log.records:
        if rec.status is GnssStatus.RTK_FIX:
            return EnuOrigin(rec.g)
    raise NoFixAvailable("RTK log contains no FIX record")


def _write_text(sink: Union[str, Path, IO], text: str) -> None:
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(text, encoding="utf-8")
    else:
        sink.write(text)
