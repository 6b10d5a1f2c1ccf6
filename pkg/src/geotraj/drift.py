"""Error-vs-outage analysis: distance/time to the nearest RTK fix and the
fixed-intercept linear drift fit.

For each checkpoint visit the outage coordinate is measured to the *nearest*
fix in either direction, not only the last one before the visit: a checkpoint
rejoining coverage ahead is about to be corrected, and its error reflects
that. The abscissa is either elapsed time or cumulative path length along the
evaluated track.

The drift model is eps(x) = eps0 + alpha * x with eps0 held fixed (default
2 cm, the expected error right at a fix), so

    alpha = sum(x_i * (eps_i - eps0)) / sum(x_i^2)
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Sequence, Union

import numpy as np

from .errors import AllZeroAbscissa, InsufficientSamples, NoFixAvailable
from .lever_arm import BaseCenterTrack
from .matching import CheckpointVisit
from .trajectory_io import GnssStatus, RtkLog

DEFAULT_EPS0 = 0.02


@dataclass(frozen=True)
class OutageCoordinate:
    checkpoint_id: str
    dt_nearest_fix: float
    dx_nearest_fix: float


@dataclass(frozen=True)
class DriftFit:
    """alpha is m/s against the time axis, m/m against the distance axis."""

    eps0: float
    alpha: float
    n: int


@dataclass(frozen=True)
class DriftSample:
    """One (visit, error) pair annotated for the aggregate CSV."""

    method: str
    sequence: str
    cp_id: str
    dt_s: float
    dx_m: float
    eps_m: float


def _cumulative_path(track: BaseCenterTrack) -> np.ndarray:
    steps = np.linalg.norm(np.diff(track.p, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(steps)])


def _path_length_at(track: BaseCenterTrack, cum: np.ndarray, t: float) -> float:
    """Arc length s(t), linearly interpolated, clamped to the track range."""
    return float(np.interp(t, track.t, cum))


def outage_coordinates(track: BaseCenterTrack, log: RtkLog,
                       visits: Sequence[CheckpointVisit],
                       min_status: GnssStatus = GnssStatus.RTK_FIX
                       ) -> list[OutageCoordinate]:
    fix_times = np.array([rec.t for rec in log.records if rec.status >= min_status])
    if fix_times.size == 0:
        raise NoFixAvailable("RTK log contains no record at or above "
                             f"{min_status.name}")
    cum = _cumulative_path(track)
    fix_s = np.interp(fix_times, track.t, cum)
    out: list[OutageCoordinate] = []
    for visit in visits:
        dt = float(np.min(np.abs(fix_times - visit.t_rep)))
        s_visit = _path_length_at(track, cum, visit.t_rep)
        dx = float(np.min(np.abs(fix_s - s_visit)))
        out.append(OutageCoordinate(visit.checkpoint_id, dt, dx))
    return out


def fit_drift(samples: Sequence[tuple[float, float]], eps0: float = DEFAULT_EPS0
              ) -> DriftFit:
    """Least squares for eps = eps0 + alpha*x with the intercept pinned."""
    if len(samples) < 2:
        raise InsufficientSamples(f"drift fit needs >= 2 samples, got {len(samples)}")
    x = np.array([s[0] for s in samples], dtype=float)
    eps = np.array([s[1] for s in samples], dtype=float)
    if np.any(x < 0.0):
        raise ValueError("outage abscissa must be non-negative")
    sxx = float(np.sum(x * x))
    if sxx == 0.0:
        raise AllZeroAbscissa("every sample sits exactly at a fix; no slope to fit")
    alpha = float(np.sum(x * (eps - eps0)) / sxx)
    return DriftFit(eps0, alpha, len(samples))


def write_drift_csv(samples: Sequence[DriftSample], sink: Union[str, Path, IO]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", "sequence", "cp_id", "dt_s", "dx_m", "eps_m"])
    for s in samples:
        writer.writerow([s.method, s.sequence, s.cp_id,
                         repr(s.dt_s), repr(s.dx_m), repr(s.eps_m)])
    _write_text(sink, buf.getvalue())


def drift_report(samples: Sequence[DriftSample], fits: dict[str, DriftFit],
                 axis: str, out_csv: Union[str, Path, IO],
                 out_svg: Union[str, Path, IO]) -> None:
    """Emit the aggregate CSV plus a log-y scatter with fitted lines."""
    from .svg import drift_scatter

    if axis not in ("time", "distance"):
        raise ValueError("axis must be 'time' or 'distance'")
    write_drift_csv(samples, out_csv)
    series: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for s in samples:
        xs, ys = series.setdefault(s.method, ([], []))  # type: ignore[arg-type]
        xs.append(s.dt_s if axis == "time" else s.dx_m)
        ys.append(s.eps_m)
    series_arrays = {m: (np.array(xs), np.array(ys)) for m, (xs, ys) in series.items()}
    _write_text(out_svg, drift_scatter(series_arrays, fits, axis))


def _write_text(sink: Union[str, Path, IO], text: str) -> None:
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(text, encoding="utf-8")
    else:
        sink.write(text)
