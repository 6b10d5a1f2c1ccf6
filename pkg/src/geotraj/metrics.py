"""Checkpoint error metrics: absolute RMSE, SE(3)-aligned RMSE, alignment gap.

The absolute metric compares estimated positions to surveyed coordinates in
the shared UTM frame with no alignment whatsoever; that is the point of the
whole toolkit. The aligned metric applies the optimal rigid transform first,
which absorbs any global offset or rotation. The gap between the two is the
share of error that alignment hides:

    gap = 100 * (1 - rmse_aligned / rmse_absolute)

Summaries round the gap to whole percent; serialized reports keep full
precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .alignment import RigidTransform, apply_transform, umeyama_align
from .errors import NoCheckpoints, UndefinedGap, UnknownCheckpoint
from .matching import CheckpointVisit
from .trajectory_io import Checkpoint


@dataclass(frozen=True)
class CheckpointError:
    """Per-checkpoint signed error (easting, northing, height), meters."""

    checkpoint_id: str
    eps: tuple[float, float, float]
    norm: float


@dataclass(frozen=True)
class AccuracySummary:
    rmse_absolute: float
    rmse_aligned: float
    gap_percent: float
    n_points: int
    per_axis_rmse: tuple[float, float, float]

    @property
    def gap_rounded(self) -> int:
        return int(round(self.gap_percent))


def checkpoint_errors(visits: Sequence[CheckpointVisit],
                      cps: Sequence[Checkpoint]) -> list[CheckpointError]:
    by_id = {cp.id: cp for cp in cps}
    errors: list[CheckpointError] = []
    for visit in visits:
        cp = by_id.get(visit.checkpoint_id)
        if cp is None:
            raise UnknownCheckpoint(f"visit references unknown checkpoint "
                                    f"{visit.checkpoint_id!r}")
        eps = (visit.p_est.easting - cp.coord.easting,
               visit.p_est.northing - cp.coord.northing,
               visit.p_est.height - cp.coord.height)
        errors.append(CheckpointError(visit.checkpoint_id, eps, math.hypot(*eps)))
    return errors


def absolute_rmse(errors: Sequence[CheckpointError]) -> float:
    """Root mean square of 3D error norms; no alignment of any kind."""
    if not errors:
        raise NoCheckpoints("absolute RMSE needs at least one checkpoint error")
    return math.sqrt(sum(e.norm ** 2 for e in errors) / len(errors))


def per_axis_rmse(errors: Sequence[CheckpointError]) -> tuple[float, float, float]:
    if not errors:
        raise NoCheckpoints("per-axis RMSE needs at least one checkpoint error")
    eps = np.array([e.eps for e in errors])
    axis = np.sqrt(np.mean(eps ** 2, axis=0))
    return (float(axis[0]), float(axis[1]), float(axis[2]))


def aligned_rmse(est: np.ndarray, ref: np.ndarray) -> tuple[float, RigidTransform]:
    """RMSE of residuals after the optimal rigid alignment."""
    est = np.asarray(est, dtype=float).reshape(-1, 3)
    ref = np.asarray(ref, dtype=float).reshape(-1, 3)
    T = umeyama_align(est, ref)
    residuals = apply_transform(T, est) - ref
    return float(np.sqrt(np.mean(np.sum(residuals ** 2, axis=1)))), T


def alignment_gap(rmse_abs: float, rmse_aligned: float) -> float:
    """Percent of the absolute error that SE(3) alignment absorbs."""
    if rmse_abs <= 0.0:
        raise UndefinedGap("alignment gap undefined when absolute RMSE is zero")
    gap = 100.0 * (1.0 - rmse_aligned / rmse_abs)
    # Clip the rounding dust from aligned == absolute; real negatives stay.
    if -1e-9 < gap < 0.0:
        gap = 0.0
    return gap


def visit_point_pairs(visits: Sequence[CheckpointVisit],
                      cps: Sequence[Checkpoint]) -> tuple[np.ndarray, np.ndarray]:
    """(est, ref) UTM point arrays in visit order, for the aligned metric."""
    by_id = {cp.id: cp for cp in cps}
    est, ref = [], []
    for visit in visits:
        cp = by_id.get(visit.checkpoint_id)
        if cp is None:
            raise UnknownCheckpoint(f"visit references unknown checkpoint "
                                    f"{visit.checkpoint_id!r}")
        est.append([visit.p_est.easting, visit.p_est.northing, visit.p_est.height])
        ref.append([cp.coord.easting, cp.coord.northing, cp.coord.height])
    return np.array(est, dtype=float).reshape(-1, 3), np.array(ref, dtype=float).reshape(-1, 3)


def summarize(visits: Sequence[CheckpointVisit], cps: Sequence[Checkpoint]
              ) -> tuple[AccuracySummary, list[CheckpointError], RigidTransform]:
    """Full accuracy summary for one method's visits."""
    errors = checkpoint_errors(visits, cps)
    rmse_abs = absolute_rmse(errors)
    est, ref = visit_point_pairs(visits, cps)
    rmse_al, transform = aligned_rmse(est, ref)
    if rmse_abs > 0.0:
        gap = alignment_gap(rmse_abs, rmse_al)
    else:
        gap = 0.0
    summary = AccuracySummary(rmse_abs, rmse_al, gap, len(errors),
                              per_axis_rmse(errors))
    return summary, errors, transform
