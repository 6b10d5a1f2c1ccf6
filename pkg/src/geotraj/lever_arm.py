"""Body-frame lever-arm transfer from the IMU origin to the base center.

The evaluated point is the device base center (the pole tip placed on the
checkpoint), offset from the estimated IMU position by a fixed body-frame
vector rotated into the world frame by each pose's orientation:

    p_base = p_imu + R(q) @ offset
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .trajectory_io import Trajectory


@dataclass(eq=False)
class BaseCenterTrack:
    """Time-ordered base-center positions; same timestamps as the source."""

    t: np.ndarray
    p: np.ndarray

    def __len__(self) -> int:
        return len(self.t)


def _rotate_batch(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate one body-frame vector by each quaternion in (N, 4) array q."""
    x, y, z, w = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    vx, vy, vz = v
    return np.stack([
        (1 - 2 * (y * y + z * z)) * vx + 2 * (x * y - w * z) * vy + 2 * (x * z + w * y) * vz,
        2 * (x * y + w * z) * vx + (1 - 2 * (x * x + z * z)) * vy + 2 * (y * z - w * x) * vz,
        2 * (x * z - w * y) * vx + 2 * (y * z + w * x) * vy + (1 - 2 * (x * x + y * y)) * vz,
    ], axis=-1)


def apply_lever_arm(traj: Trajectory, offset: np.ndarray) -> BaseCenterTrack:
    offset = np.asarray(offset, dtype=float)
    if offset.shape != (3,) or not np.all(np.isfinite(offset)):
        raise ValueError("lever-arm offset must be a finite 3-vector")
    t = traj.timestamps
    p = traj.positions
    if np.any(offset != 0.0):
        p = p + _rotate_batch(traj.quaternions, offset)
    return BaseCenterTrack(t, p)
