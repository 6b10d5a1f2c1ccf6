"""Dwell detection and checkpoint association.

A dwell is a maximal stretch of samples that all stay within
``stationary_radius`` of the stretch's componentwise median and that lasts at
least ``min_dwell`` seconds. Each dwell's median position is matched to the
nearest surveyed checkpoint within ``gate_radius`` (3D distance in UTM).

The resulting visit table fixes the evaluation timestamps. It can be exported
to JSON and re-imported so every method is evaluated at identical instants;
positions are always re-read from the trajectory under evaluation at those
instants, never taken from the table.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Sequence, Union

import numpy as np

from .errors import LookupGapExceeded, NoCheckpoints, SchemaMismatch, UnknownCheckpoint
from .geodesy import EnuCoord, GeoContext, UtmCoord
from .lever_arm import BaseCenterTrack
from .trajectory_io import Checkpoint

DEFAULT_STATIONARY_RADIUS = 0.05
DEFAULT_MIN_DWELL = 5.0
DEFAULT_GATE_RADIUS = 1.0

#: Largest |t_sample - t_rep| allowed when reading a pose at a table timestamp.
LOOKUP_MAX_GAP = 0.2


@dataclass(frozen=True)
class DwellSegment:
    t_start: float
    t_end: float
    p_rep: tuple[float, float, float]

    @property
    def t_mid(self) -> float:
        return 0.5 * (self.t_start + self.t_end)

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class CheckpointVisit:
    checkpoint_id: str
    t_rep: float
    p_est: UtmCoord
    distance_to_cp: float


@dataclass(eq=False)
class VisitTable:
    sequence_id: str
    generator_method: str
    visits: list[CheckpointVisit]
    unmatched_segments: list[DwellSegment] = field(default_factory=list)
    unvisited_checkpoints: list[str] = field(default_factory=list)
    params: dict = field(default_factory=dict)


def detect_dwells(track: BaseCenterTrack,
                  stationary_radius: float = DEFAULT_STATIONARY_RADIUS,
                  min_dwell: float = DEFAULT_MIN_DWELL) -> list[DwellSegment]:
    """Greedy maximal-window scan; O(n * w^2) with w the dwell sample count."""
    if stationary_radius <= 0 or min_dwell <= 0:
        raise ValueError("stationary_radius and min_dwell must be positive")
    t = track.t
    p = track.p
    n = len(t)
    segments: list[DwellSegment] = []
    i = 0
    while i < n - 1:
        j = i + 1
        # Grow while every sample stays within radius of the window median.
        while j < n:
            window = p[i:j + 1]
            med = np.median(window, axis=0)
            if np.max(np.linalg.norm(window - med, axis=1)) > stationary_radius:
                break
            j += 1
        last = j - 1
        if last > i and t[last] - t[i] >= min_dwell:
            med = np.median(p[i:last + 1], axis=0)
            segments.append(DwellSegment(float(t[i]), float(t[last]),
                                         (float(med[0]), float(med[1]), float(med[2]))))
            i = last + 1
        else:
            i += 1
    return segments


def match_visits(dwells: Sequence[DwellSegment], cps: Sequence[Checkpoint],
                 ctx: GeoContext, gate_radius: float = DEFAULT_GATE_RADIUS,
                 sequence_id: str = "", generator_method: str = "") -> VisitTable:
    """Associate each dwell with its nearest checkpoint within the gate.

    Ties break on smaller distance first, then lexicographic checkpoint id.
    """
    if not cps:
        raise NoCheckpoints("cannot match visits without checkpoints")
    if gate_radius <= 0:
        raise ValueError("gate_radius must be positive")

    visits: list[CheckpointVisit] = []
    unmatched: list[DwellSegment] = []
    visited: set[str] = set()
    for seg in dwells:
        p_utm = ctx.enu_to_utm(EnuCoord(*seg.p_rep))
        est = np.array([p_utm.easting, p_utm.northing, p_utm.height])
        best = None
        for cp in sorted(cps, key=lambda c: c.id):
            ref = np.array([cp.coord.easting, cp.coord.northing, cp.coord.height])
            dist = float(np.linalg.norm(est - ref))
            if best is None or dist < best[0]:
                best = (dist, cp.id)
        assert best is not None
        if best[0] <= gate_radius:
            visits.append(CheckpointVisit(best[1], seg.t_mid, p_utm, best[0]))
            visited.add(best[1])
        else:
            unmatched.append(seg)

    unvisited = sorted(cp.id for cp in cps if cp.id not in visited)
    return VisitTable(sequence_id, generator_method, visits, unmatched, unvisited)


def pose_at(track: BaseCenterTrack, t_rep: float,
            max_gap: float = LOOKUP_MAX_GAP) -> np.ndarray:
    """Track position at the sample nearest t_rep; no interpolation."""
    idx = int(np.argmin(np.abs(track.t - t_rep)))
    gap = abs(float(track.t[idx]) - t_rep)
    if gap > max_gap:
        raise LookupGapExceeded(
            f"nearest sample is {gap:.3f} s from t={t_rep:.3f} (limit {max_gap} s)")
    return track.p[idx]


def visits_from_table(table: VisitTable, track: BaseCenterTrack,
                      cps: Sequence[Checkpoint], ctx: GeoContext,
                      max_gap: float = LOOKUP_MAX_GAP) -> list[CheckpointVisit]:
    """Re-evaluate the table's timestamps against another method's track.

    The table fixes (checkpoint_id, t_rep); the position is the evaluated
    track's nearest sample, so all methods answer the same question: where
    does this method think it was at the instant the device sat on the
    checkpoint.
    """
    if not cps:
        raise NoCheckpoints("cannot evaluate visits without checkpoints")
    by_id = {cp.id: cp for cp in cps}
    out: list[CheckpointVisit] = []
    for visit in table.visits:
        cp = by_id.get(visit.checkpoint_id)
        if cp is None:
            raise UnknownCheckpoint(f"table references unknown checkpoint "
                                    f"{visit.checkpoint_id!r}")
        p = pose_at(track, visit.t_rep, max_gap)
        p_utm = ctx.enu_to_utm(EnuCoord(float(p[0]), float(p[1]), float(p[2])))
        dist = float(np.linalg.norm(
            np.array([p_utm.easting, p_utm.northing, p_utm.height])
            - np.array([cp.coord.easting, cp.coord.northing, cp.coord.height])))
        out.append(CheckpointVisit(visit.checkpoint_id, visit.t_rep, p_utm, dist))
    return out


_TABLE_SCHEMA_KEYS = {"sequence_id", "generator_method", "visits",
                      "unmatched_segments", "unvisited_checkpoints", "params"}


def export_visit_table(table: VisitTable) -> str:
    """Serialize to JSON. Floats use repr via json, so timestamps round-trip
    bit identically and equal tables serialize to equal bytes."""
    doc = {
        "sequence_id": table.sequence_id,
        "generator_method": table.generator_method,
        "visits": [
            {
                "cp_id": v.checkpoint_id,
                "t_rep": v.t_rep,
                "easting": v.p_est.easting,
                "northing": v.p_est.northing,
                "height": v.p_est.height,
                "zone": v.p_est.zone,
                "hemisphere": v.p_est.hemisphere,
                "distance_to_cp": v.distance_to_cp,
            }
            for v in table.visits
        ],
        "unmatched_segments": [
            {"t_start": s.t_start, "t_end": s.t_end, "p_rep": list(s.p_rep)}
            for s in table.unmatched_segments
        ],
        "unvisited_checkpoints": list(table.unvisited_checkpoints),
        "params": table.params,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def import_visit_table(source: Union[str, Path, bytes, IO]) -> VisitTable:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    elif isinstance(source, bytes):
        text = source.decode("utf-8", errors="replace")
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8", errors="replace")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"visit table is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or not _TABLE_SCHEMA_KEYS.issubset(doc):
        missing = _TABLE_SCHEMA_KEYS - set(doc) if isinstance(doc, dict) else _TABLE_SCHEMA_KEYS
        raise SchemaMismatch(f"visit table missing keys: {sorted(missing)}")
    try:
        visits = [
            CheckpointVisit(
                str(v["cp_id"]), float(v["t_rep"]),
                UtmCoord(float(v["easting"]), float(v["northing"]), float(v["height"]),
                         int(v["zone"]), str(v["hemisphere"])),
                float(v["distance_to_cp"]))
            for v in doc["visits"]
        ]
        unmatched = [
            DwellSegment(float(s["t_start"]), float(s["t_end"]),
                         tuple(float(c) for c in s["p_rep"]))
            for s in doc["unmatched_segments"]
        ]
        unvisited = [str(c) for c in doc["unvisited_checkpoints"]]
        params = dict(doc["params"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatch(f"visit table field error: {exc}") from None
    return VisitTable(str(doc["sequence_id"]), str(doc["generator_method"]),
                      visits, unmatched, unvisited, params)
