"""Run evaluation end to end and emit the report bundle.

Pipeline per method: parse trajectory -> lever arm to base center -> look up
positions at the shared visit timestamps -> checkpoint errors in UTM ->
absolute/aligned RMSE and gap -> outage coordinates and drift fits.

Artifacts written to the output directory:

  report.json           full machine-readable report (schema shipped in
                        geotraj/schemas/report.schema.json)
  errors.csv            per method x checkpoint signed errors
  drift_samples.csv     method, sequence, cp_id, dt_s, dx_m, eps_m
  checkpoint_errors.svg bar chart of per-checkpoint 3D error (first method)
  trajectory_overlay.svg  UTM-plane tracks plus checkpoint markers

Reports are deterministic byte for byte: keys are sorted, meter quantities
are rounded to fixed 1e-6 m, and the config hash pins provenance.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .config import RunConfig
from .drift import (DEFAULT_EPS0, DriftFit, DriftSample, fit_drift,
                    outage_coordinates, write_drift_csv)
from .errors import InsufficientSamples, LookupGapExceeded, AllZeroAbscissa
from .geodesy import EnuCoord, GeoContext, EnuOrigin
from .lever_arm import BaseCenterTrack, apply_lever_arm
from .matching import (VisitTable, detect_dwells, export_visit_table,
                       import_visit_table, match_visits, visits_from_table)
from .metrics import AccuracySummary, CheckpointError, summarize
from .svg import bar_chart, drift_scatter, trajectory_overlay
from .trajectory_io import (GnssStatus, first_rtk_fix, parse_checkpoints,
                            parse_rtk_log, parse_trajectory)

log = logging.getLogger(__name__)

RTK_METHOD_LABEL = "rtk-standalone"


@dataclass(eq=False)
class MethodResult:
    label: str
    summary: AccuracySummary
    errors: list[CheckpointError]
    drift_samples: list[DriftSample]
    fit_time: Optional[DriftFit]
    fit_distance: Optional[DriftFit]
    skipped_visits: list[str] = field(default_factory=list)


@dataclass(eq=False)
class EvaluationReport:
    sequence_id: str
    methods: list[MethodResult]
    table: VisitTable
    config_sha256: str
    tool_version: str
    warnings: list[str] = field(default_factory=list)
    overlay_tracks: dict = field(default_factory=dict)
    checkpoints: list = field(default_factory=list)


def _rtk_standalone_track(log_records, ctx: GeoContext, calibration) -> BaseCenterTrack:
    """Base-center track from the receiver alone.

    Without an orientation estimate the antenna-to-base lever arm cannot be
    rotated; during checkpoint dwells the pole is held vertical, so the
    body-frame offset is applied unrotated. Only records with a position
    solution contribute.
    """
    usable = [r for r in log_records if r.status > GnssStatus.NONE]
    t = np.array([r.t for r in usable])
    lat = np.array([r.g.lat for r in usable])
    lon = np.array([r.g.lon for r in usable])
    h = np.array([r.g.h for r in usable])
    from .geodesy import _enu_from_geodetic_arrays
    antenna_enu = _enu_from_geodetic_arrays(lat, lon, h, ctx.origin, ctx.ellipsoid)
    offset = calibration.t_imu_to_base - calibration.t_imu_to_antenna
    return BaseCenterTrack(t, antenna_enu + offset)


def evaluate_run(config: RunConfig) -> EvaluationReport:
    warnings: list[str] = []
    cps = parse_checkpoints(config.checkpoints, config.zone, config.hemisphere)
    rtk = parse_rtk_log(config.rtk_log)
    origin = first_rtk_fix(rtk)
    ctx = GeoContext(origin, config.zone, config.hemisphere)

    tracks: dict[str, BaseCenterTrack] = {}
    for method in config.methods:
        traj = parse_trajectory(method.trajectory)
        tracks[method.label] = apply_lever_arm(traj, config.calibration.t_imu_to_base)
    if config.include_rtk_method:
        tracks[RTK_METHOD_LABEL] = _rtk_standalone_track(rtk.records, ctx,
                                                         config.calibration)

    th = config.thresholds
    if config.visit_table is not None:
        table = import_visit_table(config.visit_table)
        if table.sequence_id and table.sequence_id != config.sequence_id:
            warnings.append(f"visit table was built for sequence "
                            f"{table.sequence_id!r}, evaluating {config.sequence_id!r}")
    else:
        table_label = config.table_method or config.methods[0].label
        dwells = detect_dwells(tracks[table_label], th.stationary_radius, th.min_dwell)
        table = match_visits(dwells, cps, ctx, th.gate_radius,
                             sequence_id=config.sequence_id,
                             generator_method=table_label)
        table.params = {"stationary_radius": th.stationary_radius,
                        "min_dwell": th.min_dwell, "gate_radius": th.gate_radius}
    if table.unvisited_checkpoints:
        warnings.append("checkpoints never visited: "
                        + ", ".join(table.unvisited_checkpoints))

    fix_count = sum(1 for r in rtk.records if r.status is GnssStatus.RTK_FIX)
    if rtk.records and fix_count < 0.5 * len(rtk.records):
        warnings.append(f"low fix coverage: {fix_count}/{len(rtk.records)} records")

    results: list[MethodResult] = []
    for label, track in tracks.items():
        visits = []
        skipped = []
        for one in table.visits:
            sub = VisitTable(table.sequence_id, table.generator_method, [one])
            try:
                visits.extend(visits_from_table(sub, track, cps, ctx))
            except LookupGapExceeded as exc:
                skipped.append(f"{one.checkpoint_id}@{one.t_rep:.3f}: {exc}")
        if skipped:
            warnings.append(f"{label}: skipped {len(skipped)} visit(s) without "
                            "nearby poses")
        summary, errors, _ = summarize(visits, cps)
        coords = outage_coordinates(track, rtk, visits)
        samples = [DriftSample(label, config.sequence_id, v.checkpoint_id,
                               c.dt_nearest_fix, c.dx_nearest_fix, e.norm)
                   for v, c, e in zip(visits, coords, errors)]
        fit_t = fit_d = None
        try:
            fit_t = fit_drift([(s.dt_s, s.eps_m) for s in samples], th.eps0)
            fit_d = fit_drift([(s.dx_m, s.eps_m) for s in samples], th.eps0)
        except (InsufficientSamples, AllZeroAbscissa) as exc:
            warnings.append(f"{label}: no drift fit ({exc})")
        results.append(MethodResult(label, summary, errors, samples,
                                    fit_t, fit_d, skipped))

    overlay = {label: _track_utm_plane(track, ctx) for label, track in tracks.items()}
    cp_markers = [(cp.id, cp.coord.easting, cp.coord.northing) for cp in cps]
    digest = hashlib.sha256(config.config_bytes()).hexdigest()
    return EvaluationReport(config.sequence_id, results, table, digest,
                            __version__, warnings, overlay, cp_markers)


def _track_utm_plane(track: BaseCenterTrack, ctx: GeoContext,
                     max_points: int = 2000) -> np.ndarray:
    stride = max(1, len(track.t) // max_points)
    pts = track.p[::stride]
    return ctx.enu_to_utm_batch(pts)[:, :2]


def _m(v: float) -> float:
    """Fixed 1e-6 m rounding for deterministic byte output."""
    return round(float(v), 6)


def report_to_dict(report: EvaluationReport) -> dict:
    return {
        "sequence_id": report.sequence_id,
        "provenance": {
            "config_sha256": report.config_sha256,
            "tool_version": report.tool_version,
        },
        "visit_table": {
            "generator_method": report.table.generator_method,
            "n_visits": len(report.table.visits),
            "unvisited_checkpoints": list(report.table.unvisited_checkpoints),
            "n_unmatched_segments": len(report.table.unmatched_segments),
        },
        "warnings": list(report.warnings),
        "methods": [
            {
                "label": r.label,
                "summary": {
                    "rmse_absolute_m": _m(r.summary.rmse_absolute),
                    "rmse_aligned_m": _m(r.summary.rmse_aligned),
                    "gap_percent": r.summary.gap_percent,
                    "gap_percent_rounded": r.summary.gap_rounded,
                    "n_points": r.summary.n_points,
                    "per_axis_rmse_m": [_m(v) for v in r.summary.per_axis_rmse],
                },
                "checkpoint_errors": [
                    {"cp_id": e.checkpoint_id,
                     "eps_m": [_m(v) for v in e.eps],
                     "norm_m": _m(e.norm)}
                    for e in r.errors
                ],
                "drift": {
                    "samples": [
                        {"cp_id": s.cp_id, "dt_s": _m(s.dt_s), "dx_m": _m(s.dx_m),
                         "eps_m": _m(s.eps_m)}
                        for s in r.drift_samples
                    ],
                    "fit_time": _fit_dict(r.fit_time),
                    "fit_distance": _fit_dict(r.fit_distance),
                },
                "skipped_visits": list(r.skipped_visits),
            }
            for r in report.methods
        ],
    }


def _fit_dict(fit: Optional[DriftFit]) -> Optional[dict]:
    if fit is None:
        return None
    return {"eps0_m": fit.eps0, "alpha": fit.alpha, "n": fit.n}


def write_report(report: EvaluationReport, outdir: Path | str) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    doc = report_to_dict(report)
    (outdir / "report.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    (outdir / "visit_table.json").write_text(export_visit_table(report.table),
                                             encoding="utf-8")

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", "cp_id", "d_easting_m", "d_northing_m",
                     "d_height_m", "norm_m"])
    for r in report.methods:
        for e in r.errors:
            writer.writerow([r.label, e.checkpoint_id, repr(_m(e.eps[0])),
                             repr(_m(e.eps[1])), repr(_m(e.eps[2])),
                             repr(_m(e.norm))])
    (outdir / "errors.csv").write_text(buf.getvalue(), encoding="utf-8")

    all_samples = [s for r in report.methods for s in r.drift_samples]
    write_drift_csv(all_samples, outdir / "drift_samples.csv")

    if report.methods:
        first = report.methods[0]
        labels = [e.checkpoint_id for e in first.errors]
        values = [e.norm for e in first.errors]
        svg = bar_chart(labels, values,
                        f"absolute 3D error per checkpoint: {first.label}",
                        "error [m]")
        (outdir / "checkpoint_errors.svg").write_text(svg, encoding="utf-8")

    overlay = trajectory_overlay(report.overlay_tracks, report.checkpoints,
                                 f"trajectories: {report.sequence_id}")
    (outdir / "trajectory_overlay.svg").write_text(overlay, encoding="utf-8")

    series = {}
    fits = {}
    for r in report.methods:
        xs = np.array([s.dt_s for s in r.drift_samples])
        ys = np.array([s.eps_m for s in r.drift_samples])
        series[r.label] = (xs, ys)
        if r.fit_time is not None:
            fits[r.label] = r.fit_time
    (outdir / "drift_time.svg").write_text(drift_scatter(series, fits, "time"),
                                           encoding="utf-8")


def format_summary_table(report: EvaluationReport) -> str:
    """Plain-text accuracy table, one row per method."""
    rows = [f"sequence: {report.sequence_id}",
            f"{'method':<20} {'abs RMSE [m]':>14} {'aligned RMSE [m]':>18} "
            f"{'gap [%]':>8} {'N':>4}"]
    for r in report.methods:
        rows.append(f"{r.label:<20} {r.summary.rmse_absolute:>14.3f} "
                    f"{r.summary.rmse_aligned:>18.3f} "
                    f"{r.summary.gap_rounded:>8d} {r.summary.n_points:>4d}")
    for w in report.warnings:
        rows.append(f"warning: {w}")
    return "\n".join(rows)
