"""Scenario generator: determinism, exact zero/bias cases, variance tracking,
and agreement between the generator's own oracle and the full file pipeline.
"""

import json
import math

import numpy as np
import pytest

from geotraj.errors import InvalidSpec
from geotraj.geodesy import UtmCoord, utm_to_geodetic
from geotraj.lever_arm import apply_lever_arm
from geotraj.matching import detect_dwells, match_visits, visits_from_table
from geotraj.metrics import summarize
from geotraj.synth import (
    CHI3_MEAN,
    RTK_RATE_HZ,
    Scenario,
    ScenarioSpec,
    base_center_truth,
    expected_metrics,
    generate,
    write_scenario,
)
from geotraj.trajectory_io import (
    DeviceCalibration,
    GnssStatus,
    parse_checkpoints,
    parse_rtk_log,
    parse_trajectory,
)

E0, N0, H0 = 513000.0, 5403000.0, 300.0


def _origin_at(e, n, h, zone=32):
    return utm_to_geodetic(UtmCoord(e, n, h, zone, "north"))


def _line_spec(**kw) -> ScenarioSpec:
    defaults = dict(
        seed=42,
        waypoints=np.array([[E0, N0, H0], [E0 + 90.0, N0, H0],
                            [E0 + 90.0, N0 + 90.0, H0]]),
        dwells=[("CP01", 8.0), ("CP02", 8.0), ("CP03", 8.0)],
        speed=1.5,
        origin=_origin_at(E0, N0, H0),
        zone=32,
    )
    defaults.update(kw)
    return ScenarioSpec(**defaults)


def test_zero_corruption_estimate_equals_truth():
    sc = generate(_line_spec())
    assert np.array_equal(sc.estimate_utm, sc.truth_utm)
    em = sc.expected
    assert em.summary.rmse_absolute == 0.0
    assert em.summary.gap_percent == 0.0
    assert em.visit_ids == ["CP01", "CP02", "CP03"]


def test_bias_only_has_exact_absolute_rmse():
    sc = generate(_line_spec(global_bias=np.array([1.0, 0.0, 0.0])))
    em = sc.expected
    assert em.summary.rmse_absolute == pytest.approx(1.0, abs=1e-12)
    assert em.summary.rmse_aligned == pytest.approx(0.0, abs=1e-9)
    assert em.summary.gap_percent == pytest.approx(100.0, abs=1e-6)
    # A bias shifts every sample identically.
    assert np.allclose(sc.estimate_utm - sc.truth_utm, [1.0, 0.0, 0.0], atol=0.0)
    # Expected drift slope is undefined under bias (norm no longer centered).
    assert em.alpha_time_expected is None


def test_same_seed_is_bit_identical_different_seed_is_not():
    spec_a = _line_spec(noise_sigma=0.02, seed=7)
    spec_b = _line_spec(noise_sigma=0.02, seed=7)
    a, b = generate(spec_a), generate(spec_b)
    assert np.array_equal(a.estimate_utm, b.estimate_utm)
    c = generate(_line_spec(noise_sigma=0.02, seed=8))
    assert not np.array_equal(a.estimate_utm, c.estimate_utm)


def test_written_bundle_is_byte_deterministic(tmp_path):
    spec = _line_spec(noise_sigma=0.01, drift_rate=0.02,
                      outage_windows=[(20.0, 50.0)],
                      calibration=DeviceCalibration([-0.073, -0.023, -0.172],
                                                    [0.023, -0.023, 0.090]))
    d1, d2 = tmp_path / "a", tmp_path / "b"
    write_scenario(generate(spec), d1)
    write_scenario(generate(_line_spec(noise_sigma=0.01, drift_rate=0.02,
                                       outage_windows=[(20.0, 50.0)],
                                       calibration=DeviceCalibration(
                                           [-0.073, -0.023, -0.172],
                                           [0.023, -0.023, 0.090]))), d2)
    names = ["truth.tum", "estimate.tum", "rtk.csv", "checkpoints.csv",
             "spec.json", "expected.json", "run.json"]
    for name in names:
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes(), name


def test_written_files_parse_back_exactly(tmp_path):
    sc = generate(_line_spec(noise_sigma=0.01, seed=3))
    write_scenario(sc, tmp_path)
    truth = parse_trajectory(tmp_path / "truth.tum")
    est = parse_trajectory(tmp_path / "estimate.tum")
    assert np.array_equal(truth.timestamps, sc.truth.timestamps)
    assert np.array_equal(truth.positions, sc.truth.positions)
    assert np.array_equal(est.positions, sc.estimate.positions)
    cps = parse_checkpoints(tmp_path / "checkpoints.csv", zone=32)
    assert [c.id for c in cps] == [c.id for c in sc.checkpoints]
    assert cps[0].coord.easting == sc.checkpoints[0].coord.easting
    log = parse_rtk_log(tmp_path / "rtk.csv")
    assert len(log.records) == len(sc.rtk.records)
    assert log.records[0].t == sc.rtk.records[0].t


def test_rtk_outage_windows_are_half_open():
    sc = generate(_line_spec(outage_windows=[(20.0, 50.0)]))
    by_t = {r.t: r.status for r in sc.rtk.records}
    assert by_t[19.0] is GnssStatus.RTK_FIX
    assert by_t[20.0] is GnssStatus.NONE
    assert by_t[49.0] is GnssStatus.NONE
    assert by_t[50.0] is GnssStatus.RTK_FIX
    assert sc.rtk.records[0].status is GnssStatus.RTK_FIX
    # 1 Hz cadence across the whole scenario.
    ts = [r.t for r in sc.rtk.records]
    assert ts == [float(i) / RTK_RATE_HZ for i in range(len(ts))]


def test_random_walk_variance_tracks_discrete_process():
    rate, tau, dt = 0.1, 5.0, 0.1
    spec = _line_spec(drift_rate=rate, reset_tau_s=tau,
                      outage_windows=[(20.0, 50.0)], sample_rate_hz=1.0 / dt)
    sc = generate(spec)
    t, var = sc.t, sc.rw_var
    step_var = rate ** 2 * dt
    inside = (t >= 20.0) & (t < 50.0)
    first_in = int(np.argmax(inside))
    last_in = int(len(t) - 1 - np.argmax(inside[::-1]))
    assert np.all(var[:first_in] == 0.0)
    # Linear growth inside the outage, one step of q^2*dt per sample.
    grown = var[first_in:last_in + 1]
    steps = np.arange(1, last_in - first_in + 2)
    assert np.max(np.abs(grown - steps * step_var)) < 1e-12
    # Exponential decay outside, factor exp(-2*dt/tau) per sample.
    peak = var[last_in]
    decay = math.exp(-2.0 * dt / tau)
    tail = var[last_in + 1:]
    expected_tail = peak * decay ** np.arange(1, len(tail) + 1)
    assert np.max(np.abs(tail - expected_tail)) < 1e-12
    # The realized walk is zero before the outage and nonzero inside.
    rw = sc.estimate_utm - sc.truth_utm
    assert np.all(rw[:first_in] == 0.0)
    assert np.any(rw[inside] != 0.0)


def test_expected_error_magnitude_uses_chi_mean():
    spec = _line_spec(noise_sigma=0.02)
    sc = generate(spec)
    em = sc.expected
    # No drift: every visit's expected norm is sigma * sqrt(8/pi).
    assert np.allclose(em.eps_mean_m, 0.02 * CHI3_MEAN, atol=1e-15)


def test_pipeline_matches_generator_oracle_bias_only():
    """Dual route: dwell detection + matching + metrics vs the oracle."""
    sc = generate(_line_spec(global_bias=np.array([0.4, -0.3, 0.2])))
    truth_track = base_center_truth(sc)
    dwells = detect_dwells(truth_track, 0.05, 5.0)
    table = match_visits(dwells, sc.checkpoints, sc.context, gate_radius=2.0,
                         sequence_id="t", generator_method="truth")
    est_track = apply_lever_arm(sc.estimate, np.zeros(3))
    visits = visits_from_table(table, est_track, sc.checkpoints, sc.context)
    summary, _, _ = summarize(visits, sc.checkpoints)
    em = sc.expected
    assert summary.rmse_absolute == pytest.approx(em.summary.rmse_absolute,
                                                  abs=1e-6)
    assert summary.rmse_aligned == pytest.approx(0.0, abs=1e-6)
    assert summary.gap_rounded == 100


def test_noise_only_gap_stays_small_for_twenty_checkpoints():
    # Calibrated bound: with >= 20 well-spread checkpoints at sigma = 2 cm,
    # alignment can only exploit sampling coincidence, not structure.
    wps, dwells = [], []
    k = 0
    for r in range(4):
        cols = range(5) if r % 2 == 0 else range(4, -1, -1)
        for c in cols:
            k += 1
            wps.append((E0 + 60.0 * c, N0 + 60.0 * r, H0))
            dwells.append((f"CP{k:02d}", 8.0))
    for seed in range(5):
        spec = ScenarioSpec(seed=seed, waypoints=np.array(wps), dwells=dwells,
                            speed=1.5, origin=_origin_at(*wps[0]), zone=32,
                            noise_sigma=0.02)
        em = expected_metrics(generate(spec))
        assert em.summary.n_points == 20
        assert 0.0 <= em.summary.gap_percent < 15.0


def test_calibration_places_imu_relative_to_antenna():
    calib = DeviceCalibration([-0.073, -0.023, -0.172], [0.023, -0.023, 0.090])
    sc = generate(_line_spec(calibration=calib))
    # The local frame anchors at the first antenna fix; with identity
    # orientation the IMU then sits at -t_imu_to_antenna.
    p0 = sc.truth.positions[0]
    assert np.linalg.norm(p0 + calib.t_imu_to_antenna) < 1e-3


def test_spec_round_trips_through_dict():
    spec = _line_spec(noise_sigma=0.01, drift_rate=0.02,
                      outage_windows=[(20.0, 50.0)],
                      global_bias=np.array([0.1, 0.0, -0.05]),
                      calibration=DeviceCalibration.zero())
    again = ScenarioSpec.from_dict(spec.to_dict())
    assert again.to_dict() == spec.to_dict()
    # Round-tripped specs generate identical worlds.
    assert np.array_equal(generate(again).estimate_utm,
                          generate(spec).estimate_utm)


def test_spec_rejects_unknown_prng():
    doc = _line_spec().to_dict()
    doc["prng"] = "mt19937"
    with pytest.raises(InvalidSpec):
        ScenarioSpec.from_dict(doc)


def test_spec_validation_errors():
    with pytest.raises(InvalidSpec):  # outage covering t=0
        generate(_line_spec(outage_windows=[(0.0, 10.0)]))
    with pytest.raises(InvalidSpec):  # unsorted windows
        generate(_line_spec(outage_windows=[(30.0, 40.0), (10.0, 20.0)]))
    with pytest.raises(InvalidSpec):  # overlapping windows
        generate(_line_spec(outage_windows=[(10.0, 30.0), (20.0, 40.0)]))
    with pytest.raises(InvalidSpec):  # origin off the first waypoint
        generate(_line_spec(origin=_origin_at(E0 + 1.0, N0, H0)))
    with pytest.raises(InvalidSpec):  # dwell list length mismatch
        generate(_line_spec(dwells=[("CP01", 8.0), ("CP02", 8.0)]))
    with pytest.raises(InvalidSpec):  # dwelling without an id
        generate(_line_spec(dwells=[("", 8.0), ("CP02", 8.0), ("CP03", 8.0)]))
    with pytest.raises(InvalidSpec):  # one checkpoint, two places
        generate(_line_spec(dwells=[("CP01", 8.0), ("CP02", 8.0), ("CP01", 8.0)]))
    with pytest.raises(InvalidSpec):  # a single waypoint has no duration
        generate(_line_spec(waypoints=np.array([[E0, N0, H0]]),
                            dwells=[("CP01", 8.0)]))
    with pytest.raises(InvalidSpec):
        generate(_line_spec(speed=0.0))
    with pytest.raises(InvalidSpec):
        generate(_line_spec(drift_rate=-0.1))


def test_revisit_same_checkpoint_is_allowed():
    wps = np.array([[E0, N0, H0], [E0 + 30.0, N0, H0], [E0, N0, H0]])
    spec = _line_spec(waypoints=wps,
                      dwells=[("CP01", 6.0), ("", 0.0), ("CP01", 6.0)])
    sc = generate(spec)
    assert [w.checkpoint_id for w in sc.dwell_windows] == ["CP01", "CP01"]
    assert len(sc.checkpoints) == 1
    assert sc.expected.summary.n_points == 2


def test_outage_drift_produces_positive_realized_slope():
    spec = _line_spec(
        waypoints=np.array([[E0 + 90.0 * i, N0, H0] for i in range(5)]),
        dwells=[(f"CP{i+1:02d}", 8.0) for i in range(5)],
        outage_windows=[(30.0, 260.0)], drift_rate=0.02, noise_sigma=0.02)
    em = generate(spec).expected
    assert em.alpha_time_expected is not None
    assert em.alpha_time_expected > 0.0
    assert np.any(em.dt_s > 0.0)
    # Visits inside the outage sit farther from fixes than covered ones.
    assert em.dt_s.max() > 30.0


def test_run_config_bundle_contents(tmp_path):
    cfg = write_scenario(generate(_line_spec(seed=11)), tmp_path,
                         method_label="slam")
    assert cfg["sequence_id"] == "synthetic-seed11"
    assert cfg["methods"] == [{"label": "slam", "trajectory": "estimate.tum"}]
    on_disk = json.loads((tmp_path / "run.json").read_text())
    assert on_disk == cfg
    expected_doc = json.loads((tmp_path / "expected.json").read_text())
    assert expected_doc["n_points"] == 3
    assert "visits" in expected_doc
