"""Geodesy checks against independently computed fixtures plus round-trip laws.

Fixture values were produced by tests/oracles.py: closed-form ECEF at 50-digit
precision and an exact transverse Mercator evaluated by complex analytic
continuation of the meridian arc (no shared series with the implementation).
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geotraj.errors import NonConvergence, OutOfDomain
from geotraj.geodesy import (
    GRS80,
    EcefCoord,
    EnuCoord,
    EnuOrigin,
    GeoContext,
    GeodeticCoord,
    UtmCoord,
    ecef_to_geodetic,
    enu_to_geodetic,
    geodetic_to_ecef,
    geodetic_to_enu,
    geodetic_to_utm,
    utm_to_geodetic,
)

# (lat_deg, lon_deg, h) -> oracle ECEF
ECEF_FIXTURES = [
    ((48.78, 9.18, 300.0),
     (4157130.9639913747, 671819.2006405438, 4774698.067404641)),
    ((0.0, 0.0, 0.0), (6378137.0, 0.0, 0.0)),
    ((90.0, 0.0, 0.0), (0.0, 0.0, 6356752.314140356)),
    ((-33.9, 151.2, 45.0),
     (-4643978.757979997, 2553048.926883906, -3537270.4463365623)),
]

# (lat_deg, lon_deg, zone) -> oracle (easting, northing)
UTM_FIXTURES = [
    ((48.78, 9.18, 32), (513223.5393526722, 5403015.518032496)),
    ((48.0, 12.0, 32), (723775.9153988118, 5320655.789069564)),
    ((0.0, 9.0, 32), (500000.0, 0.0)),
    ((60.0, 7.5, 32), (416338.25311737566, 6652359.681804846)),
]


@pytest.mark.parametrize("geodetic,expected", ECEF_FIXTURES)
def test_ecef_oracle_fixtures(geodetic, expected):
    got = geodetic_to_ecef(GeodeticCoord.from_degrees(*geodetic))
    err = math.dist((got.x, got.y, got.z), expected)
    assert err < 1e-6


@pytest.mark.parametrize("point,expected", UTM_FIXTURES)
def test_utm_oracle_fixtures(point, expected):
    lat, lon, zone = point
    got = geodetic_to_utm(GeodeticCoord.from_degrees(lat, lon, 0.0), zone)
    assert abs(got.easting - expected[0]) < 1e-6
    assert abs(got.northing - expected[1]) < 1e-6


def test_utm_inverse_oracle_fixture():
    g = utm_to_geodetic(UtmCoord(513223.5393526722, 5403015.518032496, 0.0, 32))
    assert abs(g.lat_deg - 48.78) < 1e-11
    assert abs(g.lon_deg - 9.18) < 1e-11


def test_southern_hemisphere_false_northing():
    g = GeodeticCoord.from_degrees(-33.9, 151.2, 0.0)
    u = geodetic_to_utm(g, 56)
    assert u.hemisphere == "south"
    assert 0.0 < u.northing < 10_000_000.0
    back = utm_to_geodetic(u)
    assert abs(back.lat_deg - -33.9) < 1e-11
    assert abs(back.lon_deg - 151.2) < 1e-11


geo_lat = st.floats(min_value=-89.9, max_value=89.9)
geo_lon = st.floats(min_value=-180.0, max_value=180.0)
geo_h = st.floats(min_value=-10_000.0, max_value=10_000.0)


@given(lat=geo_lat, lon=geo_lon, h=geo_h)
@settings(max_examples=300, deadline=None)
def test_ecef_round_trip(lat, lon, h):
    g = GeodeticCoord.from_degrees(lat, lon, h)
    e = geodetic_to_ecef(g)
    g2 = ecef_to_geodetic(e)
    e2 = geodetic_to_ecef(g2)
    assert math.dist((e.x, e.y, e.z), (e2.x, e2.y, e2.z)) < 1e-6


@given(lat=st.floats(min_value=-83.9, max_value=83.9),
       lon=st.floats(min_value=5.51, max_value=12.49),
       h=geo_h)
@settings(max_examples=300, deadline=None)
def test_utm_round_trip_in_zone(lat, lon, h):
    g = GeodeticCoord.from_degrees(lat, lon, h)
    u = geodetic_to_utm(g, 32)
    g2 = utm_to_geodetic(u)
    e1 = geodetic_to_ecef(g)
    e2 = geodetic_to_ecef(g2)
    assert math.dist((e1.x, e1.y, e1.z), (e2.x, e2.y, e2.z)) < 1e-6


@given(lat=st.floats(min_value=-83.9, max_value=83.9))
@settings(max_examples=200, deadline=None)
def test_central_meridian_maps_to_false_easting(lat):
    u = geodetic_to_utm(GeodeticCoord.from_degrees(lat, 9.0, 0.0), 32)
    assert abs(u.easting - 500_000.0) < 1e-4


enu_coord = st.floats(min_value=-5_000.0, max_value=5_000.0)


@given(e=enu_coord, n=enu_coord, u=st.floats(min_value=-500.0, max_value=500.0))
@settings(max_examples=200, deadline=None)
def test_enu_round_trip(e, n, u):
    origin = EnuOrigin(GeodeticCoord.from_degrees(48.78, 9.18, 300.0))
    p = EnuCoord(e, n, u)
    g = enu_to_geodetic(p, origin)
    p2 = geodetic_to_enu(g, origin)
    err = math.dist((p.e, p.n, p.u), (p2.e, p2.n, p2.u))
    # Absolute bound set by the ECEF->geodetic iteration tolerance.
    assert err <= 1e-8


@given(e1=enu_coord, n1=enu_coord, e2=enu_coord, n2=enu_coord,
       u1=st.floats(min_value=-500.0, max_value=500.0),
       u2=st.floats(min_value=-500.0, max_value=500.0))
@settings(max_examples=200, deadline=None)
def test_enu_is_isometric_with_ecef(e1, n1, u1, e2, n2, u2):
    """The tangent frame is a rigid transform of ECEF: distances match."""
    origin = EnuOrigin(GeodeticCoord.from_degrees(-20.0, 57.5, 120.0))
    pa, pb = EnuCoord(e1, n1, u1), EnuCoord(e2, n2, u2)
    ga, gb = enu_to_geodetic(pa, origin), enu_to_geodetic(pb, origin)
    ea, eb = geodetic_to_ecef(ga), geodetic_to_ecef(gb)
    d_enu = math.dist((pa.e, pa.n, pa.u), (pb.e, pb.n, pb.u))
    d_ecef = math.dist((ea.x, ea.y, ea.z), (eb.x, eb.y, eb.z))
    # Each enu_to_geodetic call runs the iterative ECEF->geodetic inverse,
    # so both endpoints carry its absolute tolerance (1e-8, as in the
    # round-trip test) on top of the exact rotation.
    assert abs(d_enu - d_ecef) <= 1e-8 + 1e-9 * d_enu


def test_enu_origin_maps_to_zero():
    origin = EnuOrigin(GeodeticCoord.from_degrees(48.78, 9.18, 300.0))
    p = geodetic_to_enu(origin.origin, origin)
    assert math.hypot(p.e, p.n, p.u) < 1e-9


def test_enu_axes_point_where_named():
    origin = EnuOrigin(GeodeticCoord.from_degrees(47.0, 9.0, 0.0))
    north = enu_to_geodetic(EnuCoord(0.0, 100.0, 0.0), origin)
    east = enu_to_geodetic(EnuCoord(100.0, 0.0, 0.0), origin)
    up = enu_to_geodetic(EnuCoord(0.0, 0.0, 100.0), origin)
    assert north.lat > origin.origin.lat
    assert abs(north.lon - origin.origin.lon) < 1e-9
    assert east.lon > origin.origin.lon
    assert abs(up.h - 100.0) < 1e-6
    assert abs(up.lat - origin.origin.lat) < 1e-12


def test_utm_rejects_polar_latitude():
    with pytest.raises(OutOfDomain):
        geodetic_to_utm(GeodeticCoord.from_degrees(85.0, 9.0, 0.0), 32)


def test_utm_rejects_far_out_of_zone():
    with pytest.raises(OutOfDomain):
        geodetic_to_utm(GeodeticCoord.from_degrees(48.0, 19.5, 0.0), 32)


def test_utm_warns_moderately_out_of_zone(caplog):
    with caplog.at_level("WARNING", logger="geotraj.geodesy"):
        geodetic_to_utm(GeodeticCoord.from_degrees(48.0, 14.0, 0.0), 32)
    assert any("central meridian" in rec.message for rec in caplog.records)


def test_ecef_near_geocenter_raises():
    with pytest.raises(NonConvergence):
        ecef_to_geodetic(EcefCoord(0.1, 0.1, 0.1))


def test_polar_ecef_round_trip():
    g = GeodeticCoord.from_degrees(90.0, 0.0, 50.0)
    e = geodetic_to_ecef(g)
    g2 = ecef_to_geodetic(e)
    assert abs(g2.lat_deg - 90.0) < 1e-9
    assert abs(g2.h - 50.0) < 1e-6


def test_longitude_wraps_into_principal_range():
    g = GeodeticCoord.from_degrees(10.0, 200.0, 0.0)
    assert abs(g.lon_deg - -160.0) < 1e-12


def test_invalid_coordinate_inputs_rejected():
    with pytest.raises(ValueError):
        GeodeticCoord.from_degrees(91.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        GeodeticCoord(float("nan"), 0.0, 0.0)
    with pytest.raises(ValueError):
        UtmCoord(500000.0, 0.0, 0.0, zone=0)
    with pytest.raises(ValueError):
        UtmCoord(500000.0, 0.0, 0.0, zone=32, hemisphere="equator")
    with pytest.raises(ValueError):
        UtmCoord(-1.0, 0.0, 0.0, zone=32)


def test_context_batch_matches_scalar():
    ctx = GeoContext(EnuOrigin(GeodeticCoord.from_degrees(48.78, 9.18, 300.0)), zone=32)
    rng = np.random.default_rng(7)
    pts = rng.uniform(-2000.0, 2000.0, size=(40, 3))
    batch = ctx.enu_to_utm_batch(pts)
    for row, p in zip(batch, pts):
        u = ctx.enu_to_utm(EnuCoord(*p))
        assert math.dist(row, (u.easting, u.northing, u.height)) < 1e-9
    back = ctx.utm_to_enu_batch(batch)
    assert np.max(np.linalg.norm(back - pts, axis=1)) < 1e-8


def test_grs80_derived_quantities():
    assert abs(GRS80.b - 6356752.314140356) < 1e-6
    assert abs(GRS80.e2 - 0.006694380022900787) < 1e-17
