import io
import math
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvqkdnet.channels import OpticsParams, SatGroundLink, satground_transmittance
from cvqkdnet.errors import DomainError, GeometryError, ParseError
from cvqkdnet.passes import (
    PassProfile,
    capacity_from_histogram,
    chain_central_angle,
    chain_min_altitude,
    check_relay_feasibility,
    discretize_pass,
    format_pass_profile,
    ground_central_angle,
    link_capacity_pass,
    link_capacity_static,
    load_pass_profile,
    plan_intersat_chain,
    synthetic_pass,
)
from cvqkdnet.skr import ProtocolParams, SecurityParams, skr_finite

FIXTURES = Path(__file__).parent / "fixtures"


def dwell_oracle(times, elevations, bin_deg):
    """Histogram of interval lengths keyed by the bin of each interval midpoint."""
    t = np.asarray(times)
    e = np.asarray(elevations)
    mids = (e[1:] + e[:-1]) / 2
    nbins = int(math.ceil(90 / bin_deg - 1e-12))
    idx = np.minimum(np.floor(mids / bin_deg).astype(int), nbins - 1)
    return np.bincount(idx, weights=np.diff(t), minlength=nbins)


profiles = st.lists(
    st.tuples(st.floats(0.01, 30), st.floats(0.01, 90)), min_size=2, max_size=60
).map(
    lambda pts: PassProfile(
        tuple(np.cumsum([p[0] for p in pts]).tolist()), tuple(p[1] for p in pts)
    )
)


# -- pass files ------------------------------------------------------------


def test_pass_round_trip():
    p = synthetic_pass(60, 300)
    q = load_pass_profile(io.StringIO(format_pass_profile(p)))
    assert q.times == p.times and q.elevations == p.elevations


@pytest.mark.parametrize(
    "text, line",
    [
        ("", 1),
        ("t,e\n0,10\n", 1),
        ("time_s,elevation_deg\n0,10\n1,abc\n", 3),
        ("time_s,elevation_deg\n0,10\n0,11\n", 3),
        ("time_s,elevation_deg\n0,10\n1,95\n", 3),
        ("time_s,elevation_deg\n0,10\n1,2,3\n", 3),
        ("time_s,elevation_deg\n0,10\n", 2),
    ],
)
def test_pass_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as exc:
        load_pass_profile(io.StringIO(text))
    assert exc.value.line == line
    assert str(exc.value).startswith(f"line {line}:")


def test_fixture_passes_parse():
    for f in sorted((FIXTURES / "passes").glob("*.csv")):
        p = load_pass_profile(f)
        assert p.duration > 0
        assert p.node_id == f.stem


def test_iss_fixture_shape():
    p = load_pass_profile(FIXTURES / "passes" / "iss_downlink.csv")
    assert p.duration == 663
    assert p.peak_elevation == pytest.approx(87.6, abs=0.1)


def test_synthetic_pass_keplerian_duration():
    p = synthetic_pass(87.6)
    assert 590 <= p.duration <= 610
    assert p.peak_elevation == pytest.approx(87.6, abs=0.1)
    with pytest.raises(DomainError):
        synthetic_pass(0.2)


# -- discretisation --------------------------------------------------------


@settings(max_examples=200)
@given(profiles, st.sampled_from([0.5, 1.0, 2.0, 7.0]))
def test_discretisation_matches_oracle(profile, bin_deg):
    hist = discretize_pass(profile, bin_deg)
    oracle = dwell_oracle(profile.times, profile.elevations, bin_deg)
    got = np.zeros_like(oracle)
    for lo, d in zip(hist.lower_edges, hist.dwell):
        got[int(round(lo / bin_deg))] = d
    np.testing.assert_allclose(got, oracle, rtol=1e-12, atol=1e-9)


@given(profiles)
def test_dwell_conserved(profile):
    assert discretize_pass(profile).total_dwell == pytest.approx(profile.duration, rel=1e-12)


def test_zenith_goes_to_last_bin():
    hist = discretize_pass(PassProfile((0.0, 1.0), (90.0, 90.0)))
    assert hist.lower_edges == (89.0,)
    assert hist.centers == (89.5,)


# -- capacity --------------------------------------------------------------


def test_static_capacity():
    assert link_capacity_static(1e6, 2.5) == 2.5e6
    assert link_capacity_static(-5.0, 100) == 0.0
    with pytest.raises(DomainError):
        link_capacity_static(1.0, -1)


@given(profiles, st.floats(1, 1e9))
def test_constant_skr_capacity(profile, rate):
    res = capacity_from_histogram(discretize_pass(profile), lambda e: rate)
    assert res.total == pytest.approx(rate * profile.duration, rel=1e-12)
    assert res.usable_fraction == pytest.approx(1.0)


def test_capacity_monotone_in_dwell():
    p = synthetic_pass(70, 400)
    longer = PassProfile(p.times + (p.times[-1] + 100,), p.elevations + (p.elevations[-1],))
    rate = lambda e: e * 1e3
    assert capacity_from_histogram(discretize_pass(longer), rate).total >= capacity_from_histogram(
        discretize_pass(p), rate
    ).total


DOWNLINK = SatGroundLink(90, OpticsParams(0.3, 1.0), 408, 1.029)


def test_low_elevation_pass_has_zero_capacity():
    p = PassProfile(tuple(float(t) for t in range(100)), tuple(5.0 + 0.05 * t for t in range(100)))
    res = link_capacity_pass(p, DOWNLINK, ProtocolParams(), SecurityParams())
    assert res.total == 0
    assert res.usable_fraction == 0


def test_pass_capacity_matches_composed_oracle():
    p = load_pass_profile(FIXTURES / "passes" / "iss_downlink.csv")
    proto, sec = ProtocolParams(), SecurityParams()
    res = link_capacity_pass(p, DOWNLINK, proto, sec)
    expected = 0.0
    for center, d in zip(discretize_pass(p).centers, discretize_pass(p).dwell):
        link = SatGroundLink(center, DOWNLINK.optics, 408, 1.029)
        rate = skr_finite(proto, sec, satground_transmittance(link).transmittance).skr
        expected += max(rate, 0.0) * d
    assert res.total == pytest.approx(expected, rel=1e-12)
    assert res.total > 0


def test_pass_capacity_deterministic():
    p = load_pass_profile(FIXTURES / "passes" / "iss_downlink.csv")
    a = link_capacity_pass(p, DOWNLINK, ProtocolParams(), SecurityParams())
    b = link_capacity_pass(p, DOWNLINK, ProtocolParams(), SecurityParams())
    assert a == b


# -- relay feasibility -----------------------------------------------------


def test_relay_conditions():
    caps = [3.71e6, 61.53e6, 121.25e6]
    ok = check_relay_feasibility(caps, 3.70e6)
    assert ok.feasible
    bad = check_relay_feasibility(caps, 3.72e6)
    assert bad.condition_1 and not bad.condition_2
    assert bad.undersized_hops == (0,)


def test_relay_strict_inequalities():
    v = check_relay_feasibility([5.0, 5.0], 4.0)
    assert not v.condition_1 and v.bottleneck_hops == (1,)
    assert not check_relay_feasibility([5.0], 5.0).condition_2


@given(st.lists(st.floats(1, 1e9), min_size=1, max_size=8), st.floats(1, 1e9))
def test_relay_verdict_definition(caps, key):
    v = check_relay_feasibility(caps, key)
    assert v.condition_1 == all(c > caps[0] for c in caps[1:])
    assert v.condition_2 == all(c > key for c in caps)


def test_relay_validation():
    with pytest.raises(DomainError):
        check_relay_feasibility([], 1.0)
    with pytest.raises(DomainError):
        check_relay_feasibility([1.0], 0)


# -- inter-satellite chains ------------------------------------------------


def test_chain_angle():
    assert chain_central_angle(1000, 408) == pytest.approx(8.459633641, abs=1e-9)
    assert chain_min_altitude(8.459633641, 408) == pytest.approx(389.5355557, abs=1e-6)


@given(st.floats(1, 5000), st.floats(300, 2000))
def test_chain_angle_chord_oracle(link_km, alt):
    r = 6371 + alt
    phi = math.radians(chain_central_angle(link_km, alt))
    assert 2 * r * math.sin(phi / 2) == pytest.approx(link_km, rel=1e-10)


def test_chain_geometry_error():
    with pytest.raises(GeometryError):
        chain_central_angle(20000, 408)


@pytest.mark.parametrize(
    "angle, links, sats",
    [(83, (9, 10), (10, 11)), (158, (18, 19), (19, 20)), (5, (0, 1), (1, 2))],
)
def test_chain_counts(angle, links, sats):
    plan = plan_intersat_chain(angle, 408, 1000, 3.71e6, 3000e6)
    assert plan.links == links
    assert plan.satellites == sats
    assert plan.valid


def test_chain_dwell_and_floor():
    plan = plan_intersat_chain(83, 408, 1000, 3.71e6, 3000e6)
    assert plan.min_dwell_s == pytest.approx(1.236667e-3, rel=1e-6)
    low = plan_intersat_chain(83, 408, 4700, 3.71e6, 3000e6)
    assert low.min_chord_altitude_km < 20 and not low.valid


def test_ground_central_angle():
    madrid, goldstone, canberra = (40.4314, -4.2481), (35.4267, -116.89), (-35.4014, 148.9817)
    assert ground_central_angle(*madrid, *goldstone) == pytest.approx(82.1169483, abs=1e-6)
    assert ground_central_angle(*madrid, *canberra) == pytest.approx(158.38019, abs=1e-5)
    assert ground_central_angle(0, 0, 0, 180) == pytest.approx(180)
    assert ground_central_angle(10, 20, 10, 20) == 0


@given(st.floats(-90, 90), st.floats(-180, 180), st.floats(-90, 90), st.floats(-180, 180))
def test_ground_angle_haversine_oracle(a, b, c, d):
    p1, p2, dl = math.radians(a), math.radians(c), math.radians(d - b)
    h = math.sin((p2 - p1) / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    oracle = math.degrees(2 * math.asin(min(1.0, math.sqrt(h))))
    assert ground_central_angle(a, b, c, d) == pytest.approx(oracle, abs=1e-6)


def test_chain_is_fast():
    start = time.perf_counter()
    chain_central_angle(1000, 408)
    assert time.perf_counter() - start < 1e-3
