"""Satellite passes, link capacities, relay feasibility and inter-satellite chains."""
from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, TextIO, Union

from .channels import DEFAULT_WAVELENGTH_M, EARTH_RADIUS_KM, SatGroundLink, satground_transmittance
from .errors import DomainError, GeometryError, ParseError
from .skr import ProtocolParams, SecurityParams, skr_finite

PASS_HEADER = ("time_s", "elevation_deg")
CAPACITY_HEADER = ("bin_deg", "dwell_s", "skr_bps", "capacity_bits")
MIN_CHORD_ALTITUDE_KM = 20.0
EARTH_MU = 3.986004418e14  # m^3/s^2


@dataclass(frozen=True)
class PassProfile:
    times: tuple[float, ...]
    elevations: tuple[float, ...]
    altitude_km: float = 408.0
    node_id: str = ""

    def __post_init__(self):
        if len(self.times) != len(self.elevations):
            raise DomainError("times and elevations differ in length")
        if len(self.times) < 2:
            raise DomainError("a pass needs at least two samples")
        for i in range(1, len(self.times)):
            if not self.times[i] > self.times[i - 1]:
                raise DomainError(f"times not strictly increasing at sample {i}")
        for e in self.elevations:
            if not 0 < e <= 90:
                raise DomainError(f"elevation {e} outside (0, 90]")

    @property
    def duration(self) -> float:
        return self.times[-1] - self.times[0]

    @property
    def peak_elevation(self) -> float:
        return max(self.elevations)


def load_pass_profile(
    source: Union[str, os.PathLike, TextIO],
    altitude_km: float = 408.0,
    node_id: str = "",
) -> PassProfile:
    """Read a ``time_s,elevation_deg`` CSV from a path or open text stream."""
    if hasattr(source, "read"):
        return _parse_pass(source, altitude_km, node_id)
    with open(source, encoding="utf-8", newline="") as fh:
        return _parse_pass(fh, altitude_km, node_id or os.path.splitext(os.path.basename(source))[0])


def _parse_pass(fh, altitude_km, node_id):
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty pass file", line=1) from None
    if tuple(h.strip() for h in header) != PASS_HEADER:
        raise ParseError(f"expected header {','.join(PASS_HEADER)!r}, got {','.join(header)!r}", line=1)
    times, elevations = [], []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise ParseError(f"expected 2 columns, got {len(row)}", line=line)
        try:
            t, e = float(row[0]), float(row[1])
        except ValueError:
            raise ParseError(f"non-numeric value in {row!r}", line=line) from None
        if not (math.isfinite(t) and math.isfinite(e)):
            raise ParseError("non-finite value", line=line)
        if times and not t > times[-1]:
            raise ParseError(f"time {t} does not increase", line=line)
        if not 0 < e <= 90:
            raise ParseError(f"elevation {e} outside (0, 90]", line=line)
        times.append(t)
        elevations.append(e)
    if len(times) < 2:
        raise ParseError("a pass needs at least two samples", line=reader.line_num)
    return PassProfile(tuple(times), tuple(elevations), altitude_km, node_id)


def format_pass_profile(profile: PassProfile) -> str:
    buf = io.StringIO()
    buf.write(",".join(PASS_HEADER) + "\n")
    for t, e in zip(profile.times, profile.elevations):
        buf.write(f"{t!r},{e!r}\n")
    return buf.getvalue()


def synthetic_pass(
    peak_elevation_deg: float,
    duration_s: Optional[float] = None,
    altitude_km: float = 408.0,
    step_s: float = 1.0,
    horizon_deg: float = 0.5,
    node_id: str = "",
) -> PassProfile:
    """Elevation track of a straight circular-orbit pass, for test fixtures.

    The sub-satellite point moves along a great circle whose closest approach
    to the station gives ``peak_elevation_deg``; the along-track rate is set
    so the pass lasts ``duration_s`` between ``horizon_deg`` crossings. When
    ``duration_s`` is None the circular-orbit Keplerian rate is used. Earth
    rotation is ignored.
    """
    if not horizon_deg < peak_elevation_deg <= 90:
        raise DomainError("peak elevation must exceed the horizon cut and be <= 90")
    rho = EARTH_RADIUS_KM / (EARTH_RADIUS_KM + altitude_km)

    def central(e):
        e = math.radians(e)
        return math.pi / 2 - e - math.asin(rho * math.cos(e))

    def elevation(psi):
        return math.degrees(math.atan2(math.cos(psi) - rho, math.sin(psi)))

    psi_peak = central(peak_elevation_deg)
    psi_edge = central(horizon_deg)
    a_max = math.acos(min(1.0, math.cos(psi_edge) / math.cos(psi_peak)))
    if duration_s is None:
        r = (EARTH_RADIUS_KM + altitude_km) * 1e3
        duration_s = 2 * a_max / math.sqrt(EARTH_MU / r**3)
        duration_s = step_s * math.floor(duration_s / step_s)
    n = int(round(duration_s / step_s))
    times, elevations = [], []
    for i in range(n + 1):
        t = i * step_s
        a = -a_max + 2 * a_max * i / n
        psi = math.acos(math.cos(psi_peak) * math.cos(a))
        e = min(elevation(psi), 90.0)
        times.append(t)
        elevations.append(round(max(e, horizon_deg), 9))
    return PassProfile(tuple(times), tuple(elevations), altitude_km, node_id)


@dataclass(frozen=True)
class ElevationHistogram:
    bin_deg: float
    lower_edges: tuple[float, ...]
    dwell: tuple[float, ...]

    @property
    def centers(self) -> tuple[float, ...]:
        return tuple(min(lo + self.bin_deg / 2, 90.0) for lo in self.lower_edges)

    @property
    def total_dwell(self) -> float:
        return math.fsum(self.dwell)


def discretize_pass(profile: PassProfile, bin_deg: float = 1.0) -> ElevationHistogram:
    """Dwell time per elevation bin.

    Each sampling interval is credited in full to the bin holding the mean of
    its two endpoint elevations. Elevation 90 falls in the last bin below it.
    """
    if not bin_deg > 0:
        raise DomainError("bin width must be > 0")
    last = math.ceil(90 / bin_deg - 1e-12) - 1
    acc: dict[int, float] = {}
    t, e = profile.times, profile.elevations
    for i in range(1, len(t)):
        mid = (e[i - 1] + e[i]) / 2
        k = min(int(math.floor(mid / bin_deg)), last)
        acc[k] = acc.get(k, 0.0) + (t[i] - t[i - 1])
    keys = sorted(acc)
    return ElevationHistogram(bin_deg, tuple(k * bin_deg for k in keys), tuple(acc[k] for k in keys))


def link_capacity_static(skr_bps: float, duration_s: float) -> float:
    """Bits deliverable at ``skr_bps`` for ``duration_s``; zero for unusable links."""
    if duration_s < 0:
        raise DomainError("duration must be >= 0")
    if skr_bps <= 0:
        return 0.0
    return skr_bps * duration_s


@dataclass(frozen=True)
class CapacityResult:
    bin_deg: float
    lower_edges: tuple[float, ...]
    dwell: tuple[float, ...]
    skr: tuple[float, ...]
    capacity: tuple[float, ...]

    @property
    def total(self) -> float:
        return math.fsum(self.capacity)

    @property
    def duration(self) -> float:
        return math.fsum(self.dwell)

    @property
    def usable_fraction(self) -> float:
        usable = math.fsum(d for d, s in zip(self.dwell, self.skr) if s > 0)
        return usable / self.duration if self.duration > 0 else 0.0

    def rows(self):
        return zip(self.lower_edges, self.dwell, self.skr, self.capacity)


def capacity_from_histogram(hist: ElevationHistogram, skr_at: Callable[[float], float]) -> CapacityResult:
    """Capacity of a pass given the SKR (bits/s) as a function of elevation."""
    rates = tuple(float(skr_at(c)) for c in hist.centers)
    caps = tuple(link_capacity_static(r, d) for r, d in zip(rates, hist.dwell))
    return CapacityResult(hist.bin_deg, hist.lower_edges, hist.dwell, rates, caps)


def link_capacity_pass(
    profile: PassProfile,
    link_template: SatGroundLink,
    proto: ProtocolParams,
    sec: SecurityParams,
    bin_deg: float = 1.0,
    wavelength: float = DEFAULT_WAVELENGTH_M,
) -> CapacityResult:
    """Capacity of a satellite-ground link over one pass.

    The template's elevation is replaced by each bin centre and its altitude
    by the pass altitude.
    """
    hist = discretize_pass(profile, bin_deg)
    base = replace(link_template, altitude_km=profile.altitude_km)

    def skr_at(elevation):
        budget = satground_transmittance(replace(base, elevation_deg=elevation), wavelength)
        return skr_finite(proto, sec, budget.transmittance).skr

    return capacity_from_histogram(hist, skr_at)


@dataclass(frozen=True)
class RelayVerdict:
    """Outcome of the two multi-hop capacity conditions.

    ``bottleneck_hops`` lists hops (index > 0) whose capacity does not exceed
    the first hop's; ``undersized_hops`` lists hops not exceeding the key size.
    """

    condition_1: bool
    condition_2: bool
    bottleneck_hops: tuple[int, ...]
    undersized_hops: tuple[int, ...]

    @property
    def feasible(self) -> bool:
        return self.condition_1 and self.condition_2


def check_relay_feasibility(capacities: Sequence[float], key_size: float) -> RelayVerdict:
    """Check both conditions with strict inequalities."""
    if len(capacities) == 0:
        raise DomainError("need at least one link capacity")
    if not key_size > 0:
        raise DomainError("key size must be > 0")
    first = capacities[0]
    bottleneck = tuple(i for i, c in enumerate(capacities) if i > 0 and not c > first)
    undersized = tuple(i for i, c in enumerate(capacities) if not c > key_size)
    return RelayVerdict(not bottleneck, not undersized, bottleneck, undersized)


def chain_central_angle(link_km: float, sat_altitude_km: float) -> float:
    """Central angle (deg) subtended by a straight inter-satellite link."""
    r = EARTH_RADIUS_KM + sat_altitude_km
    if link_km < 0:
        raise DomainError("link distance must be >= 0")
    if link_km > 2 * r:
        raise GeometryError(f"link of {link_km} km is longer than the orbit diameter {2 * r} km")
    return math.degrees(2 * math.asin(min(link_km / (2 * r), 1.0)))


def chain_min_altitude(phi_deg: float, sat_altitude_km: float) -> float:
    """Lowest altitude (km) reached by the chord between two satellites."""
    r = EARTH_RADIUS_KM + sat_altitude_km
    return r * math.cos(math.radians(phi_deg) / 2) - EARTH_RADIUS_KM


@dataclass(frozen=True)
class ChainPlan:
    ground_angle_deg: float
    sat_altitude_km: float
    link_km: float
    phi_deg: float
    links: tuple[int, int]
    satellites: tuple[int, int]
    min_dwell_s: float
    min_chord_altitude_km: float

    @property
    def valid(self) -> bool:
        return self.min_chord_altitude_km >= MIN_CHORD_ALTITUDE_KM


def plan_intersat_chain(
    ground_angle_deg: float,
    sat_altitude_km: float,
    link_km: float,
    required_capacity: float,
    intersat_skr: float,
) -> ChainPlan:
    if not intersat_skr > 0:
        raise DomainError("inter-satellite SKR must be > 0")
    if ground_angle_deg < 0:
        raise DomainError("ground central angle must be >= 0")
    phi = chain_central_angle(link_km, sat_altitude_km)
    if not phi > 0:
        raise GeometryError("link distance must be > 0 to span any angle")
    ratio = ground_angle_deg / phi
    lo, hi = math.floor(ratio), math.ceil(ratio)
    return ChainPlan(
        ground_angle_deg=ground_angle_deg,
        sat_altitude_km=sat_altitude_km,
        link_km=link_km,
        phi_deg=phi,
        links=(lo, hi),
        satellites=(lo + 1, hi + 1),
        min_dwell_s=required_capacity / intersat_skr,
        min_chord_altitude_km=chain_min_altitude(phi, sat_altitude_km),
    )


def ground_central_angle(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle central angle in degrees (atan2 form, stable near 0 and 180)."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dl = math.radians(lon2 - lon1)
    y = math.hypot(
        math.cos(p2) * math.sin(dl),
        math.cos(p1) * math.sin(p2) - math.sin(p1) * math.cos(p2) * math.cos(dl),
    )
    x = math.sin(p1) * math.sin(p2) + math.cos(p1) * math.cos(p2) * math.cos(dl)
    return math.degrees(math.atan2(y, x))
