"""Transmittance and loss budgets for fibre, underwater and free-space links.

Units follow the usual link-budget conventions: distances along fibre and
satellite geometry in km, underwater path length in m, optical quantities
(apertures, wavelengths, beam radii) in m unless a name says ``_nm``.
Losses are positive dB; ``T = 10**(-A/10)``.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
from scipy.special import erfinv

from .errors import DomainError, GeometryError, ModelValidityWarning, NumericalError

EARTH_RADIUS_KM = 6371.0
ATMOSPHERE_THICKNESS_KM = 20.0
DEFAULT_WAVELENGTH_M = 1550e-9

TEN_LOG10_E = 10 * math.log10(math.e)


def combine_transmittances(attenuations: Sequence[float]) -> float:
    """Overall transmittance of cascaded losses, each given as ``P_T / P_R >= 1``."""
    T = 1.0
    for a in attenuations:
        if not a >= 1:
            raise DomainError(f"attenuation ratio must be >= 1, got {a}")
        T /= a
    return T


def db_to_transmittance(loss_db: float) -> float:
    return 10 ** (-loss_db / 10)


# --------------------------------------------------------------------------
# Fibre


@dataclass(frozen=True)
class FibreLink:
    """Standard fibre. ``attenuation_exponent`` is the per-km exponent of ten,
    so ``T = 10**(-attenuation_exponent * length_km)``.
    """

    length_km: float
    attenuation_exponent: float = 0.02

    def __post_init__(self):
        if self.length_km < 0:
            raise DomainError("fibre length must be >= 0")
        if not self.attenuation_exponent > 0:
            raise DomainError("attenuation exponent must be > 0")


def fibre_transmittance(link: FibreLink) -> float:
    return 10 ** (-link.attenuation_exponent * link.length_km)


# --------------------------------------------------------------------------
# Underwater


@dataclass(frozen=True)
class WaterType:
    name: str
    absorption: float
    scattering: float
    extinction: float


# Coefficients at 520 nm, m^-1. Extinction is tabulated, not recomputed.
WATER_PRESETS = {
    "pure_sea_water": WaterType("pure_sea_water", 0.0405, 0.0025, 0.043),
    "clear_ocean_water": WaterType("clear_ocean_water", 0.114, 0.037, 0.151),
    "coastal_ocean_water": WaterType("coastal_ocean_water", 0.179, 0.219, 0.398),
    "turbid_harbour_water": WaterType("turbid_harbour_water", 0.366, 1.824, 2.190),
}


@dataclass(frozen=True)
class Extinction:
    absorption: float
    scattering: float

    @property
    def total(self) -> float:
        return self.absorption + self.scattering


def underwater_extinction(
    wavelength_nm: float,
    chlorophyll: float,
    water_absorption: float,
    chlorophyll_absorption: float,
) -> Extinction:
    """Beam extinction from chlorophyll concentration (mg/m^3).

    ``water_absorption`` and ``chlorophyll_absorption`` are the pure-water and
    chlorophyll-specific absorption coefficients at ``wavelength_nm``; the
    caller supplies them from tabulated data.
    """
    if chlorophyll < 0:
        raise DomainError("chlorophyll concentration must be >= 0")
    if water_absorption < 0 or chlorophyll_absorption < 0:
        raise DomainError("absorption coefficients must be >= 0")
    if not 400 <= wavelength_nm <= 700:
        warnings.warn(
            f"underwater model used at {wavelength_nm} nm, outside 400-700 nm",
            ModelValidityWarning,
            stacklevel=2,
        )
    a = (water_absorption + 0.06 * chlorophyll_absorption * chlorophyll**0.65) * (
        1 + 0.2 * math.exp(-0.014 * (wavelength_nm - 440))
    )
    b = 0.3 * (550 / wavelength_nm) * chlorophyll**0.62
    return Extinction(a, b)


@dataclass(frozen=True)
class UnderwaterLink:
    length_m: float
    extinction: float

    def __post_init__(self):
        if self.length_m < 0:
            raise DomainError("underwater path length must be >= 0")
        if not self.extinction > 0:
            raise DomainError("extinction coefficient must be > 0")

    @classmethod
    def from_preset(cls, length_m: float, water: str) -> "UnderwaterLink":
        try:
            preset = WATER_PRESETS[water]
        except KeyError:
            raise DomainError(f"unknown water type {water!r}") from None
        return cls(length_m, preset.extinction)


def underwater_transmittance(extinction: float, length_m: float) -> float:
    """Beer-Lambert attenuation ``exp(-c z)``."""
    if not extinction > 0:
        raise DomainError("extinction coefficient must be > 0")
    if length_m < 0:
        raise DomainError("path length must be >= 0")
    return math.exp(-extinction * length_m)


# --------------------------------------------------------------------------
# Inter-satellite


@dataclass(frozen=True)
class InterSatelliteLink:
    distance_m: float
    receiver_radius: float = 0.2
    beam_waist: float = 0.2
    wavelength: float = DEFAULT_WAVELENGTH_M

    def __post_init__(self):
        if self.distance_m < 0:
            raise DomainError("link distance must be >= 0")
        if not (self.receiver_radius > 0 and self.beam_waist > 0 and self.wavelength > 0):
            raise DomainError("aperture, waist and wavelength must be > 0")


def beam_radius(beam_waist: float, wavelength: float, z: float) -> float:
    """Gaussian beam radius after propagating ``z`` metres."""
    if not (beam_waist > 0 and wavelength > 0) or z < 0:
        raise DomainError("beam radius needs w0 > 0, wavelength > 0, z >= 0")
    zr_ratio = wavelength * z / (math.pi * beam_waist**2)
    return beam_waist * math.sqrt(1 + zr_ratio**2)


def intersat_transmittance(link: InterSatelliteLink) -> float:
    """Diffraction-limited capture fraction with perfect pointing."""
    w = beam_radius(link.beam_waist, link.wavelength, link.distance_m)
    return -math.expm1(-2 * link.receiver_radius**2 / w**2)


# --------------------------------------------------------------------------
# Satellite-ground geometry


def _slant_distance(theta_deg, upper_km, ogs_km):
    if not 0 < theta_deg <= 90:
        raise GeometryError(f"elevation must lie in (0, 90] degrees, got {theta_deg}")
    r_up = EARTH_RADIUS_KM + upper_km
    r_ogs = EARTH_RADIUS_KM + ogs_km
    if r_up <= r_ogs:
        raise GeometryError("upper altitude must exceed the ground station altitude")
    theta = math.radians(theta_deg)
    s = math.cos(theta) * r_ogs / r_up
    if s > 1:
        raise GeometryError(f"arcsin argument {s} > 1")
    # central angle between the ground station and the upper point
    alpha = math.pi / 2 - theta - math.asin(s)
    # law of cosines, written with sin^2(alpha/2) to avoid cancellation
    sq = (r_up - r_ogs) ** 2 + 4 * r_up * r_ogs * math.sin(alpha / 2) ** 2
    return math.sqrt(sq)


def slant_total_distance(theta_deg: float, altitude_km: float, ogs_altitude_km: float) -> float:
    """Ground-station-to-satellite distance in km at elevation ``theta_deg``."""
    return _slant_distance(theta_deg, altitude_km, ogs_altitude_km)


def effective_atmosphere(
    theta_deg: float,
    ogs_altitude_km: float,
    atmosphere_km: float = ATMOSPHERE_THICKNESS_KM,
) -> float:
    """Path length in km through the bottom ``atmosphere_km`` of atmosphere."""
    return _slant_distance(theta_deg, atmosphere_km, ogs_altitude_km)


# --------------------------------------------------------------------------
# Satellite-ground losses


@dataclass(frozen=True)
class OpticsParams:
    tx_diameter: float
    rx_diameter: float
    tx_efficiency: float = 1.0
    rx_efficiency: float = 1.0
    pointing_loss: float = 0.1
    outage_probability: float = 1e-3

    def __post_init__(self):
        if not (self.tx_diameter > 0 and self.rx_diameter > 0):
            raise DomainError("aperture diameters must be > 0")
        for name in ("tx_efficiency", "rx_efficiency"):
            if not 0 < getattr(self, name) <= 1:
                raise DomainError(f"{name} must lie in (0, 1]")
        if not 0 <= self.pointing_loss < 1:
            raise DomainError("pointing loss must lie in [0, 1)")
        if not 0 < self.outage_probability < 1:
            raise DomainError("outage probability must lie in (0, 1)")


@dataclass(frozen=True)
class Cn2Profile:
    """Altitude-dependent turbulence with wind speed (m/s) and ground-level C_n^2."""

    wind_speed: float = 21.0
    ground_cn2: float = 1.7e-14

    def __call__(self, h):
        return cn2_profile(h, self.wind_speed, self.ground_cn2)


@dataclass(frozen=True)
class Atmosphere:
    """Visibility in km and either a constant C_n^2 or a :class:`Cn2Profile`."""

    visibility_km: float
    cn2: Union[float, Cn2Profile] = 1e-16

    def __post_init__(self):
        if not self.visibility_km > 0:
            raise DomainError("visibility must be > 0")
        if not isinstance(self.cn2, Cn2Profile) and self.cn2 < 0:
            raise DomainError("C_n^2 must be >= 0")


GOOD_ATMOSPHERE = Atmosphere(visibility_km=200.0, cn2=1e-16)
BAD_ATMOSPHERE = Atmosphere(visibility_km=20.0, cn2=1e-12)
ATMOSPHERE_PRESETS = {"good_atmosphere": GOOD_ATMOSPHERE, "bad_atmosphere": BAD_ATMOSPHERE}


class Direction(str, enum.Enum):
    UPLINK = "uplink"
    DOWNLINK = "downlink"


class ApertureModel(str, enum.Enum):
    """How the aperture-averaging parameter of the scintillation index is built.

    ``LITERAL``: ``D_r * (pi / (2 L))**2`` with L the atmospheric path in m.
    ``STANDARD``: ``sqrt(k D_r**2 / (4 L))``.
    """

    LITERAL = "literal"
    STANDARD = "standard"


@dataclass(frozen=True)
class SatGroundLink:
    elevation_deg: float
    optics: OpticsParams
    altitude_km: float = 408.0
    ogs_altitude_km: float = 0.0
    direction: Direction = Direction.DOWNLINK
    atmosphere: Atmosphere = GOOD_ATMOSPHERE
    aperture_model: ApertureModel = ApertureModel.LITERAL
    atmosphere_km: float = ATMOSPHERE_THICKNESS_KM

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        object.__setattr__(self, "aperture_model", ApertureModel(self.aperture_model))
        if not 0 < self.elevation_deg <= 90:
            raise GeometryError(f"elevation must lie in (0, 90], got {self.elevation_deg}")
        if not self.altitude_km > self.atmosphere_km > self.ogs_altitude_km >= 0:
            raise GeometryError("need satellite altitude > atmosphere thickness > OGS altitude >= 0")


def geometric_loss_db(slant_km: float, wavelength: float, optics: OpticsParams) -> float:
    """Diffraction-limited far-field geometric loss including pointing loss."""
    if not (slant_km > 0 and wavelength > 0):
        raise DomainError("distance and wavelength must be > 0")
    L = slant_km * 1e3
    dt, dr = optics.tx_diameter, optics.rx_diameter
    if not L > dt * dr / wavelength:
        warnings.warn(
            f"receiver at {L:.3g} m is not in the far field (needs > {dt * dr / wavelength:.3g} m)",
            ModelValidityWarning,
            stacklevel=2,
        )
    ratio = (L * wavelength) ** 2 / (dt * dr) ** 2
    eff = optics.tx_efficiency * (1 - optics.pointing_loss) * optics.rx_efficiency
    return 10 * math.log10(ratio / eff)


def _mie_exponent(v):
    if v >= 50:
        return 1.6
    if v >= 6:
        return 1.3
    if v >= 1:
        return 0.16 * v + 0.34
    if v >= 0.5:
        return v - 0.5
    return 0.0


def mie_scattering_db_per_km(visibility_km: float, wavelength_nm: float) -> float:
    """Kruse-Kim aerosol scattering rate in dB/km."""
    if not visibility_km > 0:
        raise DomainError("visibility must be > 0")
    p = _mie_exponent(visibility_km)
    return TEN_LOG10_E * (3.912 / visibility_km) * (wavelength_nm / 550) ** (-p)


def cn2_profile(h, wind_speed: float = 21.0, ground_cn2: float = 1.7e-14):
    """Refractive-index structure parameter at altitude ``h`` metres (m^-2/3).

    Accepts scalars or numpy arrays.
    """
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise DomainError("altitude must be >= 0")
    out = (
        0.00594 * (wind_speed / 27) ** 2 * (h * 1e-5) ** 10 * np.exp(-h / 1000)
        + 2.7e-16 * np.exp(-h / 1500)
        + ground_cn2 * np.exp(-h / 100)
    )
    return float(out) if out.ndim == 0 else out


def simpson(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
            rtol: float = 1e-8, max_intervals: int = 2**20) -> float:
    """Composite Simpson rule, halving the step until the relative change < rtol."""
    if b == a:
        return 0.0
    n = 2
    prev = None
    while True:
        x = np.linspace(a, b, n + 1)
        y = f(x)
        h = (b - a) / n
        est = h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())
        if prev is not None:
            scale = max(abs(est), abs(prev))
            if scale == 0 or abs(est - prev) <= rtol * scale:
                return float(est)
        if n >= max_intervals:
            raise NumericalError(f"Simpson integration did not converge within {max_intervals} intervals")
        prev = est
        n *= 2


def rytov_variance_constant(cn2: float, path_m: float, wavelength: float) -> float:
    """Closed-form Rytov variance for uniform turbulence."""
    k = 2 * math.pi / wavelength
    return 2.25 * k ** (7 / 6) * cn2 * (6 / 11) * path_m ** (11 / 6)


def rytov_variance(
    atmosphere: Atmosphere,
    theta_deg: float,
    ogs_altitude_km: float,
    wavelength: float = DEFAULT_WAVELENGTH_M,
    atmosphere_km: float = ATMOSPHERE_THICKNESS_KM,
) -> float:
    """Rytov variance along the atmospheric part of a slant path.

    The integral runs over path position z in [0, L]; the weight
    ``(L - z)**(5/6)`` has an unbounded derivative at z = L, so it is
    evaluated after substituting ``L - z = t**6``, which makes the integrand
    smooth and lets Simpson converge quickly.
    """
    L = effective_atmosphere(theta_deg, ogs_altitude_km, atmosphere_km) * 1e3
    k = 2 * math.pi / wavelength
    cn2 = atmosphere.cn2
    if isinstance(cn2, Cn2Profile):
        h0 = ogs_altitude_km * 1e3
        sin_t = math.sin(math.radians(theta_deg))

        def cn2_at(z):
            return cn2(h0 + z * sin_t)
    else:
        if cn2 == 0:
            return 0.0

        def cn2_at(z):
            return np.full_like(z, cn2)

    def integrand(t):
        # dz = -6 t^5 dt, (L - z)^(5/6) = t^5
        return 6 * cn2_at(L - t**6) * t**10

    integral = simpson(integrand, 0.0, L ** (1 / 6))
    return 2.25 * k ** (7 / 6) * integral


def aperture_parameter(rx_diameter: float, wavelength: float, path_m: float,
                       model: ApertureModel = ApertureModel.LITERAL) -> float:
    if ApertureModel(model) is ApertureModel.LITERAL:
        return rx_diameter * (math.pi / (2 * path_m)) ** 2
    k = 2 * math.pi / wavelength
    return math.sqrt(k * rx_diameter**2 / (4 * path_m))


def scintillation_index(rytov: float, aperture: float) -> float:
    """Spherical-wave scintillation index for an aperture parameter ``aperture``."""
    if rytov < 0:
        raise DomainError("Rytov variance must be >= 0")
    s65 = rytov ** (6 / 5)
    d2 = aperture * aperture
    first = 0.20 * rytov / (1 + 0.18 * d2 + 0.20 * s65) ** (7 / 6)
    second = 0.21 * rytov * (1 + 0.24 * s65) ** (-5 / 6) / (1 + 0.90 * d2 + 0.21 * d2 * s65)
    return math.expm1(first + second)


def uplink_scintillation_index(sigma_i_downlink: float) -> float:
    """Uplink correction: +0.2 on the (unsquared) scintillation index."""
    if sigma_i_downlink < 0:
        raise DomainError("scintillation index must be >= 0")
    return sigma_i_downlink + 0.2


def scintillation_loss_db(sigma_i2: float, outage_probability: float) -> float:
    """Scintillation fade margin as a positive loss in dB.

    The fade level ``4.343 (erfinv(2 p - 1) sqrt(2 ln(s+1)) - ln(s+1)/2)`` is
    negative for small outage probabilities; its negation is returned so that
    larger is worse. Above p ~ 0.5 the result turns negative and is passed on
    unchanged.
    """
    if sigma_i2 < 0:
        raise DomainError("scintillation index must be >= 0")
    if not 0 < outage_probability < 1:
        raise DomainError("outage probability must lie strictly in (0, 1)")
    ln1 = math.log1p(sigma_i2)
    fade = 4.343 * (erfinv(2 * outage_probability - 1) * math.sqrt(2 * ln1) - 0.5 * ln1)
    return -float(fade)


@dataclass(frozen=True)
class LinkBudget:
    slant_km: float
    atmosphere_path_km: float
    geometric_db: float
    scattering_db: float
    scintillation_db: float
    rytov_variance: float
    scintillation_index: float
    transmittance: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "transmittance", db_to_transmittance(self.total_db))

    @property
    def total_db(self) -> float:
        return self.geometric_db + self.scattering_db + self.scintillation_db


def satground_transmittance(link: SatGroundLink, wavelength: float = DEFAULT_WAVELENGTH_M) -> LinkBudget:
    """Loss budget of a satellite-ground link at one elevation."""
    theta = link.elevation_deg
    slant = slant_total_distance(theta, link.altitude_km, link.ogs_altitude_km)
    atm_path = effective_atmosphere(theta, link.ogs_altitude_km, link.atmosphere_km)
    geo = geometric_loss_db(slant, wavelength, link.optics)
    scat = mie_scattering_db_per_km(link.atmosphere.visibility_km, wavelength * 1e9) * atm_path
    rytov = rytov_variance(link.atmosphere, theta, link.ogs_altitude_km, wavelength, link.atmosphere_km)
    d = aperture_parameter(link.optics.rx_diameter, wavelength, atm_path * 1e3, link.aperture_model)
    si2 = scintillation_index(rytov, d)
    if link.direction is Direction.UPLINK:
        si2 = uplink_scintillation_index(math.sqrt(si2)) ** 2
    sci = scintillation_loss_db(si2, link.optics.outage_probability)
    budget = LinkBudget(slant, atm_path, geo, scat, sci, rytov, si2)
    if budget.transmittance > 1:
        raise DomainError(f"net gain of {-budget.total_db:.3g} dB: inputs are not physical")
    return budget

