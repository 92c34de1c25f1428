"""Secret key rates for Gaussian-modulated CVQKD.

All quantities are in shot-noise units (SNU). Rates are per symbol unless a
name ends in ``_bps`` or the docstring says otherwise. Everything here is a
pure function of immutable inputs.

Empirical reconciliation fits
-----------------------------
The reconciliation efficiency fit is tabulated as
``beta = c1**(c2*snr_db) - c3**(c4*snr_db)``. The MLC-MSD row has ``c3 < 0``,
which has no real power for non-integer exponents, so the default
``"signed_power"`` form evaluates each term as ``sign(c) * |c|**exponent``.
Under that reading MLC-MSD clamps to 1 at every SNR. The alternative
``"exponential"`` form, ``c1*exp(c2*snr_db) + c3*exp(c4*snr_db)``, is the
two-term exponential fit shape; with it MD beats MLC-MSD at low SNR, which
is the behaviour reported for these codes. Both results are clamped to
[0, 1] and the raw value is kept.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from .errors import DomainError, NumericalError, PhysicalityError

PHYSICALITY_TOL = 1e-9
HOLEVO_NEG_TOL = 1e-9

DEFAULT_REPETITION_RATE = 50e6


class Detection(str, enum.Enum):
    HOMODYNE = "homodyne"
    HETERODYNE = "heterodyne"


class Reconciliation(str, enum.Enum):
    MD = "MD"
    MLC_MSD = "MLC_MSD"


class BetaForm(str, enum.Enum):
    SIGNED_POWER = "signed_power"
    EXPONENTIAL = "exponential"


# (c1, c2, c3, c4) per reconciliation scheme
BETA_COEFFICIENTS = {
    Reconciliation.MLC_MSD: (0.9655, 1.507e-4, -4.696e-2, -0.2238),
    Reconciliation.MD: (8.250e-2, 0.1834, 0.9821, -2.815e-5),
}

FER_M1 = 0.8218
FER_M2 = -19.46
FER_M3 = -298.1


@dataclass(frozen=True)
class ProtocolParams:
    """Protocol settings.

    ``beta`` is either ``"empirical"`` (SNR-dependent fit for the chosen
    reconciliation scheme) or a fixed efficiency in [0, 1].
    """

    modulation_variance: float = 5.0
    excess_noise: float = 0.03
    detection: Detection = Detection.HETERODYNE
    reconciliation: Reconciliation = Reconciliation.MD
    beta: Union[str, float] = "empirical"
    repetition_rate: float = DEFAULT_REPETITION_RATE
    beta_form: BetaForm = BetaForm.SIGNED_POWER

    def __post_init__(self):
        object.__setattr__(self, "detection", Detection(self.detection))
        object.__setattr__(self, "reconciliation", Reconciliation(self.reconciliation))
        object.__setattr__(self, "beta_form", BetaForm(self.beta_form))
        if not self.modulation_variance > 0:
            raise DomainError(f"modulation variance must be > 0, got {self.modulation_variance}")
        if not self.excess_noise >= 0:
            raise DomainError(f"excess noise must be >= 0, got {self.excess_noise}")
        if not self.repetition_rate > 0:
            raise DomainError(f"repetition rate must be > 0, got {self.repetition_rate}")
        if isinstance(self.beta, str):
            if self.beta != "empirical":
                raise DomainError(f"beta must be 'empirical' or a number, got {self.beta!r}")
        elif not 0.0 <= self.beta <= 1.0:
            raise DomainError(f"fixed beta must lie in [0, 1], got {self.beta}")


@dataclass(frozen=True)
class SecurityParams:
    """Finite-size security parameters (defaults are the usual d=5 set).

    ``estimation_fraction`` is the fraction of symbols reserved for
    parameter estimation. It is carried for bookkeeping only and does not
    enter the key rate.
    """

    discretisation: int = 5
    smoothing: float = 2e-10
    security: float = 1e-9
    block_size: float = 1e11
    estimation_fraction: Optional[float] = None

    def __post_init__(self):
        if self.discretisation < 0:
            raise DomainError("discretisation must be >= 0")
        if not 0 < self.smoothing < 1:
            raise DomainError("smoothing parameter must lie in (0, 1)")
        if not 0 < self.security < 1:
            raise DomainError("security parameter must lie in (0, 1)")
        if not self.block_size >= 1:
            raise DomainError("block size must be >= 1")
        if self.estimation_fraction is not None and not 0 <= self.estimation_fraction < 1:
            raise DomainError("estimation fraction must lie in [0, 1)")


@dataclass(frozen=True)
class CovarianceMatrix:
    """Two-mode covariance ``[[V I, Z sz], [Z sz, W I]]``."""

    V: float
    W: float
    Z: float

    def __post_init__(self):
        if self.V < 1 - PHYSICALITY_TOL or self.W < 1 - PHYSICALITY_TOL:
            raise PhysicalityError(f"variances below shot noise: V={self.V}, W={self.W}")
        if self.V * self.W - self.Z**2 < 1 - PHYSICALITY_TOL:
            raise PhysicalityError(
                f"V*W - Z^2 = {self.V * self.W - self.Z ** 2:.12g} < 1: covariance is not physical"
            )

    def as_matrix(self) -> np.ndarray:
        eye = np.eye(2)
        sz = np.diag([1.0, -1.0])
        return np.block([[self.V * eye, self.Z * sz], [self.Z * sz, self.W * eye]])


class FitValue(NamedTuple):
    value: float
    raw: float
    clamped: bool


@dataclass(frozen=True)
class SkrResult:
    transmittance: float
    snr_linear: float
    snr_db: float
    beta: float
    beta_raw: float
    beta_clamped: bool
    fer: float
    fer_raw: float
    fer_clamped: bool
    mutual_info: float
    holevo: float
    delta_n_privacy: float
    skr_per_symbol: float
    skr: float

    @property
    def positive(self) -> bool:
        return self.skr > 0


def _check_transmittance(T):
    if not 0.0 <= T <= 1.0:
        raise DomainError(f"transmittance must lie in [0, 1], got {T}")


def correlation_coefficient_gm(modulation_variance: float, T: float) -> float:
    """Correlation ``Z = sqrt(T (V_A^2 + 2 V_A))`` for Gaussian modulation."""
    if not modulation_variance > 0:
        raise DomainError(f"modulation variance must be > 0, got {modulation_variance}")
    _check_transmittance(T)
    va = modulation_variance
    return math.sqrt(T * (va * va + 2 * va))


def build_covariance(modulation_variance: float, T: float, excess_noise: float) -> CovarianceMatrix:
    if excess_noise < 0:
        raise DomainError(f"excess noise must be >= 0, got {excess_noise}")
    Z = correlation_coefficient_gm(modulation_variance, T)
    V = modulation_variance + 1
    W = 1 + T * modulation_variance + T * excess_noise
    return CovarianceMatrix(V, W, Z)


def snr_linear(modulation_variance: float, T: float, excess_noise: float) -> float:
    _check_transmittance(T)
    return T * modulation_variance / (2 + T * excess_noise)


def snr_db(modulation_variance: float, T: float, excess_noise: float) -> float:
    """SNR in dB; ``-inf`` when the channel is dead."""
    snr = snr_linear(modulation_variance, T, excess_noise)
    if snr == 0:
        return -math.inf
    return 10 * math.log10(snr)


def mutual_information(snr: float, detection: Detection = Detection.HETERODYNE) -> float:
    if snr < 0:
        raise DomainError(f"SNR must be >= 0, got {snr}")
    het = math.log2(1 + snr)
    return het if Detection(detection) is Detection.HETERODYNE else het / 2


def g_function(x: float) -> float:
    """``(x+1) log2(x+1) - x log2(x)`` with ``g(0) = 0``."""
    if x < 0:
        raise DomainError(f"g(x) needs x >= 0, got {x}")
    if x == 0:
        return 0.0
    return (x + 1) * math.log2(x + 1) - x * math.log2(x)


def symplectic_eigenvalues(cov: CovarianceMatrix) -> tuple[float, float]:
    V, W, Z = cov.V, cov.W, cov.Z
    delta = V * V + W * W - 2 * Z * Z
    det = V * W - Z * Z
    disc = delta * delta - 4 * det * det
    if disc < 0:
        if disc < -PHYSICALITY_TOL * max(1.0, delta * delta):
            raise NumericalError(f"negative discriminant {disc} in symplectic spectrum")
        disc = 0.0
    root = math.sqrt(disc)
    lam1 = math.sqrt((delta + root) / 2)
    lam2 = math.sqrt(max((delta - root) / 2, 0.0))
    return lam1, lam2


def _g_of_eigenvalue(lam):
    x = (lam - 1) / 2
    if x < 0:
        if x < -PHYSICALITY_TOL:
            raise NumericalError(f"symplectic eigenvalue {lam} below 1")
        x = 0.0
    return g_function(x)


def holevo_bound(cov: CovarianceMatrix, detection: Detection = Detection.HETERODYNE) -> float:
    """Holevo information ``S_BE`` between Bob's data and Eve (bits/symbol)."""
    lam1, lam2 = symplectic_eigenvalues(cov)
    V, W, Z = cov.V, cov.W, cov.Z
    if Detection(detection) is Detection.HOMODYNE:
        arg = V * (V - Z * Z / W)
        if arg < 0:
            raise NumericalError(f"conditional variance product {arg} < 0")
        lam3 = math.sqrt(arg)
    else:
        lam3 = V - Z * Z / (W + 1)
    s = _g_of_eigenvalue(lam1) + _g_of_eigenvalue(lam2) - _g_of_eigenvalue(lam3)
    if s < 0:
        if s < -HOLEVO_NEG_TOL:
            raise NumericalError(f"Holevo bound {s} is negative")
        s = 0.0
    return s


def skr_asymptotic(beta: float, mutual_info: float, holevo: float) -> float:
    if not 0 <= beta <= 1:
        raise DomainError(f"beta must lie in [0, 1], got {beta}")
    return beta * mutual_info - holevo


def _clamp01(raw):
    value = min(max(raw, 0.0), 1.0)
    return FitValue(value, raw, value != raw)


def _signed_power(base, exponent):
    try:
        magnitude = abs(base) ** exponent
    except OverflowError:
        magnitude = math.inf
    return math.copysign(magnitude, base)


def beta_empirical(
    snr_db: float,
    scheme: Reconciliation = Reconciliation.MD,
    form: BetaForm = BetaForm.SIGNED_POWER,
) -> FitValue:
    """Empirical reconciliation efficiency at ``snr_db``, clamped to [0, 1]."""
    c1, c2, c3, c4 = BETA_COEFFICIENTS[Reconciliation(scheme)]
    if BetaForm(form) is BetaForm.SIGNED_POWER:
        raw = _signed_power(c1, c2 * snr_db) - _signed_power(c3, c4 * snr_db)
    else:
        with np.errstate(over="ignore"):
            raw = float(c1 * np.exp(c2 * snr_db) + c3 * np.exp(c4 * snr_db))
    if math.isnan(raw):
        raise NumericalError(f"beta fit undefined at snr_db={snr_db}")
    return _clamp01(raw)


def fer_empirical(snr_db: float) -> FitValue:
    """Empirical frame error rate at ``snr_db``, clamped to [0, 1]."""
    raw = 0.5 * (1 + FER_M1 * math.atan(FER_M2 * snr_db + FER_M3))
    return _clamp01(raw)


def delta_n_privacy(sec: SecurityParams) -> float:
    """Finite-size privacy penalty in bits/symbol.

    The last term is kept in its nested form, ``(4 eps_s d / (eps sqrt N)) / sqrt N``;
    it is ~1e-11 at the default parameters.
    """
    d = sec.discretisation
    eps_s = sec.smoothing
    eps = sec.security
    root_n = math.sqrt(sec.block_size)
    return (
        (d + 1) ** 2 / root_n
        + 4 * (d + 1) * math.sqrt(math.log2(2 / eps_s)) / root_n
        + 2 * math.log2(2 / (eps * eps * eps_s)) / root_n
        + (4 * eps_s * d / (eps * root_n)) / root_n
    )


def skr_finite(
    proto: ProtocolParams,
    sec: SecurityParams,
    T: float,
    excess_noise: Optional[float] = None,
) -> SkrResult:
    """Finite-size secret key rate through a channel of transmittance ``T``.

    ``excess_noise`` overrides ``proto.excess_noise`` when given. The rate is
    reported as computed; negative values mean the link cannot produce key.
    """
    xi = proto.excess_noise if excess_noise is None else excess_noise
    va = proto.modulation_variance
    cov = build_covariance(va, T, xi)
    snr = snr_linear(va, T, xi)
    sdb = snr_db(va, T, xi)
    if proto.beta == "empirical":
        beta = beta_empirical(sdb, proto.reconciliation, proto.beta_form)
    else:
        beta = FitValue(float(proto.beta), float(proto.beta), False)
    fer = fer_empirical(sdb)
    info = mutual_information(snr, proto.detection)
    holevo = holevo_bound(cov, proto.detection)
    dn = delta_n_privacy(sec)
    per_symbol = (1 - fer.value) * beta.value * info - holevo - dn
    return SkrResult(
        transmittance=T,
        snr_linear=snr,
        snr_db=sdb,
        beta=beta.value,
        beta_raw=beta.raw,
        beta_clamped=beta.clamped,
        fer=fer.value,
        fer_raw=fer.raw,
        fer_clamped=fer.clamped,
        mutual_info=info,
        holevo=holevo,
        delta_n_privacy=dn,
        skr_per_symbol=per_symbol,
        skr=proto.repetition_rate * per_symbol,
    )
