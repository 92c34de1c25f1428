"""Continuous-variable QKD over heterogeneous links.

Submodules:

- :mod:`cvqkdnet.skr`: finite-size Gaussian-modulated key rates.
- :mod:`cvqkdnet.channels`: fibre, underwater, inter-satellite and
  satellite-ground transmittance models.
- :mod:`cvqkdnet.passes`: pass profiles, link capacities, relay feasibility
  and inter-satellite chains.
- :mod:`cvqkdnet.netgraph`: link classification, capacity snapshots and
  widest-path routing.
- :mod:`cvqkdnet.cli`: scenario-driven command line.
"""
from .errors import (
    ClassificationError,
    CVQKDError,
    DomainError,
    GeometryError,
    ModelValidityWarning,
    NumericalError,
    ParseError,
    PhysicalityError,
    ScenarioError,
    UncoveredLinkError,
    UntrustedRelayError,
)
from .skr import (
    BetaForm,
    Detection,
    ProtocolParams,
    Reconciliation,
    SecurityParams,
    SkrResult,
    beta_empirical,
    delta_n_privacy,
    fer_empirical,
    holevo_bound,
    mutual_information,
    skr_finite,
)
from .channels import (
    BAD_ATMOSPHERE,
    GOOD_ATMOSPHERE,
    Atmosphere,
    Direction,
    FibreLink,
    InterSatelliteLink,
    OpticsParams,
    SatGroundLink,
    UnderwaterLink,
    fibre_transmittance,
    intersat_transmittance,
    satground_transmittance,
    underwater_transmittance,
)
from .passes import (
    PassProfile,
    check_relay_feasibility,
    discretize_pass,
    link_capacity_pass,
    load_pass_profile,
    plan_intersat_chain,
    synthetic_pass,
)
from .netgraph import (
    Link,
    NetworkGraph,
    Node,
    Route,
    WeightedGraph,
    brute_force_widest_path,
    classify_link,
    multi_target_route,
    snapshot_capacities,
    widest_path,
)

__version__ = "0.1.0"
