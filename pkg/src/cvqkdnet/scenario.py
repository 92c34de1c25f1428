"""Scenario documents: JSON schema, presets and conversion to model objects.

A scenario is one JSON object. Every section is optional; each command
checks that the sections it needs are present. Relative file paths are
resolved against the directory holding the scenario file.

Sweep units per channel type: fibre km, underwater m, inter-satellite km,
satellite-ground elevation in degrees (or zenith altitude in km when
``sweep_variable`` is ``"altitude"``).
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace
from typing import Any, Optional, Union

import jsonschema

from .channels import (
    ATMOSPHERE_PRESETS,
    DEFAULT_WAVELENGTH_M,
    WATER_PRESETS,
    Atmosphere,
    Cn2Profile,
    FibreLink,
    InterSatelliteLink,
    OpticsParams,
    SatGroundLink,
    fibre_transmittance,
    intersat_transmittance,
    satground_transmittance,
    underwater_transmittance,
)
from .errors import CVQKDError, ScenarioError
from .netgraph import CapacityProfile, Link, NetworkGraph, Node
from .passes import PassProfile, ground_central_angle, link_capacity_pass, load_pass_profile
from .skr import ProtocolParams, SecurityParams

WATER_PRESET_PREFIX = "table5_"

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_FRACTION = {"type": "number", "exclusiveMinimum": 0, "maximum": 1}
_WINDOW = {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}

_ATMOSPHERE = {
    "oneOf": [
        {"type": "string", "enum": sorted(ATMOSPHERE_PRESETS)},
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["visibility_km"],
            "properties": {
                "visibility_km": _POSITIVE,
                "cn2": _NONNEG,
                "cn2_profile": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"wind_speed": _NONNEG, "ground_cn2": _NONNEG},
                },
            },
            "not": {"required": ["cn2", "cn2_profile"]},
        },
    ]
}

_SATGROUND = {
    "type": "object",
    "additionalProperties": False,
    "required": ["optics"],
    "properties": {
        "type": {"const": "satellite_ground"},
        "direction": {"enum": ["uplink", "downlink"]},
        "elevation_deg": {"type": "number", "exclusiveMinimum": 0, "maximum": 90},
        "altitude_km": _POSITIVE,
        "ogs_altitude_km": _NONNEG,
        "atmosphere_km": _POSITIVE,
        "atmosphere": _ATMOSPHERE,
        "aperture_model": {"enum": ["literal", "standard"]},
        "wavelength_m": _POSITIVE,
        "sweep_variable": {"enum": ["elevation", "altitude"]},
        "optics": {
            "type": "object",
            "additionalProperties": False,
            "required": ["tx_diameter", "rx_diameter"],
            "properties": {
                "tx_diameter": _POSITIVE,
                "rx_diameter": _POSITIVE,
                "tx_efficiency": _FRACTION,
                "rx_efficiency": _FRACTION,
                "pointing_loss": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "outage_probability": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
        },
    },
}

_CHANNEL = {
    "type": "object",
    "required": ["type"],
    "properties": {"type": {"enum": ["fibre", "underwater", "inter_satellite", "satellite_ground"]}},
    "allOf": [
        {
            "if": {"properties": {"type": {"const": "fibre"}}},
            "then": {
                "additionalProperties": False,
                "properties": {"type": True, "attenuation_exponent": _POSITIVE},
            },
        },
        {
            "if": {"properties": {"type": {"const": "underwater"}}},
            "then": {
                "additionalProperties": False,
                "properties": {
                    "type": True,
                    "water": {"enum": sorted(WATER_PRESET_PREFIX + k for k in WATER_PRESETS)},
                    "extinction_per_m": _POSITIVE,
                },
                "oneOf": [{"required": ["water"]}, {"required": ["extinction_per_m"]}],
            },
        },
        {
            "if": {"properties": {"type": {"const": "inter_satellite"}}},
            "then": {
                "additionalProperties": False,
                "properties": {
                    "type": True,
                    "receiver_radius": _POSITIVE,
                    "beam_waist": _POSITIVE,
                    "wavelength_m": _POSITIVE,
                },
            },
        },
        {"if": {"properties": {"type": {"const": "satellite_ground"}}}, "then": _SATGROUND},
    ],
}

_CAPACITY_PROFILE = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "rate_bps": _NONNEG,
        "windows": {
            "type": "array",
            "items": {"type": "array", "items": _NUMBER, "minItems": 3, "maxItems": 3},
        },
        "coverage": _WINDOW,
        "pass": {
            "type": "object",
            "additionalProperties": False,
            "required": ["pass_file", "link"],
            "properties": {
                "pass_file": {"type": "string"},
                "start_s": _NUMBER,
                "altitude_km": _POSITIVE,
                "bin_deg": _POSITIVE,
                "link": _SATGROUND,
            },
        },
    },
    "oneOf": [
        {"required": ["rate_bps"], "not": {"anyOf": [{"required": ["windows"]}, {"required": ["pass"]}]}},
        {"required": ["windows"], "not": {"anyOf": [{"required": ["rate_bps"]}, {"required": ["pass"]}]}},
        {"required": ["pass"], "not": {"anyOf": [{"required": ["rate_bps"]}, {"required": ["windows"]}]}},
    ],
}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "description": {"type": "string"},
        "protocol": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "modulation_variance": _POSITIVE,
                "excess_noise": _NONNEG,
                "detection": {"enum": ["homodyne", "heterodyne"]},
                "reconciliation": {"enum": ["MD", "MLC_MSD"]},
                "beta": {"oneOf": [{"const": "empirical"}, {"type": "number", "minimum": 0, "maximum": 1}]},
                "beta_form": {"enum": ["signed_power", "exponential"]},
                "repetition_rate": _POSITIVE,
            },
        },
        "security": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "discretisation": {"type": "integer", "minimum": 0},
                "smoothing": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "security": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "block_size": {"type": "number", "minimum": 1},
                "estimation_fraction": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
            },
        },
        "channel": _CHANNEL,
        "sweep": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["values"],
                    "properties": {"values": {"type": "array", "items": _NUMBER}},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["start", "stop", "step"],
                    "properties": {"start": _NUMBER, "stop": _NUMBER, "step": _POSITIVE},
                },
            ]
        },
        "capacity": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "pass_file": {"type": "string"},
                "altitude_km": _POSITIVE,
                "bin_deg": _POSITIVE,
            },
        },
        "chain": {
            "type": "object",
            "additionalProperties": False,
            "required": ["link_km", "required_capacity_bits", "intersat_skr_bps"],
            "properties": {
                "ground_angle_deg": {"type": "number", "minimum": 0, "maximum": 180},
                "endpoints": {
                    "type": "array",
                    "minItems": 2,
                    "maxItems": 2,
                    "items": {
                        "type": "array",
                        "minItems": 2,
                        "maxItems": 2,
                        "items": _NUMBER,
                    },
                },
                "sat_altitude_km": _POSITIVE,
                "link_km": _POSITIVE,
                "required_capacity_bits": _POSITIVE,
                "intersat_skr_bps": _POSITIVE,
            },
            "oneOf": [{"required": ["ground_angle_deg"]}, {"required": ["endpoints"]}],
        },
        "graph": {
            "type": "object",
            "additionalProperties": False,
            "required": ["nodes", "links"],
            "properties": {
                "nodes": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["id", "kind"],
                        "properties": {
                            "id": {"type": "string", "pattern": "^[^,;>\\s]+$"},
                            "kind": {"enum": ["OGS", "satellite", "submarine", "HAP"]},
                            "trusted": {"type": "boolean"},
                            "position": {"type": "array", "items": _NUMBER, "minItems": 3, "maxItems": 3},
                            "trajectory": {
                                "type": "array",
                                "items": {"type": "array", "items": _NUMBER, "minItems": 4, "maxItems": 4},
                            },
                        },
                    },
                },
                "links": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["id", "a", "b"],
                        "properties": {
                            "id": {"type": "string", "minLength": 1},
                            "a": {"type": "string"},
                            "b": {"type": "string"},
                            "family": {
                                "enum": [
                                    "fibre",
                                    "satellite_ground",
                                    "submarine_ground",
                                    "satellite_submarine",
                                    "inter_satellite",
                                    "inter_submarine",
                                ]
                            },
                            "static_constellation": {"type": "boolean"},
                            "capacity": _CAPACITY_PROFILE,
                            "reverse_capacity": _CAPACITY_PROFILE,
                        },
                    },
                },
            },
        },
        "route": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "window": _WINDOW,
                "targets": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                "key_size_bits": _POSITIVE,
                "objective": {"enum": ["capacity", "hops"]},
            },
        },
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def validate_document(doc: Any) -> None:
    """Raise :class:`ScenarioError` naming the field path of the first violation."""
    best = jsonschema.exceptions.best_match(_VALIDATOR.iter_errors(doc))
    if best is not None:
        raise ScenarioError(best.message, _path(best.absolute_path))


# --------------------------------------------------------------------------
# Model objects


@dataclass(frozen=True)
class ChannelSpec:
    """A link template plus the field a sweep value replaces.

    ``transmittance(x)`` evaluates the channel at sweep value ``x``.
    """

    kind: str
    link: Any
    wavelength: float = DEFAULT_WAVELENGTH_M
    sweep_variable: str = "distance"

    def transmittance(self, x: float) -> float:
        if self.kind == "fibre":
            return fibre_transmittance(replace(self.link, length_km=x))
        if self.kind == "underwater":
            return underwater_transmittance(self.link, x)
        if self.kind == "inter_satellite":
            return intersat_transmittance(replace(self.link, distance_m=x * 1e3))
        field = "altitude_km" if self.sweep_variable == "altitude" else "elevation_deg"
        return satground_transmittance(replace(self.link, **{field: x}), self.wavelength).transmittance


@dataclass(frozen=True)
class ChainOptions:
    ground_angle_deg: float
    sat_altitude_km: float
    link_km: float
    required_capacity_bits: float
    intersat_skr_bps: float


@dataclass(frozen=True)
class RouteOptions:
    window: tuple[float, float] = (0.0, 1.0)
    targets: tuple[str, ...] = ()
    key_size_bits: Optional[float] = None
    objective: str = "capacity"


@dataclass(frozen=True)
class Scenario:
    protocol: ProtocolParams
    security: SecurityParams
    channel: Optional[ChannelSpec] = None
    sweep: Optional[tuple[float, ...]] = None
    pass_file: Optional[str] = None
    pass_altitude_km: Optional[float] = None
    bin_deg: float = 1.0
    chain: Optional[ChainOptions] = None
    graph: Optional[NetworkGraph] = None
    route: RouteOptions = RouteOptions()


def sweep_values(spec: dict) -> tuple[float, ...]:
    """Grid from ``{"values": [...]}`` or an inclusive ``start/stop/step`` range."""
    if "values" in spec:
        return tuple(float(v) for v in spec["values"])
    start, stop, step = float(spec["start"]), float(spec["stop"]), float(spec["step"])
    if stop < start:
        return ()
    n = int(math.floor((stop - start) / step + 1e-9))
    return tuple(start + i * step for i in range(n + 1))


def build_atmosphere(spec: Union[str, dict]) -> Atmosphere:
    if isinstance(spec, str):
        return ATMOSPHERE_PRESETS[spec]
    if "cn2_profile" in spec:
        return Atmosphere(spec["visibility_km"], Cn2Profile(**spec["cn2_profile"]))
    return Atmosphere(spec["visibility_km"], spec.get("cn2", 1e-16))


def build_satground(spec: dict) -> tuple[SatGroundLink, float]:
    """Satellite-ground link template and wavelength from a channel entry."""
    link = SatGroundLink(
        elevation_deg=spec.get("elevation_deg", 90.0),
        optics=OpticsParams(**spec["optics"]),
        altitude_km=spec.get("altitude_km", 408.0),
        ogs_altitude_km=spec.get("ogs_altitude_km", 0.0),
        direction=spec.get("direction", "downlink"),
        atmosphere=build_atmosphere(spec.get("atmosphere", "good_atmosphere")),
        aperture_model=spec.get("aperture_model", "literal"),
        atmosphere_km=spec.get("atmosphere_km", 20.0),
    )
    return link, spec.get("wavelength_m", DEFAULT_WAVELENGTH_M)


def build_channel(spec: dict) -> ChannelSpec:
    kind = spec["type"]
    if kind == "fibre":
        return ChannelSpec(kind, FibreLink(0.0, spec.get("attenuation_exponent", 0.02)))
    if kind == "underwater":
        if "water" in spec:
            c = WATER_PRESETS[spec["water"][len(WATER_PRESET_PREFIX):]].extinction
        else:
            c = spec["extinction_per_m"]
        return ChannelSpec(kind, c)
    if kind == "inter_satellite":
        wl = spec.get("wavelength_m", DEFAULT_WAVELENGTH_M)
        link = InterSatelliteLink(1.0, spec.get("receiver_radius", 0.2), spec.get("beam_waist", 0.2), wl)
        return ChannelSpec(kind, link, wl)
    link, wl = build_satground(spec)
    variable = spec.get("sweep_variable", "elevation")
    return ChannelSpec(kind, link, wl, variable)


def _resolve(base_dir: str, path: str, where: str) -> str:
    full = path if os.path.isabs(path) else os.path.join(base_dir, path)
    if not os.path.isfile(full):
        raise ScenarioError(f"file not found: {path}", where)
    return full


def _capacity_profile(spec, where, base_dir, proto, sec) -> CapacityProfile:
    if "rate_bps" in spec:
        return CapacityProfile(rate_bps=float(spec["rate_bps"]), coverage=_window(spec.get("coverage")))
    if "windows" in spec:
        windows = tuple(tuple(float(x) for x in w) for w in spec["windows"])
        for i, (w0, w1, bits) in enumerate(windows):
            if w1 < w0 or bits < 0:
                raise ScenarioError("window needs end >= start and bits >= 0", f"{where}.windows[{i}]")
        return CapacityProfile(windows=windows, coverage=_window(spec.get("coverage")))
    p = spec["pass"]
    full = _resolve(base_dir, p["pass_file"], f"{where}.pass.pass_file")
    profile = load_pass_profile(full, p.get("altitude_km", 408.0))
    link, wl = build_satground(p["link"])
    total = link_capacity_pass(profile, link, proto, sec, p.get("bin_deg", 1.0), wl).total
    start = float(p.get("start_s", 0.0))
    return CapacityProfile(windows=((start, start + profile.duration, total),))


def _window(w):
    return None if w is None else (float(w[0]), float(w[1]))


def build_graph(spec: dict, base_dir: str, proto, sec) -> NetworkGraph:
    nodes = []
    for i, n in enumerate(spec["nodes"]):
        where = f"graph.nodes[{i}]"
        try:
            nodes.append(
                Node(
                    id=n["id"],
                    kind=n["kind"],
                    trusted=n.get("trusted", True),
                    position=tuple(n["position"]) if "position" in n else None,
                    trajectory=tuple(tuple(s) for s in n.get("trajectory", ())),
                )
            )
        except CVQKDError as exc:
            raise ScenarioError(str(exc), where) from None
    links = []
    for i, l in enumerate(spec["links"]):
        where = f"graph.links[{i}]"
        cap = rev = None
        if "capacity" in l:
            cap = _capacity_profile(l["capacity"], where + ".capacity", base_dir, proto, sec)
        if "reverse_capacity" in l:
            rev = _capacity_profile(l["reverse_capacity"], where + ".reverse_capacity", base_dir, proto, sec)
        links.append(Link(l["id"], l["a"], l["b"], l.get("family"), cap, rev, l.get("static_constellation", False)))
    try:
        return NetworkGraph(tuple(nodes), tuple(links))
    except CVQKDError as exc:
        raise ScenarioError(str(exc), "graph") from None


def build_chain(spec: dict) -> ChainOptions:
    if "endpoints" in spec:
        (lat1, lon1), (lat2, lon2) = spec["endpoints"]
        angle = ground_central_angle(lat1, lon1, lat2, lon2)
    else:
        angle = float(spec["ground_angle_deg"])
    return ChainOptions(
        ground_angle_deg=angle,
        sat_altitude_km=spec.get("sat_altitude_km", 408.0),
        link_km=spec["link_km"],
        required_capacity_bits=spec["required_capacity_bits"],
        intersat_skr_bps=spec["intersat_skr_bps"],
    )


def _section(name, fn, *args):
    try:
        return fn(*args)
    except ScenarioError:
        raise
    except CVQKDError as exc:
        raise ScenarioError(str(exc), name) from None


def parse_scenario(doc: Any, base_dir: str = ".") -> Scenario:
    """Validate ``doc`` and build the model objects it describes."""
    validate_document(doc)
    proto = _section("protocol", lambda: ProtocolParams(**doc.get("protocol", {})))
    sec = _section("security", lambda: SecurityParams(**doc.get("security", {})))
    channel = _section("channel", build_channel, doc["channel"]) if "channel" in doc else None
    sweep = sweep_values(doc["sweep"]) if "sweep" in doc else None
    cap = doc.get("capacity", {})
    pass_file = _resolve(base_dir, cap["pass_file"], "capacity.pass_file") if "pass_file" in cap else None
    chain = _section("chain", build_chain, doc["chain"]) if "chain" in doc else None
    graph = build_graph(doc["graph"], base_dir, proto, sec) if "graph" in doc else None
    r = doc.get("route", {})
    window = _window(r.get("window", (0.0, 1.0)))
    if window[1] < window[0]:
        raise ScenarioError("window end precedes its start", "route.window")
    route = RouteOptions(
        window=window,
        targets=tuple(r.get("targets", ())),
        key_size_bits=r.get("key_size_bits"),
        objective=r.get("objective", "capacity"),
    )
    if graph is not None:
        ids = {n.id for n in graph.nodes}
        for i, t in enumerate(route.targets):
            if t not in ids:
                raise ScenarioError(f"unknown node {t!r}", f"route.targets[{i}]")
    return Scenario(
        protocol=proto,
        security=sec,
        channel=channel,
        sweep=sweep,
        pass_file=pass_file,
        pass_altitude_km=cap.get("altitude_km"),
        bin_deg=cap.get("bin_deg", 1.0),
        chain=chain,
        graph=graph,
        route=route,
    )


def load_scenario(path: str) -> Scenario:
    """Read, validate and build a scenario file."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_scenario(doc, os.path.dirname(os.path.abspath(path)))


def pass_profile(scenario: Scenario, override: Optional[str] = None) -> PassProfile:
    path = override or scenario.pass_file
    if path is None:
        raise ScenarioError("no pass file given", "capacity.pass_file")
    if override is not None and not os.path.isfile(override):
        raise ScenarioError(f"file not found: {override}", "--pass")
    return load_pass_profile(path, scenario.pass_altitude_km or 408.0)
