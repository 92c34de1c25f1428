"""Command-line driver: ``cvqkdnet {skr,capacity,chain,route} --scenario FILE``.

Every command writes comma-separated tables. The primary table goes to
``--out`` (or stdout); commands with a summary print it to stdout, after a
blank line when the primary table is on stdout too. :func:`read_tables`
parses that layout back.

Numbers carry 9 significant digits: ``%.9g`` in general and ``%.8e`` when
``0 < |x| < 1e-4``. Booleans print as ``true``/``false``.

Exit codes: 0 success, 2 invalid input, 3 computation error, 4 route
infeasible or unreachable.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import (
    CVQKDError,
    ParseError,
    ScenarioError,
    UncoveredLinkError,
    UntrustedRelayError,
)
from .netgraph import multi_target_route, snapshot_capacities
from .passes import CAPACITY_HEADER, link_capacity_pass, plan_intersat_chain
from .scenario import Scenario, load_scenario, pass_profile
from .skr import skr_finite

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_COMPUTATION = 3
EXIT_INFEASIBLE = 4

SKR_HEADER = ("x", "transmittance", "snr_db", "beta", "fer", "skr_bps")
CAPACITY_SUMMARY_HEADER = ("total_bits", "usable_fraction")
CHAIN_HEADER = ("field", "value")
HOP_HEADER = ("hop", "from", "to", "capacity_bits")
ROUTE_SUMMARY_HEADER = (
    "route",
    "reachable",
    "hops",
    "bottleneck_bits",
    "key_size_bits",
    "condition_1",
    "condition_2",
    "feasible",
    "bottleneck_hops",
    "undersized_hops",
)
ROUTE_SEPARATOR = ">"


def fmt(x) -> str:
    """Format a value for CSV output."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    if abs(x) < 1e-4:
        return f"{x:.8e}"
    return f"{x:.9g}"


def format_table(header: Sequence[str], rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def parse_value(text: str):
    """Inverse of :func:`fmt` for numbers and booleans; other text is returned as-is."""
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return float(text)
    except ValueError:
        return text


def read_tables(text: str) -> list[tuple[tuple[str, ...], list[tuple]]]:
    """Split CLI output into ``(header, rows)`` tables separated by blank lines."""
    tables = []
    for block in text.replace("\r\n", "\n").split("\n\n"):
        lines = [l for l in block.split("\n") if l]
        if not lines:
            continue
        header = tuple(lines[0].split(","))
        rows = []
        for n, line in enumerate(lines[1:], start=2):
            cells = line.split(",")
            if len(cells) != len(header):
                raise ParseError(f"expected {len(header)} columns, got {len(cells)}", line=n)
            rows.append(tuple(parse_value(c) for c in cells))
        tables.append((header, rows))
    return tables


# --------------------------------------------------------------------------
# Commands


@dataclass(frozen=True)
class CommandOutput:
    table: str
    summary: Optional[str] = None
    code: int = EXIT_OK
    message: Optional[str] = None


def cmd_skr(scenario: Scenario):
    if scenario.channel is None:
        raise ScenarioError("the skr command needs a channel section", "channel")
    if scenario.sweep is None:
        raise ScenarioError("the skr command needs a sweep section", "sweep")
    rows = []
    for x in scenario.sweep:
        T = scenario.channel.transmittance(x)
        r = skr_finite(scenario.protocol, scenario.security, T)
        rows.append((x, T, r.snr_db, r.beta, r.fer, r.skr))
    return CommandOutput(format_table(SKR_HEADER, rows))


def cmd_capacity(scenario: Scenario, pass_file: Optional[str] = None):
    ch = scenario.channel
    if ch is None or ch.kind != "satellite_ground":
        raise ScenarioError("the capacity command needs a satellite_ground channel", "channel")
    profile = pass_profile(scenario, pass_file)
    result = link_capacity_pass(profile, ch.link, scenario.protocol, scenario.security, scenario.bin_deg, ch.wavelength)
    table = format_table(CAPACITY_HEADER, result.rows())
    summary = format_table(CAPACITY_SUMMARY_HEADER, [(result.total, result.usable_fraction)])
    return CommandOutput(table, summary)


def cmd_chain(scenario: Scenario):
    c = scenario.chain
    if c is None:
        raise ScenarioError("the chain command needs a chain section", "chain")
    plan = plan_intersat_chain(
        c.ground_angle_deg, c.sat_altitude_km, c.link_km, c.required_capacity_bits, c.intersat_skr_bps
    )
    rows = [
        ("ground_angle_deg", plan.ground_angle_deg),
        ("sat_altitude_km", plan.sat_altitude_km),
        ("link_km", plan.link_km),
        ("phi_deg", plan.phi_deg),
        ("links_min", plan.links[0]),
        ("links_max", plan.links[1]),
        ("satellites_min", plan.satellites[0]),
        ("satellites_max", plan.satellites[1]),
        ("min_dwell_s", plan.min_dwell_s),
        ("min_chord_altitude_km", plan.min_chord_altitude_km),
        ("valid", plan.valid),
    ]
    return CommandOutput(format_table(CHAIN_HEADER, rows))


def cmd_route(scenario: Scenario, targets: Optional[Sequence[str]] = None, key_size: Optional[float] = None):
    if scenario.graph is None:
        raise ScenarioError("the route command needs a graph section", "graph")
    opts = scenario.route
    targets = tuple(targets) if targets else opts.targets
    key_size = key_size if key_size is not None else opts.key_size_bits
    if len(targets) == 0:
        raise ScenarioError("no route targets given", "route.targets")
    ids = {n.id for n in scenario.graph.nodes}
    for t in targets:
        if t not in ids:
            raise ScenarioError(f"unknown node {t!r}", "route.targets")
    if key_size is None or not key_size > 0:
        raise ScenarioError("a positive key size is required", "route.key_size_bits")
    wg = snapshot_capacities(scenario.graph, *opts.window)
    route = multi_target_route(wg, targets, key_size, opts.objective)
    hops = [(i, u, v, c) for i, (u, v, c) in enumerate(zip(route.nodes, route.nodes[1:], route.hop_capacities))]
    v = route.verdict
    summary_row = (
        ROUTE_SEPARATOR.join(route.nodes),
        route.reachable,
        route.hops,
        route.bottleneck,
        key_size,
        route.reachable and (v is None or v.condition_1),
        route.reachable and (v is None or v.condition_2),
        route.feasible,
        ";".join(str(i) for i in v.bottleneck_hops) if v else "",
        ";".join(str(i) for i in v.undersized_hops) if v else "",
    )
    message = None
    if not route.reachable:
        a, b = route.unreachable_segment
        message = f"unreachable: no route from {a} to {b}"
    elif not route.feasible:
        failed = [name for name, ok in (("condition 1", v.condition_1), ("condition 2", v.condition_2)) if not ok]
        message = "infeasible: " + " and ".join(failed) + " not met"
    return CommandOutput(
        format_table(HOP_HEADER, hops),
        format_table(ROUTE_SUMMARY_HEADER, [summary_row]),
        EXIT_OK if route.feasible else EXIT_INFEASIBLE,
        message,
    )


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, help="scenario JSON file")
    common.add_argument("--out", help="write the primary table here instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized fixtures (commands are deterministic)")

    parser = argparse.ArgumentParser(prog="cvqkdnet", description="CV-QKD link and network calculator")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("skr", parents=[common], help="finite-size key rate over a distance or elevation sweep")
    p = sub.add_parser("capacity", parents=[common], help="link capacity of a satellite pass")
    p.add_argument("--pass", dest="pass_file", help="pass CSV (overrides capacity.pass_file)")
    sub.add_parser("chain", parents=[common], help="inter-satellite relay chain plan")
    p = sub.add_parser("route", parents=[common], help="widest-path key route through the network graph")
    p.add_argument("--targets", help="comma-separated node ids (overrides route.targets)")
    p.add_argument("--key-size", type=float, help="key size in bits (overrides route.key_size_bits)")
    return parser


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
    except (CVQKDError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_VALIDATION
    try:
        if args.command == "skr":
            result = cmd_skr(scenario)
        elif args.command == "capacity":
            result = cmd_capacity(scenario, args.pass_file)
        elif args.command == "chain":
            result = cmd_chain(scenario)
        else:
            targets = args.targets.split(",") if args.targets else None
            result = cmd_route(scenario, targets, args.key_size)
    except (ScenarioError, ParseError, UncoveredLinkError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_VALIDATION
    except UntrustedRelayError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INFEASIBLE
    except (CVQKDError, ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_COMPUTATION

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(result.table)
        if result.summary is not None:
            stdout.write(result.summary)
    else:
        stdout.write(result.table)
        if result.summary is not None:
            stdout.write("\n" + result.summary)
    if result.message:
        print(result.message, file=stderr)
    return result.code


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(run(argv))


__all__ = ["run", "main", "fmt", "read_tables", "cmd_skr", "cmd_capacity", "cmd_chain", "cmd_route"]
