"""Dynamic CVQKD network graph and key-distribution routing.

Links carry capacity profiles (bits over time). A snapshot over a time window
turns the network into a directed weighted graph whose arc weights are link
capacities; routing then maximises the bottleneck capacity between nodes.
All relays are trusted nodes: a route may end at an untrusted node but never
pass through one.
"""
from __future__ import annotations

import enum
import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .errors import ClassificationError, DomainError, UncoveredLinkError, UntrustedRelayError
from .passes import RelayVerdict, check_relay_feasibility

BRUTE_FORCE_MAX_NODES = 10


class NodeKind(str, enum.Enum):
    OGS = "OGS"
    SATELLITE = "satellite"
    SUBMARINE = "submarine"
    HAP = "HAP"

    @property
    def moving(self) -> bool:
        return self is not NodeKind.OGS


class LinkFamily(str, enum.Enum):
    FIBRE = "fibre"
    SATELLITE_GROUND = "satellite_ground"
    SUBMARINE_GROUND = "submarine_ground"
    SATELLITE_SUBMARINE = "satellite_submarine"
    INTER_SATELLITE = "inter_satellite"
    INTER_SUBMARINE = "inter_submarine"


class Geometry(str, enum.Enum):
    STATIONARY_STATIONARY = "stationary-stationary"
    STATIONARY_MOVING = "stationary-moving"
    MOVING_MOVING = "moving-moving"


@dataclass(frozen=True)
class Classification:
    family: LinkFamily
    geometry: Geometry
    dynamic: bool
    uniform: bool

    @property
    def direction_dependent(self) -> bool:
        return not self.uniform


_FAMILY_KINDS = {
    LinkFamily.FIBRE: frozenset([NodeKind.OGS]),
    LinkFamily.SATELLITE_GROUND: frozenset([NodeKind.OGS, NodeKind.SATELLITE]),
    LinkFamily.SUBMARINE_GROUND: frozenset([NodeKind.OGS, NodeKind.SUBMARINE]),
    LinkFamily.SATELLITE_SUBMARINE: frozenset([NodeKind.SATELLITE, NodeKind.SUBMARINE]),
    LinkFamily.INTER_SATELLITE: frozenset([NodeKind.SATELLITE]),
    LinkFamily.INTER_SUBMARINE: frozenset([NodeKind.SUBMARINE]),
}

# family -> (geometry, dynamic, uniform)
LINK_TABLE = {
    LinkFamily.FIBRE: (Geometry.STATIONARY_STATIONARY, False, True),
    LinkFamily.SATELLITE_GROUND: (Geometry.STATIONARY_MOVING, True, False),
    LinkFamily.SUBMARINE_GROUND: (Geometry.STATIONARY_MOVING, True, True),
    LinkFamily.SATELLITE_SUBMARINE: (Geometry.MOVING_MOVING, True, False),
    LinkFamily.INTER_SATELLITE: (Geometry.MOVING_MOVING, True, True),
    LinkFamily.INTER_SUBMARINE: (Geometry.MOVING_MOVING, True, True),
}


def classify_link(kind_a, kind_b, family=None, static_constellation: bool = False) -> Classification:
    """Classify a link between nodes of the given kinds.

    ``family`` is inferred from the kinds when omitted. Inter-satellite links
    are dynamic unless ``static_constellation`` says the satellites hold
    fixed relative positions.
    """
    kinds = frozenset([NodeKind(kind_a), NodeKind(kind_b)])
    if family is None:
        matches = [f for f, ks in _FAMILY_KINDS.items() if ks == kinds]
        if not matches:
            raise ClassificationError(f"no link family connects {kind_a} and {kind_b}")
        family = matches[0]
    family = LinkFamily(family)
    if _FAMILY_KINDS[family] != kinds:
        raise ClassificationError(f"a {family.value} link cannot join {kind_a} and {kind_b}")
    geometry, dynamic, uniform = LINK_TABLE[family]
    if family is LinkFamily.INTER_SATELLITE and static_constellation:
        dynamic = False
    return Classification(family, geometry, dynamic, uniform)


@dataclass(frozen=True)
class Node:
    """A network node; moving nodes carry ``(t, lat, lon, alt_km)`` samples."""

    id: str
    kind: NodeKind
    trusted: bool = True
    position: Optional[tuple[float, float, float]] = None
    trajectory: tuple[tuple[float, float, float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", NodeKind(self.kind))
        if self.kind.moving and not self.trajectory:
            raise DomainError(f"moving node {self.id!r} needs at least one trajectory sample")


@dataclass(frozen=True)
class CapacityProfile:
    """Capacity of one link direction over time.

    Either a constant key rate (``rate_bps``; capacity grows with window
    length) or a list of ``(start_s, end_s, bits)`` windows, each delivering
    its bits uniformly over its span. ``coverage`` bounds the times for which
    the profile is known; ``None`` means all times.
    """

    rate_bps: Optional[float] = None
    windows: tuple[tuple[float, float, float], ...] = ()
    coverage: Optional[tuple[float, float]] = None

    def covers(self, start: float, end: float) -> bool:
        return self.coverage is None or (self.coverage[0] <= start and end <= self.coverage[1])

    def capacity(self, start: float, end: float) -> float:
        if end < start:
            raise DomainError("window end precedes its start")
        if self.rate_bps is not None:
            return max(self.rate_bps, 0.0) * (end - start)
        total = 0.0
        for w0, w1, bits in self.windows:
            if w1 == w0:
                if start <= w0 <= end:
                    total += bits
                continue
            overlap = min(end, w1) - max(start, w0)
            if overlap > 0:
                total += bits * overlap / (w1 - w0)
        return total


@dataclass(frozen=True)
class Link:
    """Link between nodes ``a`` and ``b``.

    ``capacity`` applies to a->b. Direction-dependent links take their b->a
    capacity from ``reverse_capacity``; when that is absent the b->a
    direction is unusable. Uniform links use ``capacity`` both ways.
    """

    id: str
    a: str
    b: str
    family: Optional[LinkFamily] = None
    capacity: Optional[CapacityProfile] = None
    reverse_capacity: Optional[CapacityProfile] = None
    static_constellation: bool = False


@dataclass(frozen=True)
class NetworkGraph:
    nodes: tuple[Node, ...]
    links: tuple[Link, ...]
    classifications: Mapping[str, Classification] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise DomainError("node ids must be unique")
        if len({l.id for l in self.links}) != len(self.links):
            raise DomainError("link ids must be unique")
        kinds = {n.id: n.kind for n in self.nodes}
        classes = {}
        for link in self.links:
            for end in (link.a, link.b):
                if end not in kinds:
                    raise DomainError(f"link {link.id!r} references unknown node {end!r}")
            c = classify_link(kinds[link.a], kinds[link.b], link.family, link.static_constellation)
            if c.uniform and link.reverse_capacity is not None:
                raise DomainError(f"uniform link {link.id!r} cannot have a separate reverse capacity")
            classes[link.id] = c
        object.__setattr__(self, "classifications", classes)

    def node(self, node_id: str) -> Node:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def with_link(self, link: Link) -> "NetworkGraph":
        """New graph with ``link`` added (or replacing a link with the same id)."""
        kept = tuple(l for l in self.links if l.id != link.id)
        return NetworkGraph(self.nodes, kept + (link,))


@dataclass(frozen=True)
class WeightedGraph:
    """Directed snapshot: ``arcs[(u, v)]`` is the capacity in bits from u to v."""

    nodes: tuple[str, ...]
    arcs: Mapping[tuple[str, str], float]
    untrusted: frozenset = frozenset()

    @classmethod
    def from_edges(cls, edges, nodes=None, untrusted=(), directed=False) -> "WeightedGraph":
        """Build from ``(u, v, weight)`` triples; parallel edges keep the max weight."""
        arcs: dict[tuple[str, str], float] = {}
        names = set(nodes or ())
        for u, v, w in edges:
            names.update((u, v))
            pairs = [(u, v)] if directed else [(u, v), (v, u)]
            for p in pairs:
                if u == v:
                    continue
                arcs[p] = max(arcs.get(p, -math.inf), w)
        return cls(tuple(sorted(names)), arcs, frozenset(untrusted))

    def adjacency(self) -> dict[str, list[tuple[str, float]]]:
        adj: dict[str, list[tuple[str, float]]] = {n: [] for n in self.nodes}
        for (u, v), w in sorted(self.arcs.items()):
            if w > 0:
                adj[u].append((v, w))
        return adj


def snapshot_capacities(graph: NetworkGraph, start: float, end: float) -> WeightedGraph:
    """Annotate every link with its capacity over ``[start, end]``."""
    uncovered = []
    edges = []
    for link in graph.links:
        c = graph.classifications[link.id]
        reverse = link.reverse_capacity if c.direction_dependent else link.capacity
        if link.capacity is None or not link.capacity.covers(start, end):
            uncovered.append(link.id)
            continue
        if reverse is not None and not reverse.covers(start, end):
            uncovered.append(link.id)
            continue
        edges.append((link.a, link.b, link.capacity.capacity(start, end)))
        if reverse is not None:
            edges.append((link.b, link.a, reverse.capacity(start, end)))
    if uncovered:
        raise UncoveredLinkError(uncovered)
    untrusted = {n.id for n in graph.nodes if not n.trusted}
    return WeightedGraph.from_edges(edges, [n.id for n in graph.nodes], untrusted, directed=True)


@dataclass(frozen=True)
class Route:
    nodes: tuple[str, ...]
    hop_capacities: tuple[float, ...]
    reachable: bool = True
    unreachable_segment: Optional[tuple[str, str]] = None
    verdict: Optional[RelayVerdict] = None

    @property
    def hops(self) -> int:
        return len(self.hop_capacities)

    @property
    def bottleneck(self) -> float:
        if not self.reachable:
            return 0.0
        return min(self.hop_capacities, default=math.inf)

    @property
    def feasible(self) -> bool:
        if not self.reachable:
            return False
        return self.verdict is None or self.verdict.feasible


def _unreachable(src, dst):
    return Route((), (), reachable=False, unreachable_segment=(src, dst))


def _relay_ok(wg, node, dst):
    return node == dst or node not in wg.untrusted


def _max_bottleneck(adj, wg, src, dst, honour_trust=True):
    best = {src: math.inf}
    heap = [(-math.inf, src)]
    done = set()
    while heap:
        negb, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == dst:
            return -negb
        if u != src and honour_trust and u in wg.untrusted:
            continue
        for v, w in adj[u]:
            b = min(-negb, w)
            if b > best.get(v, 0.0):
                best[v] = b
                heapq.heappush(heap, (-b, v))
    return None


def _fewest_hops(adj, wg, src, dst, threshold):
    """Fewest-hop path using arcs of weight >= threshold, lexicographically smallest."""
    radj: dict[str, list[str]] = {n: [] for n in wg.nodes}
    for u, nbrs in adj.items():
        for v, w in nbrs:
            if w >= threshold:
                radj[v].append(u)
    dist = {dst: 0}
    queue = deque([dst])
    while queue:
        v = queue.popleft()
        if v != dst and v in wg.untrusted:
            continue
        for u in radj[v]:
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    if src not in dist:
        return None
    path = [src]
    cur = src
    while cur != dst:
        nxt = min(
            v for v, w in adj[cur]
            if w >= threshold and dist.get(v) == dist[cur] - 1 and _relay_ok(wg, v, dst)
        )
        path.append(nxt)
        cur = nxt
    return path


def _route_from_path(wg, path):
    caps = tuple(wg.arcs[(u, v)] for u, v in zip(path, path[1:]))
    return Route(tuple(path), caps)


def widest_path(wg: WeightedGraph, src: str, dst: str, objective: str = "capacity") -> Route:
    """Route from ``src`` to ``dst`` maximising the bottleneck capacity.

    Ties go to fewer hops, then to the lexicographically smallest node
    sequence. ``objective="hops"`` minimises hop count instead (same
    lexicographic tie-break). Arcs with zero capacity are unusable. Returns
    an unreachable route when no path exists; raises
    :class:`UntrustedRelayError` when every path relays through an
    untrusted node.
    """
    for n in (src, dst):
        if n not in wg.nodes:
            raise KeyError(n)
    if src == dst:
        return Route((src,), ())
    adj = wg.adjacency()
    if objective == "capacity":
        threshold = _max_bottleneck(adj, wg, src, dst)
    elif objective == "hops":
        threshold = 0.0 if _max_bottleneck(adj, wg, src, dst) is not None else None
    else:
        raise DomainError(f"unknown objective {objective!r}")
    if threshold is None:
        if wg.untrusted and _max_bottleneck(adj, wg, src, dst, honour_trust=False) is not None:
            raise UntrustedRelayError(f"every route from {src} to {dst} relays through an untrusted node")
        return _unreachable(src, dst)
    if objective == "hops":
        threshold = 0.0
    return _route_from_path(wg, _fewest_hops(adj, wg, src, dst, threshold))


def brute_force_widest_path(wg: WeightedGraph, src: str, dst: str) -> Route:
    """Exhaustive simple-path search with the same objective and tie-break as
    :func:`widest_path`. Refuses graphs with more than 10 nodes."""
    if len(wg.nodes) > BRUTE_FORCE_MAX_NODES:
        raise DomainError(f"brute force limited to {BRUTE_FORCE_MAX_NODES} nodes")
    if src == dst:
        return Route((src,), ())
    adj = wg.adjacency()
    best_key = None
    best_path = None

    def visit(path, bottleneck):
        nonlocal best_key, best_path
        u = path[-1]
        if u == dst:
            key = (-bottleneck, len(path), tuple(path))
            if best_key is None or key < best_key:
                best_key, best_path = key, list(path)
            return
        if u != src and u in wg.untrusted:
            return
        for v, w in adj[u]:
            if v not in path:
                path.append(v)
                visit(path, min(bottleneck, w))
                path.pop()

    visit([src], math.inf)
    if best_path is None:
        return _unreachable(src, dst)
    return _route_from_path(wg, best_path)


def multi_target_route(
    wg: WeightedGraph,
    targets: Sequence[str],
    key_size: float,
    objective: str = "capacity",
) -> Route:
    """Chain widest paths through ``targets`` in order and check relay feasibility."""
    if len(targets) == 0:
        raise DomainError("need at least one target")
    nodes = [targets[0]]
    caps: list[float] = []
    for a, b in zip(targets, targets[1:]):
        seg = widest_path(wg, a, b, objective)
        if not seg.reachable:
            return seg
        nodes.extend(seg.nodes[1:])
        caps.extend(seg.hop_capacities)
    verdict = check_relay_feasibility(caps, key_size) if caps else None
    return Route(tuple(nodes), tuple(caps), verdict=verdict)
