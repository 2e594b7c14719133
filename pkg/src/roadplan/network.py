"""Road network domain model and the four countermeasure edit primitives.

Networks are immutable snapshots: every edit returns a new network and leaves
its input untouched, so states can be shared freely across threads and tree
nodes. Road ids are stable across attribute edits and never reused after a
deletion (each network carries the next fresh id).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import StructuralError, UnknownIdError

EARTH_RADIUS_KM = 6371.0

RoadKind = str  # "surface" or "tunnel"
ROAD_KINDS = ("surface", "tunnel")


@dataclass(frozen=True)
class Intersection:
    """A node of the road graph, positioned in geographic degrees."""

    id: int
    lon: float
    lat: float


@dataclass(frozen=True)
class Road:
    """A directed road segment with its static attributes.

    ``length_km`` is the authoritative length when the input file supplied
    one; otherwise lengths are derived from endpoint geometry on demand.
    """

    id: int
    from_node: int
    to_node: int
    capacity: float
    fftt: float
    length_km: float | None = None
    kind: RoadKind = "surface"


@dataclass(frozen=True)
class RoadStatus:
    """Dynamic per-road result of an assignment: volume and travel time."""

    road: int
    actual_volume: float
    actual_time: float


@dataclass(frozen=True)
class Demand:
    """Travel demand (number of OD trips) between an ordered pair of nodes."""

    origin: int
    destination: int
    trips: float


@dataclass(frozen=True)
class RoadNetwork:
    nodes: dict[int, Intersection]
    roads: dict[int, Road]
    next_road_id: int = 1

    def road(self, road_id: int) -> Road:
        try:
            return self.roads[road_id]
        except KeyError:
            raise UnknownIdError(f"unknown road id {road_id}") from None

    def node(self, node_id: int) -> Intersection:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownIdError(f"unknown node id {node_id}") from None


def build_network(nodes: list[Intersection], roads: list[Road]) -> RoadNetwork:
    """Assemble and validate a network from node and road lists."""
    node_map: dict[int, Intersection] = {}
    for n in nodes:
        if n.id in node_map:
            raise StructuralError(f"duplicate node id {n.id}")
        if not (-180.0 <= n.lon <= 180.0) or not (-90.0 <= n.lat <= 90.0):
            raise StructuralError(f"node {n.id} position out of range: ({n.lon}, {n.lat})")
        node_map[n.id] = n
    road_map: dict[int, Road] = {}
    seen_pairs: set[tuple[int, int]] = set()
    for r in roads:
        _validate_road(r, node_map)
        if r.id in road_map:
            raise StructuralError(f"duplicate road id {r.id}")
        if (r.from_node, r.to_node) in seen_pairs:
            raise StructuralError(f"duplicate road for pair {r.from_node}->{r.to_node}")
        road_map[r.id] = r
        seen_pairs.add((r.from_node, r.to_node))
    next_id = max(road_map, default=0) + 1
    return RoadNetwork(nodes=node_map, roads=road_map, next_road_id=next_id)


def _validate_road(r: Road, nodes: dict[int, Intersection]) -> None:
    if r.from_node not in nodes:
        raise StructuralError(f"road {r.id} references missing node {r.from_node}")
    if r.to_node not in nodes:
        raise StructuralError(f"road {r.id} references missing node {r.to_node}")
    if r.from_node == r.to_node:
        raise StructuralError(f"road {r.id} is a self-loop at node {r.from_node}")
    if r.capacity <= 0:
        raise StructuralError(f"road {r.id} capacity must be positive, got {r.capacity}")
    if r.fftt <= 0:
        raise StructuralError(f"road {r.id} FFTT must be positive, got {r.fftt}")
    if r.kind not in ROAD_KINDS:
        raise StructuralError(f"road {r.id} kind must be one of {ROAD_KINDS}, got {r.kind!r}")


def haversine_km(lon1: float, lat1: float, lon2: float, lat2: float) -> float:
    """Great-circle distance in kilometers."""
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = phi2 - phi1
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(a))


def road_length_km(network: RoadNetwork, road_id: int) -> float:
    """Length of a road: the file-supplied value if present, else great-circle."""
    r = network.road(road_id)
    if r.length_km is not None:
        return r.length_km
    a = network.node(r.from_node)
    b = network.node(r.to_node)
    return haversine_km(a.lon, a.lat, b.lon, b.lat)


def set_capacity(network: RoadNetwork, road_id: int, new_capacity: float) -> RoadNetwork:
    """Expand or narrow a road: snapshot with the road's capacity replaced."""
    r = network.road(road_id)
    if new_capacity <= 0:
        raise StructuralError(f"capacity must be positive, got {new_capacity}")
    roads = dict(network.roads)
    roads[road_id] = replace(r, capacity=float(new_capacity))
    return replace(network, roads=roads)


def set_fftt(network: RoadNetwork, road_id: int, new_fftt: float) -> RoadNetwork:
    """Improve or restrict a road: snapshot with the road's FFTT replaced."""
    r = network.road(road_id)
    if new_fftt <= 0:
        raise StructuralError(f"FFTT must be positive, got {new_fftt}")
    roads = dict(network.roads)
    roads[road_id] = replace(r, fftt=float(new_fftt))
    return replace(network, roads=roads)


def close_road(network: RoadNetwork, road_id: int) -> RoadNetwork:
    """Remove a road; endpoints are kept even if they become isolated."""
    network.road(road_id)
    roads = dict(network.roads)
    del roads[road_id]
    return replace(network, roads=roads)


def build_road(
    network: RoadNetwork,
    from_node: int,
    to_node: int,
    two_way: bool = True,
    kind: RoadKind = "surface",
    capacity: float | None = None,
    fftt: float | None = None,
) -> RoadNetwork:
    """Add a new road (or a pair of opposing roads when ``two_way``).

    Defaults follow the rest of the network: capacity is the mean capacity of
    existing roads, and FFTT is the network's mean FFTT-per-km applied to the
    new road's length.
    """
    a = network.node(from_node)
    b = network.node(to_node)
    if from_node == to_node:
        raise StructuralError("cannot build a road from a node to itself")
    if kind not in ROAD_KINDS:
        raise StructuralError(f"road kind must be one of {ROAD_KINDS}, got {kind!r}")
    existing = {(r.from_node, r.to_node) for r in network.roads.values()}
    directions = [(from_node, to_node)]
    if two_way:
        directions.append((to_node, from_node))
    for pair in directions:
        if pair in existing:
            raise StructuralError(f"road already exists for pair {pair[0]}->{pair[1]}")

    length = haversine_km(a.lon, a.lat, b.lon, b.lat)
    if capacity is None or fftt is None:
        if not network.roads:
            raise StructuralError("default attributes are undefined on an empty network")
        road_ids = sorted(network.roads)
        if capacity is None:
            capacity = sum(network.roads[i].capacity for i in road_ids) / len(road_ids)
        if fftt is None:
            mean_fftt = sum(network.roads[i].fftt for i in road_ids) / len(road_ids)
            mean_length = sum(road_length_km(network, i) for i in road_ids) / len(road_ids)
            if mean_length <= 0:
                raise StructuralError("default FFTT undefined: existing roads have zero mean length")
            fftt = mean_fftt / mean_length * length
    if capacity <= 0:
        raise StructuralError(f"capacity must be positive, got {capacity}")
    if fftt <= 0:
        raise StructuralError(f"FFTT must be positive, got {fftt}")

    roads = dict(network.roads)
    next_id = network.next_road_id
    for src, dst in directions:
        roads[next_id] = Road(
            id=next_id,
            from_node=src,
            to_node=dst,
            capacity=float(capacity),
            fftt=float(fftt),
            length_km=None,
            kind=kind,
        )
        next_id += 1
    return replace(network, roads=roads, next_road_id=next_id)


def validate_demands(network: RoadNetwork, demands: list[Demand]) -> list[Demand]:
    """Check demand-table invariants and return the table sorted by OD pair."""
    seen: set[tuple[int, int]] = set()
    for d in demands:
        network.node(d.origin)
        network.node(d.destination)
        if d.origin == d.destination:
            raise StructuralError(f"demand origin equals destination: {d.origin}")
        if d.trips <= 0:
            raise StructuralError(f"demand {d.origin}->{d.destination} trips must be positive")
        key = (d.origin, d.destination)
        if key in seen:
            raise StructuralError(f"duplicate demand entry for {d.origin}->{d.destination}")
        seen.add(key)
    return sorted(demands, key=lambda d: (d.origin, d.destination))
