"""File ingestion and session persistence.

Reads the plain-text benchmark formats (network, trip table, node
coordinates) and round-trips whole planning sessions through a canonical
JSON document: sorted keys, LF newlines, floats at 17 significant digits,
so identical sessions serialize to identical bytes. Assignments are not
stored; they are recomputed on load by replaying the modification log,
which is deterministic.
"""

from __future__ import annotations

import json
import logging
import math
from typing import Any

from .assignment import AssignmentParams
from .errors import ParseError, SessionError, StructuralError
from .network import Demand, Intersection, Road, RoadNetwork, build_network
from .statetree import (
    BuildRoad,
    CloseRoad,
    CostParams,
    Modification,
    SetCapacity,
    SetFftt,
    StateTree,
    apply_modification,
    create_tree,
)

log = logging.getLogger("roadplan")

SCHEMA_VERSION = 1

# Display box that planar benchmark coordinates are affinely mapped into.
PLANAR_CENTER_LON = -96.73
PLANAR_CENTER_LAT = 43.54
PLANAR_SPAN_KM = 7.0
KM_PER_DEG_LAT = 111.19492664455873  # 2*pi*R/360 for R = 6371 km


def _data_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("~"):
            continue
        out.append((i, line))
    return out


def _meta_int(line: str, lineno: int) -> int:
    value = line.split(">", 1)[1].strip()
    try:
        return int(float(value))
    except ValueError:
        raise ParseError(f"bad metadata value {value!r}", lineno) from None


def parse_network(text: str) -> RoadNetwork:
    """Parse a benchmark network file into a road network.

    Node positions default to (0, 0) until coordinates are applied. The
    length column is kept per road when positive; zero or negative means
    "derive from geometry". The file's BPR shape columns are checked but the
    assignment always uses coefficients (0.15, 4); a mismatch only logs a
    warning.
    """
    n_nodes: int | None = None
    n_links: int | None = None
    rows: list[tuple[int, list[str]]] = []
    in_body = False
    for lineno, line in _data_lines(text):
        if not in_body:
            upper = line.upper()
            if upper.startswith("<NUMBER OF NODES>"):
                n_nodes = _meta_int(line, lineno)
            elif upper.startswith("<NUMBER OF LINKS>"):
                n_links = _meta_int(line, lineno)
            elif upper.startswith("<END OF METADATA>"):
                in_body = True
            elif upper.startswith("<"):
                continue  # other metadata keys are irrelevant here
            else:
                raise ParseError("expected metadata before <END OF METADATA>", lineno)
            continue
        rows.append((lineno, line.split()))
    if n_nodes is None or n_links is None:
        raise ParseError("missing <NUMBER OF NODES> or <NUMBER OF LINKS> metadata")

    roads: list[Road] = []
    warned_bpr = False
    for lineno, tokens in rows:
        if tokens and tokens[-1] == ";":
            tokens = tokens[:-1]
        elif tokens and tokens[-1].endswith(";"):
            tokens = tokens[:-1] + [tokens[-1][:-1]]
        if len(tokens) < 7:
            raise ParseError(f"expected at least 7 columns, got {len(tokens)}", lineno)
        try:
            init_node = int(tokens[0])
            term_node = int(tokens[1])
            capacity = float(tokens[2])
            length = float(tokens[3])
            fftt = float(tokens[4])
            b = float(tokens[5])
            power = float(tokens[6])
        except ValueError as exc:
            raise ParseError(f"malformed link row: {exc}", lineno) from None
        if capacity <= 0:
            raise ParseError(f"capacity must be positive, got {capacity}", lineno)
        if fftt <= 0:
            raise ParseError(f"free flow time must be positive, got {fftt}", lineno)
        if not (1 <= init_node <= n_nodes) or not (1 <= term_node <= n_nodes):
            raise ParseError(
                f"link endpoints {init_node}->{term_node} outside node range 1..{n_nodes}",
                lineno,
            )
        if (b, power) != (0.15, 4.0) and not warned_bpr:
            log.warning(
                "link row %d declares BPR shape (%g, %g); assignment uses (0.15, 4)",
                lineno, b, power,
            )
            warned_bpr = True
        roads.append(
            Road(
                id=len(roads) + 1,
                from_node=init_node,
                to_node=term_node,
                capacity=capacity,
                fftt=fftt,
                length_km=length if length > 0 else None,
            )
        )
    if len(roads) != n_links:
        raise ParseError(f"declared {n_links} links but parsed {len(roads)}")
    nodes = [Intersection(i, 0.0, 0.0) for i in range(1, n_nodes + 1)]
    try:
        return build_network(nodes, roads)
    except StructuralError as exc:
        raise ParseError(str(exc)) from exc


def parse_trips(text: str) -> list[Demand]:
    """Parse a trip table into demand entries.

    Zero-demand and self pairs are dropped (the latter with a warning); the
    header total is validated against the sum of all parsed entries.
    """
    declared_total: float | None = None
    demands: list[Demand] = []
    seen: set[tuple[int, int]] = set()
    origin: int | None = None
    parsed_total = 0.0
    in_body = False
    for lineno, line in _data_lines(text):
        upper = line.upper()
        if upper.startswith("<TOTAL OD FLOW>"):
            declared_total = float(line.split(">", 1)[1].strip())
            continue
        if upper.startswith("<END OF METADATA>"):
            in_body = True
            continue
        if upper.startswith("<"):
            continue
        if upper.startswith("ORIGIN"):
            try:
                origin = int(line.split()[1])
            except (IndexError, ValueError):
                raise ParseError("malformed Origin header", lineno) from None
            in_body = True
            continue
        if not in_body:
            raise ParseError("entries before any metadata or Origin header", lineno)
        if origin is None:
            raise ParseError("demand entry before any Origin header", lineno)
        for entry in line.split(";"):
            entry = entry.strip()
            if not entry:
                continue
            if ":" not in entry:
                raise ParseError(f"malformed demand entry {entry!r}", lineno)
            dest_s, _, trips_s = entry.partition(":")
            try:
                dest = int(dest_s)
                trips = float(trips_s)
            except ValueError:
                raise ParseError(f"malformed demand entry {entry!r}", lineno) from None
            if trips < 0:
                raise ParseError(f"negative demand {trips} for {origin}->{dest}", lineno)
            parsed_total += trips
            if trips == 0:
                continue
            if dest == origin:
                log.warning("dropping self-pair demand %d->%d (%g trips)", origin, dest, trips)
                continue
            if (origin, dest) in seen:
                raise ParseError(f"duplicate demand entry for {origin}->{dest}", lineno)
            seen.add((origin, dest))
            demands.append(Demand(origin, dest, trips))
    if declared_total is not None:
        scale = max(abs(declared_total), 1.0)
        if abs(parsed_total - declared_total) > 1e-6 * scale:
            raise ParseError(
                f"trip table totals {parsed_total}, header declares {declared_total}"
            )
    return demands


def parse_coords(text: str) -> dict[int, tuple[float, float]]:
    """Parse node coordinate rows (``node x y``), one per node."""
    coords: dict[int, tuple[float, float]] = {}
    for lineno, line in _data_lines(text):
        tokens = [t for t in line.replace(";", " ").split() if t]
        if not tokens:
            continue
        try:
            node = int(tokens[0])
        except ValueError:
            if not coords:
                continue  # header row
            raise ParseError(f"malformed coordinate row {line!r}", lineno) from None
        if len(tokens) < 3:
            raise ParseError("coordinate row needs node, x, y", lineno)
        try:
            x, y = float(tokens[1]), float(tokens[2])
        except ValueError:
            raise ParseError(f"malformed coordinate row {line!r}", lineno) from None
        if node in coords:
            raise ParseError(f"duplicate coordinates for node {node}", lineno)
        coords[node] = (x, y)
    return coords


def apply_coords(
    network: RoadNetwork,
    coords: dict[int, tuple[float, float]],
    projection: str = "lonlat",
) -> RoadNetwork:
    """Position the network's nodes.

    ``lonlat`` coordinates are taken as degrees directly. ``planar``
    coordinates (arbitrary benchmark units) are affinely mapped into a small
    geographic box, preserving the aspect ratio; file-supplied road lengths
    remain authoritative either way.
    """
    if projection not in ("lonlat", "planar"):
        raise StructuralError(f"projection must be 'lonlat' or 'planar', got {projection!r}")
    missing = sorted(n for n in network.nodes if n not in coords)
    if missing:
        raise StructuralError(f"nodes missing coordinates: {missing}")
    if projection == "lonlat":
        positioned = {
            nid: Intersection(nid, coords[nid][0], coords[nid][1]) for nid in network.nodes
        }
    else:
        xs = [coords[n][0] for n in network.nodes]
        ys = [coords[n][1] for n in network.nodes]
        x_mid, y_mid = (min(xs) + max(xs)) / 2.0, (min(ys) + max(ys)) / 2.0
        extent = max(max(xs) - min(xs), max(ys) - min(ys))
        km_per_unit = PLANAR_SPAN_KM / extent if extent > 0 else 0.0
        km_per_deg_lon = KM_PER_DEG_LAT * math.cos(math.radians(PLANAR_CENTER_LAT))
        positioned = {}
        for nid in network.nodes:
            x, y = coords[nid]
            lon = PLANAR_CENTER_LON + (x - x_mid) * km_per_unit / km_per_deg_lon
            lat = PLANAR_CENTER_LAT + (y - y_mid) * km_per_unit / KM_PER_DEG_LAT
            positioned[nid] = Intersection(nid, lon, lat)
    return build_network(list(positioned.values()), list(network.roads.values()))


def serialize_network(network: RoadNetwork) -> str:
    """Write a network back out in the benchmark link format."""
    lines = [
        f"<NUMBER OF NODES> {len(network.nodes)}",
        f"<NUMBER OF LINKS> {len(network.roads)}",
        "<END OF METADATA>",
        "~ init_node term_node capacity length free_flow_time b power speed toll link_type ;",
    ]
    for rid in sorted(network.roads):
        r = network.roads[rid]
        length = r.length_km if r.length_km is not None else 0.0
        lines.append(
            f"{r.from_node}\t{r.to_node}\t{_fmt_float(r.capacity)}\t{_fmt_float(length)}"
            f"\t{_fmt_float(r.fftt)}\t0.15\t4\t0\t0\t1\t;"
        )
    return "\n".join(lines) + "\n"


# --- session persistence ---------------------------------------------------


def _fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _canon(value: Any) -> str:
    """Canonical JSON: sorted keys, no whitespace, 17-significant-digit floats."""
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise SessionError(f"non-finite float {value!r} in session document")
        return _fmt_float(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_canon(v) for v in value) + "]"
    if isinstance(value, dict):
        items = sorted(value.items())
        return "{" + ",".join(f"{json.dumps(k)}:{_canon(v)}" for k, v in items) + "}"
    raise SessionError(f"unserializable value of type {type(value).__name__}")


def modification_to_json(mod: Modification) -> dict[str, Any]:
    if isinstance(mod, SetCapacity):
        return {"kind": "set_capacity", "road": mod.road, "capacity": mod.capacity}
    if isinstance(mod, SetFftt):
        return {"kind": "set_fftt", "road": mod.road, "fftt": mod.fftt}
    if isinstance(mod, CloseRoad):
        return {"kind": "close_road", "road": mod.road}
    if isinstance(mod, BuildRoad):
        return {
            "kind": "build_road",
            "from_node": mod.from_node,
            "to_node": mod.to_node,
            "two_way": mod.two_way,
            "road_kind": mod.road_kind,
            "capacity": mod.capacity,
            "fftt": mod.fftt,
        }
    raise SessionError(f"unknown modification type {type(mod).__name__}")


def modification_from_json(data: dict[str, Any]) -> Modification:
    try:
        kind = data["kind"]
        if kind == "set_capacity":
            return SetCapacity(road=int(data["road"]), capacity=float(data["capacity"]))
        if kind == "set_fftt":
            return SetFftt(road=int(data["road"]), fftt=float(data["fftt"]))
        if kind == "close_road":
            return CloseRoad(road=int(data["road"]))
        if kind == "build_road":
            return BuildRoad(
                from_node=int(data["from_node"]),
                to_node=int(data["to_node"]),
                two_way=bool(data["two_way"]),
                road_kind=str(data["road_kind"]),
                capacity=None if data.get("capacity") is None else float(data["capacity"]),
                fftt=None if data.get("fftt") is None else float(data["fftt"]),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise SessionError(f"malformed modification: {exc}") from None
    raise SessionError(f"unknown modification kind {kind!r}")


def save_session(tree: StateTree) -> str:
    """Serialize a tree to the canonical session document."""
    root = tree.nodes[tree.root_id]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "assignment_params": {
            "theta": tree.assign_params.theta,
            "k_paths": tree.assign_params.k_paths,
            "max_iters": tree.assign_params.max_iters,
            "rel_gap_tol": tree.assign_params.rel_gap_tol,
            "sra_big_step": tree.assign_params.sra_big_step,
            "sra_small_step": tree.assign_params.sra_small_step,
        },
        "cost_params": {
            "surface_per_km": tree.cost_params.surface_per_km,
            "tunnel_per_km": tree.cost_params.tunnel_per_km,
        },
        "demands": [[d.origin, d.destination, d.trips] for d in tree.demands],
        "root_network": {
            "nodes": [
                [n.id, n.lon, n.lat]
                for n in (root.network.nodes[i] for i in sorted(root.network.nodes))
            ],
            "roads": [
                [r.id, r.from_node, r.to_node, r.capacity, r.fftt, r.length_km, r.kind]
                for r in (root.network.roads[i] for i in sorted(root.network.roads))
            ],
            "next_road_id": root.network.next_road_id,
        },
        "states": [
            {
                "id": sid,
                "parent": tree.nodes[sid].parent,
                "modification": (
                    None
                    if tree.nodes[sid].modification is None
                    else modification_to_json(tree.nodes[sid].modification)
                ),
                "step_cost": tree.nodes[sid].step_cost,
                "cumulative_cost": tree.nodes[sid].cumulative_cost,
                "metric": tree.nodes[sid].metric,
            }
            for sid in sorted(tree.nodes)
        ],
        "next_state_id": tree.next_state_id,
    }
    return _canon(doc) + "\n"


def _close(a: float, b: float, rel: float = 1e-9) -> bool:
    return abs(a - b) <= rel * max(abs(a), abs(b), 1.0)


def load_session(text: str) -> StateTree:
    """Rebuild a tree from a session document by replaying its edits.

    The stored metrics and costs are cross-checked against the recomputed
    ones; any drift beyond 1e-9 relative means the document does not describe
    a state this code can reproduce, and loading fails.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SessionError(f"invalid session JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SessionError("session document must be a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SessionError(
            f"unsupported schema_version {doc.get('schema_version')!r}; expected {SCHEMA_VERSION}"
        )
    try:
        ap = doc["assignment_params"]
        params = AssignmentParams(
            theta=float(ap["theta"]),
            k_paths=int(ap["k_paths"]),
            max_iters=int(ap["max_iters"]),
            rel_gap_tol=float(ap["rel_gap_tol"]),
            sra_big_step=float(ap["sra_big_step"]),
            sra_small_step=float(ap["sra_small_step"]),
        )
        cp = doc["cost_params"]
        costs = CostParams(
            surface_per_km=float(cp["surface_per_km"]),
            tunnel_per_km=float(cp["tunnel_per_km"]),
        )
        demands = [Demand(int(o), int(d), float(t)) for o, d, t in doc["demands"]]
        net = doc["root_network"]
        nodes = [Intersection(int(i), float(lon), float(lat)) for i, lon, lat in net["nodes"]]
        roads = [
            Road(
                id=int(rid),
                from_node=int(a),
                to_node=int(b),
                capacity=float(cap),
                fftt=float(fftt),
                length_km=None if length is None else float(length),
                kind=str(kind),
            )
            for rid, a, b, cap, fftt, length, kind in net["roads"]
        ]
        root_next_road_id = int(net["next_road_id"])
        states = doc["states"]
        next_state_id = int(doc["next_state_id"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SessionError(f"malformed session document: {exc}") from None

    network = build_network(nodes, roads)
    if root_next_road_id < network.next_road_id:
        raise SessionError("root_network next_road_id conflicts with existing road ids")
    network = RoadNetwork(network.nodes, network.roads, root_next_road_id)

    if not states or states[0].get("parent") is not None:
        raise SessionError("first state must be the parentless root")
    tree = create_tree(network, demands, params, costs)
    if states[0].get("id") != tree.root_id:
        raise SessionError(f"root state must have id {tree.root_id}")
    if not _close(tree.nodes[tree.root_id].metric, float(states[0]["metric"])):
        raise SessionError("recomputed root metric disagrees with the stored one")

    for entry in states[1:]:
        try:
            sid = int(entry["id"])
            parent = int(entry["parent"])
            mod = modification_from_json(entry["modification"])
            stored_metric = float(entry["metric"])
            stored_step = float(entry["step_cost"])
            stored_cum = float(entry["cumulative_cost"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SessionError(f"malformed state entry: {exc}") from None
        if parent not in tree.nodes:
            raise SessionError(f"state {sid} cites missing parent {parent}")
        if sid in tree.nodes or sid <= parent:
            raise SessionError(f"state ids must be strictly increasing; got {sid}")
        tree.next_state_id = sid
        new_id = apply_modification(tree, parent, mod)
        node = tree.nodes[new_id]
        if not (
            _close(node.metric, stored_metric)
            and _close(node.step_cost, stored_step)
            and _close(node.cumulative_cost, stored_cum)
        ):
            raise SessionError(f"replay of state {sid} disagrees with stored values")
    if next_state_id < max(tree.nodes) + 1:
        raise SessionError("next_state_id conflicts with existing state ids")
    tree.next_state_id = next_state_id
    return tree
