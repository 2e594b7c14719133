"""HTTP/JSON facade over the planning engine.

Sessions are in-memory: each holds one state tree plus its parameters and a
lock that serializes mutations. Solves that outlast a short grace period
return a poll token instead of blocking the client. Export/import round-trips
the canonical session document.
"""

from __future__ import annotations

import threading
import uuid
from concurrent.futures import Future, ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeoutError
from dataclasses import dataclass, field as dc_field
from typing import Any

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from . import analytics
from .assignment import AssignmentParams
from .datasets import DATASET_NAMES, load_dataset
from .errors import (
    RoadPlanError,
    RootDeletionError,
    StructuralError,
    UnknownIdError,
)
from .ingest import (
    apply_coords,
    load_session,
    modification_from_json,
    modification_to_json,
    parse_coords,
    parse_network,
    parse_trips,
    save_session,
)
from .statetree import (
    CostParams,
    StateTree,
    apply_modification,
    create_tree,
    delete_state,
    metric_deltas,
)

SOLVE_GRACE_SECONDS = 2.0


@dataclass
class Session:
    id: str
    tree: StateTree
    lock: threading.RLock = dc_field(default_factory=threading.RLock)
    polls: dict[str, Future] = dc_field(default_factory=dict)


class CreateSessionRequest(BaseModel):
    dataset: str | None = None
    network: str | None = None
    trips: str | None = None
    coords: str | None = None
    projection: str = "lonlat"
    theta: float = 0.3
    k_paths: int = 8
    max_iters: int = 1000
    rel_gap_tol: float = 1e-4
    surface_cost_per_km: float = 4_000_000.0
    tunnel_cost_per_km: float = 14_000_000.0


class ModificationRequest(BaseModel):
    kind: str
    road: int | None = None
    capacity_veh_per_hr: float | None = None
    fftt_min: float | None = None
    from_node: int | None = None
    to_node: int | None = None
    two_way: bool = True
    road_kind: str = "surface"


class SortSpec(BaseModel):
    key: str = "avg_flow"
    descending: bool = True


class IndicatorsRequest(BaseModel):
    selected_states: list[int]
    filters: dict[str, tuple[float, float]] = Field(default_factory=dict)
    sort: SortSpec = Field(default_factory=SortSpec)
    bin_count: int = 20


class ImportRequest(BaseModel):
    session: str


def _modification_from_request(req: ModificationRequest) -> dict[str, Any]:
    body: dict[str, Any] = {"kind": req.kind}
    if req.kind == "set_capacity":
        body.update(road=req.road, capacity=req.capacity_veh_per_hr)
    elif req.kind == "set_fftt":
        body.update(road=req.road, fftt=req.fftt_min)
    elif req.kind == "close_road":
        body.update(road=req.road)
    elif req.kind == "build_road":
        body.update(
            from_node=req.from_node,
            to_node=req.to_node,
            two_way=req.two_way,
            road_kind=req.road_kind,
            capacity=req.capacity_veh_per_hr,
            fftt=req.fftt_min,
        )
    return body


def state_summary(tree: StateTree, state_id: int) -> dict[str, Any]:
    node = tree.node(state_id)
    deltas = metric_deltas(tree, state_id)
    mod = None if node.modification is None else modification_to_json(node.modification)
    return {
        "id": node.id,
        "parent": node.parent,
        "children": list(node.children),
        "modification": mod,
        "modification_icon": None if mod is None else mod["kind"],
        "metric_veh_min": node.metric,
        "delta_vs_initial_ratio": deltas.vs_initial,
        "delta_vs_parent_ratio": deltas.vs_parent,
        "delta_vs_parent_applicable": deltas.vs_parent_applicable,
        "step_cost_currency": node.step_cost,
        "cumulative_cost_currency": node.cumulative_cost,
        "converged": node.assignment.converged,
        "iterations": node.assignment.iterations,
        "final_rel_gap_ratio": node.assignment.final_rel_gap,
    }


def _state_detail(tree: StateTree, state_id: int) -> dict[str, Any]:
    node = tree.node(state_id)
    net = node.network
    roads = []
    for rid in sorted(net.roads):
        r = net.roads[rid]
        s = node.assignment.statuses[rid]
        roads.append(
            {
                "road_id": rid,
                "from_node": r.from_node,
                "to_node": r.to_node,
                "capacity_veh_per_hr": r.capacity,
                "fftt_min": r.fftt,
                "length_km": r.length_km,
                "kind": r.kind,
                "volume_veh_per_hr": s.actual_volume,
                "time_min": s.actual_time,
            }
        )
    return {
        **state_summary(tree, state_id),
        "nodes": [
            {"node_id": nid, "lon_deg": net.nodes[nid].lon, "lat_deg": net.nodes[nid].lat}
            for nid in sorted(net.nodes)
        ],
        "roads": roads,
    }


def create_app() -> FastAPI:
    app = FastAPI(title="roadplan service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, Session] = {}
    executor = ThreadPoolExecutor(max_workers=4)
    app.state.sessions = sessions

    def get_session(sid: str) -> Session:
        try:
            return sessions[sid]
        except KeyError:
            raise UnknownIdError(f"unknown session id {sid}") from None

    @app.exception_handler(RoadPlanError)
    def domain_error(_: Request, exc: RoadPlanError) -> JSONResponse:
        if isinstance(exc, UnknownIdError):
            status = 404
        elif isinstance(exc, RootDeletionError):
            status = 409
        else:
            status = 422
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    def register(tree: StateTree) -> Session:
        session = Session(id=uuid.uuid4().hex, tree=tree)
        sessions[session.id] = session
        return session

    def build_session(req: CreateSessionRequest) -> Session:
        if req.dataset is not None:
            if req.dataset not in DATASET_NAMES:
                raise UnknownIdError(
                    f"unknown dataset {req.dataset!r}; available: {', '.join(DATASET_NAMES)}"
                )
            network, demands = load_dataset(req.dataset)
        else:
            if req.network is None or req.trips is None:
                raise StructuralError("either dataset or network+trips must be provided")
            network = parse_network(req.network)
            if req.coords is not None:
                network = apply_coords(network, parse_coords(req.coords), req.projection)
            demands = parse_trips(req.trips)
        params = AssignmentParams(
            theta=req.theta,
            k_paths=req.k_paths,
            max_iters=req.max_iters,
            rel_gap_tol=req.rel_gap_tol,
        )
        costs = CostParams(
            surface_per_km=req.surface_cost_per_km, tunnel_per_km=req.tunnel_cost_per_km
        )
        return register(create_tree(network, demands, params, costs))

    app.state.build_session = build_session

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest) -> dict[str, Any]:
        session = build_session(req)
        return {
            "session_id": session.id,
            "root": state_summary(session.tree, session.tree.root_id),
        }

    @app.get("/sessions")
    def list_sessions() -> dict[str, Any]:
        return {"session_ids": sorted(sessions)}

    @app.get("/sessions/{sid}/tree")
    def get_tree(sid: str) -> dict[str, Any]:
        session = get_session(sid)
        with session.lock:
            return {
                "root_id": session.tree.root_id,
                "nodes": [
                    state_summary(session.tree, s) for s in sorted(session.tree.nodes)
                ],
            }

    @app.get("/sessions/{sid}/states/{state_id}")
    def get_state(sid: str, state_id: int) -> dict[str, Any]:
        session = get_session(sid)
        with session.lock:
            return _state_detail(session.tree, state_id)

    @app.post("/sessions/{sid}/states/{state_id}/modifications")
    def post_modification(sid: str, state_id: int, req: ModificationRequest) -> Response:
        session = get_session(sid)
        mod = modification_from_json(_modification_from_request(req))
        session.tree.node(state_id)  # 404 before queueing work

        def job() -> int:
            with session.lock:
                return apply_modification(session.tree, state_id, mod)

        future = executor.submit(job)
        try:
            child_id = future.result(timeout=SOLVE_GRACE_SECONDS)
        except FutureTimeoutError:
            token = uuid.uuid4().hex
            session.polls[token] = future
            return JSONResponse(status_code=202, content={"poll_token": token})
        return _modification_response(session, child_id)

    def _modification_response(session: Session, child_id: int) -> Response:
        with session.lock:
            summary = state_summary(session.tree, child_id)
        if not summary["converged"]:
            return JSONResponse(
                status_code=503,
                content={
                    "detail": "solver iteration budget exceeded",
                    "partial_result": True,
                    "state": summary,
                },
            )
        return JSONResponse(status_code=201, content={"state": summary})

    @app.get("/sessions/{sid}/polls/{token}")
    def poll(sid: str, token: str) -> Response:
        session = get_session(sid)
        future = session.polls.get(token)
        if future is None:
            raise UnknownIdError(f"unknown poll token {token}")
        if not future.done():
            return JSONResponse(status_code=202, content={"status": "running"})
        del session.polls[token]
        child_id = future.result()  # domain errors propagate to the handler
        return _modification_response(session, child_id)

    @app.delete("/sessions/{sid}/states/{state_id}")
    def remove_state(sid: str, state_id: int) -> dict[str, Any]:
        session = get_session(sid)
        with session.lock:
            removed = delete_state(session.tree, state_id)
        return {"removed_state_ids": removed}

    @app.get("/sessions/{sid}/states/{state_id}/roads/{road_id}/od")
    def road_od(sid: str, state_id: int, road_id: int) -> dict[str, Any]:
        session = get_session(sid)
        with session.lock:
            flows = analytics.od_through_road(session.tree, state_id, road_id)
        return {
            "road_id": road_id,
            "od_flows": [
                {
                    "node_id": nid,
                    "originating_veh": orig,
                    "terminating_veh": term,
                }
                for nid, (orig, term) in flows.items()
            ],
        }

    @app.post("/sessions/{sid}/indicators")
    def indicators(sid: str, req: IndicatorsRequest) -> dict[str, Any]:
        session = get_session(sid)
        with session.lock:
            tree = session.tree
            inds = analytics.compute_indicators(tree, set(req.selected_states))
            ordered = analytics.filter_and_rank(
                inds, req.filters, req.sort.key, req.sort.descending
            )
            histograms = {
                name: [
                    {"lo": b.lo, "hi": b.hi, "count": b.count}
                    for b in analytics.histogram(
                        [ind.value(name) for ind in inds], req.bin_count
                    )
                ]
                for name in analytics.INDICATOR_NAMES
            }
            cells = analytics.cell_statuses(tree, sorted(set(req.selected_states)), ordered)
        return {
            "indicators": [
                {
                    "road_id": ind.road,
                    "avg_flow_veh_per_hr": ind.avg_flow,
                    "avg_flow_cap_ratio": ind.avg_flow_cap_ratio,
                    "avg_time_min": ind.avg_time,
                    "avg_fftt_time_ratio": ind.avg_fftt_time_ratio,
                    "scope_flow_veh_per_hr": ind.scope_flow,
                    "scope_flow_cap_ratio": ind.scope_flow_cap_ratio,
                    "scope_time_min": ind.scope_time,
                    "scope_fftt_time_ratio": ind.scope_fftt_time_ratio,
                    "states_present": ind.states_present,
                }
                for ind in inds
            ],
            "histograms": histograms,
            "ordered_road_ids": ordered,
            "cells": [
                {
                    "road_id": c.road,
                    "state_id": c.state,
                    "capacity_veh_per_hr": c.capacity,
                    "volume_veh_per_hr": c.volume,
                    "fftt_min": c.fftt,
                    "time_min": c.actual_time,
                    "delta_time_vs_initial_min": c.delta_time_vs_initial,
                    "is_new": c.is_new,
                }
                for c in cells
            ],
        }

    @app.get("/sessions/{sid}/export")
    def export(sid: str) -> Response:
        session = get_session(sid)
        with session.lock:
            text = save_session(session.tree)
        return Response(content=text, media_type="application/json")

    @app.post("/sessions/import", status_code=201)
    def import_session(req: ImportRequest) -> dict[str, Any]:
        session = register(load_session(req.session))
        return {
            "session_id": session.id,
            "root": state_summary(session.tree, session.tree.root_id),
        }

    return app
