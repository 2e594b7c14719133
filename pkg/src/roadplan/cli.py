"""Command-line entry points: serve the HTTP API, run one-shot assignments,
and validate input files.

Every flag can also be supplied through an APP_-prefixed environment
variable (e.g. APP_NETWORK, APP_PORT); explicit flags win.
"""

from __future__ import annotations

import json
import socket
import sys
from pathlib import Path

import click

from .assignment import AssignmentParams, solve_sue, total_system_travel_time
from .datasets import DATASET_NAMES, load_dataset
from .errors import RoadPlanError
from .ingest import apply_coords, parse_coords, parse_network, parse_trips
from .network import Demand, RoadNetwork, validate_demands


def _load_inputs(
    network_path: str,
    trips_path: str | None,
    coords_path: str | None,
    projection: str,
) -> tuple[RoadNetwork, list[Demand]]:
    network = parse_network(Path(network_path).read_text(encoding="utf-8"))
    if coords_path is not None:
        coords = parse_coords(Path(coords_path).read_text(encoding="utf-8"))
        network = apply_coords(network, coords, projection)
    demands: list[Demand] = []
    if trips_path is not None:
        demands = parse_trips(Path(trips_path).read_text(encoding="utf-8"))
    return network, demands


@click.group()
def main() -> None:
    """Traffic what-if planning engine."""


@main.command()
@click.option("--network", envvar="APP_NETWORK", type=click.Path(exists=True), help="Network file.")
@click.option("--trips", envvar="APP_TRIPS", type=click.Path(exists=True), help="Trip table file.")
@click.option("--coords", envvar="APP_COORDS", type=click.Path(exists=True), help="Node coordinates file.")
@click.option("--dataset", envvar="APP_DATASET", type=click.Choice(DATASET_NAMES), help="Built-in dataset instead of files.")
@click.option("--projection", envvar="APP_PROJECTION", type=click.Choice(["lonlat", "planar"]), default="lonlat", show_default=True)
@click.option("--host", envvar="APP_HOST", default="127.0.0.1", show_default=True)
@click.option("--port", envvar="APP_PORT", type=int, default=8000, show_default=True, help="0 picks a free port.")
@click.option("--theta", envvar="APP_THETA", type=float, default=0.3, show_default=True)
@click.option("--k-paths", envvar="APP_K_PATHS", type=int, default=8, show_default=True)
def serve(
    network: str | None,
    trips: str | None,
    coords: str | None,
    dataset: str | None,
    projection: str,
    host: str,
    port: int,
    theta: float,
    k_paths: float,
) -> None:
    """Start the HTTP/JSON service.

    When input files or a dataset are given, an initial session is created at
    startup and its id printed; clients can also open their own sessions via
    POST /sessions.
    """
    import uvicorn

    from .service import CreateSessionRequest, create_app

    app = create_app()
    if dataset is not None or network is not None:
        req = CreateSessionRequest(
            dataset=dataset,
            network=Path(network).read_text(encoding="utf-8") if network else None,
            trips=Path(trips).read_text(encoding="utf-8") if trips else None,
            coords=Path(coords).read_text(encoding="utf-8") if coords else None,
            projection=projection,
            theta=theta,
            k_paths=k_paths,
        )
        session = app.state.build_session(req)
        click.echo(f"session {session.id}")
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    sock.bind((host, port))
    actual_port = sock.getsockname()[1]
    click.echo(f"listening on http://{host}:{actual_port}")
    config = uvicorn.Config(app, log_level="warning")
    server = uvicorn.Server(config)
    server.run(sockets=[sock])


@main.command()
@click.option("--network", envvar="APP_NETWORK", type=click.Path(exists=True), help="Network file.")
@click.option("--trips", envvar="APP_TRIPS", type=click.Path(exists=True), help="Trip table file.")
@click.option("--coords", envvar="APP_COORDS", type=click.Path(exists=True), help="Node coordinates file.")
@click.option("--dataset", envvar="APP_DATASET", type=click.Choice(DATASET_NAMES), help="Built-in dataset instead of files.")
@click.option("--projection", envvar="APP_PROJECTION", type=click.Choice(["lonlat", "planar"]), default="lonlat", show_default=True)
@click.option("--out", envvar="APP_OUT", type=click.Path(), required=True, help="Output JSON path ('-' for stdout).")
@click.option("--theta", envvar="APP_THETA", type=float, default=0.3, show_default=True)
@click.option("--k-paths", envvar="APP_K_PATHS", type=int, default=8, show_default=True)
@click.option("--max-iters", envvar="APP_MAX_ITERS", type=int, default=1000, show_default=True)
def assign(
    network: str | None,
    trips: str | None,
    coords: str | None,
    dataset: str | None,
    projection: str,
    out: str,
    theta: float,
    k_paths: int,
    max_iters: int,
) -> None:
    """Solve one equilibrium and write road statuses plus the metric as JSON."""
    try:
        if dataset is not None:
            net, demands = load_dataset(dataset)
        else:
            if network is None or trips is None:
                raise click.UsageError("either --dataset or --network and --trips are required")
            net, demands = _load_inputs(network, trips, coords, projection)
        params = AssignmentParams(theta=theta, k_paths=k_paths, max_iters=max_iters)
        result = solve_sue(net, demands, params)
    except RoadPlanError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    payload = {
        "converged": result.converged,
        "iterations": result.iterations,
        "final_rel_gap_ratio": result.final_rel_gap,
        "metric_veh_min": total_system_travel_time(result),
        "roads": [
            {
                "road_id": rid,
                "from_node": net.roads[rid].from_node,
                "to_node": net.roads[rid].to_node,
                "capacity_veh_per_hr": net.roads[rid].capacity,
                "fftt_min": net.roads[rid].fftt,
                "volume_veh_per_hr": result.statuses[rid].actual_volume,
                "time_min": result.statuses[rid].actual_time,
            }
            for rid in sorted(result.statuses)
        ],
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out == "-":
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8")
        click.echo(f"wrote {out}")


@main.command()
@click.option("--network", envvar="APP_NETWORK", type=click.Path(exists=True), required=True, help="Network file.")
@click.option("--trips", envvar="APP_TRIPS", type=click.Path(exists=True), help="Trip table file.")
@click.option("--coords", envvar="APP_COORDS", type=click.Path(exists=True), help="Node coordinates file.")
@click.option("--projection", envvar="APP_PROJECTION", type=click.Choice(["lonlat", "planar"]), default="lonlat", show_default=True)
def validate(
    network: str, trips: str | None, coords: str | None, projection: str
) -> None:
    """Parse and invariant-check input files; exit 0 if everything holds."""
    try:
        net, demands = _load_inputs(network, trips, coords, projection)
        if demands:
            validate_demands(net, demands)
    except RoadPlanError as exc:
        click.echo(f"invalid: {exc}", err=True)
        sys.exit(1)
    summary = f"{len(net.nodes)} nodes, {len(net.roads)} roads"
    if demands:
        summary += f", {len(demands)} OD pairs, {sum(d.trips for d in demands):g} trips"
    click.echo(f"ok: {summary}")


if __name__ == "__main__":
    main()
