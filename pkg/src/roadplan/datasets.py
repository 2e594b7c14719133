"""Built-in benchmark fixtures.

``braess`` is a four-intersection, five-road network with a single 1000-trip
OD pair, parameterized so that closing its shortcut road improves the system
(the classic paradox). ``siouxfalls`` is the 24-intersection, 76-road
benchmark with 552 OD pairs totaling 360,600 trips.
"""

from __future__ import annotations

from importlib import resources

from .ingest import apply_coords, parse_coords, parse_network, parse_trips
from .network import Demand, RoadNetwork

_PROJECTIONS = {"braess": "lonlat", "siouxfalls": "planar"}

DATASET_NAMES = tuple(sorted(_PROJECTIONS))


def _read(name: str) -> str:
    return resources.files("roadplan.data").joinpath(name).read_text(encoding="utf-8")


def dataset_files(name: str) -> tuple[str, str, str]:
    """Raw (network, trips, coords) file contents of a built-in dataset."""
    if name not in _PROJECTIONS:
        raise KeyError(f"unknown dataset {name!r}; available: {', '.join(DATASET_NAMES)}")
    return (
        _read(f"{name}_net.tntp"),
        _read(f"{name}_trips.tntp"),
        _read(f"{name}_nodes.tntp"),
    )


def load_dataset(name: str) -> tuple[RoadNetwork, list[Demand]]:
    net_text, trips_text, nodes_text = dataset_files(name)
    network = parse_network(net_text)
    network = apply_coords(network, parse_coords(nodes_text), projection=_PROJECTIONS[name])
    demands = parse_trips(trips_text)
    return network, demands
