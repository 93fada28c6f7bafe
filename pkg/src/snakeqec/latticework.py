"""Latticework graphs, defect-aware routing, percolation, and shuttle timing.

Logical qubits live in data-loop tiles and move between adjacent tiles
through short interaction edges where two loops run parallel.  Three
strand arrangements are modelled: the square lattice of the main layout,
a honeycomb variant, and a rectangular variant with four-way crossings.
Deactivating links (single edges or whole tiles) models declared defects;
routing avoids them, and percolation estimates say how many can be lost
before the device falls apart.
"""

from __future__ import annotations

import statistics
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

__all__ = [
    "Junction",
    "LatticeGraph",
    "Route",
    "StabiliserCycle",
    "TimingParams",
    "build_lattice",
    "percolation_estimate",
    "percolation_threshold",
    "route_snake",
    "shuttle_time_model",
]

Tile = tuple[int, int]
Edge = tuple[Tile, Tile]

_TOPOLOGIES = ("square", "hexagonal", "rectangular")
_PERCOLATION_MODES = ("site", "bond")

# Stabiliser edges per data tile: sides facing an ancilla loop.
_STABILISER_SIDES = {"square": 4, "hexagonal": 3, "rectangular": 4}


@dataclass(frozen=True)
class Junction:
    """A track branch point and the tiles it serves."""

    tiles: tuple[Tile, ...]
    degree: int
    port: int = 0


@dataclass(frozen=True)
class TimingParams:
    """Shuttle speed, dot pitch, and the fixed per-cycle overhead.

    The overhead lumps initialisation, gates, and measurement into one
    budget chosen so the default stabilise-in-place cycle at distance 30
    lands on 3 us.
    """

    speed: float = 10.0
    dot_pitch: float = 100e-9
    overhead: float = 2.4e-6

    def __post_init__(self) -> None:
        if self.speed <= 0 or self.dot_pitch <= 0:
            raise ValueError("speed and dot_pitch must be positive")
        if self.overhead < 0:
            raise ValueError("overhead must be non-negative")


@dataclass(frozen=True)
class StabiliserCycle:
    """One stabiliser cycle: to-and-fro (2d increments) or forward (d)."""

    distance: int
    mode: str = "in_place"

    def __post_init__(self) -> None:
        if self.distance < 1:
            raise ValueError("distance must be at least 1")
        if self.mode not in ("in_place", "forward"):
            raise ValueError(f"unknown cycle mode {self.mode!r}")

    @property
    def increments(self) -> int:
        return 2 * self.distance if self.mode == "in_place" else self.distance


@dataclass(frozen=True)
class Route:
    """Contiguous tile path using only active links.

    ``increments`` counts dot steps: each edge crossing costs half the
    destination loop circumference plus the bridge, l2 // 2 + l_int.
    """

    tiles: tuple[Tile, ...]
    edges: tuple[Edge, ...]
    increments: int
    duration: float


@dataclass(frozen=True)
class LatticeGraph:
    """Immutable latticework with per-link and per-tile defect status."""

    topology: str
    width: int
    height: int
    loop_small: int
    loop_large: int
    tiles: tuple[Tile, ...]
    interaction_edges: tuple[Edge, ...]
    stabiliser_edges: tuple[tuple[Tile, int], ...]
    junctions: tuple[Junction, ...]
    deactivated_edges: frozenset[Edge] = field(default_factory=frozenset)
    deactivated_tiles: frozenset[Tile] = field(default_factory=frozenset)

    @property
    def interaction_length(self) -> int:
        """Dots on an interaction edge: l2 - l1."""
        return self.loop_large - self.loop_small

    def link_status(self) -> dict[Edge, str]:
        return {
            e: "deactivated" if e in self.deactivated_edges else "active"
            for e in self.interaction_edges
        }

    def is_active(self, edge: Edge) -> bool:
        u, v = edge
        return (
            _canonical(u, v) not in self.deactivated_edges
            and u not in self.deactivated_tiles
            and v not in self.deactivated_tiles
        )

    def deactivate(
        self, edges: Iterable[Edge] = (), tiles: Iterable[Tile] = ()
    ) -> "LatticeGraph":
        """Return a copy with the given links or whole tiles marked defective."""
        edge_set = {_canonical(*e) for e in edges}
        tile_set = set(tiles)
        unknown_edges = edge_set - set(self.interaction_edges)
        if unknown_edges:
            raise ValueError(f"unknown interaction edges: {sorted(unknown_edges)}")
        unknown_tiles = tile_set - set(self.tiles)
        if unknown_tiles:
            raise ValueError(f"unknown tiles: {sorted(unknown_tiles)}")
        return replace(
            self,
            deactivated_edges=self.deactivated_edges | edge_set,
            deactivated_tiles=self.deactivated_tiles | tile_set,
        )


def _canonical(u: Tile, v: Tile) -> Edge:
    return (u, v) if u <= v else (v, u)


def _grid_edges(width: int, height: int) -> list[Edge]:
    edges: list[Edge] = []
    for r in range(height):
        for c in range(width):
            if c + 1 < width:
                edges.append(((r, c), (r, c + 1)))
            if r + 1 < height:
                edges.append(((r, c), (r + 1, c)))
    return edges


def _honeycomb_edges(width: int, height: int) -> list[Edge]:
    # Brick-wall representation: all horizontal links, vertical links only
    # from even-parity tiles, capping every degree at 3.
    edges: list[Edge] = []
    for r in range(height):
        for c in range(width):
            if c + 1 < width:
                edges.append(((r, c), (r, c + 1)))
            if r + 1 < height and (r + c) % 2 == 0:
                edges.append(((r, c), (r + 1, c)))
    return edges


def build_lattice(
    topology: str, width: int, height: int, l1: int, l2: int
) -> LatticeGraph:
    """Build a deterministic latticework graph with all links active.

    Tiles are data loops of ``l2`` dots; ancilla loops hold ``l1`` dots and
    sit across the stabiliser edges.  Junction degree is 3 for the square
    and honeycomb strand layouts and 4 for the rectangular one.
    """
    if topology not in _TOPOLOGIES:
        raise ValueError(f"unknown topology {topology!r}")
    if width < 2 or height < 2:
        raise ValueError("lattice dimensions must be at least 2")
    if l1 < 4 or l2 <= l1:
        raise ValueError("loop sizes require l2 > l1 >= 4")

    tiles = tuple((r, c) for r in range(height) for c in range(width))
    if topology == "hexagonal":
        edges = _honeycomb_edges(width, height)
    else:
        edges = _grid_edges(width, height)
    edges = tuple(sorted(_canonical(*e) for e in edges))

    if topology == "rectangular":
        junctions = tuple(
            Junction(((r - 1, c - 1), (r - 1, c), (r, c - 1), (r, c)), 4)
            for r in range(1, height)
            for c in range(1, width)
        )
    else:
        junctions = tuple(
            Junction(edge, 3, port) for edge in edges for port in (0, 1)
        )

    sides = _STABILISER_SIDES[topology]
    stabiliser_edges = tuple((tile, k) for tile in tiles for k in range(sides))
    return LatticeGraph(
        topology=topology,
        width=width,
        height=height,
        loop_small=l1,
        loop_large=l2,
        tiles=tiles,
        interaction_edges=edges,
        stabiliser_edges=stabiliser_edges,
        junctions=junctions,
    )


def route_snake(
    graph: LatticeGraph,
    source: Tile,
    target: Tile,
    timing: TimingParams | None = None,
) -> Route | None:
    """Shortest active path by edge count, or None when unreachable.

    Breadth-first search over active tiles and links; a deactivated tile
    blocks every route through it, including the endpoints.
    """
    for tile in (source, target):
        if tile not in set(graph.tiles):
            raise ValueError(f"unknown tile {tile!r}")
    timing = timing or TimingParams()
    if source in graph.deactivated_tiles or target in graph.deactivated_tiles:
        return None

    adjacency: dict[Tile, list[Tile]] = {t: [] for t in graph.tiles}
    for u, v in graph.interaction_edges:
        if graph.is_active((u, v)):
            adjacency[u].append(v)
            adjacency[v].append(u)

    parents: dict[Tile, Tile] = {}
    seen = {source}
    queue = deque([source])
    while queue:
        tile = queue.popleft()
        if tile == target:
            break
        for nxt in adjacency[tile]:
            if nxt not in seen:
                seen.add(nxt)
                parents[nxt] = tile
                queue.append(nxt)
    if target not in seen:
        return None

    path = [target]
    while path[-1] != source:
        path.append(parents[path[-1]])
    path.reverse()
    edges = tuple(_canonical(a, b) for a, b in zip(path, path[1:]))
    per_edge = graph.loop_large // 2 + graph.interaction_length
    increments = per_edge * len(edges)
    duration = increments * timing.dot_pitch / timing.speed
    return Route(tuple(path), edges, increments, duration)


def shuttle_time_model(
    subject: Route | StabiliserCycle, params: TimingParams | None = None
) -> float:
    """Duration of a route (pure shuttling) or a full stabiliser cycle."""
    params = params or TimingParams()
    if isinstance(subject, Route):
        return subject.increments * params.dot_pitch / params.speed
    if isinstance(subject, StabiliserCycle):
        shuttle = subject.increments * params.dot_pitch / params.speed
        return shuttle + params.overhead
    raise TypeError("subject must be a Route or a StabiliserCycle")


def _percolation_elements(
    topology: str, size: int
) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
    """Node count, edge array (E, 2), and left/right boundary node indices."""
    if topology == "hexagonal":
        edges = _honeycomb_edges(size, size)
    else:
        edges = _grid_edges(size, size)
    index = lambda t: t[0] * size + t[1]  # noqa: E731
    edge_idx = np.array([(index(u), index(v)) for u, v in edges], dtype=np.int64)
    left = np.arange(size, dtype=np.int64) * size
    right = left + size - 1
    return size * size, edge_idx, left, right


def _spans_components(
    n_nodes: int,
    edges: np.ndarray,
    node_mask: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
) -> bool:
    keep = node_mask[edges[:, 0]] & node_mask[edges[:, 1]]
    kept = edges[keep]
    data = np.ones(len(kept), dtype=np.int8)
    matrix = coo_matrix((data, (kept[:, 0], kept[:, 1])), shape=(n_nodes, n_nodes))
    _, labels = connected_components(matrix, directed=False)
    left_labels = labels[left[node_mask[left]]]
    right_labels = labels[right[node_mask[right]]]
    return bool(np.intersect1d(left_labels, right_labels).size)


def _spans_grid_site(size: int, mask: np.ndarray) -> bool:
    labels, count = ndimage.label(mask.reshape(size, size))
    if count == 0:
        return False
    shared = np.intersect1d(labels[:, 0], labels[:, -1])
    return bool(shared[shared > 0].size)


def _spans_site(
    topology: str,
    size: int,
    n_nodes: int,
    edges: np.ndarray,
    mask: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
) -> bool:
    # ndimage.label only matches 4-connectivity on the plain grids.
    if topology != "hexagonal":
        return _spans_grid_site(size, mask)
    return _spans_components(n_nodes, edges, mask, left, right)


def _spans_bond(
    n_nodes: int,
    edges: np.ndarray,
    edge_mask: np.ndarray,
    left: np.ndarray,
    right: np.ndarray,
) -> bool:
    kept = edges[edge_mask]
    data = np.ones(len(kept), dtype=np.int8)
    matrix = coo_matrix((data, (kept[:, 0], kept[:, 1])), shape=(n_nodes, n_nodes))
    _, labels = connected_components(matrix, directed=False)
    return bool(np.intersect1d(labels[left], labels[right]).size)


def _check_percolation_args(
    topology: str, size: int, trials: int, mode: str
) -> None:
    if topology not in _TOPOLOGIES:
        raise ValueError(f"unknown topology {topology!r}")
    if mode not in _PERCOLATION_MODES:
        raise ValueError(f"mode must be one of {_PERCOLATION_MODES}")
    if size < 32:
        raise ValueError("size must be at least 32")
    if trials < 1000:
        raise ValueError("trials must be at least 1000")


def percolation_estimate(
    topology: str,
    deactivation_fraction: float,
    size: int = 64,
    trials: int = 2000,
    seed: int = 0,
    mode: str = "bond",
) -> float:
    """Probability that the active lattice still spans left to right.

    ``mode`` picks the defect granularity: "site" deactivates whole tiles,
    "bond" deactivates single interaction edges.
    """
    _check_percolation_args(topology, size, trials, mode)
    if not 0.0 <= deactivation_fraction <= 1.0:
        raise ValueError("deactivation_fraction must lie in [0, 1]")

    n_nodes, edges, left, right = _percolation_elements(topology, size)
    n_elements = n_nodes if mode == "site" else len(edges)
    spans = 0
    for child in np.random.SeedSequence(seed).spawn(trials):
        rng = np.random.default_rng(child)
        active = rng.random(n_elements) >= deactivation_fraction
        if mode == "site":
            ok = _spans_site(topology, size, n_nodes, edges, active, left, right)
        else:
            ok = _spans_bond(n_nodes, edges, active, left, right)
        spans += ok
    return spans / trials


def percolation_threshold(
    topology: str,
    mode: str = "bond",
    size: int = 64,
    trials: int = 2000,
    seed: int = 0,
) -> float:
    """Critical active fraction where the spanning probability crosses 1/2.

    Each trial draws one uniform variate per element, making the spanning
    indicator monotone in the activation rank; a binary search finds the
    smallest spanning rank and the median critical fraction over trials is
    exactly the half-crossing point.  The tolerable deactivation fraction
    is one minus this value.
    """
    _check_percolation_args(topology, size, trials, mode)
    n_nodes, edges, left, right = _percolation_elements(topology, size)
    n_elements = n_nodes if mode == "site" else len(edges)

    def spans_at_rank(order: np.ndarray, rank: int) -> bool:
        active = np.zeros(n_elements, dtype=bool)
        active[order[:rank]] = True
        if mode == "site":
            return _spans_site(topology, size, n_nodes, edges, active, left, right)
        return _spans_bond(n_nodes, edges, active, left, right)

    criticals = []
    for child in np.random.SeedSequence(seed).spawn(trials):
        rng = np.random.default_rng(child)
        order = np.argsort(rng.random(n_elements))
        lo, hi = 0, n_elements  # lo never spans, hi always does
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if spans_at_rank(order, mid):
                hi = mid
            else:
                lo = mid
        criticals.append(hi / n_elements)
    return statistics.median(criticals)
