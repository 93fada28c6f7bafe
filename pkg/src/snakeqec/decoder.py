"""Space-time detection graph, exact matching decoder, complementary gap.

Detection events live on X stabilisers only (Z-sector decoding).  The
graph has one layer per noisy round plus, by default, a perfect readout
layer.  Two virtual boundary vertices terminate the horizontal error
chains; an explanation's logical class is the parity of its left-boundary
edges, since the logical X support is exactly the first data column.

Decoding is an exact minimum T-join: the syndrome (plus boundary vertices
fixing the class parity) is matched over shortest-path distances, which
for unit edge weights gives the true minimum explanation weight per
logical class.  The complementary gap is the difference between the two
class minima.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .geometry import CodeLayout
from .noise import ErrorPattern, hook_pairs

_DP_LIMIT = 14  # bitmask matching beyond this falls back to blossom


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    data_flips: tuple[int, ...]
    kind: str  # "space", "time" or "hook"


@dataclass(frozen=True)
class MatchResult:
    correction: frozenset[int]
    logical_flip: bool
    weight: int
    edges: tuple[int, ...]


@dataclass(frozen=True)
class GapResult:
    gap: int
    weights: tuple[int, int]  # (no-flip class, flip class)


class DetectionGraph:
    """Immutable decoding graph for a layout and round count."""

    def __init__(self, layout: CodeLayout, rounds: int, measurement_noise: bool = True):
        if rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {rounds}")
        self.layout = layout
        self.rounds = rounds
        self.measurement_noise = measurement_noise
        self.n_layers = rounds + 1 if measurement_noise else rounds

        x_stabs = layout.x_stabilisers()
        self.x_stabs = x_stabs
        self.x_local = {s.index: i for i, s in enumerate(x_stabs)}
        self.n_x = len(x_stabs)
        self.n_detectors = self.n_x * self.n_layers
        self.boundary_left = self.n_detectors
        self.boundary_right = self.n_detectors + 1

        d = layout.distance
        logical = frozenset(layout.logical_x)  # first column of data

        # X neighbours of every data qubit; missing corner checks become
        # the boundary on that side.
        ends: list[tuple[int, ...]] = []
        for q, (r, c) in enumerate(layout.data_coords):
            nb = [self.x_local[s.index] for s in x_stabs if q in s.support]
            extra = []
            if c == 0:
                extra.append(self.boundary_left)
            if c == d - 1:
                extra.append(self.boundary_right)
            assert len(nb) + len(extra) == 2
            ends.append(tuple(nb) + tuple(extra))
        self._data_ends = ends

        edges: list[Edge] = []
        seen: dict[tuple[int, int], int] = {}

        def vid(local: int, layer: int) -> int:
            if local >= self.n_detectors:  # boundary ids are layerless
                return local
            return layer * self.n_x + local

        def add(u: int, v: int, flips: tuple[int, ...], kind: str):
            key = (min(u, v), max(u, v))
            parity = len(logical.intersection(flips)) % 2
            if key in seen:
                other = edges[seen[key]]
                assert len(logical.intersection(other.data_flips)) % 2 == parity
                return
            seen[key] = len(edges)
            edges.append(Edge(key[0], key[1], flips, kind))

        for layer in range(self.n_layers):
            for q, (a, b) in enumerate(self._data_ends):
                add(vid(a, layer), vid(b, layer), (q,), "space")

        if measurement_noise:
            for layer in range(self.n_layers - 1):
                for i in range(self.n_x):
                    add(vid(i, layer), vid(i, layer + 1), (), "time")
            for _, (q1, q2) in hook_pairs(layout):
                foot = set(self._data_ends[q1]).symmetric_difference(self._data_ends[q2])
                if not foot:
                    continue  # the flip pair is itself a stabiliser
                assert len(foot) == 2
                a, b = sorted(foot)
                for layer in range(1, self.n_layers):
                    add(vid(a, layer), vid(b, layer), (q1, q2), "hook")

        self.edges = tuple(edges)
        self._adj: list[list[tuple[int, int]]] = [
            [] for _ in range(self.n_detectors + 2)
        ]
        for idx, e in enumerate(self.edges):
            self._adj[e.u].append((e.v, idx))
            self._adj[e.v].append((e.u, idx))
        self._bfs_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

        # support incidence matrix for fast syndrome computation
        self._supp = np.zeros((self.n_x, layout.n_data), dtype=np.uint8)
        for i, s in enumerate(x_stabs):
            self._supp[i, list(s.support)] = 1
        self._logical_mask = np.zeros(layout.n_data, dtype=np.uint8)
        self._logical_mask[list(logical)] = 1

    # ------------------------------------------------------------------
    # syndromes

    def detector_id(self, stab_index: int, layer: int) -> int:
        if layer < 0 or layer >= self.n_layers:
            raise ValueError(f"layer {layer} outside 0..{self.n_layers - 1}")
        return layer * self.n_x + self.x_local[stab_index]

    def detector_events(self, pattern: ErrorPattern) -> frozenset[int]:
        """Difference syndrome of a sampled pattern, as detector ids."""
        n = self.layout.n_data
        L = self.n_layers
        last_flip_round = self.rounds if self.measurement_noise else self.rounds - 1
        zmat = np.zeros((L, n), dtype=np.uint8)
        for q, t in pattern.z_flips:
            if not 0 <= q < n or not 0 <= t <= last_flip_round:
                raise ValueError(f"z flip ({q}, {t}) outside layout or schedule")
            zmat[t, q] ^= 1
        if not self.measurement_noise and (pattern.meas_flips or pattern.outcome_flips):
            raise ValueError("outcome flips need a measurement-noise graph")

        cum = np.cumsum(zmat, axis=0) & 1
        out = (cum @ self._supp.T) & 1  # (layer, x-local) stabiliser parities
        for store in (pattern.meas_flips, pattern.outcome_flips):
            for s, t in store:
                if s not in self.x_local:
                    raise ValueError(f"outcome flip on non-X stabiliser {s}")
                if not 0 <= t < self.rounds:
                    raise ValueError(f"outcome flip round {t} outside schedule")
                out[t, self.x_local[s]] ^= 1

        events = out.copy()
        events[1:] ^= out[:-1]
        ids = np.flatnonzero(events.reshape(-1))
        return frozenset(int(i) for i in ids)

    def logical_flip_of(self, pattern: ErrorPattern) -> bool:
        """True parity picked up by the logical X support."""
        par = 0
        for q, _t in pattern.z_flips:
            par ^= int(self._logical_mask[q])
        return bool(par)

    # ------------------------------------------------------------------
    # shortest paths

    def _bfs(self, src: int) -> tuple[np.ndarray, np.ndarray]:
        cached = self._bfs_cache.get(src)
        if cached is not None:
            return cached
        n = self.n_detectors + 2
        dist = np.full(n, -1, dtype=np.int32)
        via = np.full(n, -1, dtype=np.int32)  # edge index used to reach vertex
        dist[src] = 0
        dq = deque([src])
        while dq:
            u = dq.popleft()
            for v, idx in self._adj[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    via[v] = idx
                    dq.append(v)
        self._bfs_cache[src] = (dist, via)
        return dist, via

    def _path_edges(self, src: int, dst: int) -> list[int]:
        dist, via = self._bfs(src)
        assert dist[dst] >= 0
        out = []
        v = dst
        while v != src:
            idx = via[v]
            out.append(int(idx))
            e = self.edges[idx]
            v = e.u if e.v == v else e.v
        return out


def build_detection_graph(
    layout: CodeLayout, rounds: int, measurement_noise: bool = True
) -> DetectionGraph:
    return DetectionGraph(layout, rounds, measurement_noise)


# ----------------------------------------------------------------------
# exact minimum T-join via matching over shortest-path distances


def _min_pairing_dp(dmat: np.ndarray) -> tuple[int, list[tuple[int, int]]]:
    k = dmat.shape[0]
    full = (1 << k) - 1
    best = {0: (0, [])}

    def solve(mask: int) -> tuple[int, list[tuple[int, int]]]:
        hit = best.get(mask)
        if hit is not None:
            return hit
        i = (mask & -mask).bit_length() - 1  # lowest set index pairs first
        rest = mask & ~(1 << i)
        opt = None
        j = rest
        while j:
            b = j & -j
            jj = b.bit_length() - 1
            w, pairs = solve(rest & ~b)
            cand = w + int(dmat[i, jj])
            if opt is None or cand < opt[0]:
                opt = (cand, pairs + [(i, jj)])
            j &= j - 1
        best[mask] = opt
        return opt

    return solve(full)


def _min_pairing_blossom(dmat: np.ndarray) -> tuple[int, list[tuple[int, int]]]:
    k = dmat.shape[0]
    g = nx.Graph()
    for i in range(k):
        for j in range(i + 1, k):
            g.add_edge(i, j, weight=-int(dmat[i, j]))
    mate = nx.max_weight_matching(g, maxcardinality=True)
    pairs = [(min(i, j), max(i, j)) for i, j in mate]
    total = sum(int(dmat[i, j]) for i, j in pairs)
    return total, sorted(pairs)


def _min_tjoin(graph: DetectionGraph, terminals: list[int]) -> tuple[int, tuple[int, ...]]:
    """Minimum unit-weight T-join value and its edge set (as indices)."""
    if len(terminals) % 2:
        raise ValueError("T-join needs an even terminal count")
    if not terminals:
        return 0, ()
    k = len(terminals)
    dmat = np.zeros((k, k), dtype=np.int64)
    for i, t in enumerate(terminals):
        dist, _ = graph._bfs(t)
        for j in range(k):
            dv = dist[terminals[j]]
            if dv < 0:
                raise ValueError("syndrome vertices are disconnected")
            dmat[i, j] = dv
    if k <= _DP_LIMIT:
        total, pairs = _min_pairing_dp(dmat)
    else:
        total, pairs = _min_pairing_blossom(dmat)
    chosen: set[int] = set()
    for i, j in pairs:
        chosen.symmetric_difference_update(
            graph._path_edges(terminals[i], terminals[j])
        )
    return len(chosen), tuple(sorted(chosen))


def _min_pairing_weight(rows: list[list[int]]) -> int:
    # weight-only twin of _min_pairing_dp; int memo keeps the hot path lean
    k = len(rows)
    memo = {0: 0}

    def solve(mask: int) -> int:
        hit = memo.get(mask)
        if hit is not None:
            return hit
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        row = rows[i]
        best = None
        j = rest
        while j:
            b = j & -j
            cand = solve(rest & ~b) + row[b.bit_length() - 1]
            if best is None or cand < best:
                best = cand
            j &= j - 1
        memo[mask] = best
        return best

    return solve((1 << k) - 1)


def _tjoin_weight(graph: DetectionGraph, terminals: list[int]) -> int:
    """Minimum T-join value without reconstructing the edge set."""
    if len(terminals) % 2:
        raise ValueError("T-join needs an even terminal count")
    if not terminals:
        return 0
    idx = np.asarray(terminals, dtype=np.int64)
    rows = []
    for t in terminals:
        dist = graph._bfs(t)[0][idx]
        if (dist < 0).any():
            raise ValueError("syndrome vertices are disconnected")
        rows.append(dist.tolist())
    if len(terminals) <= _DP_LIMIT:
        return _min_pairing_weight(rows)
    total, _ = _min_pairing_blossom(np.asarray(rows, dtype=np.int64))
    return total


_WEIGHT_CACHE_MAX = 1 << 18


def class_weights(graph: DetectionGraph, syndrome) -> tuple[int, int]:
    """Minimum explanation weights (no-flip class, flip class).

    Same answers as complementary_gap but skips path reconstruction and
    memoises per graph, which matters inside Monte Carlo loops.
    """
    key = frozenset(int(s) for s in syndrome)
    cache = getattr(graph, "_weights_cache", None)
    if cache is None:
        cache = {}
        graph._weights_cache = cache
    hit = cache.get(key)
    if hit is not None:
        return hit
    sigma = _check_syndrome(graph, key)
    bl, br = graph.boundary_left, graph.boundary_right
    t_even = sigma + ([br] if len(sigma) % 2 else [])
    t_odd = sigma + [bl] + ([br] if len(sigma) % 2 == 0 else [])
    result = (_tjoin_weight(graph, t_even), _tjoin_weight(graph, t_odd))
    if len(cache) >= _WEIGHT_CACHE_MAX:
        cache.clear()
    cache[key] = result
    return result


def _check_syndrome(graph: DetectionGraph, syndrome) -> list[int]:
    sigma = sorted(set(int(s) for s in syndrome))
    for s in sigma:
        if not 0 <= s < graph.n_detectors:
            raise ValueError(f"unknown detector id {s}")
    return sigma


def _class_solutions(graph: DetectionGraph, syndrome):
    """Minimum explanations with even (no flip) and odd left-boundary parity."""
    sigma = _check_syndrome(graph, syndrome)
    bl, br = graph.boundary_left, graph.boundary_right
    t_even = sigma + ([br] if len(sigma) % 2 else [])
    t_odd = sigma + [bl] + ([br] if len(sigma) % 2 == 0 else [])
    return _min_tjoin(graph, t_even), _min_tjoin(graph, t_odd)


def _edges_to_result(graph: DetectionGraph, weight: int, edges: tuple[int, ...], flip: bool) -> MatchResult:
    correction: set[int] = set()
    for idx in edges:
        correction.symmetric_difference_update(graph.edges[idx].data_flips)
    return MatchResult(
        correction=frozenset(correction),
        logical_flip=flip,
        weight=weight,
        edges=edges,
    )


def decode_mwpm(graph: DetectionGraph, syndrome) -> MatchResult:
    """Exact minimum-weight explanation of the syndrome.

    Both logical classes are solved exactly; the lighter one wins and ties
    go to the no-flip class.
    """
    (w0, e0), (w1, e1) = _class_solutions(graph, syndrome)
    if w1 < w0:
        return _edges_to_result(graph, w1, e1, True)
    return _edges_to_result(graph, w0, e0, False)


def complementary_gap(graph: DetectionGraph, syndrome) -> GapResult:
    """Weight difference between the two logical classes of explanations."""
    (w0, _), (w1, _) = _class_solutions(graph, syndrome)
    return GapResult(gap=abs(w0 - w1), weights=(w0, w1))
