"""Independent verification oracles.

Everything in this module is deliberately written from first principles
(GF(2) linear algebra, exhaustive state-space search, literal replay of
shuttle positions) rather than calling back into the package's own
algorithms, so tests exercise two genuinely different routes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np


# ---------------------------------------------------------------------------
# GF(2) Pauli algebra


def pauli_vec(n: int, xs=(), zs=()) -> np.ndarray:
    """Binary symplectic vector (x part | z part) of a Pauli on n qubits."""
    v = np.zeros(2 * n, dtype=np.uint8)
    for q in xs:
        v[q] ^= 1
    for q in zs:
        v[n + q] ^= 1
    return v


def symplectic_product(a: np.ndarray, b: np.ndarray) -> int:
    n = len(a) // 2
    return int((a[:n] @ b[n:] + a[n:] @ b[:n]) % 2)


class Gf2Span:
    """Incremental GF(2) row space with membership queries."""

    def __init__(self, width: int):
        self.rows: list[np.ndarray] = []
        self.pivots: list[int] = []
        self.width = width

    def _reduce(self, v: np.ndarray) -> np.ndarray:
        v = v.copy()
        for row, piv in zip(self.rows, self.pivots):
            if v[piv]:
                v ^= row
        return v

    def add(self, v: np.ndarray) -> bool:
        """Insert v; returns False when v was already in the span."""
        v = self._reduce(v)
        nz = np.flatnonzero(v)
        if len(nz) == 0:
            return False
        self.rows.append(v)
        self.pivots.append(int(nz[0]))
        return True

    def contains(self, v: np.ndarray) -> bool:
        return not np.any(self._reduce(v))


def conjugate_through_cnots(vec: np.ndarray, pairs, n_block: int) -> np.ndarray:
    """Conjugate a Pauli on 2*n_block qubits through CNOTs control q -> target q.

    Qubits 0..n_block-1 form the control block, n_block..2*n_block-1 the
    target block.  CNOT propagation: X_c -> X_c X_t, Z_t -> Z_c Z_t.
    """
    n = 2 * n_block
    out = vec.copy()
    for q in pairs:
        c, t = q, n_block + q
        if out[c]:            # x component on control spreads to target
            out[t] ^= 1
        if out[n + t]:        # z component on target spreads to control
            out[n + c] ^= 1
    return out


# ---------------------------------------------------------------------------
# Shuttle schedule replay

def replay_adjacency_events(embedding) -> list[tuple[int, int]]:
    """Replay the shuttle schedule and log every (stabiliser, data) meeting.

    Walks the literal rail positions: after each interaction phase the
    mobile rail moves by the scheduled displacement; an adjacency event is
    recorded whenever the slot aligned with an ancilla belongs to that
    stabiliser's support.
    """
    layout = embedding.layout
    slot_to_data = {s: i for i, s in enumerate(embedding.data_slots)}
    events = []
    offset = 0
    for phase in range(4):
        for stab in layout.stabilisers:
            pos = embedding.ancilla_slots[stab.index]
            aligned = pos - offset
            data = slot_to_data.get(aligned)
            if data is not None and data in stab.support:
                events.append((stab.index, data))
        if phase < 3:
            offset += embedding.shuttle_schedule[phase]
    return events


# ---------------------------------------------------------------------------
# Exhaustive minimum-weight explanations on small detection graphs
#
# A detection graph is abstracted as a list of unit-weight edges between
# vertex ids, where the last two ids are the left and right boundary.  The
# minimum explanation weight for a syndrome, per logical class, is found by
# breadth-first search over GF(2) boundary states, which is exact.


@dataclass
class EdgeGraph:
    n_detectors: int
    edges: list[tuple[int, int]]          # vertex ids; boundaries allowed
    left: int
    right: int


def min_weight_by_class(g: EdgeGraph, syndrome: frozenset[int]) -> tuple[float, float]:
    """Exact (class0, class1) minimum edge counts explaining the syndrome.

    State = frozenset of odd-degree detectors plus the parity of the left
    boundary degree (the logical class).  The right boundary degree is
    unconstrained.  BFS over states is exact for unit weights.
    """
    target = frozenset(syndrome)
    start = (frozenset(), 0)
    best: dict[tuple[frozenset, int], int] = {start: 0}
    queue = deque([start])
    found: dict[int, int] = {}
    while queue:
        state = queue.popleft()
        w = best[state]
        odd, lpar = state
        if odd == target and lpar not in found:
            found[lpar] = w
            if len(found) == 2:
                break
        for u, v in g.edges:
            odd2 = set(odd)
            lp2 = lpar
            for end in (u, v):
                if end == g.left:
                    lp2 ^= 1
                elif end == g.right:
                    pass
                else:
                    if end in odd2:
                        odd2.discard(end)
                    else:
                        odd2.add(end)
            nxt = (frozenset(odd2), lp2)
            if nxt not in best:
                best[nxt] = w + 1
                queue.append(nxt)
    return found.get(0, float("inf")), found.get(1, float("inf"))


def syndrome_of_edges(g: EdgeGraph, chosen: list[tuple[int, int]]) -> tuple[frozenset[int], int]:
    """Odd-degree detector set and left-boundary parity of an edge subset."""
    odd: set[int] = set()
    lpar = 0
    for u, v in chosen:
        for end in (u, v):
            if end == g.left:
                lpar ^= 1
            elif end == g.right:
                pass
            else:
                odd.symmetric_difference_update({end})
    return frozenset(odd), lpar
