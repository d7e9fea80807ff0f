"""Nominal defect-free Pegasus topology P_m.

Qubits are addressed either by linear index in [0, 24*m*(m-1)) or by
coordinate (u, w, k, z):

    u : orientation, 0 = vertical, 1 = horizontal
    w : perpendicular tile offset, in [0, m)
    k : qubit offset within a tile, in [0, 12)
    z : parallel tile offset, in [0, m-1)

    linear = u*12*m*(m-1) + w*12*(m-1) + k*(m-1) + z

Couplers follow the published rules: external couplers along z, odd
couplers between the (2j, 2j+1) offset pairs, and internal couplers
between orientations wherever the two qubits' line segments cross under
the standard offset lists below.
"""

from __future__ import annotations

from typing import NamedTuple

from .exceptions import ConfigError, QubitRangeError

# Standard shift lists for the production Pegasus family (offsets index 0).
VERTICAL_OFFSETS = (2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6)
HORIZONTAL_OFFSETS = (6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10)

MAX_DEGREE = 15


class PegasusCoord(NamedTuple):
    u: int
    w: int
    k: int
    z: int


class PegasusGraph:
    """Immutable adjacency structure for P_m.

    Construct via :func:`build_pegasus`. Safe for unrestricted concurrent
    reads once built.
    """

    __slots__ = ("m", "num_qubits", "_adjacency", "_neighbor_sets")

    def __init__(self, m: int, adjacency: tuple[tuple[int, ...], ...]):
        self.m = m
        self.num_qubits = 24 * m * (m - 1)
        self._adjacency = adjacency
        self._neighbor_sets = tuple(frozenset(nbrs) for nbrs in adjacency)

    @property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        return self._adjacency

    @property
    def num_edges(self) -> int:
        return sum(len(nbrs) for nbrs in self._adjacency) // 2

    def check_index(self, q: int) -> None:
        if not isinstance(q, (int,)) or isinstance(q, bool):
            raise QubitRangeError(f"qubit index must be an int, got {q!r}")
        if not 0 <= q < self.num_qubits:
            raise QubitRangeError(
                f"qubit index {q} out of range [0, {self.num_qubits})"
            )

    def neighbors(self, q: int) -> tuple[int, ...]:
        self.check_index(q)
        return self._adjacency[q]

    def is_edge(self, a: int, b: int) -> bool:
        self.check_index(a)
        self.check_index(b)
        return b in self._neighbor_sets[a]

    def degree(self, q: int) -> int:
        self.check_index(q)
        return len(self._adjacency[q])

    def edges(self):
        """Yield each edge once as (a, b) with a < b, ascending."""
        for a, nbrs in enumerate(self._adjacency):
            for b in nbrs:
                if a < b:
                    yield (a, b)

    def write_edge_list(self, path) -> None:
        """Export as text, one "a b" pair per line, ascending order."""
        with open(path, "w", encoding="ascii") as fh:
            for a, b in self.edges():
                fh.write(f"{a} {b}\n")


def to_linear(g: PegasusGraph, c: PegasusCoord) -> int:
    """Coordinate -> linear index. Raises QubitRangeError when out of range."""
    u, w, k, z = c
    m = g.m
    if not (0 <= u < 2 and 0 <= w < m and 0 <= k < 12 and 0 <= z < m - 1):
        raise QubitRangeError(f"coordinate {tuple(c)} out of range for m={m}")
    return ((u * m + w) * 12 + k) * (m - 1) + z


def from_linear(g: PegasusGraph, q: int) -> PegasusCoord:
    """Linear index -> coordinate. Inverse of :func:`to_linear`."""
    g.check_index(q)
    q, z = divmod(q, g.m - 1)
    q, k = divmod(q, 12)
    u, w = divmod(q, g.m)
    return PegasusCoord(u, w, k, z)


def _internal_partners(m: int, w: int, k: int, z: int):
    """Horizontal qubits whose segment crosses vertical qubit (0, w, k, z)."""
    x = 12 * w + k
    y0 = 12 * z + VERTICAL_OFFSETS[k]
    for y in range(y0, y0 + 12):
        w2, k2 = divmod(y, 12)
        z2 = (x - HORIZONTAL_OFFSETS[k2]) // 12
        if 0 <= z2 < m - 1:
            yield (w2, k2, z2)


def build_pegasus(m: int) -> PegasusGraph:
    """Build the nominal P_m graph. Deterministic for a given m."""
    if not isinstance(m, int) or isinstance(m, bool) or m < 2:
        raise ConfigError(f"Pegasus size parameter must be an integer >= 2, got {m!r}")

    num = 24 * m * (m - 1)
    half = num // 2  # linear offset of the u=1 block
    mm1 = m - 1

    def lin(u, w, k, z):
        return ((u * m + w) * 12 + k) * mm1 + z

    adj: list[list[int]] = [[] for _ in range(num)]

    def add(a, b):
        adj[a].append(b)
        adj[b].append(a)

    for u in range(2):
        for w in range(m):
            for k in range(12):
                base = lin(u, w, k, 0)
                # external couplers along z
                for z in range(mm1 - 1):
                    add(base + z, base + z + 1)
                # odd couplers between the (2j, 2j+1) pair
                if k % 2 == 0:
                    for z in range(mm1):
                        add(base + z, lin(u, w, k + 1, z))

    for w in range(m):
        for k in range(12):
            for z in range(mm1):
                a = lin(0, w, k, z)
                for w2, k2, z2 in _internal_partners(m, w, k, z):
                    add(a, half + lin(0, w2, k2, z2))

    return PegasusGraph(m, tuple(tuple(sorted(nbrs)) for nbrs in adj))
