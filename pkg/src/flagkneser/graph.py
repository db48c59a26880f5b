"""The flag graphs Gamma(n, T) with dense bit-vector adjacency."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .core import (
    Flag,
    ParameterError,
    TypeSet,
    count_flags,
    dual_flag,
    dual_type,
    enumerate_flags,
    full_mask,
    make_type,
)

DEFAULT_VERTEX_CAP = 100_000


class ResourceError(RuntimeError):
    """A configured size, node or time limit would be exceeded."""


def iter_bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def bits_to_list(x: int) -> list[int]:
    return list(iter_bits(x))


def list_to_bits(items) -> int:
    m = 0
    for v in items:
        m |= 1 << v
    return m


@dataclass(frozen=True, eq=False)
class FlagGraph:
    n: int
    T: TypeSet
    vertices: tuple[Flag, ...]
    adjacency: tuple[int, ...]
    degree: int
    index: dict[Flag, int] = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return self.order * self.degree // 2

    @property
    def all_mask(self) -> int:
        return (1 << self.order) - 1

    def adjacent(self, u: int, v: int) -> bool:
        return bool(self.adjacency[u] >> v & 1)

    def edges(self):
        for u, row in enumerate(self.adjacency):
            for v in iter_bits(row >> (u + 1)):
                yield u, u + 1 + v

    def adjacency_matrix(self, dtype=np.float64) -> np.ndarray:
        a = np.zeros((self.order, self.order), dtype=dtype)
        for u, v in self.edges():
            a[u, v] = a[v, u] = 1
        return a

    def key(self) -> str:
        return f"{self.n}:{','.join(map(str, self.T))}"


def _rows_pairwise(n: int, verts: list[Flag]) -> list[int]:
    """Reference construction, one pair at a time."""
    top = full_mask(n)
    size = len(verts)
    rows = [0] * size
    # two flags are adjacent iff every cross pair of levels is disjoint or covering
    for u in range(size):
        fu = verts[u]
        for v in range(u + 1, size):
            fv = verts[v]
            ok = True
            for x in fu:
                for y in fv:
                    if x & y and (x | y) != top:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                rows[u] |= 1 << v
                rows[v] |= 1 << u
    return rows


def _rows(n: int, verts: list[Flag], chunk: int = 256) -> list[int]:
    top = np.uint64(full_mask(n))
    levels = np.array(verts, dtype=np.uint64).reshape(len(verts), -1)
    size, depth = levels.shape
    rows = []
    for lo in range(0, size, chunk):
        block = levels[lo : lo + chunk]
        ok = np.ones((len(block), size), dtype=bool)
        for i in range(depth):
            x = block[:, i][:, None]
            for j in range(depth):
                y = levels[:, j][None, :]
                ok &= ((x & y) == 0) | ((x | y) == top)
        ok[np.arange(len(block)), np.arange(lo, lo + len(block))] = False
        packed = np.packbits(ok, axis=1, bitorder="little")
        rows.extend(int.from_bytes(r.tobytes(), "little") for r in packed)
    return rows


def build_graph(n: int, T, vertex_cap: int = DEFAULT_VERTEX_CAP) -> FlagGraph:
    """Materialize Gamma(n, T); raises :class:`ResourceError` above ``vertex_cap`` vertices."""
    T = make_type(T, n)
    size = count_flags(n, T)
    if size > vertex_cap:
        raise ResourceError(
            f"Gamma({n},{set(T)}) has {size} vertices, above the vertex cap {vertex_cap}"
        )
    verts = enumerate_flags(n, T)
    rows = _rows(n, verts)
    degrees = {r.bit_count() for r in rows}
    if len(degrees) != 1:
        raise AssertionError(f"Gamma({n},{T}) is not regular: degrees {sorted(degrees)}")
    return FlagGraph(
        n=n,
        T=T,
        vertices=tuple(verts),
        adjacency=tuple(rows),
        degree=degrees.pop(),
        index={f: i for i, f in enumerate(verts)},
    )


def is_bipartite(g: FlagGraph) -> tuple[bool, tuple[int, int] | None]:
    """Two-colour ``g`` by BFS; return the verdict and the two colour classes as bit-vectors."""
    color = [-1] * g.order
    for s in range(g.order):
        if color[s] >= 0:
            continue
        color[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in iter_bits(g.adjacency[u]):
                if color[v] < 0:
                    color[v] = 1 - color[u]
                    queue.append(v)
                elif color[v] == color[u]:
                    return False, None
    side0 = list_to_bits(v for v in range(g.order) if color[v] == 0)
    return True, (side0, g.all_mask ^ side0)


def components(g: FlagGraph) -> list[int]:
    """Connected components as bit-vectors, ordered by their smallest vertex."""
    seen = 0
    comps = []
    for s in range(g.order):
        if seen >> s & 1:
            continue
        comp = 1 << s
        frontier = comp
        while frontier:
            nxt = 0
            for u in iter_bits(frontier):
                nxt |= g.adjacency[u]
            frontier = nxt & ~comp
            comp |= frontier
        seen |= comp
        comps.append(comp)
    return comps


def is_complete_bipartite_component(g: FlagGraph, comp: int) -> bool:
    """Check that the subgraph induced on ``comp`` is complete bipartite."""
    members = bits_to_list(comp)
    start = members[0]
    side_a = g.adjacency[start] & comp
    side_b = comp & ~side_a
    if not side_a:
        return len(members) == 1
    for u in iter_bits(side_b):
        if g.adjacency[u] & comp != side_a:
            return False
    for u in iter_bits(side_a):
        if g.adjacency[u] & comp != side_b:
            return False
    return True


def verify_duality_isomorphism(
    n: int, T, vertex_cap: int = DEFAULT_VERTEX_CAP, g: FlagGraph | None = None,
    h: FlagGraph | None = None,
) -> bool:
    """Check that complementing levels is an isomorphism Gamma(n,T) -> Gamma(n, n-T)."""
    T = make_type(T, n)
    g = g or build_graph(n, T, vertex_cap)
    h = h or build_graph(n, dual_type(T, n), vertex_cap)
    if g.order != h.order:
        return False
    image = [h.index.get(dual_flag(f, n)) for f in g.vertices]
    if None in image or len(set(image)) != g.order:
        return False
    for u in range(g.order):
        mapped = 0
        for v in iter_bits(g.adjacency[u]):
            mapped |= 1 << image[v]
        if mapped != h.adjacency[image[u]]:
            return False
    return True


def export_edge_list(g: FlagGraph, out: TextIO) -> None:
    """Write ``g`` in DIMACS edge format with 1-based vertex numbers."""
    out.write(f"c Gamma({g.n},{{{','.join(map(str, g.T))}}})\n")
    out.write(f"p edge {g.order} {g.edge_count}\n")
    for u, v in g.edges():
        out.write(f"e {u + 1} {v + 1}\n")


def read_edge_list(text: str) -> tuple[int, list[tuple[int, int]]]:
    """Parse DIMACS edge text back into ``(order, 0-based edges)``."""
    order = None
    edges = []
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "p":
            order = int(parts[2])
        elif parts[0] == "e":
            edges.append((int(parts[1]) - 1, int(parts[2]) - 1))
        else:
            raise ParameterError(f"unrecognised edge-list line {line!r}")
    if order is None:
        raise ParameterError("edge list has no 'p edge' header")
    return order, edges


def subgraph_adjacency(g: FlagGraph, mask: int) -> list[int]:
    """Adjacency rows of the subgraph induced on ``mask``, relabelled 0..k-1."""
    members = bits_to_list(mask)
    pos = {v: i for i, v in enumerate(members)}
    rows = []
    for v in members:
        rows.append(list_to_bits(pos[w] for w in iter_bits(g.adjacency[v] & mask)))
    return rows
