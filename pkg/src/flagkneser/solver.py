"""Exact maximum independent set search on bit-vector graphs.

The search branches on a vertex of largest residual degree (lowest index on
ties), first taking it and then discarding it.  Two upper bounds prune a node
and the smaller one wins:

* a greedy partition of the candidates into cliques of the graph, i.e. a
  greedy colouring of the complement, one unit per class;
* an optional *uniform cover* bound.  A cover is a family of small vertex
  tuples such that every vertex lies in the same number ``r`` of them.  Each
  independent set meets a tuple in at most the independence number of the
  subgraph it induces, so summing the per-tuple maxima and dividing by ``r``
  bounds the whole set.  Flag graphs are vertex transitive under relabelling
  of the ground set, so the orbit of one short odd cycle is such a cover
  (see :func:`flagkneser.symmetry.orbit_cover`).

Vertex sets are plain ints with vertex ``i`` at bit ``i``.
"""

from __future__ import annotations

import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .core import ParameterError
from .graph import FlagGraph, ResourceError, iter_bits

_RECURSION = 20_000


@dataclass
class Budget:
    """Node and wall-clock limits; ``None`` means unlimited."""

    max_nodes: int | None = None
    max_seconds: float | None = None


class BudgetExceeded(ResourceError):
    def __init__(self, message: str, lower: int = 0, upper: int | None = None, found: int = 0):
        super().__init__(message)
        self.lower = lower
        self.upper = upper
        self.found = found


@dataclass
class SolveResult:
    alpha: int
    witness: int
    nodes_explored: int
    elapsed: float
    exact: bool = True
    upper: int | None = None
    bounds_used: list[str] = field(default_factory=list)

    @property
    def status(self) -> str:
        return "exact" if self.exact else "bound only"

    @property
    def interval(self) -> tuple[int, int]:
        return (self.alpha, self.alpha if self.exact else self.upper)


def is_independent(members: int, adjacency: Sequence[int] | FlagGraph) -> bool:
    adj = adjacency.adjacency if isinstance(adjacency, FlagGraph) else adjacency
    for v in iter_bits(members):
        if adj[v] & members:
            return False
    return True


def is_maximal_independent(members: int, adjacency: Sequence[int] | FlagGraph) -> bool:
    """True iff no vertex outside ``members`` can be added.

    Raises :class:`ParameterError` when ``members`` is not independent.
    """
    adj = adjacency.adjacency if isinstance(adjacency, FlagGraph) else adjacency
    if not is_independent(members, adj):
        raise ParameterError("vertex set is not independent")
    covered = members
    for v in iter_bits(members):
        covered |= adj[v]
    return covered == (1 << len(adj)) - 1


def complement_rows(adjacency: Sequence[int]) -> list[int]:
    full = (1 << len(adjacency)) - 1
    return [full ^ row ^ (1 << v) for v, row in enumerate(adjacency)]


def clique_cover_count(adjacency: Sequence[int], cand: int) -> int:
    """Greedy colouring of the complement restricted to ``cand``; counts the classes."""
    classes = 0
    left = cand
    while left:
        classes += 1
        pool = left
        while pool:
            low = pool & -pool
            v = low.bit_length() - 1
            left ^= low
            pool &= adjacency[v]
    return classes


def local_alpha_table(adjacency: Sequence[int], verts: Sequence[int]) -> np.ndarray:
    """Independence number of every induced subgraph of ``verts`` (indexed by local mask)."""
    k = len(verts)
    local = [0] * k
    for i, u in enumerate(verts):
        for j, w in enumerate(verts):
            if adjacency[u] >> w & 1:
                local[i] |= 1 << j
    tab = np.zeros(1 << k, dtype=np.int64)
    for m in range(1, 1 << k):
        low = m & -m
        i = low.bit_length() - 1
        tab[m] = max(tab[m ^ low], 1 + tab[m & ~low & ~local[i]])
    return tab


class CoverBound:
    """Uniform-cover upper bound; every tuple in ``tuples`` must induce the same labelled graph."""

    def __init__(self, adjacency: Sequence[int], tuples: Sequence[Sequence[int]]):
        self.tuples = np.asarray(tuples, dtype=np.int64)
        if self.tuples.ndim != 2 or self.tuples.shape[1] > 16:
            raise ParameterError("cover tuples must share a length of at most 16")
        self.order = len(adjacency)
        counts = np.bincount(self.tuples.ravel(), minlength=self.order)
        if counts.min() != counts.max() or counts.min() == 0:
            raise ParameterError("cover is not uniform over the vertex set")
        self.multiplicity = int(counts[0])
        self.table = local_alpha_table(adjacency, [int(x) for x in self.tuples[0]])
        # one shared table needs every tuple to carry the same local adjacency
        for row in self.tuples[:: max(1, len(self.tuples) // 64)]:
            if not np.array_equal(local_alpha_table(adjacency, [int(x) for x in row]), self.table):
                raise ParameterError("cover tuples are not consistently labelled")
        self.weights = 1 << np.arange(self.tuples.shape[1], dtype=np.int64)
        self._nbytes = (self.order + 7) // 8

    def _unpack(self, mask: int) -> np.ndarray:
        raw = np.frombuffer(mask.to_bytes(self._nbytes, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.order].astype(np.int64)

    def __call__(self, chosen: int, cand: int) -> int:
        avail = self._unpack(cand)[self.tuples] @ self.weights
        fixed = self._unpack(chosen)[self.tuples].sum()
        return int((fixed + self.table[avail].sum()) // self.multiplicity)

    @property
    def root_value(self) -> int:
        return self(0, (1 << self.order) - 1)


class _Search:
    def __init__(self, adjacency, cover: CoverBound | None, budget: Budget | None):
        self.adj = list(adjacency)
        self.cover = cover
        self.budget = budget or Budget()
        self.nodes = 0
        self.start = time.monotonic()

    def tick(self):
        self.nodes += 1
        b = self.budget
        if b.max_nodes is not None and self.nodes > b.max_nodes:
            raise BudgetExceeded(f"node budget {b.max_nodes} exceeded")
        if b.max_seconds is not None and self.nodes % 256 == 0:
            if time.monotonic() - self.start > b.max_seconds:
                raise BudgetExceeded(f"time budget {b.max_seconds}s exceeded")

    def bound(self, size: int, chosen: int, cand: int) -> int:
        value = size + clique_cover_count(self.adj, cand)
        if self.cover is not None:
            value = min(value, self.cover(chosen, cand))
        return value

    def force_isolated(self, cand: int) -> int:
        adj = self.adj
        iso = 0
        for v in iter_bits(cand):
            if not adj[v] & cand:
                iso |= 1 << v
        return iso

    def force_pendant(self, chosen: int, cand: int) -> tuple[int, int]:
        """Take isolated and degree-one vertices until none are left.

        Some maximum set contains any vertex of degree at most one, but not
        every maximum set does, so this is for optimisation only.
        """
        adj = self.adj
        changed = True
        while changed and cand:
            changed = False
            for v in iter_bits(cand):
                if not cand >> v & 1:
                    continue
                nb = adj[v] & cand
                if nb & (nb - 1) == 0:
                    chosen |= 1 << v
                    cand &= ~(nb | 1 << v)
                    changed = True
        return chosen, cand

    def split(self, cand: int) -> list[int]:
        """Connected components of the subgraph induced by ``cand``."""
        adj = self.adj
        parts = []
        left = cand
        while left:
            comp = reach = left & -left
            while reach:
                grow = 0
                for v in iter_bits(reach):
                    grow |= adj[v]
                reach = grow & left & ~comp
                comp |= reach
            parts.append(comp)
            left &= ~comp
        return parts

    def branch_vertex(self, cand: int) -> int:
        adj = self.adj
        best_v, best_d = -1, -1
        for v in iter_bits(cand):
            d = (adj[v] & cand).bit_count()
            if d > best_d:
                best_v, best_d = v, d
        return best_v

    def maximize(self, chosen: int, cand: int, best: list):
        """``best`` is ``[size, witness]`` and only strict improvements are kept."""
        self.tick()
        chosen, cand = self.force_pendant(chosen, cand)
        size = chosen.bit_count()
        if not cand:
            if size > best[0]:
                best[0], best[1] = size, chosen
            return
        if self.bound(size, chosen, cand) <= best[0]:
            return
        parts = self.split(cand)
        if len(parts) > 1:
            self.maximize_parts(chosen, parts, best)
            return
        v = self.branch_vertex(cand)
        self.maximize(chosen | 1 << v, cand & ~self.adj[v] & ~(1 << v), best)
        self.maximize(chosen, cand & ~(1 << v), best)

    def maximize_parts(self, chosen: int, parts: list[int], best: list):
        """Components are separate problems; each must beat what the others cannot cover."""
        need = best[0] - chosen.bit_count()
        ubs = [self.bound(0, 0, c) for c in parts]
        if sum(ubs) <= need:
            return
        got = 0
        for k, comp in enumerate(parts):
            floor = need - got - sum(ubs[k + 1:])
            sub = [max(0, floor), 0]
            self.maximize(0, comp, sub)
            if not sub[1]:
                return
            got += sub[0]
            chosen |= sub[1]
        if got > need:
            best[0], best[1] = chosen.bit_count(), chosen

    def collect(self, chosen: int, cand: int, target: int, out: list):
        self.tick()
        iso = self.force_isolated(cand)
        chosen |= iso
        cand ^= iso
        size = chosen.bit_count()
        if not cand:
            if size == target:
                out.append(chosen)
            return
        if self.bound(size, chosen, cand) < target:
            return
        v = self.branch_vertex(cand)
        self.collect(chosen | 1 << v, cand & ~self.adj[v] & ~(1 << v), target, out)
        self.collect(chosen, cand & ~(1 << v), target, out)

    def frontier(self, chosen: int, cand: int, depth: int, out: list):
        """Split the tree ``depth`` levels down, in the sequential visiting order."""
        if depth == 0 or not cand:
            out.append((chosen, cand))
            return
        v = self.branch_vertex(cand)
        self.frontier(chosen | 1 << v, cand & ~self.adj[v] & ~(1 << v), depth - 1, out)
        self.frontier(chosen, cand & ~(1 << v), depth - 1, out)


def _rows_of(g) -> list[int]:
    return list(g.adjacency) if isinstance(g, FlagGraph) else list(g)


def resolve_cover(g, cover) -> CoverBound | None:
    """``cover`` may be ``None``, ``"auto"`` (orbit cover for flag graphs) or a :class:`CoverBound`."""
    if cover is None or isinstance(cover, CoverBound):
        return cover
    if cover == "auto":
        if not isinstance(g, FlagGraph):
            return None
        from .symmetry import orbit_cover

        tuples = orbit_cover(g)
        return CoverBound(g.adjacency, tuples) if tuples else None
    raise ParameterError(f"unknown cover option {cover!r}")


def _solve_chunk(args):
    adj, cover_tuples, budget, chosen, cand, hint = args
    cover = CoverBound(adj, cover_tuples) if cover_tuples is not None else None
    s = _Search(adj, cover, budget)
    best = [hint, 0]
    s.maximize(chosen, cand, best)
    return best, s.nodes


def _collect_chunk(args):
    adj, cover_tuples, budget, chosen, cand, target = args
    cover = CoverBound(adj, cover_tuples) if cover_tuples is not None else None
    s = _Search(adj, cover, budget)
    out: list[int] = []
    s.collect(chosen, cand, target, out)
    return out, s.nodes


def _frontier_depth(workers: int) -> int:
    return max(1, (4 * workers - 1).bit_length())


def alpha_exact(
    g,
    lower_hint: int | None = None,
    budget: Budget | None = None,
    cover="auto",
    workers: int = 1,
    hint_witness: int | None = None,
    transitive: bool | None = None,
) -> SolveResult:
    """Independence number of ``g`` with a witness set.

    ``lower_hint`` is the size of an independent set already known, and the
    search only looks for strictly larger ones; pass ``hint_witness`` so the
    result carries a witness if none is found.  When a budget runs out the
    result has ``exact=False`` and ``upper`` holds the root bound.

    With ``transitive`` (the default for flag graphs, whose automorphism
    group is vertex-transitive) only sets through vertex 0 are searched: any
    larger set has an image that contains it.
    """
    adj = _rows_of(g)
    sys.setrecursionlimit(max(sys.getrecursionlimit(), _RECURSION))
    started = time.monotonic()
    cov = resolve_cover(g, cover)
    full = (1 << len(adj)) - 1
    if hint_witness is not None:
        if not is_independent(hint_witness, adj):
            raise ParameterError("hint witness is not independent")
        best = [hint_witness.bit_count(), hint_witness]
    else:
        # search for a set of the hinted size itself so the witness is real
        best = [max(0, (lower_hint or 0) - 1), 0]
    used = ["clique-cover"] + (["orbit-cover"] if cov is not None else [])
    if transitive is None:
        transitive = isinstance(g, FlagGraph)
    root = (1, full & ~adj[0] & ~1) if transitive and adj else (0, full)
    search = _Search(adj, cov, budget)
    root_upper = search.bound(root[0].bit_count(), *root) if adj else 0
    if transitive and adj:
        used.append("vertex-transitive root")
    try:
        if workers > 1 and adj:
            parts: list = []
            search.frontier(*root, _frontier_depth(workers), parts)
            tuples = None if cov is None else cov.tuples.tolist()
            jobs = [(adj, tuples, budget, c, p, best[0]) for c, p in parts]
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for (size_wit, nodes) in pool.map(_solve_chunk, jobs):
                    search.nodes += nodes
                    if size_wit[0] > best[0]:
                        best = size_wit
        else:
            search.maximize(*root, best)
    except BudgetExceeded:
        return SolveResult(
            alpha=max(best[0], lower_hint or 0),
            witness=best[1],
            nodes_explored=search.nodes,
            elapsed=time.monotonic() - started,
            exact=False,
            upper=max(root_upper, best[0]),
            bounds_used=used,
        )
    alpha, witness = best
    if lower_hint and alpha < lower_hint:
        raise ParameterError(f"no independent set of size {lower_hint} exists")
    return SolveResult(
        alpha=alpha,
        witness=witness,
        nodes_explored=search.nodes,
        elapsed=time.monotonic() - started,
        bounds_used=used,
    )


def enumerate_maximum(
    g,
    alpha: int,
    budget: Budget | None = None,
    cover="auto",
    workers: int = 1,
) -> Iterator[int]:
    """Yield every independent set of size ``alpha``, sorted by member-index tuple.

    The whole collection is built before the first set is yielded so the order
    does not depend on ``workers``.
    """
    adj = _rows_of(g)
    sys.setrecursionlimit(max(sys.getrecursionlimit(), _RECURSION))
    cov = resolve_cover(g, cover)
    full = (1 << len(adj)) - 1
    search = _Search(adj, cov, budget)
    found: list[int] = []
    try:
        if workers > 1 and adj:
            parts: list = []
            search.frontier(0, full, _frontier_depth(workers), parts)
            tuples = None if cov is None else cov.tuples.tolist()
            jobs = [(adj, tuples, budget, c, p, alpha) for c, p in parts]
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for out, nodes in pool.map(_collect_chunk, jobs):
                    search.nodes += nodes
                    found.extend(out)
        else:
            search.collect(0, full, alpha, found)
    except BudgetExceeded as exc:
        raise BudgetExceeded(
            f"{exc}; {len(found)} maximum sets found so far", found=len(found)
        ) from None
    found.sort(key=member_key)
    yield from found


def member_key(members: int) -> tuple[int, ...]:
    """Canonical order on vertex sets: lexicographic on the sorted member indices."""
    return tuple(iter_bits(members))


def omega_exact(g, budget: Budget | None = None) -> int:
    """Clique number, as the independence number of the complement."""
    adj = _rows_of(g)
    if not adj:
        return 0
    res = alpha_exact(complement_rows(adj), budget=budget, cover=None)
    if not res.exact:
        raise BudgetExceeded("clique search exceeded its budget", lower=res.alpha, upper=res.upper)
    return res.alpha


def brute_force_alpha(adjacency: Sequence[int]) -> int:
    """Largest independent set by visiting every independent set, no pruning (test oracle)."""
    k = len(adjacency)
    best = 0

    def walk(i: int, members: int, size: int):
        nonlocal best
        if size > best:
            best = size
        for v in range(i, k):
            if not adjacency[v] & members:
                walk(v + 1, members | 1 << v, size + 1)

    walk(0, 0, 0)
    return best
