"""Relabelling of the ground set acting on flag graphs, and classification of vertex sets.

Two modes decide whether independent sets are equivalent:

``generator``
    The group generated by relabellings of [n], plus complementation when the
    type is self-dual.  Equivalence is decided by an invariant ladder followed
    by a search over invariant-respecting relabellings, and classification by
    computing whole orbits.
``full``
    Canonical forms of the graph with the set marked as a vertex colour,
    computed by colour refinement with individualisation.  This sees every
    automorphism of the graph, whatever it is.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .core import ParameterError, dual_type, format_flag, full_mask
from .families import neighbor_profile
from .graph import FlagGraph, ResourceError, bits_to_list, components, iter_bits, subgraph_adjacency
from .solver import Budget, alpha_exact, enumerate_maximum, member_key

GENERATOR = "generator"
FULL = "full"
_CHUNK = 5040


@dataclass(frozen=True)
class SymmetryGroupSpec:
    n: int
    include_duality: bool = False
    mode: str = GENERATOR

    @classmethod
    def for_graph(cls, g: FlagGraph, mode: str = GENERATOR) -> "SymmetryGroupSpec":
        return cls(g.n, dual_type(g.T, g.n) == g.T, mode)

    def check(self, g: FlagGraph) -> None:
        if self.n != g.n:
            raise ParameterError("group and graph act on different ground sets")
        if self.include_duality and dual_type(g.T, g.n) != g.T:
            raise ParameterError(f"type {g.T} is not self-dual, duality is not an automorphism")
        if self.mode not in (GENERATOR, FULL):
            raise ParameterError(f"unknown symmetry mode {self.mode!r}")

    @property
    def order(self) -> int:
        from math import factorial

        return factorial(self.n) * (2 if self.include_duality else 1)


@dataclass
class EquivClass:
    representative: int
    orbit_size: int
    members_seen: int
    profile: dict[int, int]


@dataclass
class EquivClassReport:
    classes: list[EquivClass] = field(default_factory=list)
    total: int = 0
    mode: str = GENERATOR

    @property
    def class_count(self) -> int:
        return len(self.classes)

    @property
    def representatives(self) -> list[int]:
        return [c.representative for c in self.classes]


class _Encoder:
    """Vectorised map from level masks to vertex indices."""

    def __init__(self, g: FlagGraph):
        self.g = g
        self.n = g.n
        levels = np.array(g.vertices, dtype=np.int64).reshape(g.order, len(g.T))
        self.levels = levels
        self.keys = self._key(levels)
        # canonical vertex order is lexicographic on the level tuple
        assert np.all(np.diff(self.keys) > 0)
        bits = (np.arange(1 << self.n)[:, None] >> np.arange(self.n)) & 1
        self.mask_bits = bits.astype(np.int64)

    def _key(self, levels: np.ndarray) -> np.ndarray:
        k = levels.shape[-1]
        key = np.zeros(levels.shape[:-1], dtype=np.int64)
        for j in range(k):
            key = (key << self.n) | levels[..., j]
        return key

    def vertex_perms(self, perms: np.ndarray, dual: bool = False) -> np.ndarray:
        """Rows ``p`` with vertex ``v`` sent to ``p[v]``, one row per ground permutation.

        ``perms[r, e]`` is the image of element ``e`` (0-based).  With ``dual``
        every level is complemented after relabelling.
        """
        images = self.mask_bits @ (np.int64(1) << perms.T)  # (2^n, R)
        mapped = images[self.levels]  # (V, k, R)
        if dual:
            mapped = full_mask(self.n) ^ mapped[:, ::-1, :]
        mapped = np.moveaxis(mapped, 2, 0)  # (R, V, k)
        idx = np.searchsorted(self.keys, self._key(mapped))
        return idx


def _encoder(g: FlagGraph) -> _Encoder:
    enc = getattr(g, "_encoder_cache", None)
    if enc is None:
        enc = _Encoder(g)
        object.__setattr__(g, "_encoder_cache", enc)
    return enc


def vertex_permutation(g: FlagGraph, perm: Sequence[int], dual: bool = False) -> list[int]:
    """Vertex map induced by the relabelling ``e -> perm[e-1]`` of [n] (1-based values)."""
    if sorted(perm) != list(range(1, g.n + 1)):
        raise ParameterError(f"{perm!r} is not a permutation of [{g.n}]")
    if dual and dual_type(g.T, g.n) != g.T:
        raise ParameterError("complementation is an automorphism only for self-dual types")
    p = np.array([[x - 1 for x in perm]], dtype=np.int64)
    return _encoder(g).vertex_perms(p, dual)[0].tolist()


def act(perm: Sequence[int], members: int, g: FlagGraph, dual: bool = False) -> int:
    """Image of a vertex set under a relabelling of [n], optionally followed by complementation."""
    vp = vertex_permutation(g, perm, dual)
    out = 0
    for v in iter_bits(members):
        out |= 1 << vp[v]
    return out


def ground_permutations(n: int, chunk: int = _CHUNK) -> Iterator[np.ndarray]:
    """All of S_n as 0-based rows, in lexicographic order, a chunk at a time."""
    it = itertools.permutations(range(n))
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.array(block, dtype=np.int64)


def group_vertex_perms(g: FlagGraph, spec: SymmetryGroupSpec | None = None) -> Iterator[np.ndarray]:
    spec = spec or SymmetryGroupSpec.for_graph(g)
    enc = _encoder(g)
    for block in ground_permutations(g.n):
        yield enc.vertex_perms(block)
        if spec.include_duality:
            yield enc.vertex_perms(block, dual=True)


def orbit_rows(members: int, g: FlagGraph, spec: SymmetryGroupSpec | None = None) -> set[bytes]:
    """The orbit of a vertex set as a set of packed boolean rows (vertex 0 first)."""
    idx = np.array(bits_to_list(members), dtype=np.int64)
    seen: set[bytes] = set()
    for vp in group_vertex_perms(g, spec):
        img = np.zeros((vp.shape[0], g.order), dtype=bool)
        rows = np.arange(vp.shape[0])[:, None]
        img[rows, vp[:, idx]] = True
        packed = np.packbits(img, axis=1)
        seen.update(map(bytes, packed))
    return seen


def row_to_members(row: bytes, order: int) -> int:
    bits = np.unpackbits(np.frombuffer(row, dtype=np.uint8))[:order]
    return sum(1 << int(v) for v in np.flatnonzero(bits))


def members_to_row(members: int, order: int) -> bytes:
    arr = np.zeros(order, dtype=bool)
    arr[bits_to_list(members)] = True
    return bytes(np.packbits(arr))


def canonical_image(members: int, g: FlagGraph, spec: SymmetryGroupSpec | None = None) -> int:
    """Orbit member that comes first in :func:`flagkneser.solver.member_key` order."""
    rows = orbit_rows(members, g, spec)
    # equal sizes: the earliest index tuple has the first differing vertex present
    return row_to_members(max(rows), g.order)


def orbit_cover(g: FlagGraph, max_len: int = 11) -> list[tuple[int, ...]]:
    """Orbit of a shortest odd cycle through vertex 0 under relabelling of [n].

    Every tuple keeps the vertex order of the seed cycle, so all tuples induce
    the same labelled subgraph.  Returns ``[]`` for bipartite graphs or when
    the shortest odd cycle is longer than ``max_len``.
    """
    cycle = shortest_odd_cycle(g.adjacency, 0, max_len)
    if cycle is None:
        return []
    seed = np.array(cycle, dtype=np.int64)
    found: dict[tuple[int, ...], tuple[int, ...]] = {}
    for vp in group_vertex_perms(g, SymmetryGroupSpec(g.n)):
        imgs = vp[:, seed]
        for row in imgs.tolist():
            key = tuple(sorted(row))
            if key not in found:
                found[key] = tuple(row)
    return [found[k] for k in sorted(found)]


def shortest_odd_cycle(adjacency: Sequence[int], start: int, max_len: int) -> list[int] | None:
    """Shortest odd closed walk seen from ``start`` by BFS, cut down to a simple odd cycle."""
    parent = {start: -1}
    depth = {start: 0}
    layer = [start]
    seen = 1 << start
    for d in range(max_len // 2):
        nxt = []
        for u in layer:
            for v in iter_bits(adjacency[u] & ~seen):
                seen |= 1 << v
                parent[v] = u
                depth[v] = d + 1
                nxt.append(v)
        layer_mask = sum(1 << v for v in nxt)
        for v in nxt:
            hit = adjacency[v] & layer_mask
            if hit:
                w = (hit & -hit).bit_length() - 1
                left, right = [v], [w]
                x, y = v, w
                while x != y:
                    x, y = parent[x], parent[y]
                    left.append(x)
                    right.append(y)
                return left + right[-2::-1]
        # an edge back into the same layer from the previous one closes an odd cycle too
        layer = nxt
        if not layer:
            break
    return None


def element_signature(members: int, g: FlagGraph) -> list[tuple[int, ...]]:
    """Per ground element, how many member flags contain it at each level."""
    k = len(g.T)
    sig = [[0] * k for _ in range(g.n)]
    for v in iter_bits(members):
        for lvl, mask in enumerate(g.vertices[v]):
            for e in range(g.n):
                if mask >> e & 1:
                    sig[e][lvl] += 1
    return [tuple(s) for s in sig]


def profile_key(members: int, g: FlagGraph) -> tuple:
    return tuple(sorted(neighbor_profile(members, g).items()))


def _compatible_perms(sig1, sig2) -> Iterator[tuple[int, ...]]:
    """Permutations sending each element to one with the same signature (0-based)."""
    n = len(sig1)
    targets = [[j for j in range(n) if sig2[j] == sig1[i]] for i in range(n)]
    order = sorted(range(n), key=lambda i: len(targets[i]))
    image = [-1] * n
    used = [False] * n

    def rec(pos):
        if pos == n:
            yield tuple(image)
            return
        i = order[pos]
        for j in targets[i]:
            if not used[j]:
                used[j] = True
                image[i] = j
                yield from rec(pos + 1)
                used[j] = False
        image[i] = -1

    yield from rec(0)


def _equivalent_by_search(s1: int, s2: int, g: FlagGraph, dual: bool) -> bool:
    enc = _encoder(g)
    src = s1
    if dual:
        # fold the complementation into the source set first
        ident = np.arange(g.n, dtype=np.int64)[None, :]
        vp = enc.vertex_perms(ident, dual=True)[0]
        src = sum(1 << int(vp[v]) for v in iter_bits(s1))
    sig1 = element_signature(src, g)
    sig2 = element_signature(s2, g)
    if sorted(sig1) != sorted(sig2):
        return False
    idx = np.array(bits_to_list(src), dtype=np.int64)
    target = np.zeros(g.order, dtype=bool)
    target[bits_to_list(s2)] = True
    batch = []

    def flush():
        perms = np.array(batch, dtype=np.int64)
        vps = enc.vertex_perms(perms)
        return bool(np.any(np.all(target[vps[:, idx]], axis=1)))

    for p in _compatible_perms(sig1, sig2):
        batch.append(p)
        if len(batch) >= _CHUNK:
            if flush():
                return True
            batch = []
    return bool(batch) and flush()


def are_equivalent(s1: int, s2: int, g: FlagGraph, spec: SymmetryGroupSpec | None = None) -> bool:
    """True iff some group element maps ``s1`` onto ``s2``."""
    spec = spec or SymmetryGroupSpec.for_graph(g)
    spec.check(g)
    if s1.bit_count() != s2.bit_count():
        return False
    if spec.mode == FULL:
        return colored_canonical_form(g, s1) == colored_canonical_form(g, s2)
    if profile_key(s1, g) != profile_key(s2, g):
        return False
    if _equivalent_by_search(s1, s2, g, dual=False):
        return True
    return spec.include_duality and _equivalent_by_search(s1, s2, g, dual=True)


def classify(
    sets: Iterable[int], g: FlagGraph, spec: SymmetryGroupSpec | None = None
) -> EquivClassReport:
    """Partition equal-size independent sets into equivalence classes.

    Classes come out sorted by their canonical representative, so the report
    does not depend on input order.
    """
    spec = spec or SymmetryGroupSpec.for_graph(g)
    spec.check(g)
    sets = list(sets)
    if len({s.bit_count() for s in sets}) > 1:
        raise ParameterError("classify expects sets of one common size")
    if spec.mode == FULL:
        return _classify_full(sets, g, spec)
    owner: dict[bytes, int] = {}
    classes: list[EquivClass] = []
    for s in sets:
        row = members_to_row(s, g.order)
        if row in owner:
            classes[owner[row]].members_seen += 1
            continue
        orbit = orbit_rows(s, g, spec)
        rep = row_to_members(max(orbit), g.order)
        cid = len(classes)
        classes.append(EquivClass(rep, len(orbit), 1, neighbor_profile(s, g)))
        for r in orbit:
            owner[r] = cid
    classes.sort(key=lambda c: member_key(c.representative))
    return EquivClassReport(classes, len(sets), spec.mode)


@dataclass
class OrbitCount:
    classes: int
    sets: int
    components: int


def count_classes(
    g: FlagGraph, spec: SymmetryGroupSpec | None = None, budget: Budget | None = None
) -> OrbitCount:
    """Count classes of maximum independent sets without listing the sets.

    A maximum set of ``g`` is one maximum set per connected component, so
    only the per-component choices are enumerated.  Burnside's lemma then
    counts orbits: a group element permutes the components in cycles, and a
    set is fixed exactly when the choice on the first component of each
    cycle is fixed by the cycle-length power of that element.
    """
    spec = spec or SymmetryGroupSpec.for_graph(g)
    spec.check(g)
    if spec.mode != GENERATOR:
        raise ParameterError("orbit counting needs the explicit group")
    comps = components(g)
    comp_of = np.empty(g.order, dtype=np.int64)
    anchors = np.empty(len(comps), dtype=np.int64)
    choices: list[np.ndarray] = []
    for j, comp in enumerate(comps):
        verts = np.array(bits_to_list(comp), dtype=np.int64)
        comp_of[verts] = j
        anchors[j] = verts[0]
        rows = subgraph_adjacency(g, comp)
        alpha = alpha_exact(rows, budget=budget, cover=None).alpha
        local = [bits_to_list(m) for m in enumerate_maximum(rows, alpha, budget, cover=None)]
        choices.append(verts[np.array(local, dtype=np.int64)])
    total_sets = 1
    for c in choices:
        total_sets *= len(c)
    fixed_sum = 0
    for block in group_vertex_perms(g, spec):
        for vp in block:
            fixed_sum += _fixed_by(vp, comp_of, anchors, choices)
    classes, rest = divmod(fixed_sum, spec.order)
    if rest:
        raise AssertionError("Burnside sum is not divisible by the group order")
    return OrbitCount(classes, total_sets, len(comps))


def _fixed_by(vp: np.ndarray, comp_of, anchors, choices) -> int:
    sigma = comp_of[vp[anchors]]
    seen = np.zeros(len(anchors), dtype=bool)
    out = 1
    for j in range(len(anchors)):
        if seen[j]:
            continue
        k, c = 0, j
        while not seen[c]:
            seen[c] = True
            c = sigma[c]
            k += 1
        sets = choices[j]
        img = sets
        for _ in range(k):
            img = vp[img]
        fixed = int(np.all(np.sort(img, axis=1) == sets, axis=1).sum())
        if not fixed:
            return 0
        out *= fixed
    return out


def _classify_full(sets, g, spec) -> EquivClassReport:
    buckets: dict[tuple, EquivClass] = {}
    for s in sets:
        form = colored_canonical_form(g, s)
        if form in buckets:
            buckets[form].members_seen += 1
            if member_key(s) < member_key(buckets[form].representative):
                buckets[form].representative = s
        else:
            buckets[form] = EquivClass(s, 0, 1, neighbor_profile(s, g))
    classes = sorted(buckets.values(), key=lambda c: member_key(c.representative))
    for c in classes:
        # orbit sizes need the group; the full mode reports observed multiplicities only
        c.orbit_size = c.members_seen
    return EquivClassReport(classes, len(sets), FULL)


def describe_set(members: int, g: FlagGraph) -> list[str]:
    return [format_flag(g.vertices[v]) for v in iter_bits(members)]


# --- canonical labelling by colour refinement and individualisation ---------


def _refine(adj: Sequence[int], cells: list[int], trace: list) -> list[int]:
    """Equitable refinement of an ordered partition given as bit-vector cells."""
    cells = list(cells)
    queue = list(cells)
    while queue:
        w = queue.pop(0)
        out: list[int] = []
        for cell in cells:
            if cell & (cell - 1) == 0:
                out.append(cell)
                continue
            groups: dict[int, int] = {}
            for v in iter_bits(cell):
                c = (adj[v] & w).bit_count()
                groups[c] = groups.get(c, 0) | 1 << v
            if len(groups) == 1:
                out.append(cell)
                continue
            counts = sorted(groups)
            trace.append((len(out), tuple((c, groups[c].bit_count()) for c in counts)))
            parts = [groups[c] for c in counts]
            out.extend(parts)
            if cell in queue:
                queue.remove(cell)
            queue.extend(parts)
        cells = out
    return cells


def colored_canonical_form(
    g: FlagGraph | Sequence[int], members: int, max_leaves: int = 200_000
) -> tuple:
    """Canonical certificate of the graph with ``members`` coloured apart.

    Two vertex sets get equal certificates exactly when an automorphism of the
    graph maps one onto the other.
    """
    adj = list(g.adjacency) if isinstance(g, FlagGraph) else list(g)
    order = len(adj)
    full = (1 << order) - 1
    start = [c for c in (members & full, full & ~members) if c]
    trace0: list = [(-2, members.bit_count())]
    root = _refine(adj, start, trace0)
    best: list = [None, None]  # (trace, certificate)
    leaves = [0]
    auts: list[list[int]] = []
    seen_leaf: dict[tuple, list[int]] = {}

    def certificate(cells):
        label = {}
        for pos, cell in enumerate(cells):
            label[cell.bit_length() - 1] = pos
        rows = [0] * order
        for v in range(order):
            row = 0
            for w in iter_bits(adj[v]):
                row |= 1 << label[w]
            rows[label[v]] = row
        coloured = tuple(sorted(label[v] for v in iter_bits(members)))
        return coloured, tuple(rows), label

    def search(cells, trace, path):
        if best[0] is not None and trace < best[0][: len(trace)]:
            return
        target = next((c for c in cells if c & (c - 1)), None)
        if target is None:
            leaves[0] += 1
            if leaves[0] > max_leaves:
                raise ResourceError(f"canonical labelling exceeded {max_leaves} leaves")
            col, rows, label = certificate(cells)
            cert = (col, rows)
            key = (tuple(trace), cert)
            if best[0] is None or key > (tuple(best[0]), best[1]):
                best[0], best[1] = list(trace), cert
            if cert in seen_leaf:
                other = seen_leaf[cert]
                inv = {p: v for v, p in label.items()}
                auts.append([inv[other[v]] for v in range(order)])
            else:
                seen_leaf[cert] = [label[v] for v in range(order)]
            return
        idx = cells.index(target)
        skip = 0
        for v in iter_bits(target):
            if skip >> v & 1:
                continue
            new_cells = cells[:idx] + [1 << v, target ^ (1 << v)] + cells[idx + 1 :]
            t = list(trace) + [(-1, idx)]
            refined = _refine(adj, new_cells, t)
            search(refined, t, path + [v])
            # children in one orbit of the path stabiliser give isomorphic subtrees
            stab = [a for a in auts if all(a[p] == p for p in path)]
            skip |= _orbit_of(v, stab)

    search(root, trace0, [])
    return best[1]


def _orbit_of(v: int, auts: list[list[int]]) -> int:
    orbit = 1 << v
    frontier = [v]
    while frontier:
        x = frontier.pop()
        for a in auts:
            y = a[x]
            if not orbit >> y & 1:
                orbit |= 1 << y
                frontier.append(y)
    return orbit
