"""Maximum independent sets of Gamma(n, {a, b}) grown from the slices one size down.

A flag (A, B) lies in the slice F_c for each of the b - a elements c of B - A,
and F_c induces a copy of Gamma(n-1, {a, b-1}).  Summing over slices, a set
S of size k satisfies  sum_c |S & F_c| = (b-a) k  with every term at most
m = alpha(Gamma(n-1, {a, b-1})).  When the total deficit  n m - (b-a) k  is
below n, some slice of S is a maximum set, and after a permutation that slice
sits at c = n and equals a class representative of the smaller graph.  So
extending the representatives finds every class of size-k sets.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .core import ParameterError, count_flags
from .graph import FlagGraph, build_graph, iter_bits, list_to_bits
from .solver import Budget, BudgetExceeded, alpha_exact, enumerate_maximum, is_independent
from .symmetry import SymmetryGroupSpec, classify

DIRECT_CAP = 60


@dataclass
class SliceResult:
    n: int
    a: int
    b: int
    alpha: int
    representatives: list[int]
    class_sizes: list[int]
    sets_examined: int
    route: list[str] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def class_count(self) -> int:
        return len(self.representatives)


def slice_embedding(g: FlagGraph, small: FlagGraph) -> list[int]:
    """Index in ``g`` of each vertex of ``small`` after adding element n to its top level."""
    top = 1 << (g.n - 1)
    out = []
    for A, B in small.vertices:
        out.append(g.index[(A, B | top)])
    return out


def _check_embedding(g: FlagGraph, small: FlagGraph, emb: list[int]) -> None:
    image = list_to_bits(emb)
    pos = {v: i for i, v in enumerate(emb)}
    for i, v in enumerate(emb):
        row = list_to_bits(pos[w] for w in iter_bits(g.adjacency[v] & image))
        if row != small.adjacency[i]:
            raise AssertionError("slice does not induce a copy of the smaller graph")


def _direct(g: FlagGraph, budget: Budget | None) -> SliceResult:
    n, (a, b) = g.n, g.T
    res = alpha_exact(g, budget=budget)
    if not res.exact:
        raise BudgetExceeded("direct base case ran out of budget", lower=res.alpha, upper=res.upper)
    sets = list(enumerate_maximum(g, res.alpha, budget))
    rep = classify(sets, g, SymmetryGroupSpec(n))
    return SliceResult(n, a, b, res.alpha, rep.representatives,
                       [c.orbit_size for c in rep.classes], len(sets), [f"direct n={n}"])


def slice_classes(n: int, a: int, b: int, budget: Budget | None = None,
                  direct_cap: int = DIRECT_CAP) -> SliceResult:
    """Independence number and class representatives (under S_n) of Gamma(n, {a, b}).

    Recurses on ``(n-1, a, b-1)`` until the graph has at most ``direct_cap``
    vertices.  Raises :class:`ParameterError` when the deficit argument does
    not force a maximum slice.
    """
    started = time.monotonic()
    if not 1 <= a < b < n:
        raise ParameterError(f"need 1 <= a < b < n, got ({n},{a},{b})")
    if count_flags(n, (a, b)) <= direct_cap or b - 1 <= a:
        out = _direct(build_graph(n, (a, b)), budget)
        out.elapsed = time.monotonic() - started
        return out
    sub = slice_classes(n - 1, a, b - 1, budget, direct_cap)
    g = build_graph(n, (a, b))
    small = build_graph(n - 1, (a, b - 1))
    emb = slice_embedding(g, small)
    _check_embedding(g, small, emb)
    m = sub.alpha
    slice_mask = list_to_bits(emb)
    outside = g.all_mask & ~slice_mask
    k = n * m // (b - a)
    examined = 0
    while n * m - (b - a) * k < n:
        found = []
        for rep in sub.representatives:
            base = list_to_bits(emb[v] for v in iter_bits(rep))
            blocked = 0
            for v in iter_bits(base):
                blocked |= g.adjacency[v]
            cand = outside & ~blocked
            need = k - m
            if need > cand.bit_count():
                continue
            found.extend(base | ext for ext in _extensions(g, cand, need, budget))
        examined += len(found)
        if found:
            for s in found:
                if not is_independent(s, g):
                    raise AssertionError("extension is not independent")
            report = classify(found, g, SymmetryGroupSpec(n))
            return SliceResult(
                n, a, b, k, report.representatives, [c.orbit_size for c in report.classes],
                examined, sub.route + [f"slices n={n}: bound {n * m // (b - a)}, found {k}"],
                time.monotonic() - started)
        k -= 1
    raise ParameterError(
        f"deficit {n * m - (b - a) * k} >= {n}: slices no longer force a maximum slice")


def _extensions(g: FlagGraph, cand: int, need: int, budget: Budget | None) -> list[int]:
    """All independent subsets of ``cand`` of size ``need``, as masks of ``g``.

    Sizes are tried from the top down, so a larger extension would already
    have been found; ``need`` is therefore the independence number of ``cand``
    whenever anything comes back.
    """
    if need == 0:
        return [0]
    verts = list(iter_bits(cand))
    pos = {v: i for i, v in enumerate(verts)}
    rows = [list_to_bits(pos[w] for w in iter_bits(g.adjacency[v] & cand)) for v in verts]
    res = alpha_exact(rows, budget=budget, cover=None)
    if res.alpha > need:
        raise AssertionError("a larger extension exists; sizes were not tried top-down")
    if res.alpha < need:
        return []
    return [list_to_bits(verts[i] for i in iter_bits(s))
            for s in enumerate_maximum(rows, need, budget, cover=None)]
