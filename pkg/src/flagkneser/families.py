"""Shifted families F_i(n, a, b) of pairwise non-general-position flags.

A flag of type {a, b} is handled as a pair ``(A, B)`` with ``|A| = a < b = |B|``.
``F_i`` collects the pairs with

  (I)  [i] a subset of B and B a subset of [n-1], or
  (II) min A <= i and [min A] a subset of B,

and the barred family at the top shift ``i = 2b - n + 1`` drops the
``B <= [n-1]`` requirement from (I).

All counting is exact integer arithmetic.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, comb, factorial

from .core import ParameterError, enumerate_flags, full_mask, in_general_position
from .graph import FlagGraph, iter_bits
from .solver import is_independent

DEBUG_SELF_CHECK = True


def check_triple(n: int, a: int, b: int) -> None:
    """Require ``a + b < n`` and ``a < n/2 < b``."""
    if min(n, a, b) < 1:
        raise ParameterError(f"(n,a,b)=({n},{a},{b}) must be positive")
    if not a + b < n:
        raise ParameterError(f"need a+b < n, got a+b={a + b}, n={n}")
    if not 2 * a < n < 2 * b:
        raise ParameterError(f"need a < n/2 < b, got (n,a,b)=({n},{a},{b})")


def max_shift(n: int, b: int) -> int:
    return 2 * b - n + 1


@dataclass(frozen=True)
class FamilySpec:
    n: int
    a: int
    b: int
    i: int
    barred: bool = False

    def __post_init__(self):
        check_triple(self.n, self.a, self.b)
        top = max_shift(self.n, self.b)
        if not 0 <= self.i <= top:
            raise ParameterError(f"shift must satisfy 0 <= i <= {top}, got {self.i}")
        if self.barred and self.i != top:
            raise ParameterError(f"the barred family exists only at i = {top}")

    @property
    def label(self) -> str:
        bar = "Fbar" if self.barred else "F"
        return f"{bar}_{self.i}({self.n},{self.a},{self.b})"


@dataclass(frozen=True)
class SizeBreakdown:
    total: int
    term_condition_I: int
    term_condition_II: int
    i0: Fraction
    i_star: int

    @property
    def two_maxima(self) -> bool:
        return self.i0 >= 0 and self.i0.denominator == 1

    @property
    def best_shifts(self) -> tuple[int, ...]:
        if self.two_maxima:
            return (self.i_star, self.i_star + 1)
        return (self.i_star,)


def in_family(A: int, B: int, spec: FamilySpec) -> bool:
    n, i = spec.n, spec.i
    prefix = (1 << i) - 1
    top_free = full_mask(n - 1)
    if B & prefix == prefix and (spec.barred or B & ~top_free == 0):
        return True
    low = (A & -A).bit_length()
    if low <= i:
        first = (1 << low) - 1
        return B & first == first
    return False


def build_family(spec: FamilySpec, g: FlagGraph) -> int:
    """Vertex set of ``g`` forming the family; checked independent before returning."""
    if g.n != spec.n or g.T != (spec.a, spec.b):
        raise ParameterError(f"{spec.label} does not live on Gamma({g.n},{set(g.T)})")
    members = 0
    for idx, (A, B) in enumerate(g.vertices):
        if in_family(A, B, spec):
            members |= 1 << idx
    if not is_independent(members, g):
        raise AssertionError(f"{spec.label} is not independent")
    return members


def family_members(spec: FamilySpec, check: bool = False) -> list[tuple[int, int]]:
    """The family as a list of flags, without building the graph.

    ``check`` tests every pair for general position, which is quadratic.
    """
    n = spec.n
    out = [f for f in enumerate_flags(n, (spec.a, spec.b)) if in_family(*f, spec)]
    if check:
        for k, f in enumerate(out):
            for h in out[k + 1:]:
                if in_general_position(f, h, n):
                    raise AssertionError(f"{spec.label} contains an edge {f} ~ {h}")
    return out


def _size_terms(n: int, a: int, b: int, i: int) -> tuple[int, int]:
    first = comb(n - 1 - i, b - i) * comb(b - i, a)
    second = comb(n - b + a - 1, a - 1) * (comb(n, b - a) - comb(n - i, b - a - i))
    return first, second


def family_size_alternative(n: int, a: int, b: int, i: int) -> Fraction:
    """Second closed form for |F_i|, kept as a Fraction so non-integrality shows."""
    lead = comb(n - b + a - 1, a - 1) * comb(n, b - a)
    num = ((n - b) ** 2 + a * (i - b)) * factorial(n - 1 - i)
    den = (n - b + a) * factorial(a) * factorial(n - b) * factorial(b - i - a)
    return lead + Fraction(num, den)


def family_size(n: int, a: int, b: int, i: int) -> int:
    FamilySpec(n, a, b, i)
    first, second = _size_terms(n, a, b, i)
    total = first + second
    if DEBUG_SELF_CHECK and family_size_alternative(n, a, b, i) != total:
        raise AssertionError(f"closed forms disagree for F_{i}({n},{a},{b})")
    return total


def barred_extra(n: int, a: int, b: int) -> int:
    """|Fbar_i - F_i| at the top shift."""
    i = max_shift(n, b)
    return comb(n - i - 1, b - i - 1) * comb(b - i, a)


def barred_size(n: int, a: int, b: int) -> int:
    return family_size(n, a, b, max_shift(n, b)) + barred_extra(n, a, b)


def shift_optimum(n: int, a: int, b: int) -> Fraction:
    return Fraction(b - 1) - Fraction((n - b) * (n - b - 1), a)


def best_shift(n: int, a: int, b: int) -> int:
    return max(0, ceil(shift_optimum(n, a, b)))


def optimal_shift(n: int, a: int, b: int) -> SizeBreakdown:
    check_triple(n, a, b)
    i0 = shift_optimum(n, a, b)
    i = best_shift(n, a, b)
    first, second = _size_terms(n, a, b, i)
    return SizeBreakdown(first + second, first, second, i0, i)


def f_max(n: int, a: int, b: int) -> int:
    """Largest |F_i(n,a,b)| over all shifts."""
    return optimal_shift(n, a, b).total


def recurrence_rhs(n: int, a: int, b: int) -> Fraction:
    i = best_shift(n, a, b)
    num = ((n - b) ** 2 + a * (i - b)) * factorial(n - 1 - i)
    den = factorial(a) * factorial(n - b) * factorial(b - i - a)
    return Fraction(num, den)


def recurrence_check(n: int, a: int, b: int) -> bool:
    """Check both recurrences linking f(n,a,b) and f(n-1,a,b-1)."""
    check_triple(n, a, b)
    check_triple(n - 1, a, b - 1)
    big, small = f_max(n, a, b), f_max(n - 1, a, b - 1)
    first = big == small + comb(n - 1, b - 1) * comb(b - 1, a - 1)
    second = n * small - (b - a) * big == recurrence_rhs(n, a, b)
    return first and second


def neighbor_profile(members: int, g: FlagGraph) -> dict[int, int]:
    """For each k, how many vertices outside ``members`` have exactly k neighbours inside."""
    if not is_independent(members, g):
        raise ParameterError("neighbour profiles are defined for independent sets only")
    hist: Counter[int] = Counter()
    outside = g.all_mask & ~members
    for v in iter_bits(outside):
        hist[(g.adjacency[v] & members).bit_count()] += 1
    return dict(sorted(hist.items()))


def standard_families(n: int, a: int, b: int) -> list[FamilySpec]:
    """Every F_i and the barred family, in shift order."""
    check_triple(n, a, b)
    top = max_shift(n, b)
    specs = [FamilySpec(n, a, b, i) for i in range(top + 1)]
    specs.append(FamilySpec(n, a, b, top, barred=True))
    return specs
