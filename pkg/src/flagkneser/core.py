"""Flags of the ground set [n], their types, and the general-position relation.

Subsets of [n] are ints used as bitmasks, element ``i`` living at bit ``i - 1``.
A flag is a tuple of such masks, one per entry of its type, smallest level first.
"""

from __future__ import annotations

from itertools import combinations
from math import comb, prod
from typing import Iterable, Sequence

MAX_GROUND = 64

Flag = tuple[int, ...]
TypeSet = tuple[int, ...]


class ParameterError(ValueError):
    """Raised for an invalid ground size, type, flag or family specification."""


def check_ground(n: int) -> int:
    if not isinstance(n, int) or isinstance(n, bool):
        raise ParameterError(f"ground size must be an int, got {n!r}")
    if n < 2:
        raise ParameterError(f"ground size must be >= 2, got {n}")
    if n > MAX_GROUND:
        raise ParameterError(f"ground size {n} exceeds the bitmask width {MAX_GROUND}")
    return n


def make_type(entries: Iterable[int], n: int) -> TypeSet:
    """Validate ``entries`` as a type over [n] and return it as a sorted tuple.

    Duplicates are rejected rather than silently merged.
    """
    check_ground(n)
    t = tuple(entries)
    if not t:
        raise ParameterError("type must be non-empty")
    if any(not isinstance(x, int) or isinstance(x, bool) for x in t):
        raise ParameterError(f"type entries must be ints: {t!r}")
    s = tuple(sorted(t))
    if len(set(s)) != len(s):
        raise ParameterError(f"type has repeated entries: {t!r}")
    if s[0] < 1 or s[-1] > n - 1:
        raise ParameterError(f"type {s} is not a subset of [{n - 1}]")
    return s


def parse_type(text: str, n: int) -> TypeSet:
    """Parse a comma separated type such as ``"2,5"``."""
    try:
        entries = [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise ParameterError(f"cannot parse type {text!r}") from exc
    return make_type(entries, n)


def full_mask(n: int) -> int:
    return (1 << n) - 1


def mask_of(elements: Iterable[int]) -> int:
    m = 0
    for e in elements:
        m |= 1 << (e - 1)
    return m


def elements_of(mask: int) -> list[int]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def popcount(x: int) -> int:
    return bin(x).count("1")


def count_flags(n: int, T: Sequence[int]) -> int:
    """Number of flags of type ``T`` over [n]."""
    T = make_type(T, n)
    sizes = (n,) + tuple(reversed(T))
    return prod(comb(sizes[k], sizes[k + 1]) for k in range(len(T)))


def count_flags_loose(n: int, T: Sequence[int]) -> int:
    """Like :func:`count_flags` but accepts ``n >= 1`` and the empty type.

    ``|V Gamma(t, {})|`` is 1 (the empty flag), which several closed forms need.
    """
    T = tuple(sorted(T))
    if not T:
        return 1
    if T[0] < 1 or T[-1] >= n:
        raise ParameterError(f"type {T} is not a subset of [{n - 1}]")
    sizes = (n,) + tuple(reversed(T))
    return prod(comb(sizes[k], sizes[k + 1]) for k in range(len(T)))


def _subsets_of(mask: int, k: int) -> Iterable[int]:
    for combo in combinations(elements_of(mask), k):
        yield mask_of(combo)


def enumerate_flags(n: int, T: Sequence[int]) -> list[Flag]:
    """All flags of type ``T`` over [n], sorted lexicographically on the level masks."""
    T = make_type(T, n)
    flags: list[Flag] = [()]
    top = full_mask(n)
    # build from the largest level down, each level a subset of the one above
    for size in reversed(T):
        nxt = []
        for f in flags:
            parent = f[0] if f else top
            for sub in _subsets_of(parent, size):
                nxt.append((sub,) + f)
        flags = nxt
    flags.sort()
    return flags


def validate_flag(f: Flag, n: int, T: Sequence[int] | None = None) -> Flag:
    top = full_mask(n)
    if not f:
        raise ParameterError("flag must have at least one level")
    for k, level in enumerate(f):
        if level <= 0 or level >= top or level & ~top:
            raise ParameterError(f"level {level:#x} is not a non-empty proper subset of [{n}]")
        if k and (f[k - 1] & ~level or f[k - 1] == level):
            raise ParameterError("flag levels must be strictly nested")
    if T is not None and tuple(popcount(x) for x in f) != tuple(T):
        raise ParameterError(f"flag has type {flag_type(f)}, expected {tuple(T)}")
    return f


def flag_type(f: Flag) -> TypeSet:
    return tuple(popcount(x) for x in f)


def in_general_position(f1: Flag, f2: Flag, n: int) -> bool:
    """True iff every level of ``f1`` and every level of ``f2`` meet trivially or cover [n]."""
    top = full_mask(n)
    for x in f1:
        if x & ~top:
            raise ParameterError(f"flag level {x:#x} lies outside [{n}]")
    for y in f2:
        if y & ~top:
            raise ParameterError(f"flag level {y:#x} lies outside [{n}]")
    for x in f1:
        for y in f2:
            if x & y and (x | y) != top:
                return False
    return True


def dual_type(T: Sequence[int], n: int) -> TypeSet:
    return tuple(sorted(n - t for t in T))


def dual_flag(f: Flag, n: int) -> Flag:
    """Complement every level; the result is again sorted smallest level first."""
    top = full_mask(n)
    return tuple(top ^ x for x in reversed(f))


def project_flag(f: Flag, T: Sequence[int], S: Sequence[int]) -> Flag:
    """Keep only the levels of ``f`` whose sizes lie in ``S``."""
    T = tuple(T)
    S = set(S)
    if not S <= set(T):
        raise ParameterError(f"{sorted(S)} is not a subset of {list(T)}")
    if len(f) != len(T):
        raise ParameterError("flag does not match its type")
    return tuple(x for x, t in zip(f, T) if t in S)


def format_set(mask: int) -> str:
    return "{" + ",".join(str(e) for e in elements_of(mask)) + "}"


def format_flag(f: Flag) -> str:
    """Human notation, e.g. ``({1},{1,2,3})``."""
    return "(" + ",".join(format_set(x) for x in f) + ")"


def all_types(n: int) -> list[TypeSet]:
    """Every non-empty subset of [n-1], ordered by size then lexicographically."""
    out = []
    for k in range(1, n):
        out.extend(combinations(range(1, n), k))
    return out
