"""Closed-form values and upper/lower bounds for alpha(Gamma(n, T)).

Combinatorial values are exact integers.  Only :func:`hoffman` and
:func:`inertia_bound` touch floating point, and both carry their raw
spectral data in ``support``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Any

import numpy as np

from . import families
from .core import ParameterError, count_flags, count_flags_loose, dual_type, make_type
from .graph import FlagGraph, build_graph, is_bipartite
from .solver import Budget, alpha_exact, omega_exact

UPPER, LOWER, EXACT = "upper", "lower", "exact"
EIG_TOL = 1e-9
ZERO_TOL = 1e-7
FLOOR_MARGIN = 1e-6


@dataclass
class BoundReport:
    name: str
    applicable: bool
    direction: str
    value: int | None = None
    reason: str = ""
    support: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.applicable:
            self.value = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "applicable": self.applicable,
            "direction": self.direction,
            "value": None if self.value is None else str(self.value),
            "reason": self.reason,
            "support": _jsonable(self.support),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "BoundReport":
        value = None if d["value"] is None else int(d["value"])
        return cls(d["name"], d["applicable"], d["direction"], value, d["reason"], d["support"])


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, Fraction):
        return str(x)
    return str(x)


def _na(name: str, direction: str, reason: str, **support) -> BoundReport:
    return BoundReport(name, False, direction, None, reason, support)


# --- exact theorems ---------------------------------------------------------


def bipartite_value(n: int, T) -> BoundReport:
    T = make_type(T, n)
    pairs = [(i, j) for i in T for j in T if i <= j and i + j == n]
    if not pairs:
        return _na("bipartite", EXACT, "no i, j in T with i + j = n")
    v = count_flags(n, T)
    return BoundReport("bipartite", True, EXACT, v // 2, f"{pairs[0][0]}+{pairs[0][1]}={n}",
                       {"vertices": v, "pair": list(pairs[0])})


def ekr_value(n: int, T) -> BoundReport:
    T = make_type(T, n)
    t = T[-1]
    if 2 * t > n:
        return _na("ekr", EXACT, f"max(T)={t} exceeds n/2")
    rest = T[:-1]
    value = math.comb(n - 1, t - 1) * count_flags_loose(t, rest)
    return BoundReport("ekr", True, EXACT, value, f"max(T)={t} <= n/2",
                       {"t": t, "lower_flags": count_flags_loose(t, rest)})


def half_bound(g: FlagGraph) -> BoundReport:
    bip, _ = is_bipartite(g)
    return BoundReport("half", True, UPPER, g.order // 2, "regular non-empty graph",
                       {"vertices": g.order, "bipartite": bip, "tight": bip})


def half_value(n: int, T) -> BoundReport:
    v = count_flags(n, T)
    return BoundReport("half", True, UPPER, v // 2, "regular non-empty graph", {"vertices": v})


def cycle_value(n: int, a: int, b: int) -> BoundReport:
    if not 1 <= a < b < n:
        return _na("cycle", EXACT, f"need 1 <= a < b < n, got ({n},{a},{b})")
    failed = []
    if not n < 2 * b:
        failed.append(f"n < 2b fails: {n} >= {2 * b}")
    if not a + 3 * b <= 2 * n:
        failed.append(f"a+3b <= 2n fails: {a + 3 * b} > {2 * n}")
    if failed:
        return _na("cycle", EXACT, "; ".join(failed))
    value = math.comb(n - 1, b) * math.comb(b, a)
    return BoundReport("cycle", True, EXACT, value, "n < 2b and a+3b <= 2n", {"a": a, "b": b})


def cycle_corollary_value(n: int, a: int, b: int, lower=()) -> BoundReport:
    """alpha(Gamma(n, lower + {a, b})) for ``lower`` inside [a-1]."""
    lower = tuple(sorted(lower))
    if lower and (lower[0] < 1 or lower[-1] > a - 1):
        return _na("cycle-corollary", EXACT, f"{list(lower)} is not a subset of [{a - 1}]")
    base = cycle_value(n, a, b)
    if not base.applicable:
        return _na("cycle-corollary", EXACT, base.reason)
    lifted = count_flags_loose(a, lower)
    return BoundReport("cycle-corollary", True, EXACT, base.value * lifted,
                       base.reason, {"a": a, "b": b, "lower": list(lower), "cycle": base.value,
                                     "lift": lifted})


def theorem_1nm2_value(n: int) -> BoundReport:
    if n < 5:
        return _na("theorem-1-(n-2)", EXACT, f"needs n >= 5, got {n}")
    return BoundReport("theorem-1-(n-2)", True, EXACT, math.comb(n, 3) + 2, "type {1, n-2}, n >= 5")


def projection_lower(n: int, T, S, alpha_S: int) -> BoundReport:
    T = make_type(T, n)
    S = make_type(S, n)
    if not set(S) <= set(T):
        raise ParameterError(f"{S} is not a subset of {T}")
    vt, vs = count_flags(n, T), count_flags(n, S)
    if vt % vs:
        raise AssertionError("preimage counts are not uniform")
    return BoundReport("projection-lower", True, LOWER, alpha_S * (vt // vs), "preimage of an independent set",
                       {"S": list(S), "alpha_S": alpha_S, "fibre": vt // vs})


def projection_exact(n: int, T, S, alpha_S: int | None) -> BoundReport:
    T = make_type(T, n)
    S = make_type(S, n)
    if not set(S) < set(T):
        return _na("projection-exact", EXACT, f"{list(S)} is not a proper subset of {list(T)}")
    if S[0] + S[-1] > n:
        return _na("projection-exact", EXACT, f"min(S)+max(S)={S[0] + S[-1]} > {n}")
    rest = sorted(set(T) - set(S))
    if rest[-1] >= S[0]:
        return _na("projection-exact", EXACT, f"max(T-S)={rest[-1]} >= min(S)={S[0]}")
    if alpha_S is None:
        return _na("projection-exact", EXACT, "alpha of the projected type is unknown")
    lift = count_flags_loose(S[0], rest)
    return BoundReport("projection-exact", True, EXACT, alpha_S * lift, "conditions hold",
                       {"S": list(S), "alpha_S": alpha_S, "lift": lift})


def deletion_bound(n: int, a: int, b: int, alpha_smaller: int) -> BoundReport:
    """(b-a) alpha(n,{a,b}) <= n alpha(n-1,{a,b-1})."""
    if not 1 <= a < b - 1 or b >= n:
        return _na("deletion", UPPER, f"need a < b-1 and b < n, got ({n},{a},{b})")
    return BoundReport("deletion", True, UPPER, n * alpha_smaller // (b - a),
                       "every flag lies in F_c for b-a elements c",
                       {"alpha_smaller": alpha_smaller, "smaller_type": [a, b - 1]})


# --- spectral bounds ----------------------------------------------------------


def _floor_with_margin(x: float) -> tuple[int, list[int]]:
    near = round(x)
    if abs(x - near) < FLOOR_MARGIN:
        cands = sorted({math.floor(x - FLOOR_MARGIN), math.floor(x + FLOOR_MARGIN)})
        return cands[-1], cands
    return math.floor(x), [math.floor(x)]


def spectrum(g: FlagGraph, tol: float = EIG_TOL) -> np.ndarray:
    """Ascending adjacency eigenvalues, cached on the graph; the lowest eigenpair is residual-checked."""
    cached = getattr(g, "_spectrum_cache", None)
    if cached is None:
        a = g.adjacency_matrix()
        try:
            w, vecs = np.linalg.eigh(a)
        except np.linalg.LinAlgError as exc:
            raise ArithmeticError(f"symmetric eigensolver failed: {exc}") from exc
        x = vecs[:, 0]
        residual = float(np.linalg.norm(a @ x - w[0] * x))
        scale = max(1.0, float(np.max(np.abs(w))))
        if residual > tol * scale * g.order:
            raise ArithmeticError(f"eigenpair residual {residual:.3e} too large")
        cached = w
        object.__setattr__(g, "_spectrum_cache", cached)
        object.__setattr__(g, "_spectrum_residual", residual)
    return cached


def lambda_min_lanczos(g: FlagGraph, tol: float = EIG_TOL) -> float:
    """Smallest adjacency eigenvalue by shifted Lanczos iteration (no dense factorisation)."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.linalg import eigsh

    rows, cols = zip(*g.edges()) if g.edge_count else ((), ())
    r = np.array(rows + cols, dtype=np.int64)
    c = np.array(cols + rows, dtype=np.int64)
    a = csr_matrix((np.ones(len(r)), (r, c)), shape=(g.order, g.order))
    if g.order < 3:
        return float(np.linalg.eigvalsh(a.toarray())[0])
    vals = eigsh(a, k=1, which="SA", tol=tol, maxiter=100_000, return_eigenvectors=False)
    return float(vals[0])


def hoffman(g: FlagGraph, tol: float = EIG_TOL) -> BoundReport:
    w = spectrum(g, tol)
    lam = float(w[0])
    d = g.degree
    if d == 0:
        return _na("hoffman", UPPER, "edgeless graph")
    real = g.order * (-lam) / (d - lam)
    value, cands = _floor_with_margin(real)
    return BoundReport("hoffman", True, UPPER, value, "regular graph ratio bound",
                       {"lambda_min": lam, "degree": d, "real_value": real, "floors": cands,
                        "residual": getattr(g, "_spectrum_residual", None)})


def inertia_bound(g: FlagGraph, tol: float = EIG_TOL) -> BoundReport:
    w = spectrum(g, tol)
    zero = ZERO_TOL * max(1.0, float(np.max(np.abs(w))))
    pos = int(np.sum(w >= zero))
    neg = int(np.sum(w <= -zero))
    nonneg, nonpos = g.order - neg, g.order - pos
    return BoundReport("inertia", True, UPPER, min(nonneg, nonpos), "min(#eig >= 0, #eig <= 0)",
                       {"positive": pos, "negative": neg, "zero": g.order - pos - neg,
                        "zero_tolerance": zero})


def clique_coclique(g: FlagGraph, omega: int) -> BoundReport:
    if omega < 1:
        raise ParameterError("clique number must be positive")
    return BoundReport("clique-coclique", True, UPPER, g.order // omega,
                       "vertex-transitive graph", {"omega": omega, "vertices": g.order})


# --- induction condition --------------------------------------------------------


def induction_condition(n: int, a: int, b: int) -> bool:
    if not (n >= a + b + 1 and 2 * a < n < 2 * b):
        raise ParameterError(f"need n >= a+b+1 and a < n/2 < b, got ({n},{a},{b})")
    return n >= families.recurrence_rhs(n, a, b) + 3 * a + 1


# --- dispatcher --------------------------------------------------------------


@dataclass
class AlphaVerdict:
    n: int
    T: tuple[int, ...]
    status: str  # exact | interval | unknown
    lower: int
    upper: int
    method: list[str] = field(default_factory=list)
    reports: list[BoundReport] = field(default_factory=list)

    @property
    def value(self) -> int | None:
        return self.lower if self.status == "exact" else None

    def describe(self) -> str:
        if self.status == "exact":
            return str(self.lower)
        return f"[{self.lower},{self.upper}]"

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "T": list(self.T),
            "status": self.status,
            "lower": str(self.lower),
            "upper": str(self.upper),
            "method": list(self.method),
            "reports": [r.to_dict() for r in self.reports],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "AlphaVerdict":
        return cls(d["n"], tuple(d["T"]), d["status"], int(d["lower"]), int(d["upper"]),
                   list(d["method"]), [BoundReport.from_dict(r) for r in d["reports"]])


def _proper_subtypes(T: tuple[int, ...]):
    for k in range(len(T) - 1, 0, -1):
        yield from combinations(T, k)


def _theorem_1nm2_applies(n: int, T) -> bool:
    return n >= 5 and tuple(T) == (1, n - 2)


def _two_level(T):
    return len(T) == 2


@lru_cache(maxsize=None)
def exact_by_theorem(n: int, T: tuple[int, ...]) -> tuple[int, tuple[str, ...]] | None:
    """Try the closed-form results in a fixed order, on ``T`` and on its dual."""
    T = make_type(T, n)
    dual = dual_type(T, n)
    orientations = [(T, "")] if dual == T else [(T, ""), (dual, "dual ")]

    rep = bipartite_value(n, T)
    if rep.applicable:
        return rep.value, (f"bipartite ({rep.reason})",)
    for typ, tag in orientations:
        rep = ekr_value(n, typ)
        if rep.applicable:
            return rep.value, (f"{tag}EKR ({rep.reason})",)
    for typ, tag in orientations:
        for S in _proper_subtypes(typ):
            probe = projection_exact(n, typ, S, 0)
            if not probe.applicable:
                continue
            sub = exact_by_theorem(n, S)
            if sub is None:
                continue
            rep = projection_exact(n, typ, S, sub[0])
            chain = (f"{tag}projection onto {set(S)} (x{rep.support['lift']})",) + sub[1]
            return rep.value, chain
    for typ, tag in orientations:
        if len(typ) >= 2:
            a, b = typ[-2], typ[-1]
            rep = cycle_corollary_value(n, a, b, typ[:-2])
            if rep.applicable:
                name = "cycle" if len(typ) == 2 else "cycle corollary"
                return rep.value, (f"{tag}{name} (a={a}, b={b})",)
    for typ, tag in orientations:
        if _theorem_1nm2_applies(n, typ):
            return theorem_1nm2_value(n).value, (f"{tag}theorem {{1,n-2}}",)
    return None


def _settled_by_basic(n: int, T: tuple[int, ...]) -> bool:
    """Whether bipartiteness, EKR and exact projection alone (with duals) settle ``T``."""
    T = make_type(T, n)
    return _basic(n, T) is not None


@lru_cache(maxsize=None)
def _basic(n: int, T: tuple[int, ...]) -> int | None:
    dual = dual_type(T, n)
    if bipartite_value(n, T).applicable:
        return bipartite_value(n, T).value
    for typ in {T, dual}:
        rep = ekr_value(n, typ)
        if rep.applicable:
            return rep.value
    for typ in sorted({T, dual}):
        for S in _proper_subtypes(typ):
            if not projection_exact(n, typ, S, 0).applicable:
                continue
            sub = _basic(n, S)
            if sub is not None:
                return projection_exact(n, typ, S, sub).value
    return None


def open_after_basic(n: int) -> list[tuple[int, ...]]:
    """Types over [n-1] not settled by the basic results, one per duality pair."""
    out = []
    for T in _all_types(n):
        dual = dual_type(T, n)
        if dual < T:
            continue
        if not _settled_by_basic(n, T):
            out.append(T)
    return out


def _all_types(n):
    for k in range(1, n):
        yield from combinations(range(1, n), k)


@dataclass
class DispatchConfig:
    use_solver: bool = False
    graph_cap: int = 3000
    solver_cap: int = 1000
    spectral: bool = True
    budget: Budget | None = None
    eig_tol: float = EIG_TOL


def _family_lower(n: int, T) -> BoundReport | None:
    if not _two_level(T):
        return None
    for typ, tag in ((tuple(T), ""), (dual_type(T, n), "dual ")):
        a, b = typ
        try:
            families.check_triple(n, a, b)
        except ParameterError:
            continue
        br = families.optimal_shift(n, a, b)
        return BoundReport("family", True, LOWER, br.total, f"{tag}F_{br.i_star}({n},{a},{b})",
                           {"a": a, "b": b, "i": br.i_star, "i0": str(br.i0)})
    return None


def _deletion_upper(n: int, T, config: DispatchConfig, depth: int) -> list[BoundReport]:
    out = []
    if not _two_level(T) or n < 4:
        return out
    seen = set()
    for typ in (tuple(T), dual_type(T, n)):
        if typ in seen:
            continue
        seen.add(typ)
        a, b = typ
        if not (a < b - 1 and b < n):
            continue
        smaller = (a, b - 1)
        sub = _dispatch(n - 1, smaller, config, depth + 1)
        rep = deletion_bound(n, a, b, sub.upper)
        rep.support["smaller_verdict"] = sub.describe()
        out.append(rep)
    return out


def alpha_dispatch(n: int, T, config: DispatchConfig | None = None) -> AlphaVerdict:
    """Decide alpha(Gamma(n,T)) by theorem where possible, otherwise bracket it.

    Order: bipartite, EKR (and dual), exact projection (and dual), cycle and
    its corollary (and dual), the {1, n-2} theorem.  Failing those, the best
    lower bound (constructed family or projection preimage) is paired with
    the best upper bound (half, deletion, Hoffman, inertia, clique-coclique),
    and the exact solver runs last when enabled and the graph is small enough.
    """
    T = make_type(T, n)
    return _dispatch(n, T, config or DispatchConfig(), 0)


def _dispatch(n: int, T: tuple[int, ...], config: DispatchConfig, depth: int) -> AlphaVerdict:
    hit = exact_by_theorem(n, T)
    if hit is not None:
        return AlphaVerdict(n, T, "exact", hit[0], hit[0], list(hit[1]))
    reports: list[BoundReport] = []
    lows: list[BoundReport] = [BoundReport("trivial", True, LOWER, 1, "single vertex")]
    fam = _family_lower(n, T)
    if fam is not None:
        lows.append(fam)
    for S in _proper_subtypes(T):
        sub = _dispatch(n, S, DispatchConfig(False, 0, 0, False), depth + 1)
        lows.append(projection_lower(n, T, S, sub.lower))
    ups: list[BoundReport] = [half_value(n, T)]
    ups.extend(_deletion_upper(n, T, config, depth))
    g = None
    size = count_flags(n, T)
    if depth == 0 and config.spectral and size <= config.graph_cap:
        g = build_graph(n, T)
        ups.append(hoffman(g, config.eig_tol))
        ups.append(inertia_bound(g, config.eig_tol))
        try:
            ups.append(clique_coclique(g, omega_exact(g, config.budget)))
        except Exception as exc:  # budget exhaustion only weakens the bracket
            ups.append(_na("clique-coclique", UPPER, f"clique number unavailable: {exc}"))
    reports = lows + ups
    best_low = max((r for r in lows if r.applicable), key=lambda r: r.value)
    best_up = min((r for r in ups if r.applicable), key=lambda r: r.value)
    lo, hi = best_low.value, best_up.value
    if lo > hi:
        raise AssertionError(f"inconsistent bounds for Gamma({n},{set(T)}): {lo} > {hi}")
    method = [f"lower: {best_low.name} ({best_low.reason})", f"upper: {best_up.name}"]
    if lo == hi:
        return AlphaVerdict(n, T, "exact", lo, hi, method + ["bounds meet"], reports)
    if config.use_solver and depth == 0 and size <= config.solver_cap:
        g = g or build_graph(n, T)
        res = alpha_exact(g, lower_hint=lo, budget=config.budget)
        if res.exact:
            return AlphaVerdict(n, T, "exact", res.alpha, res.alpha,
                                method + [f"solver ({res.nodes_explored} nodes)"], reports)
        lo = max(lo, res.alpha)
        hi = min(hi, res.upper)
        method.append("solver budget exhausted")
    status = "interval" if lo < hi else "exact"
    return AlphaVerdict(n, T, status, lo, hi, method, reports)
