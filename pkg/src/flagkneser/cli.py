"""Command-line entry point, result cache and reproduction report.

Exit codes: 0 success, 2 usage, 3 resource or budget, 4 internal consistency.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .bounds import (
    BoundReport,
    DispatchConfig,
    EIG_TOL,
    _settled_by_basic,
    alpha_dispatch,
    bipartite_value,
    clique_coclique,
    cycle_corollary_value,
    deletion_bound,
    ekr_value,
    exact_by_theorem,
    half_value,
    hoffman,
    inertia_bound,
    theorem_1nm2_value,
)
from .core import ParameterError, all_types, count_flags, dual_type, parse_type
from .families import (
    FamilySpec,
    barred_size,
    build_family,
    family_size,
    max_shift,
    neighbor_profile,
    optimal_shift,
)
from .graph import ResourceError, build_graph, components, export_edge_list, is_bipartite
from .graph import is_complete_bipartite_component
from .solver import Budget, BudgetExceeded, alpha_exact, enumerate_maximum, is_maximal_independent
from .solver import omega_exact
from .symmetry import FULL, GENERATOR, SymmetryGroupSpec, classify, describe_set

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE, EXIT_CONSISTENCY = 0, 2, 3, 4
GRAPH_N_CAP = 16


class ConsistencyError(AssertionError):
    """Two routes to the same quantity disagree."""


# --- configuration ------------------------------------------------------------


@dataclass
class RunConfig:
    budget_seconds: float | None = None
    max_nodes: int | None = None
    workers: int = 1
    vertex_cap: int = 100_000
    graph_cap: int = 3000
    solver_cap: int = 1000
    eig_tol: float = EIG_TOL
    symmetry: str = GENERATOR

    def budget(self) -> Budget:
        return Budget(self.max_nodes, self.budget_seconds)

    def dispatch(self, use_solver: bool) -> DispatchConfig:
        return DispatchConfig(use_solver, self.graph_cap, self.solver_cap, True, self.budget(),
                              self.eig_tol)

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_CASTS: dict[str, Callable[[str], Any]] = {
    "budget_seconds": float,
    "max_nodes": int,
    "workers": int,
    "vertex_cap": int,
    "graph_cap": int,
    "solver_cap": int,
    "eig_tol": float,
    "symmetry": str,
}


def load_config(path: str | os.PathLike | None) -> RunConfig:
    """Read ``key=value`` lines; ``#`` starts a comment."""
    cfg = RunConfig()
    if path is None:
        return cfg
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().replace("-", "_"), value.strip()
        if not sep or key not in _CASTS:
            raise ParameterError(f"{path}:{lineno}: unrecognised config line {raw!r}")
        setattr(cfg, key, None if value.lower() == "none" else _CASTS[key](value))
    return cfg


# --- output and cache -----------------------------------------------------------


def decimal_strings(x):
    """Recursively turn integers into decimal strings (booleans stay booleans)."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, int):
        return str(x)
    if isinstance(x, dict):
        return {str(k): decimal_strings(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [decimal_strings(v) for v in x]
    return x


def make_result(params: dict, verdict: dict, provenance: dict, support: dict) -> dict:
    return {
        "params": decimal_strings(params),
        "verdict": decimal_strings(verdict),
        "provenance": decimal_strings(provenance),
        "support": decimal_strings(support),
        "version": __version__,
    }


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


@dataclass
class ResultRecord:
    n: int
    T: tuple[int, ...]
    kind: str
    digest: str
    value: dict
    created: float
    version: str = __version__

    def to_json(self) -> str:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["T"] = list(self.T)
        d["created"] = repr(self.created)
        return dumps(d)

    @classmethod
    def from_json(cls, text: str) -> "ResultRecord":
        d = json.loads(text)
        return cls(d["n"], tuple(d["T"]), d["kind"], d["digest"], d["value"], float(d["created"]),
                   d["version"])


class ResultCache:
    """One JSON file per record under ``root/<config digest>/``."""

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)

    def path(self, n: int, T, kind: str, digest: str) -> Path:
        tag = "-".join(map(str, T)) or "none"
        return self.root / digest / f"{kind}_n{n}_T{tag}.json"

    def get(self, n: int, T, kind: str, digest: str) -> ResultRecord | None:
        p = self.path(n, T, kind, digest)
        if not p.exists():
            return None
        return ResultRecord.from_json(p.read_text())

    def put(self, record: ResultRecord) -> Path:
        p = self.path(record.n, record.T, record.kind, record.digest)
        p.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=p.parent, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(record.to_json())
            os.replace(tmp, p)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return p


def cached(args, n: int, T, kind: str, compute: Callable[[], tuple[dict, int]]) -> tuple[dict, int]:
    """Run ``compute`` unless the cache already holds a record; only clean results are stored."""
    cfg: RunConfig = args.config
    cache = ResultCache(args.cache_dir) if args.cache_dir else None
    if cache is not None:
        hit = cache.get(n, T, kind, cfg.digest())
        if hit is not None:
            return hit.value, EXIT_OK
    result, code = compute()
    if cache is not None and code == EXIT_OK:
        cache.put(ResultRecord(n, tuple(T), kind, cfg.digest(), result, time.time()))
    return result, code


# --- text and csv rendering -------------------------------------------------------


def _flatten(prefix: str, x, out: dict):
    if isinstance(x, dict):
        for k in sorted(x):
            _flatten(f"{prefix}.{k}" if prefix else k, x[k], out)
    elif isinstance(x, list) and x and all(isinstance(v, (dict, list)) for v in x):
        for i, v in enumerate(x):
            _flatten(f"{prefix}[{i}]", v, out)
    elif isinstance(x, list):
        out[prefix] = ";".join(map(str, x))
    else:
        out[prefix] = "" if x is None else str(x)


def render(result: dict, fmt: str, with_support: bool = False) -> str:
    if fmt == "json":
        return dumps(result)
    flat: dict[str, str] = {}
    keys = ("params", "verdict", "provenance") + (("support",) if with_support else ())
    _flatten("", {k: result[k] for k in keys}, flat)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["field", "value"])
        w.writerows(flat.items())
        return buf.getvalue()
    width = max(map(len, flat), default=0)
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in flat.items())


# --- commands ---------------------------------------------------------------------


def _type_text(T) -> str:
    return "{" + ",".join(map(str, T)) + "}"


def _provenance(args, method) -> dict:
    return {"config_digest": args.config.digest(), "method": method}


def _graph(args, n, T):
    if n > GRAPH_N_CAP:
        raise ResourceError(f"graphs are only built for n <= {GRAPH_N_CAP}")
    return build_graph(n, T, args.config.vertex_cap)


def cmd_graph(args) -> tuple[dict, int]:
    n, T = args.n, args.type
    g = _graph(args, n, T)
    bip, _ = is_bipartite(g)
    comps = components(g)
    verdict = {"vertices": g.order, "edges": g.edge_count, "degree": g.degree, "bipartite": bip,
               "components": len(comps)}
    support = {"dual_type": list(dual_type(T, n))}
    if bip:
        support["complete_bipartite_components"] = all(
            is_complete_bipartite_component(g, c) for c in comps)
    if args.export:
        with open(args.export, "w") as fh:
            export_edge_list(g, fh)
        support["edge_list"] = str(args.export)
    return make_result({"n": n, "T": list(T)}, verdict, _provenance(args, "build_graph"),
                       support), EXIT_OK


def _solver_verdict(args, g, lower_hint=None) -> tuple[dict, int]:
    cfg: RunConfig = args.config
    res = alpha_exact(g, lower_hint=lower_hint, budget=cfg.budget(), workers=cfg.workers)
    lo, hi = res.interval
    verdict = {"status": "exact" if res.exact else "interval", "lower": lo, "upper": hi}
    if res.exact:
        verdict["value"] = res.alpha
    support = {"nodes": res.nodes_explored, "seconds": round(res.elapsed, 3),
               "bounds": res.bounds_used, "witness": describe_set(res.witness, g)}
    return {"verdict": verdict, "support": support}, (EXIT_OK if res.exact else EXIT_RESOURCE)


def cmd_alpha(args) -> tuple[dict, int]:
    n, T, mode = args.n, args.type, args.mode
    cfg: RunConfig = args.config
    params = {"n": n, "T": list(T), "mode": mode}

    def compute():
        method, verdict, support, code = [], {}, {}, EXIT_OK
        dv = None
        if mode in ("dispatch", "both"):
            dv = alpha_dispatch(n, T, cfg.dispatch(use_solver=False))
            verdict = {"status": dv.status, "lower": dv.lower, "upper": dv.upper}
            if dv.value is not None:
                verdict["value"] = dv.value
            method += dv.method
            support["dispatch"] = dv.to_dict()
        if mode in ("solve", "both"):
            sv, code = _solver_verdict(args, _graph(args, n, T))
            method.append("solver")
            support["solver"] = sv["support"]
            if dv is None:
                verdict = sv["verdict"]
            else:
                sl, su = int(sv["verdict"]["lower"]), int(sv["verdict"]["upper"])
                if sl > dv.upper or su < dv.lower:
                    raise ConsistencyError(
                        f"solver [{sl},{su}] contradicts dispatch {dv.describe()}")
                verdict["agree"] = dv.status == "exact" and code == EXIT_OK and sl == dv.lower
                if dv.status != "exact":
                    verdict.update(lower=max(dv.lower, sl), upper=min(dv.upper, su))
                    if verdict["lower"] == verdict["upper"]:
                        verdict.update(status="exact", value=verdict["lower"])
        return make_result(params, verdict, _provenance(args, method), support), code

    return cached(args, n, T, f"alpha-{mode}", compute)


def cmd_family(args) -> tuple[dict, int]:
    n, a, b, i = args.n, args.a, args.b, args.i
    spec = FamilySpec(n, a, b, i, args.barred)
    g = _graph(args, n, (a, b))
    members = build_family(spec, g)
    size = members.bit_count()
    formula = barred_size(n, a, b) if spec.barred else family_size(n, a, b, i)
    if size != formula:
        raise ConsistencyError(f"{spec.label}: enumerated {size}, formula {formula}")
    maximal = is_maximal_independent(members, g)
    verdict = {"family": spec.label, "size": size, "formula": formula, "independent": True,
               "maximal": maximal}
    support = {"neighbor_profile": neighbor_profile(members, g),
               "optimal_shift": optimal_shift(n, a, b).i_star}
    top = max_shift(n, b)
    if not spec.barred and i == top:
        sup = build_family(FamilySpec(n, a, b, top, barred=True), g)
        if sup & members != members:
            raise ConsistencyError("barred family does not contain the top shift")
        verdict["barred_superset_size"] = sup.bit_count()
    return make_result({"n": n, "a": a, "b": b, "i": i, "barred": spec.barred}, verdict,
                       _provenance(args, "build_family"), support), EXIT_OK


def cmd_classify(args) -> tuple[dict, int]:
    n, T = args.n, args.type
    cfg: RunConfig = args.config

    def compute():
        g = _graph(args, n, T)
        hint = alpha_dispatch(n, T, DispatchConfig(spectral=False)).lower
        res = alpha_exact(g, lower_hint=hint, budget=cfg.budget(), workers=cfg.workers)
        params = {"n": n, "T": list(T), "symmetry": cfg.symmetry}
        if not res.exact:
            verdict = {"status": "partial", "alpha_lower": res.alpha, "alpha_upper": res.upper}
            return make_result(params, verdict, _provenance(args, ["alpha_exact"]), {}), EXIT_RESOURCE
        spec = SymmetryGroupSpec.for_graph(g, cfg.symmetry)
        status, code = "complete", EXIT_OK
        try:
            sets = list(enumerate_maximum(g, res.alpha, cfg.budget(), workers=cfg.workers))
        except BudgetExceeded as exc:
            return make_result(params, {"status": "partial", "alpha": res.alpha,
                                        "sets_found": exc.found},
                               _provenance(args, ["alpha_exact", "enumerate_maximum"]),
                               {}), EXIT_RESOURCE
        report = classify(sets, g, spec)
        classes = [{"representative": describe_set(c.representative, g),
                    "orbit_size": c.orbit_size, "members_seen": c.members_seen,
                    "profile": c.profile} for c in report.classes]
        verdict = {"status": status, "alpha": res.alpha, "maximum_sets": len(sets),
                   "classes": report.class_count}
        support = {"classes": classes, "group_order": spec.order,
                   "duality": spec.include_duality}
        return make_result(params, verdict,
                           _provenance(args, ["alpha_exact", "enumerate_maximum", "classify"]),
                           support), code

    return cached(args, n, T, f"classify-{cfg.symmetry}", compute)


def bound_reports(n: int, T, cfg: RunConfig) -> list[BoundReport]:
    """Every bound evaluated on Gamma(n, T), applicable or not."""
    dual = dual_type(T, n)
    reps = [bipartite_value(n, T), ekr_value(n, T)]
    if dual != T:
        r = ekr_value(n, dual)
        r.name = "ekr-dual"
        reps.append(r)
    if len(T) >= 2:
        reps.append(cycle_corollary_value(n, T[-2], T[-1], T[:-2]))
    if T in ((1, n - 2), (2, n - 1)):
        reps.append(theorem_1nm2_value(n))
    reps.append(half_value(n, T))
    if len(T) == 2 and T[0] < T[1] - 1 and n >= 4:
        sub = alpha_dispatch(n - 1, (T[0], T[1] - 1), DispatchConfig(spectral=False))
        r = deletion_bound(n, T[0], T[1], sub.upper)
        r.support["smaller_verdict"] = sub.describe()
        reps.append(r)
    if n <= GRAPH_N_CAP and count_flags(n, T) <= cfg.graph_cap:
        g = build_graph(n, T, cfg.vertex_cap)
        reps += [hoffman(g, cfg.eig_tol), inertia_bound(g, cfg.eig_tol)]
        try:
            reps.append(clique_coclique(g, omega_exact(g, cfg.budget())))
        except BudgetExceeded as exc:
            reps.append(BoundReport("clique-coclique", False, "upper", None, str(exc)))
    return reps


def cmd_bounds(args) -> tuple[dict, int]:
    n, T = args.n, args.type
    cfg: RunConfig = args.config
    reps = bound_reports(n, T, cfg)
    dv = alpha_dispatch(n, T, cfg.dispatch(use_solver=False))
    verdict = {"status": dv.status, "lower": dv.lower, "upper": dv.upper}
    support = {"bounds": [r.to_dict() for r in reps]}
    return make_result({"n": n, "T": list(T)}, verdict, _provenance(args, dv.method),
                       support), EXIT_OK


REPORT_COLUMNS = ["n", "T", "dual", "vertices", "status", "lower", "upper", "settled_by",
                  "basic", "method"]


def report_rows(max_n: int, cfg: RunConfig) -> list[dict]:
    rows = []
    for n in range(2, max_n + 1):
        for T in all_types(n):
            dv = alpha_dispatch(n, T, cfg.dispatch(use_solver=False))
            hit = exact_by_theorem(n, T)
            rows.append({
                "n": n,
                "T": _type_text(T),
                "dual": _type_text(dual_type(T, n)),
                "vertices": count_flags(n, T),
                "status": dv.status,
                "lower": dv.lower,
                "upper": dv.upper,
                "settled_by": hit[1][0].split(" (")[0] if hit else ("bounds" if dv.status == "exact" else ""),
                "basic": _settled_by_basic(n, T),
                "method": " | ".join(dv.method),
            })
    return rows


def cmd_report(args) -> tuple[dict, int]:
    cfg: RunConfig = args.config
    if args.max_n > GRAPH_N_CAP:
        raise ParameterError(f"--max-n must be at most {GRAPH_N_CAP}")
    rows = report_rows(args.max_n, cfg)
    unsettled = [r for r in rows if r["status"] != "exact"]
    if any(r["status"] != "exact" for r in rows if r["n"] <= 6):
        raise ConsistencyError("some type with n <= 6 is not settled")
    result = make_result({"max_n": args.max_n},
                         {"types": len(rows), "exact": len(rows) - len(unsettled),
                          "intervals": [f"n={r['n']} {r['T']}" for r in unsettled]},
                         _provenance(args, "alpha_dispatch"), {"rows": rows})
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(dumps(result))
        with open(out / "report.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, REPORT_COLUMNS, lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, REPORT_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        result["_csv"] = buf.getvalue()
    return result, EXIT_OK


def cmd_selftest(args) -> tuple[dict, int]:
    """Fast cross-checks of independent routes; exit 4 on any disagreement."""
    checks = {}
    cfg = DispatchConfig(spectral=False)
    for n, T, want in [(5, (1, 3), 12), (6, (1, 4), 22), (6, (2, 4), 45), (4, (1, 2), 6)]:
        dv = alpha_dispatch(n, T, cfg)
        sv = alpha_exact(build_graph(n, T)).alpha
        checks[f"alpha {n} {_type_text(T)}"] = dv.value == sv == want
    checks["family F_1(8,2,5)"] = family_size(8, 2, 5, 1) == 230
    checks["dispatch 8 {2,5}"] = alpha_dispatch(8, (2, 5), cfg).describe() == "[230,240]"
    g = build_graph(5, (1, 3))
    report = classify(enumerate_maximum(g, 12), g)
    checks["classes 5 {1,3}"] = report.class_count == 3
    ok = all(checks.values())
    return make_result({}, {"passed": ok, "checks": checks}, _provenance(args, "selftest"),
                       {}), (EXIT_OK if ok else EXIT_CONSISTENCY)


# --- argument parsing -----------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", dest="config_file", help="key=value configuration file")
    common.add_argument("--budget-seconds", type=float)
    common.add_argument("--max-nodes", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--cache-dir")
    common.add_argument("--format", choices=["json", "csv", "text"], default="text")

    p = argparse.ArgumentParser(prog="flagkneser", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def with_type(sp):
        sp.add_argument("-n", type=int, required=True)
        sp.add_argument("-T", dest="type_text", required=True, help="comma-separated type, e.g. 2,5")

    g = sub.add_parser("graph", parents=[common], help="build Gamma(n,T) and summarise it")
    with_type(g)
    g.add_argument("--export", help="write a DIMACS edge list to this path")

    a = sub.add_parser("alpha", parents=[common], help="independence number")
    with_type(a)
    a.add_argument("--mode", choices=["dispatch", "solve", "both"], default="dispatch")

    f = sub.add_parser("family", parents=[common], help="shifted family F_i(n,a,b)")
    f.add_argument("-n", type=int, required=True)
    f.add_argument("-a", type=int, required=True)
    f.add_argument("-b", type=int, required=True)
    f.add_argument("-i", type=int, required=True)
    f.add_argument("--barred", action="store_true")

    c = sub.add_parser("classify", parents=[common], help="classes of maximum independent sets")
    with_type(c)
    c.add_argument("--symmetry", choices=[GENERATOR, FULL])

    b = sub.add_parser("bounds", parents=[common], help="every bound on alpha(Gamma(n,T))")
    with_type(b)

    r = sub.add_parser("report", parents=[common], help="dispatch table over all types")
    r.add_argument("--max-n", type=int, default=8)
    r.add_argument("--out-dir")

    sub.add_parser("selftest", parents=[common], help="quick internal cross-checks")
    return p


COMMANDS = {
    "graph": cmd_graph,
    "alpha": cmd_alpha,
    "family": cmd_family,
    "classify": cmd_classify,
    "bounds": cmd_bounds,
    "report": cmd_report,
    "selftest": cmd_selftest,
}


def _prepare(args) -> None:
    cfg = load_config(args.config_file)
    for name in ("budget_seconds", "max_nodes", "workers"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "symmetry", None):
        cfg.symmetry = args.symmetry
    if cfg.workers < 1:
        raise ParameterError("--workers must be positive")
    args.config = cfg
    if getattr(args, "type_text", None) is not None:
        args.type = parse_type(args.type_text, args.n)


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        _prepare(args)
        result, code = COMMANDS[args.command](args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConsistencyError, AssertionError, ArithmeticError) as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    text = result.pop("_csv", None)
    if text is not None and args.format == "csv":
        out.write(text)
    else:
        out.write(render(result, args.format, args.command in ("bounds", "classify")))
    return code


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_entry()
