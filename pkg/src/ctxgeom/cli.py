"""Command-line interface: ``ctxgeom {validate,quantify,invariants,ncycle}``.

Every command prints one JSON document on stdout.  Exit codes: 0 success,
1 validation or solver failure, 2 input or usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from ._numeric import to_number
from .errors import CtxGeomError, DomainError, NotApplicableError, SolverError, ValidationError
from .exclusivity import csw_bounds, exclusivity_quantifiers, ncycle_exclusivity_report
from .graphs import Graph, named_graph
from .io import FORMAT_VERSION, ParseError, load_scenario
from .polytopes import ncycle_facets_pm1
from .quantifiers import NORMS, to_jsonable, psi_space_quantifiers, quantify
from .scenario import check_nondisturbance
from .solvers.invariants import fractional_packing, independence_number
from .solvers.sdp import lovasz_theta

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
DEFAULT_SEED = 0
COMPAT_MEASURES = ("cf", "rob", "d1", "d2", "dinf", "du", "dmax", "eu", "emax")
EXCL_MEASURES = {"cf": ("CF", "l1"), "rob": ("R", "l1"), "d1": ("D", "l1"),
                 "d2": ("D", "l2"), "dinf": ("D", "linf")}
SPACE_MEASURES = {"d1": ("l1", "D"), "d2": ("l2", "D"), "dinf": ("linf", "D"),
                  "du": (None, "D_u"), "dmax": (None, "D_max")}


class UsageError(CtxGeomError):
    pass


def _emit(doc: dict) -> None:
    print(json.dumps(to_jsonable(doc), indent=2))


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("CTXGEOM_THREADS", "")
    return max(1, int(env)) if env.isdigit() else 1


# --- validate --------------------------------------------------------------------

def cmd_validate(args) -> int:
    doc = {"format_version": FORMAT_VERSION, "command": "validate", "input": args.path}
    try:
        sf = load_scenario(args.path)
    except ParseError:
        raise
    except ValidationError as exc:
        doc.update(ok=False, error=str(exc),
                   validation={"normalized": False, "nondisturbing": None})
        _emit(doc)
        return EXIT_FAIL
    if sf.kind == "exclusivity":
        doc.update(ok=True, validation={"kind": "exclusivity", "normalized": True,
                                        "exclusivity_respected": True})
        _emit(doc)
        return EXIT_OK
    viol = check_nondisturbance(sf.data)
    doc.update(ok=not viol, validation={
        "kind": "compatibility", "normalized": True, "nondisturbing": not viol,
        "violations": [{"contexts": [[sf.data.scenario.measurements[i] for i in c]
                                     for c in (v.context_a, v.context_b)],
                        "intersection": [sf.data.scenario.measurements[i] for i in v.intersection],
                        "discrepancy": v.discrepancy} for v in viol]})
    _emit(doc)
    return EXIT_OK if not viol else EXIT_FAIL


# --- quantify --------------------------------------------------------------------

def _compat_job(B, measure: str, space: str, norm: str, seed, rob_method: str):
    if space == "raw":
        return lambda: quantify(B, measure, norm, seed, rob_method)
    if measure not in SPACE_MEASURES:
        raise UsageError(f"measure {measure!r} is only available with --space raw")
    if B.scenario.outcomes != (1, -1) or any(len(C) != 2 for C in B.scenario.contexts):
        raise UsageError("--space phi/psi/alpha needs (+1, -1) outcomes and edge contexts")
    nm, variant = SPACE_MEASURES[measure]
    return lambda: psi_space_quantifiers(B, nm or norm, variant, space)


def cmd_quantify(args) -> int:
    sf = load_scenario(args.path)
    measures = [m.strip() for m in args.measure.split(",") if m.strip()]
    jobs = []
    for m in measures:
        if sf.kind == "compatibility":
            if m not in COMPAT_MEASURES:
                raise UsageError(f"unknown measure {m!r}")
            jobs.append(_compat_job(sf.data, m, args.space, args.norm, args.seed, args.robustness))
        else:
            if m not in EXCL_MEASURES:
                raise UsageError(f"measure {m!r} is not defined for exclusivity scenarios")
            if args.space != "raw":
                raise UsageError("exclusivity scenarios only support --space raw")
            variant, nm = EXCL_MEASURES[m]
            jobs.append(lambda v=variant, n=nm: exclusivity_quantifiers(sf.data, v, n))
    if sf.kind == "compatibility":
        viol = check_nondisturbance(sf.data)
        if viol:
            raise DomainError(f"behavior is disturbing ({len(viol)} inconsistent context pairs)")
    workers = _threads(args)
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            reports = list(pool.map(lambda f: f(), jobs))
    else:
        reports = [f() for f in jobs]
    _emit({"format_version": FORMAT_VERSION, "command": "quantify", "ok": True,
           "input": args.path, "seed": args.seed, "space": args.space,
           "reports": [r.to_json() for r in reports]})
    return EXIT_OK


# --- invariants ------------------------------------------------------------------

def _load_graph(path: str):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read file ({exc.strerror})", path) from None
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from None
    try:
        n = int(doc["vertices"])
        edges = tuple(tuple(int(x) for x in e) for e in doc.get("edges", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"graph files need 'vertices' and 'edges' ({exc})", path) from None
    weights = doc.get("weights")
    if weights is not None:
        weights = [to_number(w) for w in weights]
    return Graph(n, edges), weights


def cmd_invariants(args) -> int:
    if args.graph:
        G, weights = _load_graph(args.graph)
    elif args.family:
        if args.n is None:
            raise UsageError("--family needs --n")
        G, weights = named_graph(args.family, args.n), None
    else:
        raise UsageError("give a graph file or --family and --n")
    which = [k for k in ("alpha", "theta", "alphastar") if getattr(args, k)]
    which = which or ["alpha", "theta", "alphastar"]
    out = {"n": G.n, "edges": len(G.edges)}
    if "alpha" in which:
        a = independence_number(G, weights)
        out["alpha"] = {"value": a.value, "independent_set": list(a.witness)}
    if "theta" in which:
        th = lovasz_theta(G, weights)
        out["theta"] = {"value": th.value, "lower": th.lower, "upper": th.upper,
                        "iterations": th.iterations}
    if "alphastar" in which:
        fp = fractional_packing(G, weights)
        out["alphastar"] = {"value": fp.value, "point": list(fp.point)}
    _emit({"format_version": FORMAT_VERSION, "command": "invariants", "ok": True,
           "invariants": out})
    return EXIT_OK


# --- ncycle ----------------------------------------------------------------------

def ncycle_compat_table(n: int) -> dict:
    """Bounds for the n-cycle correlator sum from the exclusivity graph of its events.

    The events are "outcomes equal" and "outcomes different" on each edge;
    their exclusivity graph is the prism for odd ``n`` and the Möbius ladder
    on ``2n`` vertices for even ``n``.  A bound ``beta`` on the event sum
    gives ``2 beta - n`` on the signed correlator sum.
    """
    if n < 3:
        raise DomainError("the n-cycle needs n >= 3")
    H = named_graph("prism", n) if n % 2 else named_graph("moebius-ladder", 2 * n)
    b = csw_bounds(H)
    c = math.cos(math.pi / n)
    quantum_closed = n * c if n % 2 == 0 else (3 * n * c - n) / (1 + c)
    classical = 2 * b.classical - n
    quantum = 2 * b.quantum - n
    eprinciple = 2 * b.eprinciple - n
    table = {}
    for norm in NORMS:
        q = {"l1": math.inf, "l2": 2.0, "linf": 1.0}[norm]
        s = 1.0 if math.isinf(q) else n ** (1.0 / q)
        table[norm] = {"quantum_raw": (quantum - classical) / s,
                       "quantum": (quantum - classical) / (s * n),
                       "eprinciple_raw": float(eprinciple - classical) / s,
                       "eprinciple": float(eprinciple - classical) / (s * n)}
    return {"n": n, "approach": "compat", "exclusivity_graph": "prism" if n % 2 else "moebius-ladder",
            "classical": classical, "quantum": quantum, "eprinciple": eprinciple,
            "quantum_closed_form": quantum_closed,
            "disagreements": [] if abs(quantum - quantum_closed) <= 1e-5 else ["quantum"],
            "facets": len(ncycle_facets_pm1(n).b), "max_distances": table}


def cmd_ncycle(args) -> int:
    if args.approach == "compat":
        table = ncycle_compat_table(args.n)
    else:
        table = ncycle_exclusivity_report(args.n)
        table["approach"] = "exclusivity"
    _emit({"format_version": FORMAT_VERSION, "command": "ncycle", "ok": not table["disagreements"],
           "table": table})
    return EXIT_OK if not table["disagreements"] else EXIT_FAIL


# --- entry point -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ctxgeom", description="Contextuality quantifiers and bounds.")
    p.add_argument("--version", action="version", version=f"ctxgeom {__version__}")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help="seed for randomized solver starts (default 0)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for independent measures (default: $CTXGEOM_THREADS or 1)")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check normalization and non-disturbance")
    v.add_argument("path")
    v.set_defaults(func=cmd_validate)

    q = sub.add_parser("quantify", help="compute contextuality quantifiers")
    q.add_argument("path")
    q.add_argument("--measure", default="cf", help=f"comma-separated list from {','.join(COMPAT_MEASURES)}")
    q.add_argument("--space", default="raw", choices=("raw", "phi", "psi", "alpha"))
    q.add_argument("--norm", default="l1", choices=NORMS, help="norm for du and dmax")
    q.add_argument("--robustness", default="lp", choices=("lp", "noncontextual", "white"),
                   help="noise model for rob")
    q.set_defaults(func=cmd_quantify)

    i = sub.add_parser("invariants", help="independence, Lovász and fractional packing numbers")
    i.add_argument("graph", nargs="?", help="JSON file with 'vertices', 'edges' and optional 'weights'")
    i.add_argument("--family")
    i.add_argument("--n", type=int)
    i.add_argument("--alpha", action="store_true")
    i.add_argument("--theta", action="store_true")
    i.add_argument("--alphastar", action="store_true")
    i.set_defaults(func=cmd_invariants)

    c = sub.add_parser("ncycle", help="n-cycle bounds and maximal distances")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--approach", default="compat", choices=("compat", "exclusivity"))
    c.set_defaults(func=cmd_ncycle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, UsageError, ValidationError, DomainError, NotApplicableError) as exc:
        _emit({"format_version": FORMAT_VERSION, "command": args.command, "ok": False,
               "error": f"{type(exc).__name__}: {exc}"})
        return EXIT_INPUT
    except (SolverError, CtxGeomError) as exc:
        _emit({"format_version": FORMAT_VERSION, "command": args.command, "ok": False,
               "error": f"{type(exc).__name__}: {exc}"})
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
