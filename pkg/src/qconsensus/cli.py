"""Command-line interface: partitions, induced, optimize, verify, simulate.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 unsupported request, 4 resource guard.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys

import numpy as np

from . import __version__
from .errors import DomainError, ParseError, ResourceError, UnsupportedError
from .graphs import KINDS, TopologySpec, WeightedGraph, build_topology, from_json, laplacian, to_dict, to_dot
from .induced import induced_graph, projection_matrix, verify_intertwining
from .optimize import certify, closed_form, maximize_gap_numeric
from .partitions import Partition, enumerate_partitions, hasse_diagram, tabloid_count
from .quantum import consensus_state, decay_slope, qcme_integrate, random_density, verify_reduction
from .spectral import eigenvalues_sym, spectral_gap, verify_aldous_extension, verify_hasse_ordering

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_UNSUPPORTED, EXIT_RESOURCE = 0, 1, 2, 3, 4

ALIASES = {
    "ccs": "ccs_star",
    "two_branch": "ccs_two_branch",
    "ccs2": "ccs_two_branch",
    "symstar": "symmetric_star",
    "coupled": "coupled_complete",
    "cartesian": "cartesian_product",
    "product": "cartesian_product",
    "k": "complete",
}
PARAM_FLAGS = {
    "path": ("n",), "cycle": ("n",), "star": ("n",), "complete": ("n",), "paw": (),
    "lollipop": ("p", "q"), "ccs_star": ("p", "q"), "symmetric_star": ("p", "q"), "palm": ("p", "q"),
    "ccs_two_branch": ("p", "q1", "q2"), "coupled_complete": ("n1", "n2", "n3"),
}


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    return f"{x:.6g}" if isinstance(x, (float, np.floating)) else str(x)


def parse_spec(token: str, flags: dict | None = None) -> TopologySpec:
    """Topology from 'path4', 'lollipop:2,1', or a bare kind plus flag values."""
    flags = flags or {}
    text = token.strip().lower().replace("-", "_")
    m = re.fullmatch(r"([a-z_]+?)_?(\d+)?(?::([\d,]+))?", text)
    if not m:
        raise UsageError(f"cannot parse topology {token!r}")
    kind = ALIASES.get(m.group(1), m.group(1))
    if kind not in KINDS:
        raise UsageError(f"unknown topology {m.group(1)!r}; known: {', '.join(KINDS)}")
    if kind == "cartesian_product":
        factors = flags.get("factor") or []
        if not factors:
            raise UsageError("cartesian_product needs --factor (e.g. --factor complete:2 --factor complete:3)")
        return TopologySpec(kind, tuple(parse_spec(f) for f in factors))
    if m.group(2) is not None:
        params = (int(m.group(2)),)
    elif m.group(3) is not None:
        params = tuple(int(v) for v in m.group(3).split(",") if v)
    else:
        names = PARAM_FLAGS[kind]
        missing = [n for n in names if flags.get(n) is None]
        if missing:
            raise UsageError(f"{kind} needs " + ", ".join(f"--{n}" for n in missing))
        params = tuple(int(flags[n]) for n in names)
    return TopologySpec(kind, params)


def load_graph(token: str, flags: dict) -> tuple[WeightedGraph, TopologySpec | None]:
    if token.endswith(".json") or os.path.isfile(token):
        try:
            with open(token, encoding="utf-8") as fh:
                return from_json(fh.read()), None
        except OSError as exc:
            raise UsageError(f"cannot read graph file {token!r}: {exc.strerror}") from exc
    spec = parse_spec(token, flags)
    return build_topology(spec), spec


def _spec_echo(spec, g):
    if spec is None:
        return {"graph": to_dict(g)}
    if spec.kind == "cartesian_product":
        return {"topology": spec.kind, "params": [str(f) for f in spec.params]}
    return {"topology": spec.kind, "params": list(spec.params)}


def _emit(doc: dict, fmt: str, table_rows=None, csv_rows=None, dot=None, out=None):
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(doc, indent=2, sort_keys=True, default=float) + "\n")
    elif fmt == "csv":
        if csv_rows is None:
            raise UsageError("csv output is not available for this command")
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(csv_rows)
        out.write(buf.getvalue())
    elif fmt == "dot":
        if dot is None:
            raise UsageError("dot output is not available for this command")
        out.write(dot)
    else:
        for row in table_rows or []:
            out.write("  ".join(_fmt(x) for x in row) + "\n")


def _envelope(command: str, echo: dict, result) -> dict:
    return {"tool": "qconsensus", "version": __version__, "command": command, "input": echo, "result": result}


def cmd_partitions(a) -> int:
    if a.N < 1:
        raise UsageError("N must be a positive integer")
    parts = enumerate_partitions(a.N)
    edges = hasse_diagram(a.N).cover_edges if a.N >= 2 else ()
    doc = _envelope(
        "partitions",
        {"N": a.N},
        {
            "nodes": [{"partition": list(p.parts), "tabloids": tabloid_count(p)} for p in parts],
            "hasse_edges": [{"dominant": list(x.parts), "dominated": list(y.parts), "category": c} for x, y, c in edges],
        },
    )
    table = [(str(p), "tabloids", tabloid_count(p)) for p in parts]
    table += [(str(x), "->", str(y), "category", c) for x, y, c in edges]
    rows = [("kind", "a", "b", "value")]
    rows += [("partition", str(p), "", tabloid_count(p)) for p in parts]
    rows += [("cover", str(x), str(y), c) for x, y, c in edges]
    _emit(doc, a.format, table, rows)
    return EXIT_OK


def cmd_induced(a, flags) -> int:
    g, spec = load_graph(a.graph, flags)
    try:
        n = Partition.parse(a.partition)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    if n.n_total != g.n_vertices:
        raise UsageError(f"partition {n} sums to {n.n_total} but the graph has {g.n_vertices} vertices")
    ig = induced_graph(g, n)
    ev = eigenvalues_sym(ig.laplacian_view).eigenvalues
    gap = float(ev[1]) if len(ev) > 1 else 0.0
    doc = _envelope(
        "induced",
        {**_spec_echo(spec, g), "partition": list(n.parts)},
        {
            "vertices": [str(t) for t in ig.vertices],
            "graph": to_dict(ig.graph),
            "spectrum": ev.tolist(),
            "lambda2": gap,
        },
    )
    table = [("vertices", ig.n_vertices), ("edges", ig.graph.n_edges), ("lambda2", gap)]
    table += [("spectrum",) + tuple(ev.tolist())]
    rows = [("u", "v", "weight", "orbit")] + [
        (str(ig.vertices[i]), str(ig.vertices[j]), w, o)
        for (i, j), w, o in zip(ig.graph.edges, ig.graph.weights, ig.graph.orbit_of_edge)
    ]
    _emit(doc, a.format, table, rows, to_dot(ig.graph, "induced"))
    return EXIT_OK


def cmd_optimize(a, flags) -> int:
    g, spec = load_graph(a.graph, flags)
    if a.D <= 0:
        raise UsageError("D must be positive")
    if a.method == "closed":
        if spec is None:
            raise UnsupportedError("closed forms need a catalog topology; use --method numeric for graph files")
        try:
            res = closed_form(spec, a.D)
        except UnsupportedError as exc:
            raise UnsupportedError(f"{exc}; try --method numeric") from exc
    else:
        res = maximize_gap_numeric(g, a.D, seed=a.seed)
    certify(g, res)
    cert = res.certificate
    doc = _envelope(
        "optimize",
        {**_spec_echo(spec, g), "D": a.D, "method": a.method, "seed": a.seed},
        {
            "weights": {str(k): v for k, v in res.weights_by_orbit.items()},
            "lambda2": res.lambda2,
            "budget_used": res.budget_used,
            "method": res.method,
            "upper_bound": res.upper_bound,
            "converged": res.converged,
            "notes": res.notes,
            "certificate": {"accepted": cert.accepted, "max_violation": cert.max_violation},
        },
    )
    table = [(f"w{k}", v) for k, v in res.weights_by_orbit.items()]
    table += [("lambda2", res.lambda2), ("budget_used", res.budget_used), ("method", res.method)]
    table += [("certificate", "accepted" if cert.accepted else "rejected", cert.max_violation)]
    rows = [("orbit", "weight")] + [(k, v) for k, v in res.weights_by_orbit.items()] + [("lambda2", res.lambda2)]
    _emit(doc, a.format, table, rows, to_dot(g.with_orbit_weights(res.weights_by_orbit)))
    return EXIT_OK


def cmd_verify(a, flags) -> int:
    g, spec = load_graph(a.graph, flags)
    echo = {**_spec_echo(spec, g), "which": a.which}
    if a.which == "aldous":
        rep = verify_aldous_extension(g)
        result = rep.to_dict()
        table = [(str(n), v) for n, v in rep.gaps.items()] + [("common_gap", rep.common_gap)]
        passed = rep.passed
    elif a.which == "hasse":
        rep = verify_hasse_ordering(g)
        result = rep.to_dict()
        table = [(str(p.dominant), "->", str(p.dominated), p.gap_dominant, p.gap_dominated,
                  "ok" if p.ok else "FAIL") for p in rep.pairs]
        passed = rep.passed
    elif a.which == "intertwining":
        pairs = []
        for x, y, c in hasse_diagram(g.n_vertices).cover_edges:
            pairs.append((x, y, c, verify_intertwining(g, x, y)))
        tol = 1e-12 * max(g.max_weight(), 1.0)
        passed = all(r <= tol for *_, r in pairs)
        result = {
            "passed": passed,
            "tolerance": tol,
            "pairs": [{"dominant": list(x.parts), "dominated": list(y.parts), "category": c, "residual": r}
                      for x, y, c, r in pairs],
        }
        table = [(str(x), "->", str(y), c, r) for x, y, c, r in pairs]
    else:
        if a.d < 2:
            raise UsageError("--d must be at least 2")
        rep_rng = np.random.default_rng(a.seed)
        if a.d**g.n_vertices > 64:
            raise ResourceError(f"d^N = {a.d**g.n_vertices} exceeds 64")
        rho0 = random_density(a.d, g.n_vertices, rep_rng)
        rep = verify_reduction(g, a.d, rho0, a.times)
        result = rep.to_dict()
        echo.update({"d": a.d, "seed": a.seed, "times": a.times})
        table = [(str(n), v) for n, v in rep.max_deviation_by_partition.items()]
        passed = rep.passed
    table.append(("PASS" if passed else "FAIL",))
    doc = _envelope("verify", echo, result)
    rows = [tuple(map(str, r)) for r in table]
    _emit(doc, a.format, table, rows)
    return EXIT_OK if passed else EXIT_VERIFY


def cmd_simulate(a, flags) -> int:
    g, spec = load_graph(a.graph, flags)
    if a.d < 2:
        raise UsageError("--d must be at least 2")
    if a.d**g.n_vertices > 64:
        raise ResourceError(f"d^N = {a.d**g.n_vertices} exceeds 64")
    rng = np.random.default_rng(a.seed)
    rho0 = random_density(a.d, g.n_vertices, rng)
    star = consensus_state(rho0).full_matrix
    lam = spectral_gap(laplacian(g))
    t_max = a.t_max if a.t_max is not None else (20.0 / lam if lam > 0 else 1.0)
    times = np.linspace(0.0, t_max, a.steps + 1)
    traj = []
    for t in times:
        rho = qcme_integrate(g, rho0, float(t)).full_matrix
        traj.append({
            "t": float(t),
            "distance": float(np.linalg.norm(rho - star)),
            "trace": float(np.trace(rho).real),
            "min_eigenvalue": float(np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]),
        })
    late = times[len(times) // 4:]
    slope = decay_slope(g, rho0, late[1:]) if lam > 0 and len(late) > 2 else float("nan")
    doc = _envelope(
        "simulate",
        {**_spec_echo(spec, g), "d": a.d, "seed": a.seed, "t_max": t_max, "steps": a.steps},
        {"lambda2": lam, "decay_slope": slope, "trajectory": traj},
    )
    table = [("t", "distance", "trace", "min_eig")] + [
        (r["t"], r["distance"], r["trace"], r["min_eigenvalue"]) for r in traj
    ] + [("lambda2", lam), ("decay_slope", slope)]
    rows = [("t", "distance", "trace", "min_eigenvalue")] + [
        (r["t"], r["distance"], r["trace"], r["min_eigenvalue"]) for r in traj
    ]
    _emit(doc, a.format, table, rows)
    return EXIT_OK


def _topology_args(p: argparse.ArgumentParser):
    p.add_argument("graph", help="catalog topology (path4, lollipop:2,1, ccs-star with -p/-q) or graph JSON file")
    p.add_argument("-n", type=int)
    p.add_argument("-p", type=int)
    p.add_argument("-q", type=int)
    p.add_argument("--q1", type=int)
    p.add_argument("--q2", type=int)
    p.add_argument("--n1", type=int)
    p.add_argument("--n2", type=int)
    p.add_argument("--n3", type=int)
    p.add_argument("--factor", action="append", help="cartesian factor, repeatable (complete:3)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qconsensus", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qconsensus {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "json", "csv", "dot"), default="table")
    common.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partitions", parents=[common], help="partitions, tabloid counts and Hasse covers")
    p.add_argument("N", type=int)

    p = sub.add_parser("induced", parents=[common], help="induced graph of a partition")
    _topology_args(p)
    p.add_argument("--partition", required=True, help="e.g. 2,1")

    p = sub.add_parser("optimize", parents=[common], help="optimal orbit weights")
    _topology_args(p)
    p.add_argument("-D", "--budget", dest="D", type=float, default=1.0)
    p.add_argument("--method", choices=("closed", "numeric"), default="closed")

    p = sub.add_parser("verify", parents=[common], help="structural checks")
    p.add_argument("which", choices=("aldous", "hasse", "intertwining", "reduction"))
    _topology_args(p)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--times", type=float, nargs="+", default=[0.1, 1.0, 10.0])

    p = sub.add_parser("simulate", parents=[common], help="consensus master equation trajectory")
    _topology_args(p)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--t-max", type=float)
    p.add_argument("--steps", type=int, default=20)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    flags = {k: getattr(a, k, None) for k in ("n", "p", "q", "q1", "q2", "n1", "n2", "n3", "factor")}
    handlers = {
        "partitions": lambda: cmd_partitions(a),
        "induced": lambda: cmd_induced(a, flags),
        "optimize": lambda: cmd_optimize(a, flags),
        "verify": lambda: cmd_verify(a, flags),
        "simulate": lambda: cmd_simulate(a, flags),
    }
    try:
        return handlers[a.command]()
    except (UsageError, DomainError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnsupportedError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
