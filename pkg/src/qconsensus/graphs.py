"""Weighted undirected graphs, the symmetric topology catalog, Laplacians and I/O.

Vertex layouts (0-indexed) per catalog kind:

* path(n): vertices in order along the path. Even n = 2(q+1): the middle edge
  is orbit 0 and edges j steps outward are orbit j. Odd n = 2q+1: edges are
  labeled 1..q counting outward from the middle vertex. n = 2 is one edge, orbit 0.
* cycle(n), complete(n), star(n): one orbit, label 0; the star center is vertex 0.
* paw: 4-cycle 0-1-2-3 (orbit 1) plus the chord 0-2 (orbit 0).
* ccs_star(p, q): core K_p on 0..p-1 (orbit 0); each core vertex carries a
  tail whose j-th edge from the core is orbit j.
* ccs_two_branch(p, q1, q2): core K_p (orbit 0); each core vertex carries a
  tail of q1 edges (orbits -1..-q1) and a tail of q2 edges (orbits 1..q2).
* symmetric_star(p, q): center 0 with p paths of q edges, orbit j at distance j.
* palm(p, q): center 0 with p leaves (orbit 0) and a path of q edges (orbits 1..q).
* lollipop(p, q): K_{p+1} whose bridging vertex is p; edges among 0..p-1 are
  orbit -1, edges to the bridging vertex orbit 0, tail edges orbits 1..q.
* coupled_complete(N1, N2, N3): groups A=0..N1-1, B, C in order; orbits -2
  (inside A), -1 (A-B), 0 (inside B), 1 (B-C), 2 (inside C).
* cartesian_product(factors): orbit label = 1-based factor index.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ParseError

KINDS = (
    "path", "cycle", "star", "complete", "paw", "lollipop", "ccs_star",
    "ccs_two_branch", "symmetric_star", "palm", "coupled_complete",
    "cartesian_product",
)


@dataclass(frozen=True)
class WeightedGraph:
    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...]
    orbit_of_edge: tuple[int, ...]

    def __post_init__(self):
        n = int(self.n_vertices)
        if n < 1:
            raise ParameterError("graph needs at least one vertex")
        edges = tuple(tuple(sorted((int(i), int(j)))) for i, j in self.edges)
        weights = tuple(float(w) for w in self.weights)
        orbits = tuple(int(o) for o in self.orbit_of_edge)
        if not (len(edges) == len(weights) == len(orbits)):
            raise ParameterError("edges, weights and orbits must have equal length")
        seen = set()
        for i, j in edges:
            if i == j:
                raise ParameterError(f"self-loop at vertex {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ParameterError(f"edge ({i},{j}) out of range for {n} vertices")
            if (i, j) in seen:
                raise ParameterError(f"duplicate edge ({i},{j})")
            seen.add((i, j))
        if any(not np.isfinite(w) or w < 0 for w in weights):
            raise ParameterError("weights must be finite and nonnegative")
        object.__setattr__(self, "n_vertices", n)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "orbit_of_edge", orbits)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def orbits(self) -> list[int]:
        """Distinct orbit labels, sorted."""
        return sorted(set(self.orbit_of_edge))

    def orbit_sizes(self) -> dict[int, int]:
        return {o: self.orbit_of_edge.count(o) for o in self.orbits()}

    def with_weights(self, weights) -> "WeightedGraph":
        return WeightedGraph(self.n_vertices, self.edges, tuple(weights), self.orbit_of_edge)

    def with_orbit_weights(self, by_orbit: dict) -> "WeightedGraph":
        return self.with_weights([by_orbit[o] for o in self.orbit_of_edge])

    def incidence(self) -> np.ndarray:
        """Edge-by-vertex signed incidence, row e = e_i - e_j."""
        B = np.zeros((self.n_edges, self.n_vertices))
        for k, (i, j) in enumerate(self.edges):
            B[k, i] = 1.0
            B[k, j] = -1.0
        return B

    def max_weight(self) -> float:
        return max(self.weights, default=0.0)


@dataclass(frozen=True)
class TopologySpec:
    kind: str
    params: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown topology kind {self.kind!r}; known: {', '.join(KINDS)}")
        object.__setattr__(self, "params", tuple(self.params))

    def __str__(self):
        if self.kind == "cartesian_product":
            return " x ".join(str(f) for f in self.params)
        return f"{self.kind}({','.join(map(str, self.params))})"


def _graph(n, edges, orbits) -> WeightedGraph:
    return WeightedGraph(n, tuple(edges), tuple([1.0] * len(edges)), tuple(orbits))


def _need(spec, count):
    if len(spec.params) != count:
        raise ParameterError(f"{spec.kind} takes {count} parameter(s), got {spec.params}")
    try:
        vals = [int(v) for v in spec.params]
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"{spec.kind} parameters must be integers") from exc
    return vals


def _path(n):
    if n < 2:
        raise ParameterError("path needs n >= 2")
    edges = [(i, i + 1) for i in range(n - 1)]
    if n % 2 == 0:
        mid = n // 2 - 1  # middle edge is (mid, mid+1)
        orbits = [abs(k - mid) for k in range(n - 1)]
    else:
        mid = n // 2  # middle vertex
        orbits = [mid - k if k < mid else k - mid + 1 for k in range(n - 1)]
    return _graph(n, edges, orbits)


def _complete_edges(vertices):
    return list(itertools.combinations(vertices, 2))


def _tail(start, first_new, length, labels):
    edges, orbits, prev, v = [], [], start, first_new
    for j in range(length):
        edges.append((prev, v))
        orbits.append(labels[j])
        prev, v = v, v + 1
    return edges, orbits, v


def build_topology(spec: TopologySpec) -> WeightedGraph:
    """Unit-weight graph with catalog orbit labels."""
    k = spec.kind
    if k == "path":
        (n,) = _need(spec, 1)
        return _path(n)
    if k == "cycle":
        (n,) = _need(spec, 1)
        if n < 3:
            raise ParameterError("cycle needs n >= 3")
        return _graph(n, [(i, (i + 1) % n) for i in range(n)], [0] * n)
    if k == "star":
        (n,) = _need(spec, 1)
        if n < 2:
            raise ParameterError("star needs n >= 2")
        return _graph(n, [(0, i) for i in range(1, n)], [0] * (n - 1))
    if k == "complete":
        (n,) = _need(spec, 1)
        if n < 2:
            raise ParameterError("complete graph needs n >= 2")
        e = _complete_edges(range(n))
        return _graph(n, e, [0] * len(e))
    if k == "paw":
        if spec.params not in ((), (4,)):
            raise ParameterError("paw is defined for 4 vertices only")
        return _graph(4, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)], [1, 1, 1, 1, 0])
    if k == "ccs_star":
        p, q = _need(spec, 2)
        if p < 2 or q < 1:
            raise ParameterError("ccs_star needs p >= 2 and q >= 1")
        edges = _complete_edges(range(p))
        orbits = [0] * len(edges)
        v = p
        for a in range(p):
            e, o, v = _tail(a, v, q, list(range(1, q + 1)))
            edges += e
            orbits += o
        return _graph(v, edges, orbits)
    if k == "ccs_two_branch":
        p, q1, q2 = _need(spec, 3)
        if p < 2 or q1 < 1 or q2 < 1:
            raise ParameterError("ccs_two_branch needs p >= 2, q1 >= 1, q2 >= 1")
        edges = _complete_edges(range(p))
        orbits = [0] * len(edges)
        v = p
        for a in range(p):
            e, o, v = _tail(a, v, q1, [-j for j in range(1, q1 + 1)])
            edges += e
            orbits += o
            e, o, v = _tail(a, v, q2, list(range(1, q2 + 1)))
            edges += e
            orbits += o
        return _graph(v, edges, orbits)
    if k == "symmetric_star":
        p, q = _need(spec, 2)
        if p < 1 or q < 1:
            raise ParameterError("symmetric_star needs p >= 1 and q >= 1")
        edges, orbits, v = [], [], 1
        for _ in range(p):
            e, o, v = _tail(0, v, q, list(range(1, q + 1)))
            edges += e
            orbits += o
        return _graph(v, edges, orbits)
    if k == "palm":
        p, q = _need(spec, 2)
        if p < 1 or q < 1:
            raise ParameterError("palm needs p >= 1 and q >= 1")
        edges = [(0, i) for i in range(1, p + 1)]
        e, o, v = _tail(0, p + 1, q, list(range(1, q + 1)))
        return _graph(v, edges + e, [0] * p + o)
    if k == "lollipop":
        p, q = _need(spec, 2)
        if p < 2 or q < 1:
            raise ParameterError("lollipop needs p >= 2 and q >= 1")
        edges = _complete_edges(range(p))
        orbits = [-1] * len(edges)
        edges += [(a, p) for a in range(p)]
        orbits += [0] * p
        e, o, v = _tail(p, p + 1, q, list(range(1, q + 1)))
        return _graph(v, edges + e, orbits + o)
    if k == "coupled_complete":
        n1, n2, n3 = _need(spec, 3)
        if min(n1, n2, n3) < 1:
            raise ParameterError("coupled_complete needs N1, N2, N3 >= 1")
        A = range(n1)
        B = range(n1, n1 + n2)
        C = range(n1 + n2, n1 + n2 + n3)
        groups = [
            (_complete_edges(A), -2),
            (list(itertools.product(A, B)), -1),
            (_complete_edges(B), 0),
            (list(itertools.product(B, C)), 1),
            (_complete_edges(C), 2),
        ]
        edges = [e for es, _ in groups for e in es]
        orbits = [o for es, o in groups for _ in es]
        return _graph(n1 + n2 + n3, edges, orbits)
    if k == "cartesian_product":
        if not spec.params:
            raise ParameterError("cartesian_product needs at least one factor")
        factors = [f if isinstance(f, WeightedGraph) else build_topology(f) for f in spec.params]
        g = factors[0].with_weights(factors[0].weights)
        g = WeightedGraph(g.n_vertices, g.edges, g.weights, (1,) * g.n_edges)
        for idx, f in enumerate(factors[1:], start=2):
            f = WeightedGraph(f.n_vertices, f.edges, f.weights, (idx,) * f.n_edges)
            g = cartesian_product(g, f)
        return g
    raise ParameterError(f"unhandled kind {k}")


def laplacian(g: WeightedGraph) -> np.ndarray:
    """L = D - A.

    Degrees are summed with fsum so relabeled copies of a graph give
    bitwise-identical Laplacians regardless of edge order.
    """
    n = g.n_vertices
    L = np.zeros((n, n))
    incident: list[list[float]] = [[] for _ in range(n)]
    for (i, j), w in zip(g.edges, g.weights):
        L[i, j] -= w
        L[j, i] -= w
        incident[i].append(w)
        incident[j].append(w)
    L[np.diag_indices(n)] = [math.fsum(ws) for ws in incident]
    return L


def cartesian_product(g1: WeightedGraph, g2: WeightedGraph) -> WeightedGraph:
    """Vertex (a, b) has index a * n2 + b, so L = L1 (x) I + I (x) L2."""
    n1, n2 = g1.n_vertices, g2.n_vertices
    edges, weights, orbits = [], [], []
    for (i, j), w, o in zip(g1.edges, g1.weights, g1.orbit_of_edge):
        for b in range(n2):
            edges.append((i * n2 + b, j * n2 + b))
            weights.append(w)
            orbits.append(o)
    for (i, j), w, o in zip(g2.edges, g2.weights, g2.orbit_of_edge):
        for a in range(n1):
            edges.append((a * n2 + i, a * n2 + j))
            weights.append(w)
            orbits.append(o)
    return WeightedGraph(n1 * n2, tuple(edges), tuple(weights), tuple(orbits))


def is_connected(g: WeightedGraph) -> bool:
    """Traversal over positive-weight edges."""
    adj = {v: [] for v in range(g.n_vertices)}
    for (i, j), w in zip(g.edges, g.weights):
        if w > 0:
            adj[i].append(j)
            adj[j].append(i)
    seen, stack = {0}, [0]
    while stack:
        for u in adj[stack.pop()]:
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == g.n_vertices


def to_dot(g: WeightedGraph, name: str = "G") -> str:
    lines = [f"graph {name} {{"]
    lines += [f"  {v};" for v in range(g.n_vertices)]
    for (i, j), w, o in zip(g.edges, g.weights, g.orbit_of_edge):
        lines.append(f'  {i} -- {j} [weight={w!r}, label="w{o}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_dict(g: WeightedGraph) -> dict:
    return {
        "n_vertices": g.n_vertices,
        "edges": [list(e) for e in g.edges],
        "weights": list(g.weights),
        "orbits": list(g.orbit_of_edge),
    }


def to_json(g: WeightedGraph) -> str:
    # repr of a Python float is the shortest string that round-trips exactly
    return json.dumps(to_dict(g), indent=2)


def from_json(text: str) -> WeightedGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("graph document must be a JSON object")
    for key in ("n_vertices", "edges"):
        if key not in doc:
            raise ParseError(f"missing field '{key}'")
    n = doc["n_vertices"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise ParseError("field 'n_vertices' must be an integer")
    edges = doc["edges"]
    if not isinstance(edges, list):
        raise ParseError("field 'edges' must be a list")
    for k, e in enumerate(edges):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, int) for x in e)):
            raise ParseError(f"field 'edges[{k}]' must be a pair of integers")
    weights = doc.get("weights", [1.0] * len(edges))
    orbits = doc.get("orbits", [0] * len(edges))
    for fname, vals, typ in (("weights", weights, (int, float)), ("orbits", orbits, int)):
        if not isinstance(vals, list) or len(vals) != len(edges):
            raise ParseError(f"field '{fname}' must be a list with one entry per edge")
        for k, x in enumerate(vals):
            if isinstance(x, bool) or not isinstance(x, typ):
                raise ParseError(f"field '{fname}[{k}]' has wrong type")
    try:
        return WeightedGraph(n, tuple(map(tuple, edges)), tuple(weights), tuple(orbits))
    except ParameterError as exc:
        raise ParseError(str(exc)) from exc
