"""Schreier induced graphs on tabloids and the maps between one-level-dominant partitions."""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from math import factorial, prod

import numpy as np

from .errors import DomainError
from .graphs import WeightedGraph, laplacian
from .partitions import Partition, Tabloid, cover_category, enumerate_partitions, enumerate_tabloids


@dataclass(frozen=True)
class InducedGraph:
    partition: Partition
    vertices: tuple[Tabloid, ...]
    base_graph: WeightedGraph
    graph: WeightedGraph

    @property
    def laplacian_view(self) -> np.ndarray:
        return laplacian(self.graph)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)


def _as_partition(n) -> Partition:
    return n if isinstance(n, Partition) else Partition(tuple(n))


def induced_graph(g: WeightedGraph, n) -> InducedGraph:
    """Tabloids of n joined by the transpositions of the base edges.

    Tabloid t and its image under swapping positions j, l are joined with weight
    w_jl whenever r_j != r_l. Edges of one base orbit keep that orbit label.
    Parallel contributions (distinct base edges giving the same tabloid pair)
    are merged by adding weights; the label of the first contributor is kept.
    """
    n = _as_partition(n)
    if n.n_total != g.n_vertices:
        raise DomainError(f"partition {n} sums to {n.n_total}, graph has {g.n_vertices} vertices")
    tabs = enumerate_tabloids(n)
    index = {t.yamanouchi: k for k, t in enumerate(tabs)}
    merged: dict[tuple[int, int], list] = {}
    for (j, l), w, o in zip(g.edges, g.weights, g.orbit_of_edge):
        for a, t in enumerate(tabs):
            word = list(t.yamanouchi)
            if word[j] == word[l]:
                continue
            word[j], word[l] = word[l], word[j]
            b = index[tuple(word)]
            if a < b:
                if (a, b) in merged:
                    merged[(a, b)][0] += w
                else:
                    merged[(a, b)] = [w, o]
    keys = sorted(merged)
    ig = WeightedGraph(
        len(tabs), tuple(keys), tuple(merged[k][0] for k in keys), tuple(merged[k][1] for k in keys)
    )
    return InducedGraph(n, tuple(tabs), g, ig)


def induced_laplacian(g: WeightedGraph, n) -> np.ndarray:
    return induced_graph(g, n).laplacian_view


@dataclass(frozen=True)
class ProjectionMatrix:
    from_partition: Partition
    to_partition: Partition
    category: int
    entries: np.ndarray


def _merge_rows(n: Partition, n_prime: Partition) -> tuple[int, int]:
    """Rows (m, r), 1-based, where the box moves from row m of n to row r of n'."""
    width = max(n.K, n_prime.K)
    diff = n_prime.padded(width) - n.padded(width)
    m = int(np.flatnonzero(diff == -1)[0]) + 1
    r = int(np.flatnonzero(diff == 1)[0]) + 1
    return m, r


def projection_matrix(n, n_prime) -> ProjectionMatrix:
    """0/1 map between tabloids of a covering pair n > n'.

    Entry (a, b) is 1 when n-tabloid a becomes n'-tabloid b by relabeling one
    row-m symbol as row r, where the cover moves a box from row m to row r
    (r = K+1 for a new row). Equivalently, merging rows m and r of b's content
    classes and choosing which one symbol sits in row r.
    """
    n, n_prime = _as_partition(n), _as_partition(n_prime)
    cat = cover_category(n, n_prime)
    if cat is None:
        raise DomainError(f"{n} does not cover {n_prime} in the dominance order")
    m, r = _merge_rows(n, n_prime)
    rows = enumerate_tabloids(n)
    cols = enumerate_tabloids(n_prime)
    col_index = {t.yamanouchi: k for k, t in enumerate(cols)}
    P = np.zeros((len(rows), len(cols)))
    for a, t in enumerate(rows):
        word = t.yamanouchi
        for pos, sym in enumerate(word):
            if sym == m:
                img = list(word)
                img[pos] = r
                P[a, col_index[tuple(img)]] = 1.0
    return ProjectionMatrix(n, n_prime, cat, P)


def verify_intertwining(g: WeightedGraph, n, n_prime) -> float:
    """max |L_n P - P L_n'|."""
    P = projection_matrix(n, n_prime).entries
    Ln = induced_laplacian(g, n)
    Lp = induced_laplacian(g, n_prime)
    return float(np.max(np.abs(Ln @ P - P @ Lp), initial=0.0))


def coefficient_type(mu) -> tuple[Partition, tuple[int, ...], tuple[int, ...]]:
    """Partition type of a multi-index, the value carried by each row, and its tabloid word.

    Rows are ordered by multiplicity (descending), ties by value (ascending).
    """
    counts = Counter(mu)
    values = sorted(counts, key=lambda v: (-counts[v], v))
    row_of = {v: i + 1 for i, v in enumerate(values)}
    shape = Partition(tuple(counts[v] for v in values))
    return shape, tuple(values), tuple(row_of[v] for v in mu)


def orbit_count_formula(n: Partition, d: int) -> int:
    """Number of S_N orbits of multi-indices over d^2 values with type n."""
    M = d * d
    if n.K > M:
        return 0
    lengths = Counter(n.parts)
    return factorial(M) // factorial(M - n.K) // prod(factorial(c) for c in lengths.values())


BRUTE_FORCE_LIMIT = 4096


def coefficient_orbits(N: int, d: int) -> dict[Partition, list[tuple[int, ...]]]:
    """Orbit representatives (sorted multi-indices) grouped by type, by brute force."""
    M = d * d
    out: dict[Partition, list] = {}
    for rep in itertools.combinations_with_replacement(range(M), N):
        shape = coefficient_type(rep)[0]
        out.setdefault(shape, []).append(rep)
    return out


def quantum_block_structure(g: WeightedGraph, d: int) -> list[tuple[Partition, int, InducedGraph]]:
    """Partition, number of identical components, and the component graph.

    Components are the S_N orbits of Gell-Mann multi-indices. They are counted
    by enumerating all d^(2N) indices when that is at most 4096, otherwise by
    the falling-factorial count over equal-length rows.
    """
    if d < 2:
        raise DomainError("qudit dimension must be at least 2")
    N = g.n_vertices
    brute = (d * d) ** N <= BRUTE_FORCE_LIMIT
    if brute:
        seen = set()
        counts: Counter = Counter()
        for mu in itertools.product(range(d * d), repeat=N):
            key = tuple(sorted(mu))
            if key not in seen:
                seen.add(key)
                counts[coefficient_type(mu)[0]] += 1
    out = []
    for n in enumerate_partitions(N):
        if n.K > d * d:
            continue
        mult = counts[n] if brute else orbit_count_formula(n, d)
        out.append((n, mult, induced_graph(g, n)))
    return out
