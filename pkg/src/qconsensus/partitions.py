"""Integer partitions, dominance order, Hasse covers and Yamanouchi tabloids."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial, prod

import numpy as np

from .errors import DomainError, EmptyInputError


@dataclass(frozen=True, order=False)
class Partition:
    """Non-increasing tuple of positive parts."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if not parts:
            raise DomainError("partition needs at least one part")
        if any(p < 1 for p in parts):
            raise DomainError(f"parts must be positive: {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise DomainError(f"parts must be non-increasing: {parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def n_total(self) -> int:
        return sum(self.parts)

    @property
    def K(self) -> int:
        """Number of rows."""
        return len(self.parts)

    def padded(self, length: int) -> np.ndarray:
        out = np.zeros(length, dtype=int)
        out[: self.K] = self.parts
        return out

    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)

    def __str__(self):
        return "(" + ",".join(map(str, self.parts)) + ")"

    @classmethod
    def parse(cls, text: str) -> "Partition":
        """Accept '3,1', '(3,1)' or '3 1'."""
        cleaned = text.strip().strip("()[]").replace(" ", ",")
        try:
            parts = [int(tok) for tok in cleaned.split(",") if tok]
        except ValueError as exc:
            raise DomainError(f"cannot parse partition {text!r}") from exc
        return cls(tuple(parts))


@dataclass(frozen=True)
class Tabloid:
    shape: Partition
    yamanouchi: tuple[int, ...]

    def __post_init__(self):
        word = tuple(int(r) for r in self.yamanouchi)
        counts = [word.count(i + 1) for i in range(self.shape.K)]
        if len(word) != self.shape.n_total or counts != list(self.shape.parts):
            raise DomainError(f"word {word} does not fit shape {self.shape}")
        object.__setattr__(self, "yamanouchi", word)

    def __str__(self):
        return "".join(map(str, self.yamanouchi))


@dataclass(frozen=True)
class HasseDiagram:
    nodes: tuple[Partition, ...]
    cover_edges: tuple[tuple[Partition, Partition, int], ...]


def _check_n(N) -> int:
    if isinstance(N, bool) or int(N) != N:
        raise DomainError(f"N must be an integer, got {N!r}")
    N = int(N)
    if N == 0:
        raise EmptyInputError("N must be at least 1")
    if N < 0:
        raise DomainError(f"N must be positive, got {N}")
    return N


def _rev_lex(n: int, max_part: int):
    if n == 0:
        yield ()
        return
    for first in range(min(n, max_part), 0, -1):
        for rest in _rev_lex(n - first, first):
            yield (first,) + rest


def enumerate_partitions(N: int) -> list[Partition]:
    """All partitions of N in reverse-lexicographic order."""
    N = _check_n(N)
    return [Partition(p) for p in _rev_lex(N, N)]


def dominates(a: Partition, b: Partition) -> bool:
    """True when every partial sum of a is at least that of b."""
    if a.n_total != b.n_total:
        raise DomainError(f"cannot compare {a} and {b}: totals differ")
    m = max(a.K, b.K)
    return bool(np.all(np.cumsum(a.padded(m)) >= np.cumsum(b.padded(m))))


def cover_category(a: Partition, b: Partition) -> int | None:
    """Category (1 or 2) when a covers b, else None.

    A cover moves exactly one box from row m to a lower row r; the move is
    category 2 when r is a new row.
    """
    if a.n_total != b.n_total or a == b or not dominates(a, b):
        return None
    m = max(a.K, b.K)
    diff = b.padded(m) - a.padded(m)
    if sorted(diff.tolist()) != [-1] + [0] * (m - 2) + [1]:
        return None
    # single box move; a cover only if nothing lies strictly between
    for c in enumerate_partitions(a.n_total):
        if c != a and c != b and dominates(a, c) and dominates(c, b):
            return None
    r = int(np.flatnonzero(diff == 1)[0])
    return 2 if r == a.K else 1


def hasse_diagram(N: int) -> HasseDiagram:
    N = _check_n(N)
    if N < 2:
        raise DomainError("Hasse diagram needs N >= 2")
    nodes = enumerate_partitions(N)
    edges = []
    for a, b in itertools.permutations(nodes, 2):
        cat = cover_category(a, b)
        if cat is not None:
            edges.append((a, b, cat))
    order = {p: i for i, p in enumerate(nodes)}
    edges.sort(key=lambda e: (order[e[0]], order[e[1]]))
    return HasseDiagram(tuple(nodes), tuple(edges))


def tabloid_count(n: Partition) -> int:
    return factorial(n.n_total) // prod(factorial(p) for p in n.parts)


def _words(counts: list[int]):
    if sum(counts) == 0:
        yield ()
        return
    for i, c in enumerate(counts):
        if c:
            counts[i] -= 1
            for rest in _words(counts):
                yield (i + 1,) + rest
            counts[i] += 1


def enumerate_tabloids(n: Partition) -> list[Tabloid]:
    """Tabloids of shape n as Yamanouchi words in lexicographic order."""
    return [Tabloid(n, w) for w in _words(list(n.parts))]
