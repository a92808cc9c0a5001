"""Symmetric eigenvalues, spectral gap, and the induced-graph ordering checks."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ResourceError
from .graphs import WeightedGraph, is_connected, laplacian
from .induced import induced_laplacian
from .partitions import Partition, enumerate_partitions, hasse_diagram

GAP_TOL = 1e-8
ALDOUS_MAX_N = 7


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    tolerance: float

    def __len__(self):
        return len(self.eigenvalues)


def eigenvalues_sym(m) -> Spectrum:
    """Ascending eigenvalues of a real symmetric matrix (LAPACK syevd via numpy)."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    if m.size == 0:
        return Spectrum(np.zeros(0), 0.0)
    scale = float(np.max(np.abs(m)))
    if np.max(np.abs(m - m.T)) > 1e-12 * scale:
        raise DomainError("matrix is not symmetric")
    ev = np.linalg.eigvalsh(m)
    norm2 = float(np.max(np.abs(ev)))
    # backward-stable solver: error is a small multiple of eps * ||m||_2
    tol = 10 * m.shape[0] * np.finfo(float).eps * max(norm2, np.finfo(float).tiny)
    return Spectrum(ev, tol)


def spectral_gap(L) -> float:
    """Second-smallest eigenvalue; 0 for a single vertex."""
    ev = eigenvalues_sym(L).eigenvalues
    if len(ev) < 2:
        return 0.0
    return float(ev[1])


def is_disconnected_spectral(g: WeightedGraph) -> bool:
    L = laplacian(g)
    maxdeg = float(np.max(np.diag(L), initial=0.0))
    if g.n_vertices < 2:
        return False
    return spectral_gap(L) < 1e-9 * max(maxdeg, 1e-300)


def spectrum_included(small, large, tol: float) -> tuple[bool, float]:
    """Greedy sorted matching of every value in `small` to a distinct value in `large`.

    Returns (ok, worst distance of a matched pair).
    """
    small = np.sort(np.asarray(small, float))
    large = list(np.sort(np.asarray(large, float)))
    worst = 0.0
    for x in small:
        if not large:
            return False, np.inf
        k = int(np.argmin(np.abs(np.asarray(large) - x)))
        dist = abs(large[k] - x)
        worst = max(worst, dist)
        if dist > tol:
            return False, worst
        large.pop(k)
    return True, worst


@dataclass
class PairCheck:
    dominant: Partition
    dominated: Partition
    category: int
    gap_dominant: float
    gap_dominated: float
    ordering_ok: bool
    inclusion_ok: bool
    inclusion_error: float

    @property
    def ok(self) -> bool:
        return self.ordering_ok and self.inclusion_ok


@dataclass
class HasseReport:
    pairs: list[PairCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(p.ok for p in self.pairs)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "pairs": [
                {
                    "dominant": list(p.dominant.parts),
                    "dominated": list(p.dominated.parts),
                    "category": p.category,
                    "lambda2_dominant": p.gap_dominant,
                    "lambda2_dominated": p.gap_dominated,
                    "ordering_ok": p.ordering_ok,
                    "inclusion_ok": p.inclusion_ok,
                    "inclusion_error": p.inclusion_error,
                }
                for p in self.pairs
            ],
        }


def _tol(g: WeightedGraph) -> float:
    return GAP_TOL * max(g.max_weight(), 1.0)


def verify_hasse_ordering(g: WeightedGraph) -> HasseReport:
    """Gap ordering and spectrum inclusion for every cover pair of the Hasse diagram.

    The single-row partition (N) has the one-point induced graph, whose gap is 0
    by convention; the ordering is only asserted between pairs where the
    dominant graph has at least two vertices.
    """
    if g.n_vertices < 2:
        raise DomainError("need at least two vertices")
    if not is_connected(g):
        raise DomainError("base graph is disconnected")
    tol = _tol(g)
    spectra = {}
    hd = hasse_diagram(g.n_vertices)
    for n in hd.nodes:
        spectra[n] = eigenvalues_sym(induced_laplacian(g, n)).eigenvalues
    report = HasseReport()
    for a, b, cat in hd.cover_edges:
        ea, eb = spectra[a], spectra[b]
        ga = float(ea[1]) if len(ea) > 1 else 0.0
        gb = float(eb[1]) if len(eb) > 1 else 0.0
        ordering = True if len(ea) < 2 else gb <= ga + tol
        inc, err = spectrum_included(ea, eb, tol)
        report.pairs.append(PairCheck(a, b, cat, ga, gb, ordering, inc, err))
    return report


@dataclass
class AldousReport:
    gaps: dict[Partition, float]
    common_gap: float
    max_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "common_gap": self.common_gap,
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "gaps": [{"partition": list(n.parts), "lambda2": v} for n, v in self.gaps.items()],
        }


def verify_aldous_extension(g: WeightedGraph, tol: float | None = None) -> AldousReport:
    """Gap of every induced graph except (N) equals the base-graph gap."""
    N = g.n_vertices
    if N > ALDOUS_MAX_N:
        raise ResourceError(f"N={N} exceeds the limit {ALDOUS_MAX_N} for factorial-size induced graphs")
    if N < 2:
        raise DomainError("need at least two vertices")
    if not is_connected(g):
        raise DomainError("base graph is disconnected")
    tol = _tol(g) if tol is None else tol
    gaps = {}
    for n in enumerate_partitions(N):
        if n.K == 1:
            continue
        gaps[n] = spectral_gap(induced_laplacian(g, n))
    base = spectral_gap(laplacian(g))
    dev = max(abs(v - base) for v in gaps.values())
    return AldousReport(gaps, base, float(dev), tol)
