"""Gell-Mann expansion of N-qudit states and the swap-dissipator consensus dynamics.

Coefficient convention: rho = 2^-N sum_mu c_mu lambda_mu1 (x) ... (x) lambda_muN
with tr(lambda_a lambda_b) = 2 delta_ab, so c_mu = tr(rho Lambda_mu) and
c_{0..0} = (2/d)^(N/2) for a unit-trace state (exactly 1 for qubits).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DomainError, ResourceError
from .graphs import WeightedGraph, laplacian
from .induced import coefficient_type, induced_laplacian
from .partitions import Partition, enumerate_tabloids

MAX_HILBERT_DIM = 64
MAX_CONSENSUS_N = 5


@dataclass(frozen=True)
class GellMannBasis:
    d: int
    matrices: tuple[np.ndarray, ...]

    def __len__(self):
        return len(self.matrices)

    def __getitem__(self, mu):
        return self.matrices[mu]


@lru_cache(maxsize=None)
def gell_mann_basis(d: int) -> GellMannBasis:
    """lambda_0 = sqrt(2/d) I, then for j = 2..d: symmetric and antisymmetric
    off-diagonals (k < j) followed by the diagonal generator eta_{j-1}."""
    if d < 2:
        raise DomainError("qudit dimension must be at least 2")
    mats: list[np.ndarray | None] = [None] * (d * d)
    mats[0] = np.sqrt(2 / d) * np.eye(d, dtype=complex)

    def unit(a, b):
        e = np.zeros((d, d), dtype=complex)
        e[a, b] = 1.0
        return e

    for j in range(2, d + 1):
        for k in range(1, j):
            E_kj, E_jk = unit(k - 1, j - 1), unit(j - 1, k - 1)
            mats[(j - 1) ** 2 + 2 * (k - 1)] = E_kj + E_jk
            mats[(j - 1) ** 2 + 2 * k - 1] = -1j * (E_kj - E_jk)
        diag = np.zeros(d, dtype=complex)
        diag[: j - 1] = 1.0
        diag[j - 1] = -(j - 1)
        mats[j * j - 1] = np.sqrt(2 / (j * (j - 1))) * np.diag(diag)
    for m in mats:
        m.setflags(write=False)
    return GellMannBasis(d, tuple(mats))


def _permutation_matrix(d: int, N: int, perm) -> np.ndarray:
    """Unitary sending |i_1..i_N> to the state whose factor perm[a] holds i_a."""
    dim = d**N
    U = np.zeros((dim, dim))
    for idx in itertools.product(range(d), repeat=N):
        out = [0] * N
        for a, p in enumerate(perm):
            out[p] = idx[a]
        U[np.ravel_multi_index(out, (d,) * N), np.ravel_multi_index(idx, (d,) * N)] = 1.0
    return U


def swap_operator(d: int, N: int, j: int, k: int) -> np.ndarray:
    """Permutation unitary exchanging tensor factors j and k (1-based)."""
    if j == k:
        raise DomainError("swap needs two distinct factors")
    if not (1 <= j <= N and 1 <= k <= N):
        raise DomainError(f"factors must lie in 1..{N}")
    perm = list(range(N))
    perm[j - 1], perm[k - 1] = perm[k - 1], perm[j - 1]
    return _permutation_matrix(d, N, perm)


def _embed(ops: dict[int, np.ndarray], d: int, N: int) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for a in range(1, N + 1):
        out = np.kron(out, ops.get(a, np.eye(d)))
    return out


def swap_from_gell_mann(d: int, N: int, j: int, k: int, start: int = 1) -> np.ndarray:
    """(1/2) sum_{mu >= start} lambda_mu^(j) lambda_mu^(k) + I/d.

    With start = 1 this equals swap_operator; start = 0 counts the identity twice.
    """
    if j == k:
        raise DomainError("swap needs two distinct factors")
    basis = gell_mann_basis(d)
    total = np.eye(d**N, dtype=complex) / d
    for mu in range(start, d * d):
        total += 0.5 * _embed({j: basis[mu], k: basis[mu]}, d, N)
    return total


@dataclass
class DensityState:
    d: int
    N: int
    full_matrix: np.ndarray
    _coeffs: np.ndarray | None = None

    def __post_init__(self):
        rho = np.asarray(self.full_matrix, dtype=complex)
        dim = self.d**self.N
        if rho.shape != (dim, dim):
            raise DomainError(f"expected a {dim}x{dim} matrix, got {rho.shape}")
        self.full_matrix = rho

    @property
    def coefficients(self) -> np.ndarray:
        if self._coeffs is None:
            self._coeffs = expand_density(self)
        return self._coeffs

    def check(self, tol: float = 1e-10) -> None:
        rho = self.full_matrix
        if np.max(np.abs(rho - rho.conj().T)) > tol:
            raise DomainError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > tol:
            raise DomainError(f"density matrix trace is {np.trace(rho).real!r}, expected 1")


def random_density(d: int, N: int, rng: np.random.Generator) -> DensityState:
    """A A^dagger / tr(A A^dagger) with complex Gaussian A."""
    dim = d**N
    A = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = A @ A.conj().T
    return DensityState(d, N, rho / np.trace(rho).real)


def _product_tensor(d: int, N: int) -> np.ndarray:
    """Tensor T[mu_1..mu_N, row, col] of the Gell-Mann product operators, flattened."""
    basis = np.array(gell_mann_basis(d).matrices)
    T = basis
    for _ in range(N - 1):
        T = np.einsum("aij,bkl->abikjl", T, basis).reshape(T.shape[0] * d * d, T.shape[1] * d, T.shape[2] * d)
    return T


def expand_density(rho: DensityState) -> np.ndarray:
    """Real coefficient tensor of shape (d^2,)*N."""
    rho.check()
    d, N = rho.d, rho.N
    T = _product_tensor(d, N)
    # c_mu = tr(rho T_mu) and T_mu is Hermitian, so c_mu is real
    c = np.einsum("mij,ji->m", T, rho.full_matrix)
    return c.real.reshape((d * d,) * N)


def reconstruct(coeffs, d: int, N: int) -> DensityState:
    coeffs = np.asarray(coeffs, dtype=float).reshape(-1)
    T = _product_tensor(d, N)
    rho = np.einsum("m,mij->ij", coeffs, T) / 2**N
    return DensityState(d, N, rho)


def _entry_permutation(d: int, N: int, j: int, k: int) -> np.ndarray:
    """Index map of rho -> U rho U^dagger on flattened matrix entries."""
    U = swap_operator(d, N, j, k)
    src = np.argmax(U, axis=0)  # U e_a = e_{src[a]}
    dim = d**N
    a, b = np.divmod(np.arange(dim * dim), dim)
    return src[a] * dim + src[b]


def qcme_generator(g: WeightedGraph, d: int) -> np.ndarray:
    """Symmetric generator G on flattened rho: G = sum_e w_e (P_e - I)."""
    N = g.n_vertices
    if d**N > MAX_HILBERT_DIM:
        raise ResourceError(f"d^N = {d**N} exceeds {MAX_HILBERT_DIM}")
    size = d ** (2 * N)
    rows, cols, vals = [], [], []
    for (i, j), w in zip(g.edges, g.weights):
        perm = _entry_permutation(d, N, i + 1, j + 1)
        rows.append(perm)
        cols.append(np.arange(size))
        vals.append(np.full(size, w))
        rows.append(np.arange(size))
        cols.append(np.arange(size))
        vals.append(np.full(size, -w))
    G = coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size))
    return G.tocsr()


def _expm_sym_blocks(G, x0: np.ndarray, t: float) -> np.ndarray:
    """exp(G t) x0 for symmetric sparse G, by eigendecomposition per connected block."""
    ncomp, labels = connected_components(G, directed=False)
    out = np.empty_like(x0)
    Gd = G.tocsr()
    for comp in range(ncomp):
        idx = np.flatnonzero(labels == comp)
        block = Gd[idx][:, idx].toarray()
        ev, V = np.linalg.eigh(block)
        out[idx] = V @ (np.exp(ev * t) * (V.T @ x0[idx]))
    return out


def qcme_integrate(g: WeightedGraph, rho0: DensityState, t: float) -> DensityState:
    """Solve d rho/dt = sum_e w_e (U_e rho U_e^dagger - rho) exactly at time t."""
    if t < 0:
        raise DomainError("time must be nonnegative")
    if rho0.N != g.n_vertices:
        raise DomainError("state and graph sizes differ")
    if t == 0:
        return DensityState(rho0.d, rho0.N, rho0.full_matrix.copy())
    G = qcme_generator(g, rho0.d)
    x0 = rho0.full_matrix.reshape(-1)
    re = _expm_sym_blocks(G, x0.real.copy(), t)
    im = _expm_sym_blocks(G, x0.imag.copy(), t)
    dim = rho0.d**rho0.N
    return DensityState(rho0.d, rho0.N, (re + 1j * im).reshape(dim, dim))


def consensus_state(rho0: DensityState) -> DensityState:
    """Average of U_pi rho U_pi^dagger over all factor permutations."""
    d, N = rho0.d, rho0.N
    if N > MAX_CONSENSUS_N:
        raise ResourceError(f"N = {N} exceeds {MAX_CONSENSUS_N} for the N! permutation sum")
    t = rho0.full_matrix.reshape((d,) * (2 * N))
    acc = np.zeros_like(t)
    for perm in itertools.permutations(range(N)):
        acc += t.transpose(list(perm) + [N + p for p in perm])
    dim = d**N
    return DensityState(d, N, acc.reshape(dim, dim) / factorial(N))


def consensus_coefficients(coeffs: np.ndarray) -> np.ndarray:
    """Average of the coefficient tensor over all index permutations."""
    N = coeffs.ndim
    acc = np.zeros_like(coeffs)
    for perm in itertools.permutations(range(N)):
        acc += coeffs.transpose(perm)
    return acc / factorial(N)


def ctc_integrate(L, x0, t: float) -> np.ndarray:
    """x(t) = exp(-L t) x0 by symmetric eigendecomposition."""
    if t < 0:
        raise DomainError("time must be nonnegative")
    L = np.asarray(L, float)
    x0 = np.asarray(x0, float)
    if t == 0:
        return x0.copy()
    ev, V = np.linalg.eigh(L)
    return V @ (np.exp(-ev * t) * (V.T @ x0))


def coefficient_blocks(N: int, d: int) -> list[tuple[Partition, list[tuple[int, ...]]]]:
    """Every S_N orbit of multi-indices, listed in tabloid order of its partition.

    Each entry is (partition, multi-indices), where the k-th multi-index is the
    one whose row pattern is the k-th tabloid.
    """
    blocks = []
    for rep in itertools.combinations_with_replacement(range(d * d), N):
        shape, values, _ = coefficient_type(rep)
        members = [tuple(values[r - 1] for r in tab.yamanouchi) for tab in enumerate_tabloids(shape)]
        blocks.append((shape, members))
    return blocks


@dataclass
class ReductionReport:
    times: list[float]
    max_deviation_by_partition: dict[Partition, float]
    tolerance: float

    @property
    def max_deviation(self) -> float:
        return max(self.max_deviation_by_partition.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "times": self.times,
            "tolerance": self.tolerance,
            "max_deviation": self.max_deviation,
            "blocks": [
                {"partition": list(n.parts), "max_deviation": v}
                for n, v in self.max_deviation_by_partition.items()
            ],
        }


def verify_reduction(g: WeightedGraph, d: int, rho0: DensityState, t_samples, tol: float = 1e-8) -> ReductionReport:
    """Compare full QCME evolution against per-block CTC evolution of the coefficients."""
    N = g.n_vertices
    if N > 4 or d**N > MAX_HILBERT_DIM:
        raise ResourceError("reduction check is limited to N <= 4 and d^N <= 64")
    c0 = expand_density(rho0)
    blocks = coefficient_blocks(N, d)
    laps = {}
    dev: dict[Partition, float] = {}
    for t in t_samples:
        ct = expand_density(qcme_integrate(g, rho0, t))
        for shape, members in blocks:
            if shape not in laps:
                laps[shape] = induced_laplacian(g, shape)
            idx = tuple(np.array(members).T)
            x = ctc_integrate(laps[shape], c0[idx], t)
            err = float(np.max(np.abs(ct[idx] - x)))
            dev[shape] = max(dev.get(shape, 0.0), err)
    return ReductionReport(list(map(float, t_samples)), dev, tol)


def decay_slope(g: WeightedGraph, rho0: DensityState, t_grid) -> float:
    """Least-squares slope of log ||rho(t) - rho*||_F over t_grid."""
    star = consensus_state(rho0).full_matrix
    logs = [np.log(np.linalg.norm(qcme_integrate(g, rho0, t).full_matrix - star)) for t in t_grid]
    return float(np.polyfit(np.asarray(t_grid, float), logs, 1)[0])
