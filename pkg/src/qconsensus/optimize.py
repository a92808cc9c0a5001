"""Optimal per-orbit edge weights maximizing the Laplacian spectral gap under a weight budget.

Problem: maximize lambda_2(L(w)) subject to w >= 0 and sum_o size_o * w_o = D,
with one weight per edge orbit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import cos, pi, sqrt

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import least_squares, linprog

from .errors import (
    CertificateUnavailableError,
    DomainError,
    UnsupportedClosedFormError,
    UnsupportedError,
)
from .graphs import TopologySpec, WeightedGraph, build_topology, is_connected, laplacian
from .spectral import spectral_gap


@dataclass
class CertificateReport:
    accepted: bool
    max_violation: float
    multiplicity: int
    nu: float
    lambda2: float
    upper_bound: float
    reason: str = ""
    Y: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "max_violation": self.max_violation,
            "multiplicity": self.multiplicity,
            "nu": self.nu,
            "lambda2": self.lambda2,
            "upper_bound": self.upper_bound,
            "reason": self.reason,
        }


@dataclass
class OptimalResult:
    weights_by_orbit: dict[int, float]
    lambda2: float
    budget_used: float
    method: str
    D: float = 1.0
    certificate: CertificateReport | None = None
    upper_bound: float | None = None
    converged: bool = True
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "weights": {str(k): v for k, v in sorted(self.weights_by_orbit.items())},
            "lambda2": self.lambda2,
            "budget_used": self.budget_used,
            "method": self.method,
            "D": self.D,
            "upper_bound": self.upper_bound,
            "converged": self.converged,
            "notes": self.notes,
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
        }


def _budget(g: WeightedGraph, weights: dict) -> float:
    return float(sum(size * weights[o] for o, size in g.orbit_sizes().items()))


def _result(spec_or_graph, weights: dict, lam: float, D: float, method: str, **notes) -> OptimalResult:
    g = spec_or_graph if isinstance(spec_or_graph, WeightedGraph) else build_topology(spec_or_graph)
    present = set(g.orbits())
    missing = present - set(weights)
    if missing:
        raise DomainError(f"no weight for orbit(s) {sorted(missing)}")
    weights = {o: float(v) for o, v in sorted(weights.items()) if o in present}
    return OptimalResult(weights, float(lam), _budget(g, weights), method, float(D), notes=dict(notes))


# ---------------------------------------------------------------- Gram matrices

def _tail_vectors(q1: int, q2: int) -> np.ndarray:
    """Columns e_{-q1}..e_{q2}: core indicator and normalized tail differences.

    Coordinates: core, then tail A vertices 1..q1, then tail B vertices 1..q2.
    """
    dim = 1 + q1 + q2
    E = np.zeros((dim, dim))
    col = lambda mu: mu + q1  # noqa: E731
    E[0, col(0)] = 1.0
    for sign, q, offset in ((-1, q1, 1), (1, q2, 1 + q1)):
        for j in range(1, q + 1):
            here = offset + j - 1
            prev = 0 if j == 1 else here - 1
            E[here, col(sign * j)] = 1 / sqrt(2)
            E[prev, col(sign * j)] = -1 / sqrt(2)
    return E


def gram_ccs(q: int) -> np.ndarray:
    """(q+1)x(q+1) Gram matrix of the single-tail basis, indices 0..q."""
    E = _tail_vectors(0, q)
    return E.T @ E


def gram_two_branch(q1: int, q2: int) -> np.ndarray:
    """Gram matrix of the two-tail basis, row k holds index k - q1.

    Both first tail edges touch the core, so entries (-1, 1) and (1, -1) are 1/2.
    """
    E = _tail_vectors(q1, q2)
    return E.T @ E


def gram_inverse_ccs(q: int) -> np.ndarray:
    """Closed-form inverse of gram_ccs(q)."""
    if q < 1:
        raise DomainError("q must be at least 1")
    G = np.zeros((q + 1, q + 1))
    G[0, 0] = q + 1
    for j in range(1, q + 1):
        G[0, j] = G[j, 0] = sqrt(2) * (q - j + 1)
        for i in range(1, q + 1):
            G[i, j] = 2 * min(q - i + 1, q - j + 1)
    return G


def ccs_gram_solution(p: int, Ginv: np.ndarray, D: float, q1: int = 0) -> tuple[float, np.ndarray, np.ndarray]:
    """lambda_2 and weights from an inverse Gram matrix of a complete-cored star.

    Ginv is indexed -q1..q2 with the core at position q1. Returns
    (s, w_core, tail weights in index order with the core slot set to w_core).
    """
    c = q1
    r = sqrt(p * (p - 1))
    tail = [k for k in range(Ginv.shape[0]) if k != c]
    s_den = (p - 1) * Ginv[c, c] + 2 * r * Ginv[c, tail].sum() + p * Ginv[np.ix_(tail, tail)].sum()
    s = 2 * D / s_den
    w = np.empty(Ginv.shape[0])
    w[c] = s * ((p - 1) * Ginv[c, c] + r * Ginv[c, tail].sum()) / (p * (p - 1))
    for k in tail:
        w[k] = s * (r * Ginv[k, c] + p * Ginv[k, tail].sum()) / (2 * p)
    return s, w[c], w


# ---------------------------------------------------------------- closed forms

def _complete(n, D):
    w = 2 * D / (n * (n - 1))
    return {0: w}, n * w


def _cycle(n, D):
    return {0: D / n}, 2 * (1 - cos(2 * pi / n)) * D / n


def _star(n, D):
    if n == 2:
        return {0: D}, 2 * D
    return {0: D / (n - 1)}, D / (n - 1)


def _even_path(q, D):
    den = (q + 1) * (2 * q + 1) * (2 * q + 3)
    w = {0: 3 * D * (q + 1) / ((2 * q + 3) * (2 * q + 1))}
    for j in range(1, q + 1):
        w[j] = 3 * D * ((q + 1) ** 2 - j * j) / den
    return w, 6 * D / den


def _symmetric_star(p, q, D):
    den = p * q * (q + 1) * (2 * q + 1)
    w = {j: 3 * D * (q + j) * (q - j + 1) / den for j in range(1, q + 1)}
    return w, 6 * D / den


def _path(n, D):
    if n == 2:
        return {0: D}, 2 * D
    if n % 2 == 0:
        return _even_path(n // 2 - 1, D)
    return _symmetric_star(2, n // 2, D)


def _ccs_star(p, q, D):
    r = sqrt(2 * p * (p - 1))
    w = {0: 3 * D * (2 * p - 2 + q * r) / (p * (p - 1) * (3 * p - 3 + 3 * q * r + 2 * p * q * q + p * q))}
    den = 3 * p * (q + 1) * (p - 1 + q * r) + p * p * q * (q + 1) * (2 * q + 1)
    for j in range(1, q + 1):
        w[j] = 3 * D * (r * (q - j + 1) + p * (q - j + 1) * (q + j)) / den
    lam = 6 * D / (3 * (p - 1) * (q + 1) + 3 * r * q * (q + 1) + p * q * (q + 1) * (2 * q + 1))
    return w, lam


def _ccs_two_branch(p, q1, q2, D):
    r = sqrt(2 * p * (p - 1))
    D1 = q1 * (q1 + 1) + q2 * (q2 + 1)
    D2 = q1 * (q1 + 1) * (2 * q1 + 1) + q2 * (q2 + 1) * (2 * q2 + 1)
    lam = 6 * D / (3 * (p - 1) * (q1 + q2 + 1) + 3 * r * D1 + p * D2)
    Ginv = np.linalg.inv(gram_two_branch(q1, q2))
    _, _, w = ccs_gram_solution(p, Ginv, D, q1)
    return {k - q1: float(w[k]) for k in range(len(w))}, lam


def _normalize(ratios: dict, sizes: dict, D: float):
    s = D / sum(sizes[o] * v for o, v in ratios.items())
    return {o: s * v for o, v in ratios.items()}, s


def palm_regime(p, q) -> int:
    """1 when 2p > q(q+1), else 2."""
    return 1 if 2 * p > q * (q + 1) else 2


def _palm(p, q, D, regime=None):
    sizes = {0: p, **{j: 1 for j in range(1, q + 1)}}
    if (regime or palm_regime(p, q)) == 1:
        ratios = {0: 1.0, **{j: (q - j + 1) * (q + j) / 2 for j in range(1, q + 1)}}
    else:
        m = 2 * (p + q + 1)
        ratios = {0: (q + 1) * (q + 2) / m}
        for j in range(1, q + 1):
            ratios[j] = (q - j + 1) * (p * (q + j + 2) + (q + 1) * j) / m
    # in both regimes lambda_2 equals the normalization scale s
    return _normalize(ratios, sizes, D)


def lollipop_regime(p, q) -> int:
    """1 when q(q+1) <= sqrt(2p(p+1)) (clique edges used), else 2 (palm)."""
    return 1 if q * (q + 1) <= sqrt(2 * p * (p + 1)) else 2


def _lollipop(p, q, D, regime=None):
    if (regime or lollipop_regime(p, q)) == 2:
        w, lam = _palm(p, q, D)
        return {-1: 0.0, **w}, lam
    r = sqrt(2 * p * (p + 1))
    m = 2 * (p + q + 1)
    w0 = (q + 1) * (2 * (p + 1) + q * r) / (m * (p + 1))
    ratios = {-1: (1 - w0) / p, 0: w0}
    for j in range(1, q + 1):
        ratios[j] = (q - j + 1) * (r + p * q + (p + q + 1) * j) / m
    sizes = {-1: p * (p - 1) / 2, 0: p, **{j: 1 for j in range(1, q + 1)}}
    return _normalize(ratios, sizes, D)


def _coupled_complete(n1, n2, n3, D):
    if n1 != n3:
        raise UnsupportedClosedFormError(
            f"coupled_complete({n1},{n2},{n3}) has N1 != N3 and no closed form"
        )
    if 2 * n1 < n2:
        s = 2 * n2 * D / (4 * n1 * n2 + (n2 - 1) * (n2 - 2 * n1))
        w = {-2: 0.0, -1: s / n2, 0: s * (n2 - 2 * n1) / n2**2, 1: s / n2, 2: 0.0}
        return w, s
    w1 = D / (2 * n1 * n2)
    return {-2: 0.0, -1: w1, 0: 0.0, 1: w1, 2: 0.0}, D / (2 * n1)


EDGE_TRANSITIVE = ("complete", "cycle")


def _factor_gap(spec: TopologySpec) -> tuple[int, int, float]:
    """(vertices, edges, unit-weight lambda_2) of an edge-transitive factor."""
    if spec.kind not in EDGE_TRANSITIVE:
        raise UnsupportedError(f"factor {spec} is not an edge-transitive catalog graph")
    g = build_topology(spec)
    (n,) = spec.params
    lam = n if spec.kind == "complete" else 2 * (1 - cos(2 * pi / n))
    return g.n_vertices, g.n_edges, float(lam)


def lp_cartesian(factors, D: float = 1.0) -> OptimalResult:
    """Equalize w_i * lambda_2(factor i) = s across factors under the budget."""
    factors = [f if isinstance(f, TopologySpec) else TopologySpec(*f) for f in factors]
    if not factors:
        raise DomainError("need at least one factor")
    info = [_factor_gap(f) for f in factors]
    total_n = float(np.prod([n for n, _, _ in info]))
    # factor i edges appear once per vertex of the other factors
    cost = sum(m * (total_n / n) / lam for n, m, lam in info)
    s = D / cost
    weights = {i + 1: s / lam for i, (_, _, lam) in enumerate(info)}
    spec = TopologySpec("cartesian_product", tuple(factors))
    return _result(spec, weights, s, D, "lp_equalization")


def closed_form(spec: TopologySpec, D: float = 1.0) -> OptimalResult:
    if D <= 0:
        raise DomainError("budget D must be positive")
    build_topology(spec)  # validates parameters
    k, prm = spec.kind, [int(v) for v in spec.params] if spec.kind != "cartesian_product" else []
    notes = {}
    if k == "complete":
        w, lam = _complete(prm[0], D)
    elif k == "cycle":
        w, lam = _cycle(prm[0], D)
    elif k == "star":
        w, lam = _star(prm[0], D)
    elif k == "path":
        w, lam = _path(prm[0], D)
    elif k == "paw":
        w, lam = {0: 0.0, 1: D / 4}, D / 2
    elif k == "ccs_star":
        w, lam = _ccs_star(*prm, D)
    elif k == "ccs_two_branch":
        w, lam = _ccs_two_branch(*prm, D)
    elif k == "symmetric_star":
        if prm[0] < 2:
            raise UnsupportedClosedFormError("symmetric_star closed form needs p >= 2")
        w, lam = _symmetric_star(*prm, D)
    elif k == "palm":
        w, lam = _palm(*prm, D)
        notes["regime"] = palm_regime(*prm)
    elif k == "lollipop":
        w, lam = _lollipop(*prm, D)
        notes["regime"] = lollipop_regime(*prm)
    elif k == "coupled_complete":
        w, lam = _coupled_complete(*prm, D)
    elif k == "cartesian_product":
        return lp_cartesian(spec.params, D)
    else:
        raise UnsupportedClosedFormError(f"no closed form for {k}")
    return _result(spec, w, lam, D, "closed_form", **notes)


# ---------------------------------------------------------------- numeric maximizer

class _GapModel:
    """lambda_2 as a function of per-orbit weights, restricted to the complement of 1."""

    def __init__(self, g: WeightedGraph):
        self.labels = g.orbits()
        sizes = g.orbit_sizes()
        self.c = np.array([sizes[o] for o in self.labels], float)
        Q = null_space(np.ones((1, g.n_vertices)))
        self.BQ = g.incidence() @ Q
        pos = {o: i for i, o in enumerate(self.labels)}
        self.M = np.zeros((len(self.labels), g.n_edges))
        for e, o in enumerate(g.orbit_of_edge):
            self.M[pos[o], e] = 1.0

    def matrix(self, w):
        we = self.M.T @ w
        return self.BQ.T @ (we[:, None] * self.BQ)

    def evaluate(self, w, cluster_tol=1e-8):
        """(lambda_2, averaged supergradient, per-eigenvector supergradients)."""
        ev, V = np.linalg.eigh(self.matrix(w))
        lam = ev[0]
        k = int(np.sum(ev <= lam + cluster_tol * max(1.0, abs(ev[-1]))))
        grads = [self.M @ (self.BQ @ V[:, i]) ** 2 for i in range(k)]
        return float(lam), np.mean(grads, axis=0), grads


def project_budget_simplex(y, c, D):
    """Euclidean projection onto {w >= 0, c.w = D} (c > 0)."""
    y = np.asarray(y, float)
    c = np.asarray(c, float)
    r = y / c
    order = np.argsort(-r)
    cy = np.cumsum(c[order] * y[order])
    cc = np.cumsum(c[order] ** 2)
    # active set is a prefix in order of y/c; take the longest consistent prefix
    t = (cy[0] - D) / cc[0]
    for k in range(len(y)):
        tk = (cy[k] - D) / cc[k]
        if r[order[k]] > tk:
            t = tk
    return np.maximum(0.0, y - t * c)


def _lp_step(cuts, c, D, bounds):
    m = len(c)
    A = np.array(cuts)
    res = linprog(
        np.r_[np.zeros(m), -1.0],
        A_ub=np.c_[-A, np.ones(len(A))],
        b_ub=np.zeros(len(A)),
        A_eq=np.r_[c, 0.0][None],
        b_eq=[D],
        bounds=list(bounds) + [(None, None)],
        method="highs",
    )
    if res.status != 0:
        return None, None
    return res.x[:m], -res.fun


def maximize_gap_numeric(
    g: WeightedGraph,
    D: float = 1.0,
    *,
    starts: int = 4,
    seed: int = 0,
    ascent_iters: int = 150,
    polish_iters: int = 400,
    ub_every: int = 10,
    stall_iters: int = 40,
    max_sweeps: int = 60,
    tol: float = 1e-9,
    converged_tol: float = 1e-7,
    max_orbits: int = 8,
) -> OptimalResult:
    """Maximize lambda_2 over per-orbit weights on the budget simplex.

    Stages: projected supergradient ascent from several starts, a trust-region
    cutting-plane refinement that reuses every supergradient as a global upper
    cut, and a pairwise budget-transfer coordinate search. The cutting-plane
    model gives a certified upper bound on the optimum.
    """
    if D <= 0:
        raise DomainError("budget D must be positive")
    if g.n_vertices < 2 or not is_connected(g.with_weights([1.0] * g.n_edges)):
        raise DomainError("graph must be connected")
    model = _GapModel(g)
    c, m = model.c, len(model.labels)
    if m > max_orbits:
        raise UnsupportedError(f"{m} orbits exceeds the limit of {max_orbits}")
    scale = D / c.sum()
    cuts: list[np.ndarray] = []
    best_lam, best_w = -np.inf, None

    def consider(w):
        nonlocal best_lam, best_w
        w = np.maximum(w, 0.0)
        w *= D / (c @ w)
        lam, avg, grads = model.evaluate(w)
        cuts.extend(grads)
        # strict improvement, or tie broken toward the lexicographically smaller vector
        if lam > best_lam or (lam == best_lam and tuple(w) < tuple(best_w)):
            best_lam, best_w = lam, w.copy()
        return lam, avg

    # stage 1: multi-start supergradient ascent
    for k in range(starts):
        if k == 0:
            w = np.full(m, scale)
        else:
            rng = np.random.default_rng([seed, k])
            w = rng.dirichlet(np.ones(m)) * D / c
        for it in range(ascent_iters):
            _, gr = consider(w)
            norm = np.linalg.norm(gr)
            if norm == 0:
                break
            w = project_budget_simplex(w + scale * gr / norm / np.sqrt(it + 1), c, D)

    # stage 2: trust-region cutting planes; the unboxed LP value is a valid upper bound
    ub = np.inf
    delta = 0.5 * D / c.min()
    stall = 0
    for it in range(polish_iters):
        if it % ub_every == 0:
            _, global_ub = _lp_step(cuts, c, D, [(0, None)] * m)
            if global_ub is not None:
                ub = min(ub, global_ub)
            if ub - best_lam <= tol * D or stall >= stall_iters:
                break
        box = [(max(0.0, best_w[i] - delta), best_w[i] + delta) for i in range(m)]
        cand, pred = _lp_step(cuts, c, D, box)
        if cand is None:
            cand, pred = _lp_step(cuts, c, D, [(0, None)] * m)
            if cand is None:
                break
        before = best_lam
        lam, _ = consider(cand)
        if lam > before + 1e-3 * tol * D:
            stall = 0
            if lam - before >= 0.5 * (pred - before):
                delta *= 2
        else:
            stall += 1
            delta = max(delta * 0.5, 1e-14 * D)
    _, global_ub = _lp_step(cuts, c, D, [(0, None)] * m)
    if global_ub is not None:
        ub = min(ub, global_ub)

    # stage 3: pairwise transfers at shrinking step sizes
    step = 1e-3 * scale
    sweeps = 0
    while step > 1e-12 * scale and m > 1 and sweeps < max_sweeps:
        sweeps += 1
        start_lam = best_lam
        for i in range(m):
            for j in range(m):
                if i == j or best_w[j] <= 0:
                    continue
                amount = min(step, best_w[j] * c[j])
                w = best_w.copy()
                w[i] += amount / c[i]
                w[j] -= amount / c[j]
                consider(w)
        if best_lam <= start_lam + 1e-14 * D:
            step *= 0.25

    weights = {o: float(v) for o, v in zip(model.labels, best_w)}
    res = _result(g, weights, best_lam, D, "numeric")
    res.upper_bound = float(ub)
    res.converged = bool(ub - best_lam <= converged_tol * D)
    return res


# ---------------------------------------------------------------- certificate

def dual_certificate(
    g: WeightedGraph,
    result: OptimalResult,
    D: float | None = None,
    *,
    tol: float = 1e-6,
    cluster_tol: float = 1e-6,
    seed: int = 0,
) -> CertificateReport:
    """Check optimality through a trace-one PSD matrix Z = U Y U^T on the lambda_2 eigenspace.

    With a_e = (e_i - e_j)^T Z (e_i - e_j) and nu = lambda_2 / D, optimality
    holds when a_e = nu on every positive-weight edge and a_e <= nu on
    zero-weight edges. Y is found by least squares; the report carries the
    largest relative violation and the implied upper bound D * max_e a_e.
    """
    D = result.D if D is None else float(D)
    try:
        w = np.array([result.weights_by_orbit[o] for o in g.orbit_of_edge], float)
    except KeyError as exc:
        raise DomainError(f"result has no weight for orbit {exc.args[0]}") from exc
    gw = g.with_weights(np.maximum(w, 0.0))
    lam_true = spectral_gap(laplacian(gw)) if g.n_vertices > 1 else 0.0

    def reject(reason, viol=np.inf, k=0, ub=np.inf):
        return CertificateReport(False, float(viol), k, lam_true / D, lam_true, float(ub), reason)

    if np.any(w < -1e-12):
        return reject("negative weight")
    spent = float(w.sum())
    if abs(spent - D) > 1e-8 * D:
        return reject(f"budget not met: weights spend {spent!r}, budget {D!r}")

    L = laplacian(gw)
    Q = null_space(np.ones((1, g.n_vertices)))
    ev, V = np.linalg.eigh(Q.T @ L @ Q)
    lam = float(ev[0])
    if lam <= 1e-12 * max(1.0, ev[-1]):
        raise CertificateUnavailableError("lambda_2 is zero: weighted graph is disconnected")
    k = int(np.sum(ev <= lam + cluster_tol * max(1.0, ev[-1])))
    if k == 0:
        raise CertificateUnavailableError("empty lambda_2 eigenspace")
    U = Q @ V[:, :k]
    diffs = U[[i for i, _ in g.edges]] - U[[j for _, j in g.edges]]
    nu = lam / D
    positive = w > 1e-7 * w.max()

    def edge_values(Y):
        return np.einsum("ea,ab,eb->e", diffs, Y, diffs)

    def violations(Y):
        a = edge_values(Y)
        r = np.where(positive, a - nu, np.maximum(0.0, a - nu))
        return r / nu

    def y_of(x):
        R = x.reshape(k, k)
        Y = R @ R.T
        return Y / np.trace(Y)

    starts = [np.eye(k).ravel()]
    rng = np.random.default_rng(seed)
    starts += [rng.standard_normal(k * k) for _ in range(4)]
    best = None
    for x0 in starts:
        if k == 1:
            Y = np.ones((1, 1))
        else:
            sol = least_squares(lambda x: violations(y_of(x)), x0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
            Y = y_of(sol.x)
        viol = float(np.max(np.abs(violations(Y))))
        if best is None or viol < best[0]:
            best = (viol, Y)
        if viol <= tol * 1e-3 or k == 1:
            break
    viol, Y = best
    ub = D * float(np.max(edge_values(Y)))
    accepted = viol <= tol
    reason = "" if accepted else "complementary slackness violated"
    return CertificateReport(accepted, viol, k, nu, lam, ub, reason, Y)


def certify(g: WeightedGraph, result: OptimalResult, **kw) -> OptimalResult:
    """Attach a certificate to result in place and return it."""
    result.certificate = dual_certificate(g, result, **kw)
    return result
