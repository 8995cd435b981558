"""Cesaro asymptotic limits, two ways, plus every checkable identity.

The spectral route conjugates a filtered Gram matrix back through the
similarity produced by ``classify``: with S^{-1} T S = U (+) B the averaged
products converge to

    A = S^{-*}  Gtilde  S^{-1},

where Gtilde keeps exactly those entries of S*S whose row and column index
belong to the same unimodular eigenvalue cluster (everything touching the
interior block averages to zero).  The iterative route accumulates the exact
partial means (1/n) sum_j T*^j T^j and is kept deliberately independent so
the two can serve as oracles for each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import PowerboundReport, class_label, classify
from .config import DEFAULT, Tolerances
from .errors import NotC11, NotConverging, NotPowerBounded, WrongDimension
from .linalg import (
    adjoint,
    as_matrix,
    hermitize,
    inverse,
    operator_norm,
    require_square,
)

__all__ = [
    "AsymptoticLimit",
    "GramFilter",
    "METHOD_SPECTRAL",
    "METHOD_ITERATED",
    "TRACE_C11_EXACT",
    "TRACE_L_STABLE_FEASIBLE",
    "TRACE_VIOLATION",
    "cesaro_iterate",
    "cesaro_means",
    "shifted_cesaro_mean",
    "cesaro_limit",
    "iterated_limit",
    "gram_filter",
    "check_invariance",
    "norm_lower_bound_check",
    "trace_condition",
    "harmonic_mean_check",
    "harmonic_mean_counterexample",
    "adjoint_limit",
    "oracle_envelope",
]

METHOD_SPECTRAL = "spectral"
METHOD_ITERATED = "iterated"

TRACE_C11_EXACT = "c11_exact"
TRACE_L_STABLE_FEASIBLE = "l_stable_feasible"
TRACE_VIOLATION = "violation"


@dataclass(frozen=True)
class AsymptoticLimit:
    A: np.ndarray
    rank_k: int
    stable_dim_l: int
    nonzero_eigs: np.ndarray  # descending
    method: str
    n_used: int | None = None

    @property
    def d(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class GramFilter:
    """S*S and its cluster-filtered version that survives Cesaro averaging."""

    G: np.ndarray
    Gtilde: np.ndarray


def _block_size(nmax: int) -> int:
    if nmax <= 1 << 16:
        return 256
    return 1 << 15


def cesaro_means(
    T: np.ndarray,
    checkpoints,
    tol: Tolerances = DEFAULT,
) -> dict[int, np.ndarray]:
    """Exact partial Cesaro means (1/n) sum_{j=1..n} T*^j T^j at several n.

    Powers are built by running matrix products in blocks; block sums are
    folded into the accumulator with Kahan compensation.  Aborts with
    NotConverging as soon as some ||T^j|| exceeds the overflow guard, which
    for a matrix certifies the absence of the limit.
    """
    T = as_matrix(T)
    d = require_square(T)
    cps = sorted(set(int(n) for n in checkpoints))
    if not cps or cps[0] < 1:
        raise ValueError("checkpoints must be positive integers")
    nmax = cps[-1]
    guard = tol.iterate_guard
    g2 = guard * guard

    def guard_hit(j: int) -> None:
        raise NotConverging(
            f"||T^{j}|| exceeds {guard:.1e}; "
            "the Cesaro limit does not exist (matrix is not power-bounded)"
        )

    block = min(_block_size(nmax), nmax)
    TP = np.empty((block, d, d), dtype=complex)
    TP[0] = T
    if np.linalg.norm(T) > guard and operator_norm(T) > guard:
        guard_hit(1)
    for i in range(1, block):
        TP[i] = TP[i - 1] @ T
        # fast-growing matrices can blow past float range inside one block,
        # so the guard must also watch the power table itself
        if np.linalg.norm(TP[i]) > guard and operator_norm(TP[i]) > guard:
            guard_hit(i + 1)
    # layout (d, block*d): T^1..T^block side by side, so one GEMM per block
    flat = np.ascontiguousarray(TP.transpose(1, 0, 2).reshape(d, block * d))

    acc = np.zeros((d, d), dtype=complex)
    comp = np.zeros((d, d), dtype=complex)
    P = np.eye(d, dtype=complex)
    out: dict[int, np.ndarray] = {}
    count, ci = 0, 0
    while count < nmax:
        nxt = min(count + block, cps[ci])
        w = nxt - count
        PB = (P @ flat[:, : w * d]).reshape(d, w, d)  # PB[:, b, :] = T^{count+b+1}
        view = PB.view(np.float64).reshape(d, w, 2 * d)
        sq = np.einsum("ibj,ibj->b", view, view)      # squared Frobenius norms
        if sq.max() > g2:
            for b in range(w):
                if sq[b] > g2 and operator_norm(PB[:, b, :]) > guard:
                    guard_hit(count + b + 1)
        G = np.tensordot(PB.conj(), PB, axes=((0, 1), (0, 1)))
        y = G - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
        count = nxt
        P = np.ascontiguousarray(PB[:, w - 1, :])
        if count == cps[ci]:
            out[count] = (acc + comp) / count
            ci += 1
    return out


def cesaro_iterate(T: np.ndarray, n: int, tol: Tolerances = DEFAULT) -> np.ndarray:
    """The exact partial Cesaro mean at a single n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return cesaro_means(T, [n], tol)[n]


def shifted_cesaro_mean(T: np.ndarray, n: int, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Window mean (1/n) sum_{j=2..n+1} T*^j T^j (start offset 1)."""
    mean = cesaro_means(T, [n + 1], tol)[n + 1]
    first = adjoint(T) @ T
    return ((n + 1) * mean - first) / n


def gram_filter(report: PowerboundReport) -> GramFilter:
    """Build S*S and mask it down to same-cluster unimodular entries."""
    if not report.power_bounded:
        raise NotPowerBounded("Gram filter requires a power-bounded report")
    S = report.similarity_S
    G = S.conj().T @ S
    m = report.m
    Gt = np.zeros_like(G)
    if m:
        ids = report.cluster_ids
        mask = ids[:, None] == ids[None, :]
        Gt[:m, :m] = np.where(mask, G[:m, :m], 0.0)
    return GramFilter(G=G, Gtilde=hermitize(Gt))


def _limit_from_matrix(
    A: np.ndarray,
    method: str,
    tol: Tolerances,
    n_used: int | None = None,
) -> AsymptoticLimit:
    A = hermitize(A)
    d = A.shape[0]
    w = np.linalg.eigvalsh(A)
    cutoff = tol.rank_for(max(abs(w[0]), abs(w[-1]))) if d else 0.0
    nonzero = np.sort(w[w > cutoff])[::-1]
    rank_k = len(nonzero)
    return AsymptoticLimit(
        A=A,
        rank_k=rank_k,
        stable_dim_l=d - rank_k,
        nonzero_eigs=nonzero,
        method=method,
        n_used=n_used,
    )


def cesaro_limit(
    T: np.ndarray,
    tol: Tolerances = DEFAULT,
    report: PowerboundReport | None = None,
) -> AsymptoticLimit:
    """The Cesaro asymptotic limit, by the spectral formula.

    Exists iff T is power-bounded; the same matrix is the limit under every
    Banach limit, so no generalized-limit parameter appears here.
    """
    if report is None:
        report = classify(T, tol)
    if not report.power_bounded:
        raise NotPowerBounded(
            "the Cesaro asymptotic limit exists only for power-bounded matrices "
            f"(verdict: {report.reason})"
        )
    d = report.d
    if report.m == 0:
        A = np.zeros((d, d), dtype=complex)
    else:
        gf = gram_filter(report)
        Sinv = inverse(report.similarity_S, tol)
        A = Sinv.conj().T @ gf.Gtilde @ Sinv
    return _limit_from_matrix(A, METHOD_SPECTRAL, tol)


def iterated_limit(T: np.ndarray, n: int, tol: Tolerances = DEFAULT) -> AsymptoticLimit:
    """Finite-n Cesaro mean packaged with the same metadata as the limit."""
    return _limit_from_matrix(cesaro_iterate(T, n, tol), METHOD_ITERATED, tol, n_used=n)


def adjoint_limit(
    T: np.ndarray,
    tol: Tolerances = DEFAULT,
) -> AsymptoticLimit:
    """Cesaro asymptotic limit of the adjoint matrix."""
    return cesaro_limit(adjoint(as_matrix(T)), tol)


def check_invariance(T: np.ndarray, limit: AsymptoticLimit) -> float:
    """Residual of T* A T = A, normalized by max(||A||, 1)."""
    A = limit.A
    res = adjoint(T) @ A @ T - A
    return operator_norm(res) / max(operator_norm(A), 1.0)


def norm_lower_bound_check(limit: AsymptoticLimit, tol: Tolerances = DEFAULT) -> bool:
    """A Cesaro limit is either zero or has operator norm >= 1."""
    nrm = operator_norm(limit.A)
    return nrm <= tol.zero or nrm >= 1.0 - tol.norm_slack


def trace_condition(limit: AsymptoticLimit, tol: Tolerances = DEFAULT) -> str:
    """Check the reciprocal-eigenvalue trace condition for the limit's class.

    Rank-d limits must satisfy sum(1/t_i) = d exactly; limits with a
    nontrivial kernel satisfy sum(1/t_i) <= k (vacuously when A = 0).
    """
    d = limit.d
    k = limit.rank_k
    s = float(np.sum(1.0 / limit.nonzero_eigs)) if k else 0.0
    slack = tol.trace_for(d)
    if limit.stable_dim_l == 0:
        return TRACE_C11_EXACT if abs(s - d) <= slack else TRACE_VIOLATION
    return TRACE_L_STABLE_FEASIBLE if s <= k + slack else TRACE_VIOLATION


def harmonic_mean_check(T: np.ndarray, tol: Tolerances = DEFAULT) -> float:
    """|| A_T^{-1} + A_{T*}^{-1} - 2I || for a 2x2 matrix with trivial stable subspace.

    The identity holds for every such 2x2 matrix; in higher dimension it
    generally fails (see harmonic_mean_counterexample).
    """
    T = as_matrix(T)
    if require_square(T) != 2:
        raise WrongDimension("the harmonic-mean identity is specific to 2x2 matrices")
    report = classify(T, tol)
    if not report.power_bounded:
        raise NotPowerBounded("harmonic-mean check requires a power-bounded matrix")
    if class_label(report).kind != "c11":
        raise NotC11("harmonic-mean check requires an invertible limit (trivial kernel)")
    A1 = cesaro_limit(T, tol, report=report).A
    A2 = adjoint_limit(T, tol).A
    resid = inverse(A1, tol) + inverse(A2, tol) - 2.0 * np.eye(2)
    return operator_norm(resid)


def harmonic_mean_counterexample(tol: Tolerances = DEFAULT) -> np.ndarray:
    """Eigenvalues showing the 2x2 identity fails in dimension 3.

    Builds T = S diag(1, -1, i) S^{-1} with S = [[i,2,1],[0,1,i],[1,0,4]]
    and returns the (ascending) eigenvalues of A_T^{-1} + A_{T*}^{-1},
    approximately {1.27178, 2.1285, 2.59972} rather than {2, 2, 2}.
    """
    S = np.array([[1j, 2, 1], [0, 1, 1j], [1, 0, 4]], dtype=complex)
    D = np.diag([1.0, -1.0, 1j]).astype(complex)
    T = S @ D @ np.linalg.inv(S)
    M = inverse(cesaro_limit(T, tol).A, tol) + inverse(adjoint_limit(T, tol).A, tol)
    return np.linalg.eigvalsh(hermitize(M))


def oracle_envelope(report: PowerboundReport, tol: Tolerances = DEFAULT) -> float:
    """Constant C so that ||mean_n - A|| <= C/n for this matrix.

    C = 40 * cond(S)^2 * ||S||^2 * (1/gap + 1/(1 - r(B))), with gap the
    smallest |1 - conj(mu) nu| over distinct unimodular clusters.  The
    factor 40 leaves generous slack over the telescoping bound.
    """
    if not report.power_bounded:
        raise NotPowerBounded("envelope is defined for power-bounded matrices only")
    S = report.similarity_S
    sv = np.linalg.svd(S, compute_uv=False)
    cond2 = (sv[0] / sv[-1]) ** 2
    terms = 0.0
    if report.m:
        ids = report.cluster_ids
        centers = [report.unimodular_values[ids == c].mean() for c in np.unique(ids)]
        if len(centers) > 1:
            gap = min(
                abs(1.0 - np.conj(centers[i]) * centers[j])
                for i in range(len(centers))
                for j in range(len(centers))
                if i != j
            )
            terms += 1.0 / gap
    if report.stable_dim_l:
        r_b = float(np.max(np.abs(np.diagonal(report.interior_block_B))))
        terms += 1.0 / (1.0 - r_b)
    return 40.0 * cond2 * sv[0] ** 2 * terms
