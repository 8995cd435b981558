"""Inverse problems: build matrices whose Cesaro limits hit prescribed targets.

Three constructions are provided.

* ``synthesize_c11`` realizes any positive definite target whose reciprocal
  eigenvalues sum to the dimension, via S = diag(1/sqrt(t)) . F with F the
  unitary DFT matrix (every entry of modulus 1/sqrt(d), so the columns of S
  come out unit) and distinct unimodular eigenvalues.
* ``synthesize_l_stable`` handles rank-deficient targets: scale the largest
  eigenvalue by c so the reciprocal sum becomes exact, realize that with the
  rank-d construction, then graft the kernel back on through a nilpotent
  block and rotate with an explicit block unitary.
* ``synthesize_norm_limit`` builds an idempotent P with P*P equal to the
  target, which makes T*^n T^n literally constant.

The module also hosts the seeded generators used throughout the test and
check suites.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .asymptotics import AsymptoticLimit, cesaro_limit
from .classify import classify, spectral_set_membership
from .config import DEFAULT, Tolerances
from .errors import (
    Infeasible,
    NotInSpectralSet,
    NotPositiveDefinite,
    NotPSD,
    RankMismatch,
)
from .linalg import (
    adjoint,
    as_matrix,
    hermitian_defect,
    hermitize,
    inverse,
    normalize_columns,
    operator_norm,
    require_square,
)

__all__ = [
    "GeneratorProfile",
    "GeneratedInstance",
    "SpectrumTarget",
    "SynthesisResult",
    "dft_unitary",
    "classify_target",
    "synthesize",
    "synthesize_c11",
    "synthesize_l_stable",
    "synthesize_norm_limit",
    "block_rotation",
    "random_powerbounded",
    "generate_instance",
    "random_contraction",
    "random_idempotent",
    "haar_unitary",
]

FEASIBLE_C11 = "c11"
FEASIBLE_L_STABLE = "l_stable"
FEASIBLE_ZERO = "zero"
INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class SpectrumTarget:
    """Prescribed nonzero limit eigenvalues plus the implied stable dimension."""

    d: int
    nonzero: tuple
    stable_dim_l: int
    feasibility: str


@dataclass(frozen=True)
class SynthesisResult:
    T: np.ndarray
    certificate_S: np.ndarray   # invertible, unit columns
    realized_A: AsymptoticLimit
    certificate_note: str


@dataclass(frozen=True)
class GeneratorProfile:
    condition_bound: float = 50.0
    interior_radius: float = 0.8
    gap_floor: float = 1e-7


DEFAULT_PROFILE = GeneratorProfile()


@dataclass(frozen=True)
class GeneratedInstance:
    """A seeded power-bounded matrix with its ground truth retained."""

    T: np.ndarray
    similarity: np.ndarray
    unimodular: np.ndarray
    interior: np.ndarray
    expected_limit: np.ndarray
    d: int
    m: int
    stable_dim_l: int
    condition: float
    min_gap: float
    seed: int
    profile: GeneratorProfile = field(default=DEFAULT_PROFILE)


def dft_unitary(d: int) -> np.ndarray:
    """Unitary DFT matrix: entries eps^{jk} / sqrt(d) with eps = exp(2 pi i / d)."""
    if d < 1:
        raise ValueError("d must be >= 1")
    j = np.arange(d)
    return np.exp(2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)


def classify_target(d: int, nonzero, tol: Tolerances = DEFAULT) -> SpectrumTarget:
    """Feasibility class of a prescribed positive spectrum in dimension d."""
    vals = tuple(sorted((float(t) for t in nonzero), reverse=True))
    k = len(vals)
    if k > d or any(t <= 0 for t in vals):
        return SpectrumTarget(d, vals, d - k, INFEASIBLE)
    l = d - k
    if k == 0:
        return SpectrumTarget(d, vals, l, FEASIBLE_ZERO)
    s = sum(1.0 / t for t in vals)
    slack = tol.trace_for(d)
    if l == 0:
        fea = FEASIBLE_C11 if abs(s - d) <= slack else INFEASIBLE
    else:
        fea = FEASIBLE_L_STABLE if s <= k + slack else INFEASIBLE
    return SpectrumTarget(d, vals, l, fea)


def _fix_phases(V: np.ndarray) -> np.ndarray:
    """Rotate each column so its first significant component is real positive."""
    out = V.copy()
    for j in range(V.shape[1]):
        col = V[:, j]
        idx = np.argmax(np.abs(col) >= np.abs(col).max() * 1e-6)
        pivot = col[idx]
        if abs(pivot) > 0:
            out[:, j] = col * (np.conj(pivot) / abs(pivot))
    return out


def _eigh_descending(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, V = np.linalg.eigh(hermitize(A))
    return w[::-1], _fix_phases(V[:, ::-1])


def synthesize_c11(
    A_target: np.ndarray,
    seed: int = 0,
    tol: Tolerances = DEFAULT,
) -> SynthesisResult:
    """Realize a positive definite target as the limit of a rank-d matrix.

    Requires sum(1/t_i) = d within tolerance.  The returned T is similar to
    a diagonal of d distinct unimodular eigenvalues (equally spaced, with a
    seed-dependent global phase) via a unit-column similarity.
    """
    A_target = as_matrix(A_target)
    d = require_square(A_target)
    if hermitian_defect(A_target) > tol.herm:
        raise NotPositiveDefinite("target must be Hermitian")
    t, V = _eigh_descending(A_target)
    if t[-1] <= tol.psd:
        raise NotPositiveDefinite(f"target must be positive definite; min eigenvalue {t[-1]:.3e}")
    s = float(np.sum(1.0 / t))
    if abs(s - d) > tol.trace_for(d):
        raise Infeasible(
            f"sum of reciprocal eigenvalues is {s:.9g}, must equal d = {d} "
            f"(within {tol.trace_for(d):.1e}) for a rank-d limit"
        )
    rng = np.random.default_rng(seed)
    phi0 = rng.uniform(0.0, 2.0 * np.pi)
    lam = np.exp(1j * (2.0 * np.pi * np.arange(d) / d + phi0))
    S0 = normalize_columns(np.diag(1.0 / np.sqrt(t)) @ dft_unitary(d))
    T0 = S0 @ np.diag(lam) @ inverse(S0, tol)
    T = V @ T0 @ adjoint(V)
    realized = cesaro_limit(T, tol)
    return SynthesisResult(
        T=T,
        certificate_S=V @ S0,
        realized_A=realized,
        certificate_note="limit equals S^{-*} S^{-1} for the unit-column certificate S",
    )


def block_rotation(R: np.ndarray) -> np.ndarray:
    """Unitary X = [[I, R], [-R*, I]] . diag((I+RR*)^{-1/2}, (I+R*R)^{-1/2}).

    X maps the graph-style limit produced by the kernel graft to an exact
    block diagonal; X^{-1} = X*.
    """
    l, k = R.shape
    Il, Ik = np.eye(l), np.eye(k)
    wl, Vl = np.linalg.eigh(Il + R @ adjoint(R))
    wk, Vk = np.linalg.eigh(Ik + adjoint(R) @ R)
    left = (Vl / np.sqrt(wl)) @ adjoint(Vl)
    right = (Vk / np.sqrt(wk)) @ adjoint(Vk)
    top = np.hstack([left, R @ right])
    bot = np.hstack([-adjoint(R) @ left, right])
    return np.vstack([top, bot])


def synthesize_l_stable(
    A_target: np.ndarray,
    seed: int = 0,
    tol: Tolerances = DEFAULT,
) -> SynthesisResult:
    """Realize a PSD target with nontrivial kernel as a Cesaro limit.

    Requires sum(1/t_i) <= k over the k nonzero eigenvalues.  The
    construction scales the largest eigenvalue by c in (0, 1] to make the
    reciprocal sum exact, realizes that rank-k limit, attaches the kernel
    through a rank-one coupling R with R*R = (I+Q)^2 - I, and rotates back
    with the unitary ``block_rotation(R)``.
    """
    A_target = as_matrix(A_target)
    d = require_square(A_target)
    if hermitian_defect(A_target) > tol.herm:
        raise NotPSD("target must be Hermitian")
    w_asc, W_all = np.linalg.eigh(hermitize(A_target))
    if w_asc[0] < -tol.psd:
        raise NotPSD(f"target eigenvalue {w_asc[0]:.3e} below -{tol.psd:.1e}")
    cutoff = tol.rank_for(max(abs(w_asc[0]), abs(w_asc[-1])))
    k = int(np.sum(w_asc > cutoff))
    l = d - k

    if k == 0:
        # zero target: any matrix with spectral radius < 1 works, T = 0 is canonical
        T = np.zeros((d, d), dtype=complex)
        return SynthesisResult(
            T=T,
            certificate_S=np.eye(d, dtype=complex),
            realized_A=cesaro_limit(T, tol),
            certificate_note="zero branch: spectral radius < 1, limit is 0",
        )
    if l == 0:
        raise RankMismatch("target is positive definite; use synthesize_c11")

    # basis ordered kernel first, then nonzero eigenvalues descending
    W = _fix_phases(np.hstack([W_all[:, :l], W_all[:, l:][:, ::-1]]))
    t = w_asc[l:][::-1].copy()
    s = float(np.sum(1.0 / t))
    slack = tol.trace_for(d)
    if s > k + slack:
        raise Infeasible(
            f"sum of reciprocal nonzero eigenvalues is {s:.9g}, must be <= k = {k} "
            f"(within {slack:.1e}) for a rank-{k} limit in dimension {d}"
        )
    if s <= k:
        c = 1.0 / (1.0 + t[0] * (k - s))     # makes 1/(c t1) + sum_{i>=2} 1/t_i = k
        t_inner = t.copy()
        t_inner[0] = c * t[0]
    else:
        # feasible only within slack: rescale uniformly to an exact spectrum
        c = 1.0
        t_inner = t * (s / k)

    E = synthesize_c11(np.diag(t_inner), seed=seed, tol=tol).T
    R = np.zeros((l, k), dtype=complex)
    R[0, 0] = np.sqrt(1.0 / c - 1.0)

    T_raw = np.zeros((d, d), dtype=complex)
    T_raw[l:, :l] = E @ adjoint(R)
    T_raw[l:, l:] = E

    V = W @ adjoint(block_rotation(R))
    T = V @ T_raw @ adjoint(V)
    report = classify(T, tol)
    realized = cesaro_limit(T, tol, report=report)
    return SynthesisResult(
        T=T,
        certificate_S=report.similarity_S,
        realized_A=realized,
        certificate_note=(
            "limit equals S^{-*} (I_k (+) 0_l) S^{-1}; the identity block has "
            f"rank k = {k} = rank of the limit (kernel block second)"
        ),
    )


def synthesize(
    A_target: np.ndarray,
    seed: int = 0,
    tol: Tolerances = DEFAULT,
) -> SynthesisResult:
    """Dispatch on the target's rank: positive definite -> rank-d branch,
    rank-deficient (or zero) -> kernel branch."""
    A_target = as_matrix(A_target)
    require_square(A_target)
    if hermitian_defect(A_target) > tol.herm:
        raise NotPSD("target must be Hermitian")
    w = np.linalg.eigvalsh(hermitize(A_target))
    cutoff = tol.rank_for(max(abs(w[0]), abs(w[-1])))
    if np.all(w > cutoff):
        return synthesize_c11(A_target, seed=seed, tol=tol)
    return synthesize_l_stable(A_target, seed=seed, tol=tol)


def synthesize_norm_limit(A_target: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Idempotent P with P*P equal to the target, so T*^n T^n is constant.

    Each eigenvalue a > 1 is paired with a zero eigenvalue through the 2x2
    idempotent [[1, b], [0, 0]], b = sqrt(a-1), rotated inside its plane so
    that P*P reproduces the target exactly; unit eigenvalues become rank-one
    orthogonal projections and leftover zeros stay zero.
    """
    A_target = as_matrix(A_target)
    d = require_square(A_target)
    if not spectral_set_membership(A_target, tol):
        raise NotInSpectralSet(
            "target spectrum must lie in {0} u [1, inf) with kernel at least "
            "as large as the number of eigenvalues above 1"
        )
    w, V = _eigh_descending(A_target)
    big = [i for i in range(d) if w[i] > 1.0 + tol.psd]
    ones = [i for i in range(d) if abs(w[i] - 1.0) <= tol.psd]
    zeros = [i for i in range(d) if w[i] <= tol.psd]

    P_basis = np.zeros((d, d), dtype=complex)
    for c in ones:
        P_basis[c, c] = 1.0
    for i, bi in enumerate(big):        # descending eigenvalues paired with zeros in order
        zi = zeros[i]
        a = w[bi]
        b = np.sqrt(a - 1.0)
        omega = np.array([[1.0, -b], [b, 1.0]]) / np.sqrt(a)
        block = omega.T @ np.array([[1.0, b], [0.0, 0.0]]) @ omega
        P_basis[np.ix_([bi, zi], [bi, zi])] = block
    return V @ P_basis @ adjoint(V)


# ---------------------------------------------------------------------------
# seeded generators


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    G = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Q, R = np.linalg.qr(G)
    diag = np.diagonal(R)
    return Q * (diag / np.abs(diag)).conj()[None, :]


def generate_instance(
    d: int,
    l: int,
    seed: int,
    profile: GeneratorProfile = DEFAULT_PROFILE,
    max_tries: int = 20,
) -> GeneratedInstance:
    """Random power-bounded T = S (U (+) B) S^{-1} with ground truth attached.

    Deterministic in (d, l, seed, profile): the unimodular eigenvalues are
    jittered equispaced points (pairwise well separated), B is a Ginibre
    block rescaled under the interior radius, and S is drawn with bounded
    condition number and unit columns.
    """
    if not (0 <= l <= d):
        raise ValueError(f"need 0 <= l <= d, got l={l}, d={d}")
    rng = np.random.default_rng(seed)
    m = d - l

    if m:
        base = 2.0 * np.pi * np.arange(m) / m
        jitter = (2.0 * np.pi / m) * 0.35 * rng.uniform(-1.0, 1.0, size=m)
        theta = base + jitter + rng.uniform(0.0, 2.0 * np.pi)
        lam = np.exp(1j * theta)
        gaps = [
            abs(1.0 - np.conj(lam[i]) * lam[j])
            for i in range(m)
            for j in range(i + 1, m)
        ]
        min_gap = min(gaps) if gaps else np.inf
        if gaps and min_gap < profile.gap_floor:
            raise ValueError("eigenvalue gap fell below the profile floor")
    else:
        lam = np.zeros(0, dtype=complex)
        min_gap = np.inf

    if l:
        G = rng.normal(size=(l, l)) + 1j * rng.normal(size=(l, l))
        radius = float(np.max(np.abs(np.linalg.eigvals(G))))
        target = profile.interior_radius * rng.uniform(0.25, 1.0)
        B = G * (target / radius) if radius > 0 else np.zeros((l, l), dtype=complex)
    else:
        B = np.zeros((0, 0), dtype=complex)

    S = None
    condition = np.inf
    for _ in range(max_tries):
        c_target = float(np.exp(rng.uniform(0.0, np.log(max(profile.condition_bound / 10.0, 1.5)))))
        sigma = c_target ** (-np.linspace(0.0, 1.0, d))
        cand = haar_unitary(d, rng) @ np.diag(sigma) @ adjoint(haar_unitary(d, rng))
        cand = normalize_columns(cand)
        sv = np.linalg.svd(cand, compute_uv=False)
        if sv[0] / sv[-1] <= profile.condition_bound:
            S = cand
            condition = float(sv[0] / sv[-1])
            break
    if S is None:
        raise ValueError("could not draw a similarity within the condition bound")

    J = np.zeros((d, d), dtype=complex)
    J[:m, :m] = np.diag(lam)
    J[m:, m:] = B
    Sinv = np.linalg.inv(S)
    T = S @ J @ Sinv

    proj = np.zeros((d, d), dtype=complex)
    proj[:m, :m] = np.eye(m)
    expected = hermitize(Sinv.conj().T @ proj @ Sinv)

    return GeneratedInstance(
        T=T,
        similarity=S,
        unimodular=lam,
        interior=B,
        expected_limit=expected,
        d=d,
        m=m,
        stable_dim_l=l,
        condition=condition,
        min_gap=float(min_gap),
        seed=seed,
        profile=profile,
    )


def random_powerbounded(
    d: int,
    l: int,
    seed: int,
    profile: GeneratorProfile = DEFAULT_PROFILE,
) -> np.ndarray:
    """Seeded power-bounded matrix with stable dimension l (see generate_instance)."""
    return generate_instance(d, l, seed, profile).T


def random_contraction(d: int, seed: int, unitary_dim: int | None = None) -> np.ndarray:
    """Random contraction W (U_k (+) C) W* with ||C|| < 1 and W, U_k unitary."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(0, d + 1)) if unitary_dim is None else unitary_dim
    M = np.zeros((d, d), dtype=complex)
    if k:
        M[:k, :k] = haar_unitary(k, rng)
    if d - k:
        C = rng.normal(size=(d - k, d - k)) + 1j * rng.normal(size=(d - k, d - k))
        C *= rng.uniform(0.2, 0.9) / max(operator_norm(C), 1e-12)
        M[k:, k:] = C
    W = haar_unitary(d, rng)
    return W @ M @ adjoint(W)


def random_idempotent(d: int, seed: int) -> np.ndarray:
    """Random idempotent W [[I_r, M], [0, 0]] W* with W unitary."""
    rng = np.random.default_rng(seed)
    r = int(rng.integers(0, d + 1))
    K = np.zeros((d, d), dtype=complex)
    K[:r, :r] = np.eye(r)
    if r and d - r:
        M = rng.normal(size=(r, d - r)) + 1j * rng.normal(size=(r, d - r))
        K[:r, r:] = M * rng.uniform(0.0, 1.5) / max(operator_norm(M), 1e-12)
    W = haar_unitary(d, rng)
    return W @ K @ adjoint(W)
