"""Power-boundedness classification and the unimodular/interior spectral split.

A square complex matrix is power-bounded exactly when its spectrum lies in
the closed unit disk and every eigenvalue on the unit circle is semisimple.
``classify`` decides this and, on success, produces a similarity

    S^{-1} T S = diag(lambda_1..lambda_m) (+) B,   r(B) < 1,

where the first m columns of S are unit eigenvectors for the unimodular
eigenvalues (orthonormal inside each eigenvalue cluster) and the remaining
columns are an orthonormal basis of the complementary invariant subspace,
taken from an ordered Schur form.  Eigenvalues inside the dead zone
``| |lambda| - 1 | <= tol.unimod`` are treated as unimodular; that is a
numerical policy, not a theorem, and such inputs are flagged in the report.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .config import DEFAULT, Tolerances
from .errors import EigenFailure, NotPowerBounded, NotPSD
from .linalg import as_matrix, hermitian_defect, hermitize, operator_norm, require_square

__all__ = [
    "POWER_BOUNDED",
    "NOT_POWER_BOUNDED",
    "REASON_OK",
    "REASON_RADIUS",
    "REASON_DEFECTIVE",
    "PowerboundReport",
    "ClassLabel",
    "classify",
    "class_label",
    "norm_limit_exists",
    "spectral_set_membership",
]

POWER_BOUNDED = "power_bounded"
NOT_POWER_BOUNDED = "not_power_bounded"
REASON_OK = "ok"
REASON_RADIUS = "spectral_radius_exceeds_one"
REASON_DEFECTIVE = "defective_unimodular_eigenvalue"

# eigenvalues closer to the circle than this are "numerically on" it;
# anything between here and tol.unimod raises the dead-zone flag
_ANNULUS_FLOOR = 1e-12

_POWER_PROBE_DOUBLINGS = 14   # probes n = 1, 2, 4, ..., 2**14
_POWER_PROBE_CAP = 1e12


@dataclass(frozen=True)
class PowerboundReport:
    verdict: str
    reason: str
    d: int
    m: int                         # unimodular eigenvalue count, with multiplicity
    stable_dim_l: int              # d - m
    unimodular_values: np.ndarray  # length m, grouped by cluster
    cluster_ids: np.ndarray        # length m, int labels aligned with the above
    similarity_S: np.ndarray | None
    interior_block_B: np.ndarray | None
    power_bound_estimate: float
    annulus_warning: bool

    @property
    def power_bounded(self) -> bool:
        return self.verdict == POWER_BOUNDED


@dataclass(frozen=True)
class ClassLabel:
    kind: str        # "c11" | "l_stable" | "c0dot"
    stable_dim: int


def _cluster_single_linkage(values: np.ndarray, radius: float) -> np.ndarray:
    """Int labels; values within ``radius`` of each other share a label (transitively)."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= radius:
                pi, pj = find(i), find(j)
                if pi != pj:
                    parent[pj] = pi
    roots = [find(i) for i in range(n)]
    labels = {}
    out = np.empty(n, dtype=int)
    for i, r in enumerate(roots):
        out[i] = labels.setdefault(r, len(labels))
    return out


def _power_bound_estimate(T: np.ndarray) -> float:
    """sup of ||T^n|| over n = 1, 2, 4, ..., 2^14, by repeated squaring.

    Stops early once the estimate is hopeless (clearly unbounded).
    """
    est = operator_norm(T)
    P = T
    for _ in range(_POWER_PROBE_DOUBLINGS):
        P = P @ P
        nrm = operator_norm(P)
        est = max(est, nrm)
        if nrm > _POWER_PROBE_CAP:
            break
    return est


def classify(T: np.ndarray, tol: Tolerances = DEFAULT) -> PowerboundReport:
    """Decide power-boundedness and build the unimodular/interior split."""
    T = as_matrix(T)
    d = require_square(T)

    def interior(z) -> bool:
        return bool(abs(z) < 1.0 - tol.unimod)

    try:
        schur_t, schur_z, sdim = scipy.linalg.schur(T, output="complex", sort=interior)
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
        raise EigenFailure(f"Schur decomposition failed: {exc}") from exc

    values = np.diagonal(schur_t).copy()
    radii = np.abs(values)
    estimate = _power_bound_estimate(T)

    unim_vals = values[sdim:]
    annulus_warning = bool(np.any(np.abs(np.abs(unim_vals) - 1.0) > _ANNULUS_FLOOR))

    def reject(reason: str) -> PowerboundReport:
        order = np.argsort(np.angle(unim_vals), kind="stable")
        return PowerboundReport(
            verdict=NOT_POWER_BOUNDED,
            reason=reason,
            d=d,
            m=len(unim_vals),
            stable_dim_l=d - len(unim_vals),
            unimodular_values=unim_vals[order],
            cluster_ids=np.zeros(0, dtype=int),
            similarity_S=None,
            interior_block_B=None,
            power_bound_estimate=estimate,
            annulus_warning=annulus_warning,
        )

    if np.any(radii > 1.0 + tol.unimod):
        return reject(REASON_RADIUS)

    m = d - sdim

    # order unimodular eigenvalues by cluster, clusters by mean angle
    ids = _cluster_single_linkage(unim_vals, tol.eig)
    n_clusters = ids.max() + 1 if m else 0
    cluster_order = sorted(
        range(n_clusters),
        key=lambda c: float(np.mean(np.angle(unim_vals[ids == c]))),
    )
    ordered_vals, ordered_ids, columns = [], [], []
    norm_t = operator_norm(T)
    for new_id, c in enumerate(cluster_order):
        members = unim_vals[ids == c]
        members = members[np.argsort(np.angle(members), kind="stable")]
        center = members.mean()
        shifted = T - center * np.eye(d)
        sv = np.linalg.svd(shifted, compute_uv=True)
        cutoff = tol.sing_for(max(sv[1][0], norm_t, 1.0))
        geometric = int(np.sum(sv[1] <= cutoff))
        if geometric < len(members):
            return reject(REASON_DEFECTIVE)
        # smallest right-singular vectors: orthonormal basis of the eigenspace
        columns.append(sv[2][d - len(members):].conj().T)
        ordered_vals.append(members)
        ordered_ids.append(np.full(len(members), new_id, dtype=int))

    if m:
        unim_sorted = np.concatenate(ordered_vals)
        cluster_ids = np.concatenate(ordered_ids)
        eigvec_block = np.hstack(columns)
    else:
        unim_sorted = np.zeros(0, dtype=complex)
        cluster_ids = np.zeros(0, dtype=int)
        eigvec_block = np.zeros((d, 0), dtype=complex)

    S = np.hstack([eigvec_block, schur_z[:, :sdim]])
    B = schur_t[:sdim, :sdim]

    return PowerboundReport(
        verdict=POWER_BOUNDED,
        reason=REASON_OK,
        d=d,
        m=m,
        stable_dim_l=d - m,
        unimodular_values=unim_sorted,
        cluster_ids=cluster_ids,
        similarity_S=S,
        interior_block_B=B,
        power_bound_estimate=estimate,
        annulus_warning=annulus_warning,
    )


def class_label(report: PowerboundReport) -> ClassLabel:
    """C11 / l-stable / C0. trichotomy from the stable dimension."""
    if not report.power_bounded:
        raise NotPowerBounded("class labels are only defined for power-bounded matrices")
    l = report.stable_dim_l
    if l == 0:
        return ClassLabel(kind="c11", stable_dim=0)
    if l == report.d:
        return ClassLabel(kind="c0dot", stable_dim=l)
    return ClassLabel(kind="l_stable", stable_dim=l)


def norm_limit_exists(
    T: np.ndarray,
    tol: Tolerances = DEFAULT,
    report: PowerboundReport | None = None,
) -> bool:
    """True iff the power products T*^n T^n converge (not just in Cesaro mean).

    Equivalent to the unimodular eigenspaces being mutually orthogonal, which
    is what is tested: every cross inner product between unit eigenvectors of
    distinct clusters must vanish within tol.orth.
    """
    if report is None:
        report = classify(T, tol)
    if not report.power_bounded:
        raise NotPowerBounded("T*^n T^n cannot converge for a non-power-bounded matrix")
    m = report.m
    if m <= 1:
        return True
    V = report.similarity_S[:, :m]
    G = V.conj().T @ V
    cross = report.cluster_ids[:, None] != report.cluster_ids[None, :]
    return bool(np.all(np.abs(G[cross]) <= tol.orth))


def spectral_set_membership(A: np.ndarray, tol: Tolerances = DEFAULT) -> bool:
    """Test membership in the attainable set of norm-limits of T*^n T^n.

    Requires a Hermitian PSD input; membership means the spectrum lies in
    {0} union [1, inf) and the kernel is at least as large as the number of
    eigenvalues strictly above 1.
    """
    A = as_matrix(A)
    require_square(A)
    if hermitian_defect(A) > tol.herm:
        raise NotPSD(f"matrix is not Hermitian within {tol.herm:.1e}")
    w = np.linalg.eigvalsh(hermitize(A))
    if w[0] < -tol.psd:
        raise NotPSD(f"eigenvalue {w[0]:.3e} below -{tol.psd:.1e}")
    zeros = int(np.sum(w <= tol.psd))
    middle = int(np.sum((w > tol.psd) & (w < 1.0 - tol.psd)))
    above = int(np.sum(w > 1.0 + tol.psd))
    return middle == 0 and zeros >= above
