"""Numerical tolerance policy shared by every module.

All decision thresholds live here so that a single object can be threaded
through the library and echoed into CLI reports.  Entries marked as scaled
are relative; the ``*_for`` helpers apply the scaling.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Tolerances:
    recon: float = 1e-9         # reconstruction residuals, scaled by dimension
    sing: float = 1e-12         # singularity cutoff, scaled by matrix norm
    herm: float = 1e-10         # Hermitian symmetry check
    psd: float = 1e-10          # admissible negative eigenvalue excursion
    eig: float = 1e-8           # eigenvalue clustering distance (single linkage)
    unimod: float = 1e-8        # dead zone around the unit circle
    orth: float = 1e-8          # eigenspace cross-orthogonality
    rank: float = 1e-7          # rank cutoff for limits, scaled by their norm
    zero: float = 1e-7          # "limit is zero" threshold
    norm_slack: float = 1e-6    # slack in the norm >= 1 lower bound
    trace: float = 1e-6         # trace-condition slack, scaled by dimension
    synth: float = 1e-7         # synthesis round-trip budget, scaled by target norm
    ident: float = 1e-8         # 2x2 harmonic-mean identity budget
    seq: float = 0.02           # Cesaro-verdict spread for shift traces
    iterate_guard: float = 1e8  # power-norm abort threshold in cesaro_iterate

    def recon_for(self, d: int) -> float:
        return self.recon * max(int(d), 1)

    def sing_for(self, norm: float) -> float:
        return self.sing * float(norm)

    def rank_for(self, norm: float) -> float:
        return self.rank * float(norm)

    def trace_for(self, d: int) -> float:
        return self.trace * max(int(d), 1)

    def synth_for(self, norm: float) -> float:
        return self.synth * float(norm)

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT = Tolerances()
