"""Cesaro asymptotic limits of power-bounded complex matrices.

Classify power-boundedness, compute the limit of the averaged products
(1/n) sum_j T*^j T^j two independent ways, synthesize matrices realizing
prescribed limits, and reproduce the weighted-shift phenomenology at finite
horizon.
"""

from .asymptotics import (
    AsymptoticLimit,
    GramFilter,
    adjoint_limit,
    cesaro_iterate,
    cesaro_limit,
    cesaro_means,
    check_invariance,
    gram_filter,
    harmonic_mean_check,
    harmonic_mean_counterexample,
    iterated_limit,
    norm_lower_bound_check,
    oracle_envelope,
    shifted_cesaro_mean,
    trace_condition,
)
from .classify import (
    ClassLabel,
    PowerboundReport,
    class_label,
    classify,
    norm_limit_exists,
    spectral_set_membership,
)
from .config import DEFAULT, Tolerances
from .errors import (
    CesaroError,
    DimensionMismatch,
    EigenFailure,
    HorizonTooSmall,
    Infeasible,
    MatrixFileError,
    NotC11,
    NotConverging,
    NotInSpectralSet,
    NotPSD,
    NotPositiveDefinite,
    NotPowerBounded,
    RankDeficient,
    RankMismatch,
    SingularMatrix,
    WrongDimension,
)
from .linalg import (
    EigenSystem,
    adjoint,
    eigen,
    inverse,
    mul,
    operator_norm,
    orthonormalize_within,
    psd_sqrt,
)
from .matrixio import load_matrix, matrix_to_obj, obj_to_matrix, save_matrix
from .shifts import (
    BanachBracket,
    CesaroVerdict,
    DiagonalTrace,
    PowerVerdict,
    ShiftRule,
    banach_bracket,
    cesaro_verdict,
    evaluate,
    powerbounded_verdict,
)
from .synthesis import (
    GeneratedInstance,
    GeneratorProfile,
    SpectrumTarget,
    SynthesisResult,
    classify_target,
    dft_unitary,
    generate_instance,
    random_contraction,
    random_idempotent,
    random_powerbounded,
    synthesize,
    synthesize_c11,
    synthesize_l_stable,
    synthesize_norm_limit,
)

__version__ = "0.1.0"
