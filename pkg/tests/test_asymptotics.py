import numpy as np
import pytest
from numpy.testing import assert_allclose

from cesaro_limits.asymptotics import (
    TRACE_C11_EXACT,
    TRACE_L_STABLE_FEASIBLE,
    TRACE_VIOLATION,
    AsymptoticLimit,
    adjoint_limit,
    cesaro_iterate,
    cesaro_limit,
    cesaro_means,
    check_invariance,
    harmonic_mean_check,
    harmonic_mean_counterexample,
    iterated_limit,
    norm_lower_bound_check,
    oracle_envelope,
    shifted_cesaro_mean,
    trace_condition,
)
from cesaro_limits.classify import classify
from cesaro_limits.errors import NotC11, NotConverging, NotPowerBounded, WrongDimension
from cesaro_limits.linalg import adjoint, operator_norm
from cesaro_limits.synthesis import generate_instance, haar_unitary, random_contraction

DEG60_S = np.array([[1.0, 0.5], [0.0, np.sqrt(3) / 2]], dtype=complex)
DEG60_T = DEG60_S @ np.diag([1.0, -1.0]).astype(complex) @ np.linalg.inv(DEG60_S)
# hand-inverted (S S*)^{-1} for the 60-degree similarity
DEG60_LIMIT = np.array([[1.0, -np.sqrt(3) / 3], [-np.sqrt(3) / 3, 5.0 / 3.0]])
DEG60_ADJOINT_LIMIT_INV = np.array([[0.75, -np.sqrt(3) / 4], [-np.sqrt(3) / 4, 1.25]])


class TestCesaroIterate:
    def test_unitary(self):
        U = haar_unitary(3, np.random.default_rng(0))
        for n in (1, 7, 100):
            assert_allclose(cesaro_iterate(U, n), np.eye(3), atol=1e-12)

    def test_zero(self):
        assert_allclose(cesaro_iterate(np.zeros((2, 2)), 5), np.zeros((2, 2)))

    def test_jordan_closed_form(self):
        # powers of [[1,1],[0,1]] are [[1,j],[0,1]]; summing the integer
        # entries gives (1/n) sum [[1, j], [j, 1 + j^2]] exactly in floats
        n = 64
        mean = cesaro_iterate(np.array([[1.0, 1.0], [0.0, 1.0]]), n)
        sj = n * (n + 1) / 2
        sj2 = n * (n + 1) * (2 * n + 1) / 6
        expected = np.array([[1.0, sj / n], [sj / n, 1.0 + sj2 / n]])
        assert np.array_equal(mean.real, expected)
        assert np.all(mean.imag == 0)

    def test_checkpoints_share_a_pass(self):
        T = DEG60_T
        means = cesaro_means(T, [10, 100, 1000])
        for n in (10, 100, 1000):
            assert_allclose(means[n], cesaro_iterate(T, n), atol=1e-13)

    def test_guard_spectral_radius(self):
        with pytest.raises(NotConverging):
            cesaro_iterate(np.diag([1.2, 0.5]), 10_000)

    def test_bad_n(self):
        with pytest.raises(ValueError):
            cesaro_iterate(np.eye(2), 0)


class TestShiftedMean:
    def test_matches_direct_sum(self):
        T = DEG60_T
        n = 37
        acc = np.zeros((2, 2), dtype=complex)
        P = T.copy()
        for _ in range(n + 1):
            P_prev = P
            acc += adjoint(P) @ P
            P = P @ T
        acc -= adjoint(T) @ T  # drop the j = 1 term
        assert_allclose(shifted_cesaro_mean(T, n), acc / n, atol=1e-12)


class TestCesaroLimit:
    def test_deg60(self):
        lim = cesaro_limit(DEG60_T)
        assert_allclose(lim.A, DEG60_LIMIT, atol=1e-12)
        assert lim.rank_k == 2 and lim.stable_dim_l == 0
        assert lim.method == "spectral"

    def test_deg60_oracle_cross_check(self):
        lim = cesaro_limit(DEG60_T)
        it = cesaro_iterate(DEG60_T, 100_001)
        assert operator_norm(it - lim.A) <= 1e-3

    def test_unitary(self):
        U = haar_unitary(4, np.random.default_rng(1))
        assert_allclose(cesaro_limit(U).A, np.eye(4), atol=1e-12)

    def test_strict_contraction_zero(self):
        lim = cesaro_limit(np.diag([0.5, 0.25, 0.0]))
        assert_allclose(lim.A, np.zeros((3, 3)))
        assert lim.stable_dim_l == 3 and lim.rank_k == 0

    def test_not_power_bounded(self):
        with pytest.raises(NotPowerBounded):
            cesaro_limit(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_iterated_limit_metadata(self):
        lim = iterated_limit(DEG60_T, 5000)
        assert lim.method == "iterated" and lim.n_used == 5000
        assert lim.rank_k == 2

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_generator_ground_truth(self, seed):
        d = 2 + seed
        inst = generate_instance(d, seed % (d + 1), seed=100 + seed)
        lim = cesaro_limit(inst.T)
        assert operator_norm(lim.A - inst.expected_limit) <= 1e-9 * d * inst.condition**2
        assert lim.stable_dim_l == inst.stable_dim_l

    @pytest.mark.parametrize("seed", range(4))
    def test_unitary_covariance(self, seed):
        d = 3 + seed
        inst = generate_instance(d, seed % d, seed=200 + seed)
        U = haar_unitary(d, np.random.default_rng(seed))
        lhs = cesaro_limit(U @ inst.T @ adjoint(U)).A
        rhs = U @ cesaro_limit(inst.T).A @ adjoint(U)
        assert operator_norm(lhs - rhs) <= 1e-8 * inst.condition**2


class TestOracleAgreement:
    @pytest.mark.parametrize("seed", range(5))
    def test_envelope_at_two_scales(self, seed):
        d = 2 + seed
        inst = generate_instance(d, (seed + 1) % (d + 1), seed=300 + seed)
        report = classify(inst.T)
        A = cesaro_limit(inst.T, report=report).A
        env = oracle_envelope(report)
        means = cesaro_means(inst.T, [1000, 10000])
        for n in (1000, 10000):
            assert operator_norm(means[n] - A) <= env / n + 1e-9 * d


class TestInvariance:
    def test_unitary(self):
        U = haar_unitary(3, np.random.default_rng(7))
        assert check_invariance(U, cesaro_limit(U)) <= 1e-12

    def test_deg60(self):
        assert check_invariance(DEG60_T, cesaro_limit(DEG60_T)) <= 1e-9

    def test_zero(self):
        Z = np.zeros((2, 2))
        assert check_invariance(Z, cesaro_limit(Z)) == 0.0

    @pytest.mark.parametrize("seed", range(6))
    def test_random_instances(self, seed):
        d = 2 + seed
        inst = generate_instance(d, seed % (d + 1), seed=400 + seed)
        lim = cesaro_limit(inst.T)
        assert check_invariance(inst.T, lim) <= 1e-9 * d * inst.condition**2


class TestNormLowerBound:
    def test_zero_limit(self):
        assert norm_lower_bound_check(cesaro_limit(np.zeros((2, 2))))

    def test_contract_illustration(self):
        fake = AsymptoticLimit(
            A=np.diag([0.5, 0.0]).astype(complex),
            rank_k=1,
            stable_dim_l=1,
            nonzero_eigs=np.array([0.5]),
            method="spectral",
        )
        assert not norm_lower_bound_check(fake)

    @pytest.mark.parametrize("seed", range(10))
    def test_generator_instances(self, seed):
        d = 1 + seed % 8
        inst = generate_instance(d, seed % (d + 1), seed=500 + seed)
        assert norm_lower_bound_check(cesaro_limit(inst.T))


class TestTraceCondition:
    def test_deg60_exact(self):
        lim = cesaro_limit(DEG60_T)
        assert trace_condition(lim) == TRACE_C11_EXACT
        # reciprocals of the limit eigenvalues sum to tr(S S*) = d
        assert np.sum(1.0 / lim.nonzero_eigs) == pytest.approx(2.0, abs=1e-10)

    def test_identity(self):
        assert trace_condition(cesaro_limit(np.eye(3))) == TRACE_C11_EXACT

    def test_rank_one_feasible(self):
        fake = AsymptoticLimit(
            A=np.array([[1.0, 1.0], [1.0, 1.0]]).astype(complex),
            rank_k=1,
            stable_dim_l=1,
            nonzero_eigs=np.array([2.0]),
            method="spectral",
        )
        assert trace_condition(fake) == TRACE_L_STABLE_FEASIBLE

    def test_zero_limit_feasible(self):
        assert trace_condition(cesaro_limit(np.zeros((2, 2)))) == TRACE_L_STABLE_FEASIBLE

    def test_violation_is_reachable_for_fakes(self):
        fake = AsymptoticLimit(
            A=np.diag([0.5, 0.5]).astype(complex),
            rank_k=2,
            stable_dim_l=0,
            nonzero_eigs=np.array([0.5, 0.5]),
            method="spectral",
        )
        assert trace_condition(fake) == TRACE_VIOLATION

    @pytest.mark.parametrize("seed", range(10))
    def test_never_violated_on_genuine_limits(self, seed):
        d = 1 + seed % 8
        inst = generate_instance(d, seed % (d + 1), seed=600 + seed)
        assert trace_condition(cesaro_limit(inst.T)) != TRACE_VIOLATION


class TestHarmonicMean:
    def test_unitary(self):
        U = haar_unitary(2, np.random.default_rng(3))
        assert harmonic_mean_check(U) <= 1e-12

    def test_deg60_components(self):
        # A_T^{-1} = S S* and A_{T*}^{-1} = 2I - S S*, so the sum is exactly 2I
        A_inv = np.linalg.inv(cesaro_limit(DEG60_T).A)
        assert_allclose(A_inv, DEG60_S @ adjoint(DEG60_S), atol=1e-12)
        Aadj_inv = np.linalg.inv(adjoint_limit(DEG60_T).A)
        assert_allclose(Aadj_inv, DEG60_ADJOINT_LIMIT_INV, atol=1e-12)
        assert harmonic_mean_check(DEG60_T) <= 1e-9

    @pytest.mark.parametrize("seed", range(25))
    def test_random_c11(self, seed):
        inst = generate_instance(2, 0, seed=700 + seed)
        assert harmonic_mean_check(inst.T) <= 1e-8

    def test_wrong_dimension(self):
        with pytest.raises(WrongDimension):
            harmonic_mean_check(np.eye(3))

    def test_not_c11(self):
        with pytest.raises(NotC11):
            harmonic_mean_check(np.diag([0.5, 1.0]))


class TestCounterexample:
    def test_eigenvalues(self):
        eigs = harmonic_mean_counterexample()
        assert_allclose(eigs, [1.27178, 2.1285, 2.59972], atol=1e-4)

    def test_trace_identity_and_gap(self):
        eigs = harmonic_mean_counterexample()
        assert eigs.sum() == pytest.approx(6.0, abs=1e-9)  # trace of the 3x3 sum
        assert max(abs(e - 2.0) for e in eigs) >= 0.2


class TestAdjointLimit:
    def test_unitary(self):
        U = haar_unitary(3, np.random.default_rng(11))
        assert_allclose(adjoint_limit(U).A, np.eye(3), atol=1e-12)

    def test_self_adjoint_case(self):
        lim = adjoint_limit(np.diag([0.5, 1.0]))
        assert_allclose(lim.A, np.diag([0.0, 1.0]), atol=1e-12)

    def test_deg60(self):
        expected = np.linalg.inv(DEG60_ADJOINT_LIMIT_INV)
        assert_allclose(adjoint_limit(DEG60_T).A, expected, atol=1e-10)


class TestContractionSpecialization:
    @pytest.mark.parametrize("seed", range(8))
    def test_idempotent_limit(self, seed):
        T = random_contraction(2 + seed % 5, seed=800 + seed)
        A = cesaro_limit(T).A
        assert operator_norm(A @ A - A) <= 1e-9
        # decreasing products converge to the same limit
        assert operator_norm(cesaro_iterate(T, 2000) - A) <= 1e-2


class TestKernelIsStableSubspace:
    @pytest.mark.parametrize("seed", range(6))
    def test_kernel_vectors_decay(self, seed):
        d = 3 + seed % 5
        l = 1 + seed % (d - 1)
        inst = generate_instance(d, l, seed=900 + seed)
        lim = cesaro_limit(inst.T)
        w, V = np.linalg.eigh(lim.A)
        P256 = np.linalg.matrix_power(inst.T, 256)
        smin = np.linalg.svd(inst.similarity, compute_uv=False)[-1]
        Sinv = np.linalg.inv(inst.similarity)
        for i in range(d):
            v = V[:, i]
            if w[i] <= 1e-7 * w[-1]:
                assert np.linalg.norm(P256 @ v) <= 1e-6
            else:
                # unimodular coordinates of v never decay below sigma_min * ||c_U||
                c_u = (Sinv @ v)[: inst.m]
                floor = 0.9 * smin * np.linalg.norm(c_u)
                norms = []
                P = np.eye(d, dtype=complex)
                for _ in range(256):
                    P = P @ inst.T
                    norms.append(np.linalg.norm(P @ v))
                assert min(norms) >= floor > 0
