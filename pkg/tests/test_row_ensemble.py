import math

import numpy as np
import pytest

from csmetrics.core import (
    DenseMatrix,
    DomainError,
    PreconditionError,
    make_rng,
    standard_normal_complex,
)
from csmetrics.fourier import PartialFourierSpec, dft_matrix, partial_fourier, random_matrix
from csmetrics.matrix_metrics import coherence, etf_check, normalize_columns, spectral, welch_bound
from csmetrics.row_ensemble import (
    coherence_bounds_check,
    frobenius_upper_bound,
    normalized_column_stats,
    row_mean_moments,
    row_multiset,
    sample_row_mean,
    spectral_lower_bound,
)
from csmetrics.subset_stats import brute_force_moments, closed_form_moments

from test_matrix_metrics import mercedes_benz, random_dense


class TestRowMultiset:
    def test_row_values_in_column_order(self):
        phi = row_multiset(DenseMatrix.from_rows([[1, -1]]), 0)
        assert phi.elements == (1 + 0j, -1 + 0j)
        assert phi.sum == 0

    def test_fourier_row_sums(self):
        f = dft_matrix(8)
        assert abs(row_multiset(f, 3).sum) <= 1e-12
        first = row_multiset(f, 0)
        assert first.sum == pytest.approx(math.sqrt(8), rel=1e-12)
        assert np.allclose(first.elements, 1 / math.sqrt(8))

    def test_index_out_of_range(self):
        with pytest.raises(DomainError):
            row_multiset(DenseMatrix.from_rows([[1, 2]]), 1)


class TestRowMeanMoments:
    def test_single_sign_row(self):
        # uniform pick of +-1: variance (1/4)(2*2 - 0) = 1
        stats = row_mean_moments(DenseMatrix.from_rows([[1, -1]]))
        assert stats.mean == 0
        assert stats.variance == pytest.approx(1.0, rel=1e-12)

    def test_square_matrix_variance_zero(self):
        stats = row_mean_moments(random_dense(1, 4, 4))
        assert stats.variance == pytest.approx(0.0, abs=1e-12)

    def test_wide_only(self):
        with pytest.raises(DomainError):
            row_mean_moments(random_dense(2, 3, 2))

    def test_one_by_one_degenerate(self):
        stats = row_mean_moments(DenseMatrix.from_rows([[2 + 1j]]))
        assert stats.mean == 2 + 1j
        assert stats.variance == 0.0

    def test_additivity_against_enumeration(self):
        # Var of the row mean = (1/m^2) * sum of per-row subset-sum variances,
        # each verified by exhaustive enumeration.
        for seed, (m, n) in zip(range(6), [(1, 5), (2, 4), (3, 6), (2, 7), (4, 5), (3, 8)]):
            a = random_dense(seed + 40, m, n)
            stats = row_mean_moments(a)
            per_row = math.fsum(
                brute_force_moments(row_multiset(a, i), m).variance for i in range(m)
            )
            assert stats.variance == pytest.approx(per_row / m ** 2, rel=1e-10)
            mean = sum(closed_form_moments(row_multiset(a, i), m).mean for i in range(m)) / m
            assert stats.mean.real == pytest.approx(mean.real, rel=1e-10, abs=1e-12)
            assert stats.mean.imag == pytest.approx(mean.imag, rel=1e-10, abs=1e-12)

    def test_std_dev_consistent(self):
        stats = row_mean_moments(random_dense(77, 3, 6))
        assert stats.std_dev ** 2 == pytest.approx(stats.variance, rel=1e-12)
        assert len(stats.row_sum_abs_sq) == 3


class TestSpectralLowerBound:
    def test_rank_one_equality(self):
        u = np.array([1.0, 2.0, -1.0])
        v = np.array([1.0, 1j, -2.0, 0.5j])
        a = DenseMatrix(np.outer(u, v))
        check = spectral_lower_bound(a, spectral(a))
        assert check.holds
        assert check.equality
        assert check.lhs == pytest.approx(check.rhs, rel=1e-9)

    def test_holds_on_random_matrices(self):
        for seed in range(100):
            a = random_dense(seed, 3, 6)
            check = spectral_lower_bound(a, spectral(a))
            assert check.holds
            assert check.label == "variance_spectral_lower"

    def test_zero_matrix(self):
        a = DenseMatrix(np.zeros((2, 4)))
        check = spectral_lower_bound(a, spectral(a))
        assert check.lhs == 0.0
        assert check.rhs == 0.0
        assert check.holds and check.equality


class TestFrobeniusUpperBound:
    def test_zero_row_sums_give_equality(self):
        a = DenseMatrix.from_rows([[1, -1, 1j, -1j], [2, -2, 0, 0]])
        check = frobenius_upper_bound(a)
        assert check.holds
        assert check.equality
        assert check.lhs == pytest.approx(check.rhs, rel=1e-12)

    def test_first_row_partial_fourier_not_equality(self):
        a = partial_fourier(PartialFourierSpec(n=8, row_indices=(0, 2, 5)))
        check = frobenius_upper_bound(a)
        assert check.holds
        assert not check.equality
        assert check.lhs < check.rhs

    def test_holds_on_random_matrices(self):
        for seed in range(100):
            check = frobenius_upper_bound(random_dense(seed + 300, 2, 5))
            assert check.holds
            assert check.label == "variance_frobenius_upper"


class TestNormalizedColumnStats:
    def test_partial_fourier_attains_welch_bound(self):
        spec = PartialFourierSpec(n=8, row_indices=(1, 2, 5))
        a = normalize_columns(partial_fourier(spec))
        stats = normalized_column_stats(a)
        assert stats.std_dev == pytest.approx(welch_bound(3, 8), rel=1e-10)

    def test_square_unitary_zero_std(self):
        assert normalized_column_stats(dft_matrix(4)).std_dev == pytest.approx(0.0, abs=1e-9)

    def test_mercedes_benz(self):
        # row sums vanish, so the variance is (N-m)/(m(N-1)) = 1/4 and the
        # standard deviation is the Welch bound 1/2
        stats = normalized_column_stats(mercedes_benz())
        assert stats.variance == pytest.approx(0.25, rel=1e-12)
        assert stats.std_dev == pytest.approx(0.5, rel=1e-12)

    def test_agrees_with_general_formula(self):
        for seed in range(20):
            a = random_matrix(3, 6, seed, normalized=True)
            general = row_mean_moments(a)
            special = normalized_column_stats(a)
            assert special.variance == pytest.approx(general.variance, rel=1e-9, abs=1e-12)
            assert special.mean == pytest.approx(general.mean, rel=1e-9, abs=1e-12)

    def test_unnormalized_rejected(self):
        with pytest.raises(PreconditionError):
            normalized_column_stats(random_dense(5, 2, 4))


class TestCoherenceBounds:
    def test_hold_on_random_normalized(self):
        for seed in range(100):
            a = random_matrix(3, 9, seed, normalized=True)
            for check in coherence_bounds_check(a, coherence(a)):
                assert check.holds

    def test_mercedes_benz_equality_agrees_with_etf(self):
        a = mercedes_benz()
        checks = coherence_bounds_check(a, coherence(a))
        rowsum_check = next(c for c in checks if c.label == "stddev_coherence_rowsum_upper")
        assert rowsum_check.equality == etf_check(a).is_etf == True  # noqa: E712

    def test_square_orthonormal_degenerate_equality(self):
        a = DenseMatrix(np.eye(3))
        for check in coherence_bounds_check(a, coherence(a)):
            assert check.holds and check.equality
            assert check.lhs == 0.0

    def test_perturbed_frame_loses_equality(self):
        a = normalize_columns(mercedes_benz(offset=math.radians(5)))
        checks = coherence_bounds_check(a, coherence(a))
        rowsum_check = next(c for c in checks if c.label == "stddev_coherence_rowsum_upper")
        assert rowsum_check.holds
        assert not rowsum_check.equality

    def test_unnormalized_rejected(self):
        a = random_dense(6, 2, 4)
        coh = coherence(random_matrix(2, 4, 0, normalized=True))
        with pytest.raises(PreconditionError):
            coherence_bounds_check(a, coh)


class TestSampleRowMean:
    def test_deterministic(self):
        a = random_dense(9, 3, 6)
        assert sample_row_mean(a, 31, 2000) == sample_row_mean(a, 31, 2000)

    def test_square_matrix_zero_variance_exact(self):
        a = random_dense(10, 4, 4)
        stats = sample_row_mean(a, 3, 100)
        assert stats.sample_variance == 0.0

    def test_matches_closed_form_variance(self):
        a = random_dense(11, 3, 6)
        stats = sample_row_mean(a, 2025, 100_000)
        want = row_mean_moments(a)
        assert stats.sample_variance == pytest.approx(want.variance, rel=0.05)
        se = math.sqrt(want.variance / stats.draws)
        assert abs(stats.sample_mean - want.mean) <= 4 * se

    def test_zero_draws_rejected(self):
        with pytest.raises(DomainError):
            sample_row_mean(random_dense(1, 2, 3), 1, 0)
