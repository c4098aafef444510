"""Per-row subset-sum variables and the moments of their arithmetic mean.

For an m x N matrix, each row induces a size-m subset-sum variable over that
row's entries; the row-mean variable averages the m of them, drawn
independently per row.  This module computes its exact moments and every
variance bound tying them to the spectral norm, the Frobenius norm, and the
coherence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_POLICY,
    DenseMatrix,
    DomainError,
    Multiset,
    Seed,
    TolerancePolicy,
    make_rng,
    multiset_from_values,
)
from .matrix_metrics import (
    CoherenceReport,
    SpectralEstimate,
    _require_normalized,
    frobenius_norm,
)
from .subset_stats import SampleStats, _draw_subset_sums, _stats_from_draws

__all__ = [
    "ROW_SUM_ZERO_TOL",
    "RowMeanStats",
    "BoundCheck",
    "row_multiset",
    "row_mean_moments",
    "spectral_lower_bound",
    "frobenius_upper_bound",
    "normalized_column_stats",
    "coherence_bounds_check",
    "sample_row_mean",
]

ROW_SUM_ZERO_TOL = 1e-10
"""Row sums are treated as zero below this tolerance scaled by the Frobenius norm."""


@dataclass(frozen=True)
class RowMeanStats:
    """Moments of the row-mean variable plus the per-row sum magnitudes."""

    mean: complex
    variance: float
    std_dev: float
    row_sum_abs_sq: tuple[float, ...]


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of one inequality check; a violation is reported, not raised."""

    label: str
    lhs: float
    rhs: float
    holds: bool
    equality: bool


def row_multiset(a: DenseMatrix, i: int) -> Multiset:
    """The multiset of row i's entries, in column order (0-based index)."""
    return multiset_from_values(complex(z) for z in a.row(i))


def _row_sums(a: DenseMatrix) -> np.ndarray:
    return a.array.sum(axis=1)


def _check_analysis_shape(a: DenseMatrix) -> None:
    if a.m > a.n:
        raise DomainError(f"row-mean analysis requires m <= N, got {a.m}x{a.n}")


def row_mean_moments(a: DenseMatrix) -> RowMeanStats:
    """Exact mean and variance of the row-mean subset-sum variable.

    mean = (1/N) * sum of all entries; variance =
    (N-m)/(m N^2 (N-1)) * (N ||A||_F^2 - sum_i |row_sum_i|^2).  A 1-column
    matrix is the degenerate point mass with variance 0.
    """
    _check_analysis_shape(a)
    m, n = a.m, a.n
    sums = _row_sums(a)
    rsq = tuple(float(v) for v in (sums.real ** 2 + sums.imag ** 2))
    if n == 1:
        return RowMeanStats(mean=complex(sums[0]), variance=0.0, std_dev=0.0,
                            row_sum_abs_sq=rsq)
    mean = complex(sums.sum() / n)
    fro_sq = float(np.vdot(a.array, a.array).real)
    variance = (n - m) / (m * n * n * (n - 1)) * (n * fro_sq - math.fsum(rsq))
    variance = max(variance, 0.0)
    return RowMeanStats(mean=mean, variance=variance, std_dev=math.sqrt(variance),
                        row_sum_abs_sq=rsq)


def spectral_lower_bound(a: DenseMatrix, est: SpectralEstimate) -> BoundCheck:
    """Var of the row mean >= (N-m)/(m N^2 (N-1)) * (N sigma_max^2 - sum_i |row_sum_i|^2).

    The right side may go negative, making the check vacuous but still
    reported.
    """
    _check_analysis_shape(a)
    m, n = a.m, a.n
    if n < 2:
        raise DomainError("spectral lower bound requires N >= 2")
    stats = row_mean_moments(a)
    rhs = (n - m) / (m * n * n * (n - 1)) * (n * est.lambda_max - math.fsum(stats.row_sum_abs_sq))
    lhs = stats.variance
    return BoundCheck(
        label="variance_spectral_lower",
        lhs=lhs,
        rhs=rhs,
        holds=lhs >= rhs - DEFAULT_POLICY.abs_tol,
        equality=DEFAULT_POLICY.close(lhs, rhs),
    )


def frobenius_upper_bound(a: DenseMatrix) -> BoundCheck:
    """Var of the row mean <= (N-m)/(m N (N-1)) * ||A||_F^2.

    The equality flag fires exactly when every row sum vanishes (within
    ROW_SUM_ZERO_TOL scaled by the Frobenius norm).
    """
    _check_analysis_shape(a)
    m, n = a.m, a.n
    if n < 2:
        raise DomainError("Frobenius upper bound requires N >= 2")
    stats = row_mean_moments(a)
    fro = frobenius_norm(a)
    rhs = (n - m) / (m * n * (n - 1)) * fro * fro
    lhs = stats.variance
    threshold = ROW_SUM_ZERO_TOL * fro
    zero_row_sums = all(math.sqrt(v) <= threshold for v in stats.row_sum_abs_sq)
    return BoundCheck(
        label="variance_frobenius_upper",
        lhs=lhs,
        rhs=rhs,
        holds=lhs <= rhs + DEFAULT_POLICY.abs_tol,
        equality=zero_row_sums,
    )


def normalized_column_stats(a: DenseMatrix, policy: TolerancePolicy = DEFAULT_POLICY) -> RowMeanStats:
    """Row-mean moments specialized to l2-normalized columns.

    variance = (N-m)/(m(N-1)) * (1 - (1/N^2) sum_i |row_sum_i|^2); under the
    normalization ||A||_F^2 = N this equals ``row_mean_moments``.
    """
    _check_analysis_shape(a)
    m, n = a.m, a.n
    if n < 2:
        raise DomainError("normalized-column stats require N >= 2")
    _require_normalized(a, policy)
    sums = _row_sums(a)
    rsq = tuple(float(v) for v in (sums.real ** 2 + sums.imag ** 2))
    mean = complex(sums.sum() / n)
    variance = (n - m) / (m * (n - 1)) * (1.0 - math.fsum(rsq) / (n * n))
    variance = max(variance, 0.0)
    return RowMeanStats(mean=mean, variance=variance, std_dev=math.sqrt(variance),
                        row_sum_abs_sq=rsq)


def coherence_bounds_check(
    a: DenseMatrix,
    coh: CoherenceReport,
    policy: TolerancePolicy = DEFAULT_POLICY,
) -> list[BoundCheck]:
    """The two coherence bounds on the row-mean standard deviation.

    First: std_dev <= mu * sqrt(1 - (1/N^2) sum_i |row_sum_i|^2), with
    equality exactly at equiangular tight frames.  Second: std_dev <= mu, with
    equality at ETFs whose column sums also vanish.  Equality flags are
    numeric (within policy).
    """
    stats = normalized_column_stats(a, policy)
    n = a.n
    factor_sq = max(1.0 - math.fsum(stats.row_sum_abs_sq) / (n * n), 0.0)
    factor = math.sqrt(factor_sq)
    checks = []
    for label, rhs in (
        ("stddev_coherence_rowsum_upper", coh.mu * factor),
        ("stddev_coherence_upper", coh.mu),
    ):
        checks.append(BoundCheck(
            label=label,
            lhs=stats.std_dev,
            rhs=rhs,
            holds=stats.std_dev <= rhs + policy.abs_tol,
            equality=policy.close(stats.std_dev, rhs),
        ))
    return checks


def sample_row_mean(a: DenseMatrix, seed: Seed | int, k: int) -> SampleStats:
    """Seeded Monte Carlo draws of the row mean.

    Per draw, every row independently contributes one size-m subset sum
    (m = row count); the draw's value is their average.  Row streams are
    consumed row-major, so results are deterministic given the seed.
    """
    _check_analysis_shape(a)
    if k < 1:
        raise DomainError(f"draw count k={k} must be >= 1")
    m, n = a.m, a.n
    rng = make_rng(seed)
    acc = np.zeros(k, dtype=np.complex128)
    for i in range(m):
        acc += _draw_subset_sums(a.array[i], m, rng, k)
    return _stats_from_draws(acc / m)
