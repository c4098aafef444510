"""Discrete Fourier matrices, partial-row selections, and seeded test matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DenseMatrix,
    DomainError,
    Multiset,
    Seed,
    make_rng,
    multiset_from_values,
    sample_index_subsets,
    standard_normal_complex,
)
from .subset_stats import MomentReport

__all__ = [
    "PartialFourierSpec",
    "dft_matrix",
    "partial_fourier",
    "sample_row_indices",
    "fourier_row_multiset",
    "partial_fourier_closed_form",
    "random_matrix",
]


@dataclass(frozen=True)
class PartialFourierSpec:
    """A choice of m distinct rows of the order-n Fourier matrix."""

    n: int
    row_indices: tuple[int, ...]

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"partial Fourier selection requires n >= 2, got n={self.n}")
        rows = tuple(int(i) for i in self.row_indices)
        object.__setattr__(self, "row_indices", rows)
        if not 1 <= len(rows) <= self.n:
            raise DomainError(f"need between 1 and {self.n} rows, got {len(rows)}")
        if any(not 0 <= i < self.n for i in rows):
            raise DomainError(f"row indices must lie in [0, {self.n - 1}]: {rows}")
        if any(rows[i] >= rows[i + 1] for i in range(len(rows) - 1)):
            raise DomainError(f"row indices must be strictly increasing: {rows}")

    @property
    def m(self) -> int:
        return len(self.row_indices)

    @property
    def has_first_row(self) -> bool:
        return self.row_indices[0] == 0


def _fourier_rows(rows: np.ndarray, n: int) -> np.ndarray:
    # i*k reduced mod n in integer arithmetic before the trig call; keeps the
    # angle in [0, 2*pi) regardless of how large the products get.
    k = np.arange(n, dtype=np.int64)
    reduced = (rows[:, np.newaxis] * k[np.newaxis, :]) % n
    return np.exp(2j * np.pi * (reduced / n)) / math.sqrt(n)


def dft_matrix(n: int) -> DenseMatrix:
    """Unitary n x n Fourier matrix with entries exp(2*pi*j*i*k/n)/sqrt(n)."""
    if n < 1:
        raise DomainError(f"Fourier matrix order must be >= 1, got {n}")
    return DenseMatrix(_fourier_rows(np.arange(n, dtype=np.int64), n))


def partial_fourier(spec: PartialFourierSpec) -> DenseMatrix:
    """The m x N matrix of the selected Fourier rows.

    Every entry has modulus 1/sqrt(N); columns have norm sqrt(m/N).
    """
    return DenseMatrix(_fourier_rows(np.asarray(spec.row_indices, dtype=np.int64), spec.n))


def sample_row_indices(n: int, m: int, seed: Seed | int) -> PartialFourierSpec:
    """Uniform m-subset of row indices {0..n-1}, sorted; deterministic given seed."""
    if n < 2:
        raise DomainError(f"row sampling requires n >= 2, got n={n}")
    rng = make_rng(seed)
    indices = sample_index_subsets(rng, n, m, 1)[0]
    indices.sort()
    return PartialFourierSpec(n=n, row_indices=tuple(int(i) for i in indices))


def fourier_row_multiset(l: int, n: int) -> Multiset:
    """The multiset {exp(-2*pi*j*k*l/n) : k = 1..n} of one Fourier row's points.

    Sums to n when l = 0 and to 0 (up to rounding) otherwise.
    """
    if n < 1:
        raise DomainError(f"order must be >= 1, got {n}")
    if not 0 <= l < n:
        raise DomainError(f"row parameter l={l} must lie in [0, {n - 1}]")
    ks = np.arange(1, n + 1, dtype=np.int64)
    reduced = (-(ks * l)) % n
    values = np.exp(2j * np.pi * (reduced / n))
    return multiset_from_values(complex(z) for z in values)


def partial_fourier_closed_form(n: int, m: int, has_first_row: bool) -> MomentReport:
    """Exact row-mean moments of an m-row partial Fourier matrix.

    Without the first (all-constant) row: mean 0, variance (N-m)/(N(N-1)).
    With it: mean 1/sqrt(N), variance (N-m)(m-1)/(m N (N-1)).
    """
    if n < 2:
        raise DomainError(f"closed form requires n >= 2, got {n}")
    if not 1 <= m <= n:
        raise DomainError(f"need 1 <= m <= n, got m={m}, n={n}")
    if has_first_row:
        mean = complex(1.0 / math.sqrt(n))
        variance = (n - m) * (m - 1) / (m * n * (n - 1))
    else:
        mean = 0j
        variance = (n - m) / (n * (n - 1))
    second = variance + abs(mean) ** 2
    return MomentReport(mean=mean, variance=variance, second_abs_moment=second)


def random_matrix(m: int, n: int, seed: Seed | int, normalized: bool = False) -> DenseMatrix:
    """Seeded m x n matrix with independent standard-normal components.

    With ``normalized`` the columns are scaled to unit l2 norm afterwards.
    """
    if m < 1 or n < 1:
        raise DomainError(f"matrix shape must be positive, got {m}x{n}")
    rng = make_rng(seed)
    entries = standard_normal_complex(rng, m * n).reshape(m, n)
    if normalized:
        norms = np.sqrt(np.einsum("ij,ij->j", entries.conj(), entries).real)
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise DomainError(f"generated zero column {int(zero[0])}; pick another seed")
        entries = entries / norms[np.newaxis, :]
    return DenseMatrix(entries)
