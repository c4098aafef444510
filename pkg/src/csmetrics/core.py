"""Shared numeric types, tolerance policy, and the deterministic randomness contract.

Complex scalars are plain Python ``complex`` values; every public operation
rejects non-finite components at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "PreconditionError",
    "ResourceLimitError",
    "ConvergenceError",
    "TolerancePolicy",
    "DEFAULT_POLICY",
    "Seed",
    "Multiset",
    "DenseMatrix",
    "complex_abs_sq",
    "ensure_finite_complex",
    "multiset_from_values",
    "make_rng",
    "sample_index_subsets",
    "standard_normal_complex",
]


class DomainError(ValueError):
    """An argument is outside the operation's domain."""


class PreconditionError(DomainError):
    """A documented precondition (e.g. normalized columns) does not hold."""


class ResourceLimitError(RuntimeError):
    """An enumeration would exceed its configured cap."""


class ConvergenceError(RuntimeError):
    """An iterative routine hit its iteration cap without converging."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


def ensure_finite_complex(z, what: str = "value") -> complex:
    """Coerce to complex and reject NaN/Inf components."""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"{what} must have finite components, got {z!r}")
    return z


def complex_abs_sq(z) -> float:
    """Squared modulus re^2 + im^2, without the square root."""
    z = ensure_finite_complex(z)
    return z.real * z.real + z.imag * z.imag


@dataclass(frozen=True)
class TolerancePolicy:
    """Absolute/relative tolerances used by comparisons and preconditions."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-9

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("tolerances must be strictly positive")
        if self.abs_tol > self.rel_tol:
            raise DomainError("abs_tol must not exceed rel_tol")

    def close(self, a: float, b: float) -> bool:
        return math.isclose(a, b, rel_tol=self.rel_tol, abs_tol=self.abs_tol)

    def close_complex(self, a: complex, b: complex) -> bool:
        return self.close(a.real, b.real) and self.close(a.imag, b.imag)


DEFAULT_POLICY = TolerancePolicy()

_UINT64_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class Seed:
    """64-bit seed; identical seeds always yield identical random streams."""

    value: int

    def __post_init__(self):
        object.__setattr__(self, "value", int(self.value) & _UINT64_MASK)


def make_rng(seed: Seed | int) -> np.random.Generator:
    """The one stream constructor used everywhere randomness is consumed."""
    value = seed.value if isinstance(seed, Seed) else Seed(int(seed)).value
    return np.random.Generator(np.random.PCG64(value))


def sample_index_subsets(rng: np.random.Generator, n: int, m: int, k: int) -> np.ndarray:
    """Draw k uniform m-subsets of range(n) without replacement.

    Partial Fisher-Yates over index rows, vectorized across the k draws;
    swap decisions consume the stream column by column, so the result is a
    pure function of the generator state.  Rows are not sorted.
    """
    if not 1 <= m <= n:
        raise DomainError(f"subset size m={m} must satisfy 1 <= m <= n={n}")
    if k < 1:
        raise DomainError(f"draw count k={k} must be >= 1")
    perm = np.tile(np.arange(n), (k, 1))
    rows = np.arange(k)
    for j in range(m):
        r = rng.integers(j, n, size=k)
        picked = perm[rows, r].copy()
        perm[rows, r] = perm[rows, j]
        perm[rows, j] = picked
    return perm[:, :m]


def standard_normal_complex(rng: np.random.Generator, count: int) -> np.ndarray:
    """Complex values with independent standard-normal components.

    Box-Muller over the uniform stream: one uniform pair per value, the pair's
    two normals becoming the real and imaginary parts.  No rejection loop, so
    the stream consumption is fixed by count alone.
    """
    u1 = rng.random(count)
    u2 = rng.random(count)
    radius = np.sqrt(-2.0 * np.log1p(-u1))  # 1-u1 in (0,1]: log never sees 0
    angle = 2.0 * np.pi * u2
    return radius * np.cos(angle) + 1j * (radius * np.sin(angle))


@dataclass(frozen=True)
class Multiset:
    """Ordered complex multiset with cached aggregates.

    Multiplicity is positional and never collapsed; subset statistics count
    index positions, not distinct values.  ``sum`` and ``sum_abs_sq`` are the
    left-to-right folds cached at construction, the only aggregates the
    closed-form moment expressions consume.
    """

    elements: tuple[complex, ...]
    sum: complex
    sum_abs_sq: float

    def __post_init__(self):
        if len(self.elements) < 1:
            raise DomainError("multiset must contain at least one element")

    @property
    def n(self) -> int:
        return len(self.elements)


def multiset_from_values(values: Iterable[complex]) -> Multiset:
    """Build a Multiset, computing aggregates by left-to-right summation."""
    elements = tuple(ensure_finite_complex(z, "multiset element") for z in values)
    if not elements:
        raise DomainError("multiset must contain at least one element")
    total = 0j
    abs_sq = 0.0
    for z in elements:
        total += z
        abs_sq += z.real * z.real + z.imag * z.imag
    return Multiset(elements=elements, sum=total, sum_abs_sq=abs_sq)


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """Immutable row-major complex matrix.

    Construction validates shape and finiteness; the backing array is made
    read-only.  Analysis operations that require 1 <= m <= n check that at
    the call site, not here.
    """

    array: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.array, dtype=np.complex128)
        if arr.ndim != 2:
            raise DomainError(f"matrix must be 2-D, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DomainError(f"matrix must be nonempty, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise DomainError("matrix entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "array", arr)

    @property
    def m(self) -> int:
        return self.array.shape[0]

    @property
    def n(self) -> int:
        return self.array.shape[1]

    @property
    def entries(self) -> list[complex]:
        """Row-major entry list."""
        return [complex(z) for z in self.array.ravel()]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[complex]]) -> "DenseMatrix":
        return cls(np.array(rows, dtype=np.complex128))

    def row(self, i: int) -> np.ndarray:
        if not 0 <= i < self.m:
            raise DomainError(f"row index {i} out of range for {self.m}x{self.n} matrix")
        return self.array[i]

    def column(self, k: int) -> np.ndarray:
        if not 0 <= k < self.n:
            raise DomainError(f"column index {k} out of range for {self.m}x{self.n} matrix")
        return self.array[:, k]
