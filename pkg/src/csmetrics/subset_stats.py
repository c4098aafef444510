"""Statistics of the sum of m elements drawn without replacement from a multiset.

Closed-form moments, the pairwise-difference variance identity, the scaled
mean variable, exact PMF enumeration, a brute-force enumeration oracle, and a
seeded Monte Carlo sampler.  The enumeration oracle is kept independent of the
closed forms so each can verify the other.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DomainError,
    Multiset,
    ResourceLimitError,
    Seed,
    complex_abs_sq,
    make_rng,
    sample_index_subsets,
)

__all__ = [
    "ENUMERATION_CAP",
    "PMF_MERGE_TOL",
    "MomentReport",
    "PMF",
    "SampleStats",
    "closed_form_moments",
    "variance_pairwise",
    "scaled_mean_moments",
    "enumerate_pmf",
    "brute_force_moments",
    "sample_sum",
]

ENUMERATION_CAP = 10_000_000
"""Default maximum number of subsets an exhaustive enumeration may visit."""

PMF_MERGE_TOL = 1e-9
"""Componentwise absolute tolerance for grouping floating-point subset sums.

Exact sum equality is ill-posed in floating point; sums are bucketed in
lexicographic (re, im) order so the grouping is deterministic.
"""

_CHUNK = 1 << 15
_DRAW_CHUNK = 1 << 16


@dataclass(frozen=True)
class MomentReport:
    """Mean, variance and second absolute moment of a subset-sum variable."""

    mean: complex
    variance: float
    second_abs_moment: float


@dataclass(frozen=True)
class PMF:
    """Exact distribution: one atom per distinct subset-sum value.

    ``count / total`` is the probability of each atom; counts are exact
    integers summing to C(N, m).
    """

    atoms: tuple[tuple[complex, int], ...]
    total: int


@dataclass(frozen=True)
class SampleStats:
    """Monte Carlo sample statistics over K draws (population normalization)."""

    draws: int
    sample_mean: complex
    sample_variance: float
    sample_second_abs_moment: float


def _check_subset_size(m: int, n: int) -> None:
    if not 1 <= m <= n:
        raise DomainError(f"subset size m={m} must satisfy 1 <= m <= N={n}")


def _nonneg(v: float) -> float:
    # Cancellation in N*sum|z|^2 - |sum z|^2 can leave variance a hair below 0.
    return 0.0 if v < 0.0 else v


def closed_form_moments(phi: Multiset, m: int) -> MomentReport:
    """Exact moments of the size-m subset sum over ``phi``.

    mean = (m/N) * sum(z_i);
    variance = m(N-m)/(N^2(N-1)) * (N * sum|z_i|^2 - |sum z_i|^2);
    second absolute moment = m/(N(N-1)) * ((N-m) sum|z_i|^2 + (m-1)|sum z_i|^2).

    N = 1 is the literal point mass: mean z_1, variance 0.
    """
    n = phi.n
    _check_subset_size(m, n)
    if n == 1:
        return MomentReport(mean=phi.sum, variance=0.0,
                            second_abs_moment=complex_abs_sq(phi.sum))
    s_abs_sq = complex_abs_sq(phi.sum)
    t = phi.sum_abs_sq
    mean = (m / n) * phi.sum
    variance = _nonneg(m * (n - m) / (n * n * (n - 1)) * (n * t - s_abs_sq))
    second = m / (n * (n - 1)) * ((n - m) * t + (m - 1) * s_abs_sq)
    return MomentReport(mean=mean, variance=variance, second_abs_moment=second)


def variance_pairwise(phi: Multiset, m: int) -> float:
    """Variance via the pairwise-difference identity.

    m(N-m)/(N^2(N-1)) * sum_{i<k} |z_i - z_k|^2.  Agrees with
    ``closed_form_moments(...).variance``; exactly shift-invariant.
    """
    n = phi.n
    if n < 2:
        raise DomainError("pairwise variance requires N >= 2")
    _check_subset_size(m, n)
    elems = phi.elements
    total = math.fsum(
        complex_abs_sq(elems[i] - elems[k])
        for i in range(n - 1)
        for k in range(i + 1, n)
    )
    return m * (n - m) / (n * n * (n - 1)) * total


def scaled_mean_moments(phi: Multiset, m: int) -> MomentReport:
    """Moments of the subset sum divided by m (the random arithmetic mean)."""
    base = closed_form_moments(phi, m)
    return MomentReport(
        mean=base.mean / m,
        variance=base.variance / (m * m),
        second_abs_moment=base.second_abs_moment / (m * m),
    )


def _guard_enumeration(n: int, m: int, max_subsets: int) -> int:
    _check_subset_size(m, n)
    total = math.comb(n, m)
    if total > max_subsets:
        raise ResourceLimitError(
            f"C({n},{m}) = {total} subsets exceeds the enumeration cap of {max_subsets}"
        )
    return total


def _subset_sum_chunks(elements: tuple[complex, ...], m: int):
    """Yield lists of subset sums in lexicographic index-combination order.

    Each sum is the left-to-right fold over the selected positions, so equal
    subsets always produce bit-identical values.
    """
    combos = itertools.combinations(elements, m)
    while True:
        block = [sum(c, 0j) for c in itertools.islice(combos, _CHUNK)]
        if not block:
            return
        yield block


def enumerate_pmf(phi: Multiset, m: int, max_subsets: int = ENUMERATION_CAP) -> PMF:
    """Exhaustively enumerate the subset-sum distribution.

    Sums are grouped in lexicographic (re, im) order; a sum joins the current
    atom when both components are within ``PMF_MERGE_TOL`` of the atom's
    representative (its first sum).
    """
    total = _guard_enumeration(phi.n, m, max_subsets)
    sums = [s for block in _subset_sum_chunks(phi.elements, m) for s in block]
    sums.sort(key=lambda z: (z.real, z.imag))
    atoms: list[list] = []
    for z in sums:
        if atoms:
            rep = atoms[-1][0]
            if abs(z.real - rep.real) <= PMF_MERGE_TOL and abs(z.imag - rep.imag) <= PMF_MERGE_TOL:
                atoms[-1][1] += 1
                continue
        atoms.append([z, 1])
    return PMF(atoms=tuple((value, count) for value, count in atoms), total=total)


def brute_force_moments(phi: Multiset, m: int, max_subsets: int = ENUMERATION_CAP) -> MomentReport:
    """Moments by direct averaging over every one of the C(N, m) subset sums.

    Independent oracle for the closed forms: nothing here touches the cached
    aggregates or the moment formulas.  Accumulation is compensated (fsum) and
    the variance is a second pass over deviations from the computed mean.
    """
    total = _guard_enumeration(phi.n, m, max_subsets)
    re_parts, im_parts, abs_parts = [], [], []
    for block in _subset_sum_chunks(phi.elements, m):
        re_parts.append(math.fsum(z.real for z in block))
        im_parts.append(math.fsum(z.imag for z in block))
        abs_parts.append(math.fsum(z.real * z.real + z.imag * z.imag for z in block))
    mean = complex(math.fsum(re_parts) / total, math.fsum(im_parts) / total)
    second = math.fsum(abs_parts) / total
    dev_parts = [
        math.fsum(
            (z.real - mean.real) ** 2 + (z.imag - mean.imag) ** 2 for z in block
        )
        for block in _subset_sum_chunks(phi.elements, m)
    ]
    variance = math.fsum(dev_parts) / total
    return MomentReport(mean=mean, variance=variance, second_abs_moment=second)


def _stats_from_draws(draws: np.ndarray) -> SampleStats:
    """Population-normalized statistics of a vector of complex draws."""
    k = draws.size
    first = complex(draws[0])
    if bool(np.all(draws == draws[0])):
        # Constant sample (e.g. m = N): variance must be exactly zero.
        return SampleStats(draws=k, sample_mean=first, sample_variance=0.0,
                           sample_second_abs_moment=complex_abs_sq(first))
    re = draws.real
    im = draws.imag
    mean = complex(math.fsum(re) / k, math.fsum(im) / k)
    second = math.fsum(re * re + im * im) / k
    variance = math.fsum((re - mean.real) ** 2 + (im - mean.imag) ** 2) / k
    return SampleStats(draws=k, sample_mean=mean, sample_variance=variance,
                       sample_second_abs_moment=second)


def _draw_subset_sums(values: np.ndarray, m: int, rng, k: int) -> np.ndarray:
    """k subset sums of size m, drawn uniformly without replacement.

    Subset indices are sorted before summation so equal subsets yield
    bit-identical sums regardless of draw order.
    """
    n = values.size
    out = np.empty(k, dtype=np.complex128)
    done = 0
    while done < k:
        count = min(_DRAW_CHUNK, k - done)
        subs = sample_index_subsets(rng, n, m, count)
        subs.sort(axis=1)
        out[done:done + count] = values[subs].sum(axis=1)
        done += count
    return out


def sample_sum(phi: Multiset, m: int, seed: Seed | int, k: int) -> SampleStats:
    """K seeded Monte Carlo draws of the size-m subset sum."""
    _check_subset_size(m, phi.n)
    if k < 1:
        raise DomainError(f"draw count k={k} must be >= 1")
    rng = make_rng(seed)
    values = np.asarray(phi.elements, dtype=np.complex128)
    return _stats_from_draws(_draw_subset_sums(values, m, rng, k))
