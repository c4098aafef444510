"""Matrix-level quality metrics: norms, coherence, Welch bound, ETF detection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_POLICY,
    ConvergenceError,
    DenseMatrix,
    DomainError,
    PreconditionError,
    Seed,
    TolerancePolicy,
    make_rng,
    standard_normal_complex,
)

__all__ = [
    "POWER_MAX_ITERATIONS",
    "POWER_REL_CHANGE",
    "POWER_RESIDUAL_FACTOR",
    "ETF_SPREAD_TOL",
    "ETF_TIGHTNESS_TOL",
    "SpectralEstimate",
    "CoherenceReport",
    "ETFVerdict",
    "frobenius_norm",
    "gram",
    "spectral",
    "welch_bound",
    "coherence",
    "normalize_columns",
    "etf_check",
]

POWER_MAX_ITERATIONS = 100_000
POWER_REL_CHANGE = 1e-13
POWER_RESIDUAL_FACTOR = 1e-10
_POWER_RESTART_SEED = 0x9E3779B97F4A7C15  # fixed: the restart vector is part of the contract

ETF_SPREAD_TOL = 1e-8
ETF_TIGHTNESS_TOL = 1e-8


@dataclass(frozen=True)
class SpectralEstimate:
    """Largest singular value and the matching Gram eigenvalue."""

    sigma_max: float
    lambda_max: float
    iterations: int
    residual: float


@dataclass(frozen=True)
class CoherenceReport:
    """Coherence, its arg-max column pair, and the Welch-bound slack."""

    mu: float
    argmax_pair: tuple[int, int]
    welch: float
    slack: float


@dataclass(frozen=True)
class ETFVerdict:
    """Equiangular-tight-frame diagnostics.

    ``equiangular_spread`` is max-min over off-diagonal Gram magnitudes;
    ``tightness_residual`` is the max-entry deviation of A A* from (N/m) I.
    """

    is_etf: bool
    equiangular_spread: float
    tightness_residual: float
    columns_normalized: bool


def frobenius_norm(a: DenseMatrix) -> float:
    """Square root of the sum of squared entry moduli."""
    return math.sqrt(float(np.vdot(a.array, a.array).real))


def gram(a: DenseMatrix) -> DenseMatrix:
    """N x N matrix of column inner products.

    Convention: G[i, k] = sum_r a[r, i] * conj(a[r, k]).  Coherence uses only
    magnitudes, so the conjugation side cannot change mu.
    """
    arr = a.array
    return DenseMatrix(arr.T @ arr.conj())


def welch_bound(m: int, n: int) -> float:
    """Lower bound sqrt((N-m)/(m(N-1))) on the coherence of an m x N matrix."""
    if n < 2:
        raise DomainError(f"Welch bound requires N >= 2, got N={n}")
    if not 1 <= m <= n:
        raise DomainError(f"Welch bound requires 1 <= m <= N, got m={m}, N={n}")
    return math.sqrt((n - m) / (m * (n - 1)))


def _power_run(g: np.ndarray, v: np.ndarray, max_iterations: int):
    """Power iteration on a PSD matrix from a given unit start vector.

    Returns (lambda, iterations, residual, converged).  Converged means the
    Rayleigh quotient's relative change dropped to POWER_REL_CHANGE or the
    eigen-residual fell under POWER_RESIDUAL_FACTOR * lambda.
    """
    lam = 0.0
    residual = math.inf
    for it in range(1, max_iterations + 1):
        w = g @ v
        lam_new = float(np.vdot(v, w).real)
        residual = float(np.linalg.norm(w - lam_new * v))
        if residual <= POWER_RESIDUAL_FACTOR * lam_new or abs(lam_new - lam) <= POWER_REL_CHANGE * abs(lam_new):
            return lam_new, it, residual, True
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            # v is in the null space; the start vector carries no signal.
            return 0.0, it, 0.0, True
        v = w / norm_w
        lam = lam_new
    return lam, max_iterations, residual, False


def spectral(a: DenseMatrix, max_iterations: int = POWER_MAX_ITERATIONS) -> SpectralEstimate:
    """Largest singular value via power iteration on A*A.

    Runs from the normalized all-ones vector and again from a fixed seeded
    pseudo-random vector, keeping the larger eigenvalue.  The second start is
    unconditional: an all-ones vector lying exactly in a sub-dominant
    eigenspace converges cleanly to the wrong eigenvalue, which no stall test
    can detect.
    """
    arr = a.array
    n = a.n
    if not arr.any():
        return SpectralEstimate(sigma_max=0.0, lambda_max=0.0, iterations=0, residual=0.0)
    g = arr.conj().T @ arr

    ones = np.ones(n, dtype=np.complex128) / math.sqrt(n)
    rng = make_rng(Seed(_POWER_RESTART_SEED))
    rand = standard_normal_complex(rng, n)
    rand = rand / np.linalg.norm(rand)

    best_lam = -math.inf
    best_residual = math.inf
    total_iterations = 0
    for start in (ones, rand):
        lam, iterations, residual, converged = _power_run(g, start, max_iterations)
        total_iterations += iterations
        if not converged:
            raise ConvergenceError(
                f"power iteration failed to converge within {max_iterations} iterations "
                f"(last residual {residual:.3e})",
                residual=residual,
            )
        if lam > best_lam:
            best_lam = lam
            best_residual = residual
    lam_max = max(best_lam, 0.0)
    return SpectralEstimate(
        sigma_max=math.sqrt(lam_max),
        lambda_max=lam_max,
        iterations=total_iterations,
        residual=best_residual,
    )


def _column_norms(a: DenseMatrix) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->j", a.array.conj(), a.array).real)


def _require_normalized(a: DenseMatrix, policy: TolerancePolicy) -> None:
    norms = _column_norms(a)
    deviation = np.abs(norms - 1.0)
    worst = int(np.argmax(deviation))
    if deviation[worst] > policy.rel_tol:
        raise PreconditionError(
            f"columns must be l2-normalized: column {worst} has norm {norms[worst]!r}"
        )


def coherence(a: DenseMatrix, policy: TolerancePolicy = DEFAULT_POLICY) -> CoherenceReport:
    """Maximum off-diagonal Gram magnitude of a column-normalized matrix.

    The arg-max pair is the lexicographically smallest (i, k) attaining the
    maximum.  ``slack`` is mu minus the Welch bound and is never meaningfully
    negative.
    """
    if a.n < 2:
        raise DomainError("coherence requires at least 2 columns")
    if a.m > a.n:
        raise DomainError(f"coherence analysis requires m <= N, got {a.m}x{a.n}")
    _require_normalized(a, policy)
    g = np.abs(gram(a).array)
    np.fill_diagonal(g, -1.0)
    g[np.tril_indices(a.n, k=-1)] = -1.0
    flat = int(np.argmax(g))  # row-major argmax: first occurrence = smallest (i, k)
    i, k = divmod(flat, a.n)
    mu = float(g[i, k])
    welch = welch_bound(a.m, a.n)
    return CoherenceReport(mu=mu, argmax_pair=(i, k), welch=welch, slack=mu - welch)


def normalize_columns(a: DenseMatrix) -> DenseMatrix:
    """Scale each column to unit l2 norm."""
    norms = _column_norms(a)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DomainError(f"cannot normalize zero column {int(zero[0])}")
    return DenseMatrix(a.array / norms[np.newaxis, :])


def etf_check(
    a: DenseMatrix,
    policy: TolerancePolicy = DEFAULT_POLICY,
    spread_tol: float = ETF_SPREAD_TOL,
    tightness_tol: float = ETF_TIGHTNESS_TOL,
) -> ETFVerdict:
    """Decide whether the columns form an equiangular tight frame.

    True iff columns are normalized (within policy.rel_tol), all off-diagonal
    Gram magnitudes coincide within spread_tol, and A A* equals (N/m) I within
    tightness_tol in max-entry magnitude.
    """
    if a.n < 2:
        raise DomainError("ETF check requires at least 2 columns")
    norms = _column_norms(a)
    columns_normalized = bool(np.max(np.abs(norms - 1.0)) <= policy.rel_tol)
    g = np.abs(gram(a).array)
    off = g[np.triu_indices(a.n, k=1)]
    spread = float(off.max() - off.min())
    frame_op = a.array @ a.array.conj().T
    target = (a.n / a.m) * np.eye(a.m)
    tightness = float(np.max(np.abs(frame_op - target)))
    is_etf = columns_normalized and spread <= spread_tol and tightness <= tightness_tol
    return ETFVerdict(
        is_etf=is_etf,
        equiangular_spread=spread,
        tightness_residual=tightness,
        columns_normalized=columns_normalized,
    )
