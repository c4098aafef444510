"""Exact subset-sum statistics and quality metrics for sensing matrices."""

from .core import (
    DEFAULT_POLICY,
    ConvergenceError,
    DenseMatrix,
    DomainError,
    Multiset,
    PreconditionError,
    ResourceLimitError,
    Seed,
    TolerancePolicy,
    complex_abs_sq,
    make_rng,
    multiset_from_values,
)
from .fourier import (
    PartialFourierSpec,
    dft_matrix,
    fourier_row_multiset,
    partial_fourier,
    partial_fourier_closed_form,
    random_matrix,
    sample_row_indices,
)
from .io_report import (
    AnalysisReport,
    ParseError,
    emit_report,
    format_complex,
    format_real,
    parse_complex_literal,
    parse_matrix_file,
    serialize_matrix,
)
from .matrix_metrics import (
    CoherenceReport,
    ETFVerdict,
    SpectralEstimate,
    coherence,
    etf_check,
    frobenius_norm,
    gram,
    normalize_columns,
    spectral,
    welch_bound,
)
from .row_ensemble import (
    BoundCheck,
    RowMeanStats,
    coherence_bounds_check,
    frobenius_upper_bound,
    normalized_column_stats,
    row_mean_moments,
    row_multiset,
    sample_row_mean,
    spectral_lower_bound,
)
from .subset_stats import (
    PMF,
    MomentReport,
    SampleStats,
    brute_force_moments,
    closed_form_moments,
    enumerate_pmf,
    sample_sum,
    scaled_mean_moments,
    variance_pairwise,
)

__version__ = "1.0.0"
