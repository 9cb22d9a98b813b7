"""Uncorrelated-screening FDR control for large-scale two-sample t tests."""
from ._backend import BACKEND
from .distributions import (
    DomainError,
    inverse_two_sided_survival,
    normal_cdf,
    student_t_cdf,
    two_sided_survival,
)
from .stats import (
    DegenerateVariance,
    FeatureMoments,
    TestStatistics,
    TwoSampleDataset,
    VarianceRegime,
    baseline_screens,
    compute_moments,
    oracle_screening_signal,
    test_statistics,
)
from .procedures import (
    BhResult,
    LambdaGrid,
    UsResult,
    bh_procedure,
    family_threshold,
    p_values_from_t,
    screened_procedure,
    split_sample_procedure,
    us_procedure,
)

__version__ = "0.1.0"
