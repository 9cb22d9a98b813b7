"""Per-feature moments, two-sample t statistics and screening statistics.

Data are stored sample-major, ``(n_samples, m_features)``, and every
statistic is computed for all features at once along axis 0.
"""
import enum
import warnings
from dataclasses import dataclass

import numpy as np

RATIO_WARN = 1e8


class DegenerateVariance(ArithmeticError):
    """A feature has zero sample variance where a positive one is required."""

    def __init__(self, features, what="variance"):
        self.features = np.atleast_1d(np.asarray(features, dtype=np.int64))
        shown = ", ".join(str(i) for i in self.features[:10])
        more = "" if self.features.size <= 10 else f" (+{self.features.size - 10} more)"
        super().__init__(f"zero {what} at feature index {shown}{more}")


class VarianceRegime(enum.Enum):
    EQUAL = "equal"
    UNEQUAL = "unequal"


@dataclass(frozen=True)
class TwoSampleDataset:
    group1: np.ndarray
    group2: np.ndarray

    def __post_init__(self):
        g1 = np.asarray(self.group1, dtype=np.float64)
        g2 = np.asarray(self.group2, dtype=np.float64)
        if g1.ndim != 2 or g2.ndim != 2:
            raise ValueError("groups must be 2-d arrays (samples x features)")
        if g1.shape[0] < 2 or g2.shape[0] < 2:
            raise ValueError("each group needs at least 2 samples")
        if g1.shape[1] != g2.shape[1] or g1.shape[1] < 1:
            raise ValueError("groups must share the same feature count m >= 1")
        if not (np.all(np.isfinite(g1)) and np.all(np.isfinite(g2))):
            raise ValueError("dataset contains non-finite entries")
        object.__setattr__(self, "group1", g1)
        object.__setattr__(self, "group2", g2)

    @property
    def n1(self):
        return self.group1.shape[0]

    @property
    def n2(self):
        return self.group2.shape[0]

    @property
    def m(self):
        return self.group1.shape[1]

    def split(self, n_screen):
        """First ``n_screen`` rows of each group, and the remaining rows."""
        head = TwoSampleDataset(self.group1[:n_screen], self.group2[:n_screen])
        tail = TwoSampleDataset(self.group1[n_screen:], self.group2[n_screen:])
        return head, tail


@dataclass(frozen=True)
class FeatureMoments:
    """Vectors of per-feature means and variances (divisors ``n_j - 1``)."""

    mean1: np.ndarray
    mean2: np.ndarray
    var1: np.ndarray
    var2: np.ndarray
    n1: int
    n2: int

    @property
    def pooled_var(self):
        n1, n2 = self.n1, self.n2
        return ((n1 - 1) * self.var1 + (n2 - 1) * self.var2) / (n1 + n2 - 2)


@dataclass(frozen=True)
class TestStatistics:
    t: np.ndarray
    s: np.ndarray
    regime: VarianceRegime
    df: float

    __test__ = False  # keep pytest from collecting this class

    @property
    def m(self):
        return self.t.size


def _column_var(x, mean):
    # two-pass: center first, then sum squares
    centered = x - mean
    return np.einsum("ij,ij->j", centered, centered) / (x.shape[0] - 1)


def compute_moments(data):
    mean1 = data.group1.mean(axis=0)
    mean2 = data.group2.mean(axis=0)
    return FeatureMoments(
        mean1=mean1,
        mean2=mean2,
        var1=_column_var(data.group1, mean1),
        var2=_column_var(data.group2, mean2),
        n1=data.n1,
        n2=data.n2,
    )


def _require_positive(values, what="variance"):
    bad = np.flatnonzero(~(np.asarray(values) > 0))
    if bad.size:
        raise DegenerateVariance(bad, what)


def t_statistic_pooled(mom):
    pooled = mom.pooled_var
    _require_positive(pooled, "pooled variance")
    n1, n2 = mom.n1, mom.n2
    return np.sqrt(n1 * n2 / ((n1 + n2) * pooled)) * (mom.mean1 - mom.mean2)


def screening_statistic_pooled(mom):
    pooled = mom.pooled_var
    _require_positive(pooled, "pooled variance")
    n1, n2 = mom.n1, mom.n2
    return np.sqrt(n1 * n1 / ((n1 + n2) * pooled)) * (mom.mean1 + (n2 / n1) * mom.mean2)


def t_statistic_welch(mom):
    se2 = mom.var1 / mom.n1 + mom.var2 / mom.n2
    _require_positive(se2)
    return (mom.mean1 - mom.mean2) / np.sqrt(se2)


def _weighted_screen(mean1, mean2, var1, var2, n1, n2, what):
    _require_positive(var1, what)
    _require_positive(var2, what)
    r = n2 * var1 / (n1 * var2)
    if np.any(np.abs(r) > RATIO_WARN):
        warnings.warn(
            f"variance ratio exceeds {RATIO_WARN:g} at "
            f"{int(np.sum(np.abs(r) > RATIO_WARN))} feature(s); screening "
            "statistic is dominated by group 2",
            RuntimeWarning,
            stacklevel=3,
        )
    return np.sqrt(n1 / (var1 * (1.0 + r))) * (mean1 + r * mean2)


def screening_statistic_welch(mom):
    return _weighted_screen(mom.mean1, mom.mean2, mom.var1, mom.var2,
                            mom.n1, mom.n2, "group variance")


def test_statistics(data, regime=VarianceRegime.EQUAL):
    """T and S for every feature under the given variance regime."""
    regime = VarianceRegime(regime)
    mom = compute_moments(data)
    if regime is VarianceRegime.EQUAL:
        t = t_statistic_pooled(mom)
        s = screening_statistic_pooled(mom)
    else:
        t = t_statistic_welch(mom)
        s = screening_statistic_welch(mom)
    return TestStatistics(t=t, s=s, regime=regime, df=float(data.n1 + data.n2 - 2))


test_statistics.__test__ = False


def one_sample_t(x):
    """``sqrt(n) * mean / sd`` along axis 0 (sd with divisor ``n - 1``)."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    mean = x.mean(axis=0)
    var = _column_var(x.reshape(n, -1), mean.reshape(-1)).reshape(np.shape(mean))
    _require_positive(var)
    return np.sqrt(n) * mean / np.sqrt(var)


def baseline_screens(data):
    """Square-type and maximum-type screens built from one-sample t statistics."""
    t1 = one_sample_t(data.group1)
    t2 = one_sample_t(data.group2)
    return np.hypot(t1, t2), np.maximum(np.abs(t1), np.abs(t2))


def oracle_screening_signal(mu1, mu2, sigma1_sq, sigma2_sq, n1, n2):
    """Population mean of the screening statistic (known means and variances)."""
    mu1, mu2, s1, s2 = np.broadcast_arrays(
        *(np.asarray(v, dtype=np.float64) for v in (mu1, mu2, sigma1_sq, sigma2_sq)))
    return _weighted_screen(mu1, mu2, s1, s2, n1, n2, "population variance")
