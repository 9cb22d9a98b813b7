"""Benjamini-Hochberg, uncorrelated-screening (US) and baseline procedures.

The US rule splits features into two families by a screening level
``lambda`` (``|S_i| >= lambda`` versus the rest) and thresholds ``|T_i|``
separately in each family, using the family size as the null count. For a
family of size ``n`` that is exactly a step-up rule on ``p_i = G(|T_i|)``
with constant ``alpha * k / n``, which is how the kernels evaluate it: the
p-values are sorted once and every (alpha, lambda) pair is a single pass.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .distributions import inverse_two_sided_survival
from .stats import TwoSampleDataset, VarianceRegime, baseline_screens, test_statistics

__all__ = [
    "LambdaGrid",
    "FamilySplit",
    "UsResult",
    "BhResult",
    "p_values_from_t",
    "bh_procedure",
    "family_threshold",
    "us_procedure",
    "screened_procedure",
    "split_sample_procedure",
    "two_family_decisions",
    "bh_decisions",
]


def _check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    return alpha


@dataclass(frozen=True)
class LambdaGrid:
    """Screening levels ``(i / N) * sqrt(log m)`` for ``i = 0 .. 4N``."""

    n_grid: int
    m: float

    def __post_init__(self):
        if int(self.n_grid) < 1:
            raise ValueError("n_grid must be >= 1")
        if self.m <= 1:
            raise ValueError("need m > 1 for a nondegenerate grid")

    @property
    def levels(self):
        n = int(self.n_grid)
        return np.arange(4 * n + 1) / n * math.sqrt(math.log(self.m))


@dataclass(frozen=True)
class FamilySplit:
    family1: np.ndarray  # boolean mask, |screen| >= lambda

    @property
    def family2(self):
        return ~self.family1

    @property
    def m_hat_1(self):
        return int(self.family1.sum())

    @property
    def m_hat_2(self):
        return int(self.family1.size - self.family1.sum())


@dataclass(frozen=True)
class UsResult:
    lambda_hat: float
    lambda_index: int | None  # None when lambda was fixed rather than searched
    t1_hat: float
    t2_hat: float
    rejected: np.ndarray  # sorted feature indices
    split: FamilySplit
    per_lambda_rejection_counts: np.ndarray = field(repr=False)

    @property
    def n_rejected(self):
        return int(self.rejected.size)


@dataclass(frozen=True)
class BhResult:
    k_hat: int
    threshold_p: float
    rejected: np.ndarray

    @property
    def n_rejected(self):
        return int(self.rejected.size)


def p_values_from_t(stats):
    """Two-sided p-values ``2 - 2 Psi(|T_i|)`` against the t reference."""
    return kernels.t_two_sided_sf(np.abs(stats.t), stats.df)


def _sorted_p(p):
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("need a non-empty 1-d p-value vector")
    if np.any(np.isnan(p)) or np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    order = np.argsort(p, kind="stable")
    return p, order


def bh_decisions(p, alphas):
    """Rejection masks, one row per alpha, for the Benjamini-Hochberg rule."""
    p, order = _sorted_p(p)
    alphas = np.atleast_1d(np.asarray(alphas, dtype=np.float64))
    k = kernels.bh_counts(p[order], alphas)
    cut = alphas * k / p.size
    return (p[None, :] <= cut[:, None]) & (k[:, None] > 0), k


def bh_procedure(p, alpha):
    alpha = _check_alpha(alpha)
    p, order = _sorted_p(p)
    k = int(kernels.bh_counts(p[order], np.array([alpha]))[0])
    if k == 0:
        return BhResult(k_hat=0, threshold_p=0.0, rejected=np.array([], dtype=np.int64))
    thr = float(p[order[k - 1]])
    return BhResult(k_hat=k, threshold_p=thr, rejected=np.flatnonzero(p <= thr))


def _step_up_count(p_sorted, alpha, m_hat):
    k = np.arange(1, p_sorted.size + 1)
    ok = p_sorted <= alpha * k / m_hat
    return int(k[ok].max()) if ok.any() else 0


def _threshold_from_count(k, m_hat, alpha, df):
    if m_hat == 0:
        return 0.0
    return float(inverse_two_sided_survival(min(1.0, alpha * max(k, 1) / m_hat), df))


def family_threshold(t_abs, m_hat, alpha, df):
    """Smallest ``t >= 0`` with ``m_hat G(t) / max(1, #{|T| >= t}) <= alpha``.

    Below the k-th largest observed value the count is at least k, so the
    infimum is ``G^{-1}(alpha * k / m_hat)`` for the largest admissible k
    (or ``k = 1`` when none is admissible, the region above every
    observation).
    """
    alpha = _check_alpha(alpha)
    if m_hat < 0:
        raise ValueError("m_hat must be >= 0")
    if m_hat == 0:
        return 0.0
    t_abs = np.abs(np.asarray(t_abs, dtype=np.float64))
    p = np.sort(kernels.t_two_sided_sf(t_abs, float(df)))
    k = _step_up_count(p, alpha, m_hat)
    return _threshold_from_count(k, m_hat, alpha, df)


def two_family_decisions(p, screen, levels, alphas):
    """Two-family step-up over a grid of screening levels, for several alphas.

    Returns ``(index, rejected, counts, k1, k2, size1)`` where ``index[a]`` is
    the selected level for ``alphas[a]`` (largest index among ties),
    ``rejected[a]`` the boolean rejection mask at that level, and
    ``counts[a, j]`` the total rejections at level ``j``.
    """
    p, order = _sorted_p(p)
    screen = np.abs(np.asarray(screen, dtype=np.float64))
    if screen.shape != p.shape:
        raise ValueError("screen and p must have the same length")
    levels = np.atleast_1d(np.asarray(levels, dtype=np.float64))
    alphas = np.atleast_1d(np.asarray(alphas, dtype=np.float64))
    k1, k2, size1 = kernels.family_scan(p[order], screen[order], levels, alphas)
    counts = k1 + k2
    nl = levels.size
    index = nl - 1 - np.argmax(counts[:, ::-1], axis=1)
    rows = np.arange(alphas.size)
    kk1, kk2 = k1[rows, index], k2[rows, index]
    n1 = size1[index]
    n2 = p.size - n1
    f1 = screen[None, :] >= levels[index][:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        cut1 = np.where(n1 > 0, alphas * kk1 / n1, -1.0)
        cut2 = np.where(n2 > 0, alphas * kk2 / n2, -1.0)
    rej = (f1 & (p[None, :] <= cut1[:, None]) & (kk1[:, None] > 0)) | (
        ~f1 & (p[None, :] <= cut2[:, None]) & (kk2[:, None] > 0))
    return index, rej, counts, k1, k2, size1


def _us_result(p, screen, levels, alpha, df, fixed):
    alpha = _check_alpha(alpha)
    index, rej, counts, k1, k2, size1 = two_family_decisions(p, screen, levels, [alpha])
    j = int(index[0])
    n1 = int(size1[j])
    n2 = p.size - n1
    split = FamilySplit(family1=np.abs(screen) >= levels[j])
    return UsResult(
        lambda_hat=float(levels[j]),
        lambda_index=None if fixed else j,
        t1_hat=_threshold_from_count(int(k1[0, j]), n1, alpha, df),
        t2_hat=_threshold_from_count(int(k2[0, j]), n2, alpha, df),
        rejected=np.flatnonzero(rej[0]),
        split=split,
        per_lambda_rejection_counts=counts[0].copy(),
    )


def us_procedure(stats, alpha, n_grid=10):
    """US procedure with the screening level chosen by grid search."""
    grid = LambdaGrid(n_grid, stats.m)
    p = p_values_from_t(stats)
    return _us_result(p, stats.s, grid.levels, alpha, stats.df, fixed=False)


def fixed_level(m):
    return math.sqrt(2.0 * math.log(m))


def screened_procedure(screen, stats, alpha, lambda_rule="grid", n_grid=10):
    """US mechanics with an arbitrary screening vector in place of ``S``.

    ``lambda_rule`` is ``"grid"`` (search as in :func:`us_procedure`) or
    ``"fixed"`` (``lambda = sqrt(2 log m)``).
    """
    screen = np.asarray(screen, dtype=np.float64)
    if screen.shape != stats.t.shape:
        raise ValueError("screen length must equal the number of features")
    p = p_values_from_t(stats)
    if lambda_rule == "grid":
        levels = LambdaGrid(n_grid, stats.m).levels
    elif lambda_rule == "fixed":
        levels = np.array([fixed_level(stats.m)])
    else:
        raise ValueError(f"unknown lambda_rule {lambda_rule!r}")
    return _us_result(p, screen, levels, alpha, stats.df, fixed=lambda_rule == "fixed")


def split_screen_and_stats(data, screen_kind, n_screen, regime=VarianceRegime.EQUAL):
    """Screen from the first ``n_screen`` rows per group, T from the rest."""
    n_screen = int(n_screen)
    if not (1 < n_screen and n_screen + 2 <= min(data.n1, data.n2)):
        raise ValueError(
            f"n_screen={n_screen} must leave >= 2 testing samples per group "
            f"(n1={data.n1}, n2={data.n2})")
    head, tail = data.split(n_screen)
    ss, ms = baseline_screens(head)
    kind = screen_kind.lower()
    if kind == "ss":
        screen = ss
    elif kind == "ms":
        screen = ms
    else:
        raise ValueError(f"screen_kind must be 'SS' or 'MS', got {screen_kind!r}")
    return screen, test_statistics(tail, regime)


def split_sample_procedure(data, alpha, screen_kind, n_screen, n_grid=10,
                           regime=VarianceRegime.EQUAL):
    """Testing after screening with disjoint halves of the samples."""
    if not isinstance(data, TwoSampleDataset):
        data = TwoSampleDataset(*data)
    screen, stats = split_screen_and_stats(data, screen_kind, n_screen, regime)
    return screened_procedure(screen, stats, alpha, "grid", n_grid)
