"""Independent reference implementations shared by the test modules."""
import numpy as np
from scipy.special import stdtr


def G(t, df):
    """Two-sided t tail from scipy, independent of the package."""
    return 2.0 * stdtr(df, -np.abs(t))


def brute_bh(p, alpha):
    m = len(p)
    ps = sorted(p)
    k_hat = 0
    for k in range(1, m + 1):
        if ps[k - 1] <= alpha * k / m:
            k_hat = k
    if k_hat == 0:
        return set()
    cut = ps[k_hat - 1]
    return {i for i, v in enumerate(p) if v <= cut}


def brute_family(t_abs, m_hat, alpha, df):
    """Smallest feasible observed |T| by direct criterion evaluation."""
    best = None
    for t in sorted(set(t_abs)):
        count = sum(1 for v in t_abs if v >= t)
        if m_hat * G(t, df) / max(1, count) <= alpha:
            best = t
            break
    return best


def criterion(t, t_abs_sorted, m_hat, df):
    count = t_abs_sorted.size - np.searchsorted(t_abs_sorted, t, side="left")
    return m_hat * G(t, df) / np.maximum(1, count)


def grid_oracle(t_abs, m_hat, alpha, df, step=1e-4, upper=12.0):
    """Dense scan for the first feasible point, refined by bisection."""
    ts = np.sort(t_abs)
    grid = np.arange(0.0, upper, step)
    ok = criterion(grid, ts, m_hat, df) <= alpha
    j = int(np.argmax(ok))
    assert ok[j], "upper bound too small"
    if j == 0:
        return 0.0
    lo, hi = grid[j - 1], grid[j]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if criterion(mid, ts, m_hat, df) <= alpha:
            hi = mid
        else:
            lo = mid
    return hi
