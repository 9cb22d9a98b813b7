"""Student-t and standard normal distribution functions.

The t CDF goes through the regularized incomplete beta function,
``Psi(x) = 1 - I_z(df/2, 1/2) / 2`` with ``z = df / (df + x**2)`` for
``x >= 0``, evaluated by continued fraction in the selected kernel backend.
All functions accept scalars or arrays and return the same shape.
"""
import math

import numpy as np

from ._backend import kernels

__all__ = [
    "DomainError",
    "student_t_cdf",
    "two_sided_survival",
    "inverse_two_sided_survival",
    "normal_cdf",
    "t_density",
]

INVERSE_BRACKET = 60.0
_INVERSE_MAXIT = 400


class DomainError(ValueError):
    """Argument outside the domain of a distribution function."""


def _check_df(df):
    df = float(df)
    if not math.isfinite(df) or df <= 0:
        raise DomainError(f"degrees of freedom must be finite and > 0, got {df}")
    return df


def _as_finite(x, name):
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _unwrap(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def student_t_cdf(x, df):
    """Student-t CDF with ``df`` degrees of freedom."""
    df = _check_df(df)
    arr = _as_finite(x, "x")
    return _unwrap(kernels.t_cdf(arr, df), x)


def two_sided_survival(t, df):
    """``G(t) = 2 - 2 * Psi(t)`` for ``t >= 0``.

    Computed directly as the incomplete beta tail, so small values keep full
    relative precision instead of suffering ``1 - Psi`` cancellation.
    """
    df = _check_df(df)
    arr = np.asarray(t, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError("t must be >= 0")
    return _unwrap(kernels.t_two_sided_sf(arr, df), t)


def t_density(t, df):
    df = _check_df(df)
    t = np.asarray(t, dtype=np.float64)
    logc = math.lgamma(0.5 * (df + 1)) - math.lgamma(0.5 * df) - 0.5 * math.log(df * math.pi)
    return np.exp(logc - 0.5 * (df + 1) * np.log1p(t * t / df))


def _inverse_scalar(p, df):
    if p == 1.0:
        return 0.0
    lo, hi = 0.0, INVERSE_BRACKET
    g_hi = float(kernels.t_two_sided_sf(np.array([hi]), df)[0])
    while g_hi > p:
        lo, hi = hi, 2.0 * hi
        g_hi = float(kernels.t_two_sided_sf(np.array([hi]), df)[0])
    t = 0.5 * (lo + hi)
    for _ in range(_INVERSE_MAXIT):
        g = float(kernels.t_two_sided_sf(np.array([t]), df)[0])
        diff = g - p
        if diff > 0:
            lo = t
        else:
            hi = t
        if diff == 0 or hi - lo <= 4e-16 * max(1.0, hi):
            break
        # Newton on G with G'(t) = -2 f(t); fall back to bisection off-bracket
        dens = float(t_density(t, df))
        step = t + diff / (2.0 * dens) if dens > 0 else math.nan
        t = step if lo < step < hi else 0.5 * (lo + hi)
    return t


def inverse_two_sided_survival(p, df):
    """The ``t >= 0`` with ``two_sided_survival(t, df) == p``, for ``0 < p <= 1``."""
    df = _check_df(df)
    arr = np.asarray(p, dtype=np.float64)
    if np.any(np.isnan(arr)) or np.any(arr <= 0) or np.any(arr > 1):
        raise DomainError("p must lie in (0, 1]")
    out = np.array([_inverse_scalar(float(v), df) for v in arr.ravel()])
    return _unwrap(out.reshape(arr.shape), p)


_erfc = np.frompyfunc(math.erfc, 1, 1)


def normal_cdf(x):
    """Standard normal CDF via ``erfc``, accurate in both tails."""
    arr = _as_finite(x, "x")
    out = 0.5 * np.asarray(_erfc(-arr / math.sqrt(2.0)), dtype=np.float64)
    return _unwrap(out, x)
