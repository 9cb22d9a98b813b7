"""Pure numpy implementations of the hot kernels.

Same signatures and results as the compiled ``_kernels`` module; used when
the extension is not built or when ``USFDR_PURE_PYTHON=1``.
"""
import math

import numpy as np

CF_EPS = 1e-15
CF_MAXIT = 300
_FPMIN = 1e-300


def _betacf(a, b, x):
    """Continued fraction for the regularized incomplete beta (modified Lentz).

    ``a``, ``b`` and ``x`` are equal-length float arrays; returns the
    fraction value, which still needs the ``x**a (1-x)**b / (a B(a,b))``
    prefactor.
    """
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for it in range(1, CF_MAXIT + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        aa_, bb_, xx = a[idx], b[idx], x[idx]
        cc, dd, hh = c[idx], d[idx], h[idx]
        m2 = 2.0 * it
        num = it * (bb_ - it) * xx / ((qam[idx] + m2) * (aa_ + m2))
        dd = 1.0 + num * dd
        dd = np.where(np.abs(dd) < _FPMIN, _FPMIN, dd)
        cc = 1.0 + num / cc
        cc = np.where(np.abs(cc) < _FPMIN, _FPMIN, cc)
        dd = 1.0 / dd
        hh = hh * dd * cc
        num = -(aa_ + it) * (qab[idx] + it) * xx / ((aa_ + m2) * (qap[idx] + m2))
        dd = 1.0 + num * dd
        dd = np.where(np.abs(dd) < _FPMIN, _FPMIN, dd)
        cc = 1.0 + num / cc
        cc = np.where(np.abs(cc) < _FPMIN, _FPMIN, cc)
        dd = 1.0 / dd
        delta = dd * cc
        hh = hh * delta
        c[idx], d[idx], h[idx] = cc, dd, hh
        active[idx] = np.abs(delta - 1.0) >= CF_EPS
    return h


def _ibeta_pair(a, b, x, y):
    """I_x(a, b) for scalar a, b and arrays x, y = 1 - x (both supplied exactly)."""
    out = np.empty_like(x)
    out[x <= 0.0] = 0.0
    out[y <= 0.0] = 1.0
    inner = (x > 0.0) & (y > 0.0)
    if not inner.any():
        return out
    xi, yi = x[inner], y[inner]
    direct = xi < (a + 1.0) / (a + b + 2.0)
    aa = np.where(direct, a, b)
    bb = np.where(direct, b, a)
    xx = np.where(direct, xi, yi)
    yy = np.where(direct, yi, xi)
    lbeta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    front = np.exp(aa * np.log(xx) + bb * np.log(yy) - lbeta)
    val = front * _betacf(aa, bb, xx) / aa
    out[inner] = np.where(direct, val, 1.0 - val)
    return out


def t_two_sided_sf(t, df):
    """2 - 2 * Psi(|t|) for a float array ``t``; returns a new array."""
    shape = np.shape(t)
    t = np.abs(np.asarray(t, dtype=np.float64)).ravel()
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        t2 = t * t
        z = df / (df + t2)
        w = t2 / (df + t2)
    inf = np.isinf(t2)
    z[inf] = 0.0
    w[inf] = 1.0
    return _ibeta_pair(0.5 * df, 0.5, z, w).reshape(shape)


def t_cdf(x, df):
    x = np.asarray(x, dtype=np.float64)
    g = t_two_sided_sf(x, df)
    return np.where(x < 0.0, 0.5 * g, 1.0 - 0.5 * g)


def family_scan(p_sorted, screen_sorted, levels, alphas):
    """Per-family step-up counts for every (alpha, level) pair.

    ``p_sorted`` is ascending; ``screen_sorted`` holds the screening values
    in the same order. Family 1 at a level is ``screen >= level``; the step-up
    constant in each family is that family's size.

    Returns ``(k1, k2, size1)`` with ``k1``, ``k2`` of shape
    ``(len(alphas), len(levels))`` and ``size1`` of shape ``(len(levels),)``.
    """
    p = np.asarray(p_sorted, dtype=np.float64)
    s = np.asarray(screen_sorted, dtype=np.float64)
    levels = np.asarray(levels, dtype=np.float64)
    alphas = np.asarray(alphas, dtype=np.float64)
    m = p.size
    k1 = np.zeros((alphas.size, levels.size), dtype=np.int64)
    k2 = np.zeros_like(k1)
    size1 = np.zeros(levels.size, dtype=np.int64)
    for j, lev in enumerate(levels):
        f1 = s >= lev
        r1 = np.cumsum(f1)
        r2 = np.arange(1, m + 1) - r1
        n1 = int(r1[-1]) if m else 0
        n2 = m - n1
        size1[j] = n1
        a = alphas[:, None]
        if n1:
            ok = f1 & (p <= a * r1 / n1)
            k1[:, j] = np.where(ok, r1, 0).max(axis=1)
        if n2:
            ok = ~f1 & (p <= a * r2 / n2)
            k2[:, j] = np.where(ok, r2, 0).max(axis=1)
    return k1, k2, size1


def bh_counts(p_sorted, alphas):
    """Step-up count k-hat for each alpha over an ascending p vector."""
    p = np.asarray(p_sorted, dtype=np.float64)
    alphas = np.asarray(alphas, dtype=np.float64)
    m = p.size
    k = np.arange(1, m + 1)
    ok = p <= alphas[:, None] * k / m
    return np.where(ok, k, 0).max(axis=1).astype(np.int64)
