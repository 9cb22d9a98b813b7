"""Simulation models, the replication engine and empirical FDR/power.

Every replication draws one dataset from a Philox stream keyed by
``(master_seed, replication)`` and evaluates all methods and all alpha
levels on it, so method contrasts are paired and results do not depend on
execution order or worker count.
"""
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .procedures import (
    LambdaGrid,
    bh_decisions,
    fixed_level,
    p_values_from_t,
    split_screen_and_stats,
    two_family_decisions,
)
from .stats import (
    DegenerateVariance,
    TwoSampleDataset,
    VarianceRegime,
    baseline_screens,
    test_statistics,
)

log = logging.getLogger(__name__)

MODEL_KINDS = ("model1", "model2", "model3", "model4", "model5", "theta-beta", "null")
METHODS = (
    "bh",
    "us",
    "ss-screen",
    "ms-screen",
    "ss-screen-fixed",
    "ms-screen-fixed",
    "split-ss",
    "split-ms",
)
WORKERS_ENV = "USFDR_WORKERS"

# group variances per regime
_VARIANCES = {VarianceRegime.EQUAL: (1.0, 1.0), VarianceRegime.UNEQUAL: (0.5, 1.0)}


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    m: int = 2000
    n1: int = 100
    n2: int = 100
    regime: VarianceRegime = VarianceRegime.EQUAL
    noise: str = "gaussian"
    noise_df: float | None = None
    theta: float | None = None
    beta: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "regime", VarianceRegime(self.regime))
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model {self.kind!r}; expected one of {MODEL_KINDS}")
        if self.m < 2 or self.n1 < 2 or self.n2 < 2:
            raise ValueError("need m >= 2 and n1, n2 >= 2")
        if self.noise not in ("gaussian", "t"):
            raise ValueError(f"noise must be 'gaussian' or 't', got {self.noise!r}")
        if self.noise == "t" and (self.noise_df is None or self.noise_df <= 2):
            raise ValueError("t noise needs noise_df > 2 (finite variance)")
        if self.kind == "theta-beta":
            if self.theta is None or self.beta is None:
                raise ValueError("theta-beta model needs theta and beta")
            if not 0 < self.beta < 1 or self.theta <= 0:
                raise ValueError("need theta > 0 and 0 < beta < 1")

    @property
    def variances(self):
        return _VARIANCES[self.regime]

    @property
    def label(self):
        name = f"{self.kind}-{self.regime.value}"
        if self.noise == "t":
            name += f"-t{self.noise_df:g}"
        return name


@dataclass(frozen=True)
class GroundTruth:
    mu1: np.ndarray
    mu2: np.ndarray

    @property
    def h1(self):
        return self.mu1 != self.mu2

    @property
    def h0(self):
        return ~self.h1

    @property
    def m1(self):
        return int(self.h1.sum())

    @property
    def m0(self):
        return int(self.mu1.size - self.m1)


def build_means(spec):
    m, n1, n2 = spec.m, spec.n1, spec.n2
    lm = math.log(m)
    k = math.isqrt(m)  # floor(sqrt(m)) = m1 for models 1-5
    mu1 = np.zeros(m)
    mu2 = np.zeros(m)
    if spec.kind in ("model1", "model3", "model4"):
        mu1[:k] = 3.0 * math.sqrt(lm / n1)
        mu2[:k] = 2.0 * math.sqrt(lm / n2)
        if spec.kind == "model3":
            i = np.arange(k + 1, m + 1)
            mu1[k:] = mu2[k:] = i / m * math.sqrt(lm / n1)
        elif spec.kind == "model4":
            mu1[k:2 * k] = mu2[k:2 * k] = 1.0
            mu1[2 * k:] = mu2[2 * k:] = 0.2
    elif spec.kind == "model2":
        mu1[:k] = 2.0 * math.sqrt(lm / n1)
        mu2[:k // 2] = math.sqrt(lm / n2)
        mu2[k // 2:k] = -0.5 * math.sqrt(lm / n2)
    elif spec.kind == "model5":
        mu1[:k] = 1.5 * math.sqrt(lm / n1)
        mu2[:k] = -0.5 * math.sqrt(lm / n1)
    elif spec.kind == "theta-beta":
        s1, s2 = spec.variances
        m1 = int(math.floor(m ** spec.beta))
        mu1[:m1] = spec.theta * math.sqrt(lm) * math.sqrt(s1 / n1 + s2 / n2)
    return GroundTruth(mu1=mu1, mu2=mu2)


def replication_rngs(master_seed, replication):
    """Independent Philox generators for group 1 and group 2 of one replication."""
    seq = np.random.SeedSequence([int(master_seed), int(replication)])
    return tuple(np.random.Generator(np.random.Philox(s)) for s in seq.spawn(2))


def _noise(spec, rng, n, var):
    shape = (n, spec.m)
    if spec.noise == "gaussian":
        return rng.standard_normal(shape) * math.sqrt(var)
    df = spec.noise_df
    return rng.standard_t(df, size=shape) * math.sqrt(var * (df - 2.0) / df)


def generate_dataset(spec, truth, rngs):
    """``X = mu + noise`` with centered noise; ``rngs`` is one generator per group."""
    rng1, rng2 = rngs
    v1, v2 = spec.variances
    g1 = truth.mu1 + _noise(spec, rng1, spec.n1, v1)
    g2 = truth.mu2 + _noise(spec, rng2, spec.n2, v2)
    return TwoSampleDataset(g1, g2)


@dataclass(frozen=True)
class ReplicationOutcome:
    method: str
    fdp: float
    power: float
    n_rejected: int
    lambda_hat: float = math.nan


def evaluate_replication(result, truth, method=""):
    """FDP and power of one rejection set (a result object, index array or mask)."""
    rejected = getattr(result, "rejected", result)
    mask = np.zeros(truth.mu1.size, dtype=bool)
    rejected = np.asarray(rejected)
    if rejected.dtype == bool:
        mask |= rejected
    else:
        mask[rejected.astype(np.int64)] = True
    fdp, power, total = _metrics(mask[None, :], truth)
    return ReplicationOutcome(
        method=method,
        fdp=float(fdp[0]),
        power=float(power[0]),
        n_rejected=int(total[0]),
        lambda_hat=float(getattr(result, "lambda_hat", math.nan)),
    )


def _metrics(masks, truth):
    total = masks.sum(axis=1)
    false = (masks & truth.h0).sum(axis=1)
    fdp = false / np.maximum(1, total)
    m1 = truth.m1
    power = (total - false) / m1 if m1 else np.full(total.shape, np.nan)
    return fdp, power, total


@dataclass
class ExperimentSummary:
    model: str
    method: str
    alpha: float
    fdp_trace: np.ndarray
    power_trace: np.ndarray
    lambda_trace: np.ndarray = field(repr=False)
    rejections_trace: np.ndarray = field(repr=False)
    n_failed: int = 0

    @property
    def n_replications(self):
        return int(self.fdp_trace.size)

    @property
    def e_fdr(self):
        return float(np.mean(self.fdp_trace))

    @property
    def e_power(self):
        return float(np.mean(self.power_trace))

    @property
    def mean_lambda_hat(self):
        lam = self.lambda_trace
        return math.nan if np.all(np.isnan(lam)) else float(np.nanmean(lam))

    @property
    def mean_rejections(self):
        return float(np.mean(self.rejections_trace))


def _decide(method, data, stats, p, alphas, n_grid, n_screen):
    """Rejection masks (alphas x m) and selected lambda per alpha."""
    m = data.m
    nan = np.full(alphas.size, np.nan)
    if method == "bh":
        masks, _ = bh_decisions(p, alphas)
        return masks, nan
    if method == "us":
        levels = LambdaGrid(n_grid, m).levels
        idx, masks, *_ = two_family_decisions(p, stats.s, levels, alphas)
        return masks, levels[idx]
    if method.startswith(("ss-screen", "ms-screen")):
        ss, ms = baseline_screens(data)
        screen = ss if method.startswith("ss") else ms
        if method.endswith("-fixed"):
            levels = np.array([fixed_level(m)])
        else:
            levels = LambdaGrid(n_grid, m).levels
        idx, masks, *_ = two_family_decisions(p, screen, levels, alphas)
        return masks, levels[idx]
    if method in ("split-ss", "split-ms"):
        screen, tstats = split_screen_and_stats(data, method[-2:], n_screen, stats.regime)
        levels = LambdaGrid(n_grid, m).levels
        idx, masks, *_ = two_family_decisions(p_values_from_t(tstats), screen, levels, alphas)
        return masks, levels[idx]
    raise ValueError(f"unknown method {method!r}")


def run_replication(spec, truth, methods, alphas, master_seed, replication,
                    n_grid=10, n_screen=None):
    """All methods on one dataset. Returns ``{method: (fdp, power, n_rej, lam)}``."""
    alphas = np.asarray(alphas, dtype=np.float64)
    n_screen = min(spec.n1, spec.n2) // 2 if n_screen is None else n_screen
    data = generate_dataset(spec, truth, replication_rngs(master_seed, replication))
    stats = test_statistics(data, spec.regime)
    p = p_values_from_t(stats)
    out = {}
    for method in methods:
        masks, lam = _decide(method, data, stats, p, alphas, n_grid, n_screen)
        fdp, power, total = _metrics(masks, truth)
        out[method] = (fdp, power, total, lam)
    return out


def _run_chunk(args):
    spec, methods, alphas, master_seed, reps, n_grid, n_screen = args
    truth = build_means(spec)
    results = []
    for r in reps:
        try:
            results.append(run_replication(spec, truth, methods, alphas, master_seed,
                                           r, n_grid, n_screen))
        except DegenerateVariance as exc:
            log.warning("replication %d failed: %s", r, exc)
            results.append(None)
    return results


def default_workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_experiment(spec, methods, alphas, n_reps, master_seed=0, n_grid=10,
                   n_screen=None, workers=None):
    """Monte Carlo estimates of FDR and power for each (method, alpha)."""
    if n_reps < 1:
        raise ValueError("n_reps must be >= 1")
    methods = list(dict.fromkeys(methods))
    for method in methods:
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    alphas = np.atleast_1d(np.asarray(alphas, dtype=np.float64))
    if np.any((alphas <= 0) | (alphas > 1)):
        raise ValueError("alphas must lie in (0, 1]")
    workers = default_workers() if workers is None else max(1, int(workers))

    reps = list(range(n_reps))
    if workers == 1:
        results = _run_chunk((spec, methods, alphas, master_seed, reps, n_grid, n_screen))
    else:
        chunks = [reps[i::workers] for i in range(workers)]
        jobs = [(spec, methods, alphas, master_seed, c, n_grid, n_screen) for c in chunks]
        results = [None] * n_reps
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for chunk, res in zip(chunks, pool.map(_run_chunk, jobs)):
                for r, value in zip(chunk, res):
                    results[r] = value

    ok = [res for res in results if res is not None]
    n_failed = n_reps - len(ok)
    if not ok:
        raise RuntimeError(f"all {n_reps} replications failed")
    summaries = []
    for method in methods:
        fdp, power, total, lam = (np.stack([res[method][i] for res in ok]) for i in range(4))
        for a, alpha in enumerate(alphas):
            summaries.append(ExperimentSummary(
                model=spec.label,
                method=method,
                alpha=float(alpha),
                fdp_trace=fdp[:, a],
                power_trace=power[:, a],
                lambda_trace=lam[:, a],
                rejections_trace=total[:, a],
                n_failed=n_failed,
            ))
    return summaries
