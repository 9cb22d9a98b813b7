import math

import numpy as np
import pytest

from usfdr.procedures import p_values_from_t, us_procedure
from usfdr.simulation import (
    GroundTruth,
    ModelSpec,
    build_means,
    evaluate_replication,
    generate_dataset,
    replication_rngs,
    run_experiment,
    run_replication,
)
from usfdr.stats import test_statistics

# 3 * sqrt(log(2000) / 100), from 40-digit decimal arithmetic
MODEL1_MU1 = 0.8270920271401408


def test_model1_means():
    truth = build_means(ModelSpec("model1"))
    assert truth.mu1[0] == pytest.approx(MODEL1_MU1, abs=1e-14)
    assert truth.mu2[0] == pytest.approx(2 / 3 * MODEL1_MU1, abs=1e-9)
    assert truth.m1 == 44 and truth.m0 == 1956
    assert np.all(truth.mu1[44:] == 0) and np.all(truth.mu2[44:] == 0)


def test_model2_means():
    truth = build_means(ModelSpec("model2"))
    r = math.sqrt(math.log(2000) / 100)
    assert np.allclose(truth.mu1[:44], 2 * r)
    assert np.allclose(truth.mu2[:22], r)
    assert np.allclose(truth.mu2[22:44], -0.5 * r)
    assert truth.m1 == 44


def test_model3_tail_is_null():
    truth = build_means(ModelSpec("model3"))
    r = math.sqrt(math.log(2000) / 100)
    assert truth.mu1[44] == pytest.approx(45 / 2000 * r)
    assert truth.mu1[-1] == pytest.approx(r)
    assert truth.m1 == 44


def test_model4_counts():
    truth = build_means(ModelSpec("model4"))
    assert np.sum((truth.mu1 == 1.0) & (truth.mu2 == 1.0)) == 44
    assert np.sum((truth.mu1 == 0.2) & (truth.mu2 == 0.2)) == 2000 - 88
    assert truth.m1 == 44 and truth.m0 == 1956


def test_model5_difference():
    truth = build_means(ModelSpec("model5"))
    diff = truth.mu1[:44] - truth.mu2[:44]
    assert np.allclose(diff, 2 * math.sqrt(math.log(2000) / 100))
    assert truth.m1 == 44


def test_theta_beta_means():
    spec = ModelSpec("theta-beta", m=5000, n1=400, n2=400, theta=0.8, beta=0.5)
    truth = build_means(spec)
    assert truth.m1 == 70  # floor(5000 ** 0.5)
    standardized = truth.mu1[0] / math.sqrt(2 / 400)
    assert standardized == pytest.approx(0.8 * math.sqrt(math.log(5000)))
    assert np.all(truth.mu2 == 0)


def test_null_model():
    assert build_means(ModelSpec("null", m=50)).m1 == 0


def test_spec_validation():
    with pytest.raises(ValueError):
        ModelSpec("model9")
    with pytest.raises(ValueError):
        ModelSpec("model1", m=1)
    with pytest.raises(ValueError):
        ModelSpec("model1", noise="t", noise_df=2)
    with pytest.raises(ValueError):
        ModelSpec("theta-beta", theta=1.0)
    with pytest.raises(ValueError):
        ModelSpec("theta-beta", theta=1.0, beta=1.0)


def test_labels():
    assert ModelSpec("model1").label == "model1-equal"
    assert ModelSpec("model2", regime="unequal", noise="t", noise_df=5).label == "model2-unequal-t5"


def test_null_features_centered():
    spec = ModelSpec("null", m=20, n1=100_000, n2=2)
    data = generate_dataset(spec, build_means(spec), replication_rngs(1, 0))
    band = 3 / math.sqrt(100_000)
    assert np.all(np.abs(data.group1.mean(axis=0)) <= band)


@pytest.mark.parametrize("noise", ["gaussian", "t"])
def test_regime_variances(noise):
    for regime, (v1, v2) in (("equal", (1.0, 1.0)), ("unequal", (0.5, 1.0))):
        spec = ModelSpec("null", m=50, n1=20_000, n2=20_000, regime=regime,
                         noise=noise, noise_df=8 if noise == "t" else None)
        data = generate_dataset(spec, build_means(spec), replication_rngs(3, 0))
        assert data.group1.var(axis=0, ddof=1).mean() == pytest.approx(v1, rel=0.02)
        assert data.group2.var(axis=0, ddof=1).mean() == pytest.approx(v2, rel=0.02)


def test_dataset_deterministic():
    spec = ModelSpec("model1", m=100, n1=10, n2=10)
    truth = build_means(spec)
    a = generate_dataset(spec, truth, replication_rngs(42, 7))
    b = generate_dataset(spec, truth, replication_rngs(42, 7))
    c = generate_dataset(spec, truth, replication_rngs(42, 8))
    assert a.group1.tobytes() == b.group1.tobytes()
    assert a.group2.tobytes() == b.group2.tobytes()
    assert a.group1.tobytes() != c.group1.tobytes()


def test_evaluate_replication_examples():
    mu1 = np.zeros(20)
    mu1[:10] = 1.0
    truth = GroundTruth(mu1=mu1, mu2=np.zeros(20))
    none = evaluate_replication(np.array([], dtype=int), truth)
    assert (none.fdp, none.power, none.n_rejected) == (0.0, 0.0, 0)
    exact = evaluate_replication(np.arange(10), truth)
    assert (exact.fdp, exact.power) == (0.0, 1.0)
    mixed = evaluate_replication(np.array([0, 1, 2, 15]), truth, "x")
    assert mixed.fdp == 0.25 and mixed.power == pytest.approx(0.3)
    mask = np.zeros(20, dtype=bool)
    mask[[0, 1, 2, 15]] = True
    assert evaluate_replication(mask, truth).fdp == 0.25


def test_power_undefined_without_signals():
    truth = GroundTruth(mu1=np.zeros(5), mu2=np.zeros(5))
    out = evaluate_replication(np.array([1]), truth)
    assert out.fdp == 1.0 and math.isnan(out.power)


def test_us_power_formulas_agree():
    spec = ModelSpec("model1", m=500)
    truth = build_means(spec)
    for rep in range(10):
        data = generate_dataset(spec, truth, replication_rngs(5, rep))
        res = us_procedure(test_statistics(data), 0.2)
        out = evaluate_replication(res, truth, "us")
        false = np.sum(truth.h0[res.rejected])
        assert out.power == pytest.approx((res.n_rejected - false) / truth.m1)
        assert out.fdp * max(1, out.n_rejected) == pytest.approx(round(out.fdp * max(1, out.n_rejected)))
        assert out.lambda_hat == res.lambda_hat


def test_engine_matches_direct_procedure():
    spec = ModelSpec("model1", m=300)
    truth = build_means(spec)
    out = run_replication(spec, truth, ["us"], [0.1, 0.2], master_seed=9, replication=3)
    data = generate_dataset(spec, truth, replication_rngs(9, 3))
    for a, alpha in enumerate((0.1, 0.2)):
        res = us_procedure(test_statistics(data), alpha)
        direct = evaluate_replication(res, truth)
        fdp, power, total, lam = (x[a] for x in out["us"])
        assert (fdp, power, total, lam) == (direct.fdp, direct.power, direct.n_rejected,
                                            res.lambda_hat)


def _traces(summaries):
    return {(s.method, s.alpha): (s.fdp_trace.tobytes(), s.power_trace.tobytes())
            for s in summaries}


def test_method_order_independent():
    spec = ModelSpec("model4", m=300)
    a = run_experiment(spec, ["bh", "us", "ss-screen"], [0.1, 0.3], 4, master_seed=2)
    b = run_experiment(spec, ["ss-screen", "us", "bh"], [0.1, 0.3], 4, master_seed=2)
    assert _traces(a) == _traces(b)
    assert len(a) == 6


def test_workers_do_not_change_results():
    spec = ModelSpec("model2", m=200, regime="unequal")
    methods = ["bh", "us", "split-ss"]
    a = run_experiment(spec, methods, [0.05, 0.2], 6, master_seed=4, workers=1)
    b = run_experiment(spec, methods, [0.05, 0.2], 6, master_seed=4, workers=3)
    assert _traces(a) == _traces(b)


def test_summary_means():
    spec = ModelSpec("model1", m=200)
    for s in run_experiment(spec, ["bh", "us"], [0.2], 5, master_seed=1):
        assert s.e_fdr == pytest.approx(s.fdp_trace.mean())
        assert s.e_power == pytest.approx(s.power_trace.mean())
        assert s.n_replications == 5
        assert math.isnan(s.mean_lambda_hat) == (s.method == "bh")


def test_run_experiment_errors():
    spec = ModelSpec("model1", m=100)
    with pytest.raises(ValueError):
        run_experiment(spec, ["bh"], [0.1], 0)
    with pytest.raises(ValueError):
        run_experiment(spec, ["nope"], [0.1], 1)
    with pytest.raises(ValueError):
        run_experiment(spec, ["bh"], [0.0], 1)


def test_failed_replications_are_counted(monkeypatch):
    from usfdr import simulation
    from usfdr.stats import DegenerateVariance

    real = simulation.run_replication

    def flaky(spec, truth, methods, alphas, seed, rep, *args):
        if rep == 1:
            raise DegenerateVariance(np.array([0]))
        return real(spec, truth, methods, alphas, seed, rep, *args)

    monkeypatch.setattr(simulation, "run_replication", flaky)
    out = run_experiment(ModelSpec("model1", m=100), ["bh"], [0.1], 3)
    assert out[0].n_failed == 1 and out[0].n_replications == 2


def test_null_calibration():
    spec = ModelSpec("null", m=500)
    (bh,) = run_experiment(spec, ["bh"], [0.2], 500, master_seed=11)
    assert bh.e_fdr <= 0.25


def test_null_p_values_roughly_uniform():
    spec = ModelSpec("null", m=500)
    truth = build_means(spec)
    data = generate_dataset(spec, truth, replication_rngs(0, 0))
    p = p_values_from_t(test_statistics(data))
    assert 0.4 < p.mean() < 0.6
