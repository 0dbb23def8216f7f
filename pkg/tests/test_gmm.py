"""Mixture-model tests. log_likelihood is checked against an independent
extended-precision evaluation of the two-Gaussian sum (mpmath, 60 digits),
term by term, never against the implementation's own log-space path."""

import math

import mpmath
import numpy as np
import pytest

from alignsample.errors import GmmError
from alignsample.gmm import (
    EmConfig,
    GmmModel,
    em_fit,
    fit_gmm,
    load_model,
    log_likelihood,
    log_likelihood_rows,
    responsibilities,
    save_model,
)

mpmath.mp.dps = 60


def mp_log_likelihood(model, point):
    """Direct high-precision evaluation: log(pi*N1 + (1-pi)*N2)."""

    def mp_gauss(x, mean, var):
        dens = mpmath.mpf(1)
        for xi, mi, vi in zip(x, mean, var):
            xi, mi, vi = mpmath.mpf(float(xi)), mpmath.mpf(float(mi)), mpmath.mpf(float(vi))
            dens *= mpmath.exp(-((xi - mi) ** 2) / (2 * vi)) / mpmath.sqrt(2 * mpmath.pi * vi)
        return dens

    pi = mpmath.mpf(model.mix)
    total = pi * mp_gauss(point, model.mean1, model.var1) + (1 - pi) * mp_gauss(
        point, model.mean2, model.var2
    )
    return float(mpmath.log(total))


def random_model(rng, dim):
    return GmmModel(
        mix=float(rng.uniform(0.1, 0.9)),
        mean1=rng.normal(0, 2, dim),
        mean2=rng.normal(0, 2, dim),
        var1=rng.uniform(0.2, 3.0, dim),
        var2=rng.uniform(0.2, 3.0, dim),
        dim=dim,
    )


class TestLogLikelihood:
    def test_standard_normal_at_mode(self):
        model = GmmModel(0.5, np.zeros(1), np.zeros(1), np.ones(1), np.ones(1), dim=1)
        assert log_likelihood(model, np.array([0.0])) == pytest.approx(
            -0.5 * math.log(2 * math.pi), abs=1e-12
        )

    def test_standard_normal_at_three(self):
        model = GmmModel(0.5, np.zeros(1), np.zeros(1), np.ones(1), np.ones(1), dim=1)
        assert log_likelihood(model, np.array([3.0])) == pytest.approx(
            -4.5 - 0.5 * math.log(2 * math.pi), abs=1e-12
        )

    def test_matches_extended_precision_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            dim = int(rng.integers(1, 9))
            model = random_model(rng, dim)
            point = rng.normal(0, 3, dim)
            assert log_likelihood(model, point) == pytest.approx(
                mp_log_likelihood(model, point), abs=1e-10
            )

    def test_rows_match_scalar_path(self):
        rng = np.random.default_rng(3)
        model = random_model(rng, 4)
        rows = rng.normal(0, 2, (17, 4))
        batched = log_likelihood_rows(model, rows)
        singles = np.array([log_likelihood(model, row) for row in rows])
        np.testing.assert_allclose(batched, singles, rtol=0, atol=1e-12)

    def test_no_underflow_in_high_dimension(self):
        # at d=4096 the per-point exponent is far below float range; the
        # log-space path must stay finite
        dim = 4096
        model = GmmModel(0.5, np.zeros(dim), np.ones(dim), np.full(dim, 0.5),
                         np.full(dim, 0.5), dim=dim)
        value = log_likelihood(model, np.full(dim, 3.0))
        assert math.isfinite(value)
        assert value < -10000

    def test_dimension_mismatch(self):
        model = GmmModel(0.5, np.zeros(2), np.zeros(2), np.ones(2), np.ones(2), dim=2)
        with pytest.raises(GmmError, match="dimension mismatch"):
            log_likelihood(model, np.array([1.0, 2.0, 3.0]))


class TestResponsibilities:
    def test_symmetric_midpoint(self):
        model = GmmModel(0.5, np.array([-1.0]), np.array([1.0]), np.ones(1), np.ones(1), dim=1)
        g1, g2 = responsibilities(model, np.array([0.0]))
        assert g1 == pytest.approx(0.5, abs=1e-12)
        assert g2 == pytest.approx(0.5, abs=1e-12)

    def test_deep_in_one_basin(self):
        model = GmmModel(0.5, np.array([-5.0]), np.array([5.0]), np.ones(1), np.ones(1), dim=1)
        g1, g2 = responsibilities(model, np.array([-5.0]))
        # oracle: density ratio N2/N1 = exp(-50), so g1 = 1/(1+exp(-50))
        assert g1 > 0.999
        assert g1 == pytest.approx(1.0 / (1.0 + math.exp(-50.0)), rel=1e-12)

    def test_sum_to_one(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            dim = int(rng.integers(1, 6))
            model = random_model(rng, dim)
            point = rng.normal(0, 4, dim)
            g1, g2 = responsibilities(model, point)
            assert abs((g1 + g2) - 1.0) <= 1e-12
            assert 0.0 <= g1 <= 1.0 and 0.0 <= g2 <= 1.0


class TestFit:
    def test_two_cluster_recovery(self):
        rng = np.random.default_rng(42)
        x = np.concatenate(
            [rng.normal(-10.0, 0.1, (50, 1)), rng.normal(10.0, 0.1, (50, 1))]
        )
        model = fit_gmm(x, EmConfig())
        means = sorted([float(model.mean1[0]), float(model.mean2[0])])
        assert abs(means[0] - (-10.0)) < 0.5
        assert abs(means[1] - 10.0) < 0.5
        assert abs(model.mix - 0.5) < 0.1

    def test_minimal_corpus_hits_variance_floor(self):
        x = np.array([[0.0], [1.0]])
        config = EmConfig(variance_floor=1e-6)
        model = fit_gmm(x, config)
        assert float(model.var1[0]) == pytest.approx(1e-6)
        assert float(model.var2[0]) == pytest.approx(1e-6)

    def test_nan_input_names_row(self):
        x = np.array([[0.0], [np.nan], [1.0]])
        with pytest.raises(GmmError, match="non-finite input at row 1"):
            fit_gmm(x)

    def test_single_row_rejected(self):
        with pytest.raises(GmmError, match="at least 2 rows"):
            fit_gmm(np.zeros((1, 3)))

    def test_identical_points_rejected(self):
        with pytest.raises(GmmError, match="zero-variance corpus"):
            fit_gmm(np.ones((5, 2)))

    def test_monotone_log_likelihood(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            n, d = int(rng.integers(20, 80)), int(rng.integers(1, 5))
            x = rng.normal(0, 1, (n, d)) + rng.choice([-2.0, 2.0], size=(n, 1))
            result = em_fit(x, EmConfig(max_iters=60))
            trace = np.array(result.log_likelihoods)
            assert np.all(np.diff(trace) >= -1e-9)

    def test_deterministic_bitwise(self):
        rng = np.random.default_rng(9)
        x = rng.normal(0, 1, (60, 3))
        a = fit_gmm(x, EmConfig())
        b = fit_gmm(x, EmConfig())
        assert a.mix == b.mix
        assert a.mean1.tobytes() == b.mean1.tobytes()
        assert a.var2.tobytes() == b.var2.tobytes()

    def test_thread_count_does_not_change_bits(self):
        rng = np.random.default_rng(13)
        x = rng.normal(0, 1, (1400, 4)) + rng.choice([-3.0, 3.0], size=(1400, 1))
        one = fit_gmm(x, EmConfig(), threads=1)
        four = fit_gmm(x, EmConfig(), threads=4)
        assert one.mix == four.mix
        assert one.mean1.tobytes() == four.mean1.tobytes()
        assert one.var1.tobytes() == four.var1.tobytes()

    def test_permutation_covariance(self):
        rng = np.random.default_rng(21)
        x = np.concatenate(
            [rng.normal(-4.0, 0.5, (40, 2)), rng.normal(4.0, 0.5, (60, 2))]
        )
        config = EmConfig(max_iters=500, rel_tol=1e-13)
        base = fit_gmm(x, config)
        perm = rng.permutation(len(x))
        shuffled = fit_gmm(x[perm], config)
        direct = (
            np.allclose(base.mean1, shuffled.mean1, atol=1e-6)
            and np.allclose(base.mean2, shuffled.mean2, atol=1e-6)
            and abs(base.mix - shuffled.mix) < 1e-6
        )
        swapped = (
            np.allclose(base.mean1, shuffled.mean2, atol=1e-6)
            and np.allclose(base.mean2, shuffled.mean1, atol=1e-6)
            and abs(base.mix - (1.0 - shuffled.mix)) < 1e-6
        )
        assert direct or swapped


class TestModelIO:
    def test_json_roundtrip(self, tmp_path):
        rng = np.random.default_rng(2)
        model = random_model(rng, 3)
        path = tmp_path / "model.json"
        save_model(model, path)
        back = load_model(path)
        assert back.mix == model.mix
        np.testing.assert_array_equal(back.mean1, model.mean1)
        np.testing.assert_array_equal(back.var2, model.var2)
        assert back.dim == 3

    def test_bad_mix_rejected(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"mix": 1.5, "mean1": [0], "mean2": [0], "var1": [1], "var2": [1]}')
        with pytest.raises(GmmError, match="mix"):
            load_model(path)
