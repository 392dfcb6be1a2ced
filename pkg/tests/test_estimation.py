"""VOT estimators and observation pooling."""

import math

import pytest

from hotlanes.estimation import (
    EstimationError,
    Observation,
    estimate_cdf_point,
    estimate_logit_vot,
    pool_cdf_points,
)


def obs(u=1.0, omega=0.02, e2=800.0, e21=400.0, t=0.0):
    return Observation(time=t, u=u, omega=omega, e2_tilde=e2, e21_tilde=e21)


class TestCdfPoint:
    def test_everyone_pays(self):
        x, f_hat = estimate_cdf_point(obs(e21=800.0))
        assert x == pytest.approx(50.0)
        assert f_hat == 0.0

    def test_nobody_pays(self):
        _, f_hat = estimate_cdf_point(obs(e21=0.0))
        assert f_hat == 1.0

    def test_abscissa_is_toll_to_gap_ratio(self):
        x, _ = estimate_cdf_point(obs(u=0.9, omega=0.03))
        assert x == pytest.approx(30.0)

    def test_zero_gap_not_estimable(self):
        with pytest.raises(EstimationError):
            estimate_cdf_point(obs(omega=0.0))

    def test_unbounded_gap_not_estimable(self):
        with pytest.raises(EstimationError):
            estimate_cdf_point(obs(omega=math.inf))

    def test_zero_demand_not_estimable(self):
        with pytest.raises(EstimationError):
            estimate_cdf_point(Observation(0.0, 1.0, 0.02, 0.0, 0.0))


class TestLogitVot:
    def test_half_share_reads_off_ratio(self):
        assert estimate_logit_vot(obs(u=1.0, omega=0.02, e21=400.0)) == pytest.approx(50.0)

    def test_round_trips_generated_share(self):
        params_vot, alpha, omega = 62.0, 1.3, 0.015
        u = 1.1
        p = 1.0 / (1.0 + math.exp(alpha * (u - params_vot * omega)))
        got = estimate_logit_vot(obs(u=u, omega=omega, e2=1000.0, e21=1000.0 * p), alpha_star=alpha)
        assert got == pytest.approx(params_vot, rel=1e-12)

    def test_boundary_shares_not_estimable(self):
        with pytest.raises(EstimationError):
            estimate_logit_vot(obs(e21=0.0))
        with pytest.raises(EstimationError):
            estimate_logit_vot(obs(e21=800.0))

    def test_scale_must_be_positive(self):
        with pytest.raises(ValueError):
            estimate_logit_vot(obs(), alpha_star=0.0)


class TestPooling:
    def test_empty_input(self):
        assert pool_cdf_points([]) == []

    def test_single_abscissa_collapses(self):
        pooled = pool_cdf_points([(5.0, 0.2), (5.0, 0.4)])
        assert pooled == [(5.0, pytest.approx(0.3), 2)]

    def test_bins_average_and_count(self):
        points = [(1.0, 0.1), (1.1, 0.3), (9.0, 0.9)]
        pooled = pool_cdf_points(points, num_bins=2)
        assert len(pooled) == 2
        (x0, f0, n0), (x1, f1, n1) = pooled
        assert x0 == pytest.approx(1.05)
        assert f0 == pytest.approx(0.2)
        assert n0 == 2
        assert x1 == pytest.approx(9.0)
        assert f1 == pytest.approx(0.9)
        assert n1 == 1

    def test_invalid_bins(self):
        with pytest.raises(ValueError):
            pool_cdf_points([(1.0, 0.5)], num_bins=0)


class TestObservationValidation:
    def test_paying_rate_bounded(self):
        with pytest.raises(ValueError):
            Observation(0.0, 1.0, 0.02, 100.0, 150.0)
