"""Tests for the model-space transform, noise schedule and Tweedie estimate."""

import numpy as np
import pytest

from petsr.core.errors import ConfigurationError, GeometryError, NumericalFailure
from petsr.core.grid import GridImage, Units
from petsr.core.rng import make_rng
from petsr.prior.schedule import add_noise, make_schedule, noise_from_estimate, tweedie_estimate
from petsr.prior.transform import (
    TransformParams,
    calibrate_kappa,
    calibrate_transform,
    clip_model_space,
    from_model_space,
    to_model_space,
)


class TestTransform:
    def test_roundtrip(self):
        z = GridImage(make_rng(0).random((8, 8)) * 5.0, 2.0)
        p = TransformParams(s_scale=0.7, kappa=2.3)
        back = from_model_space(to_model_space(z, p), p)
        np.testing.assert_allclose(back.data, z.data, rtol=1e-12, atol=1e-12)
        assert back.units is Units.ACTIVITY

    def test_model_space_units(self):
        x = to_model_space(GridImage(np.ones((2, 2)), 1.0), TransformParams())
        assert x.units is Units.MODEL_SPACE
        assert x.data[0, 0] == pytest.approx(np.arcsinh(1.0))

    def test_invalid_params(self):
        with pytest.raises(ConfigurationError):
            TransformParams(s_scale=0.0)
        with pytest.raises(ConfigurationError):
            TransformParams(kappa=-1.0)

    def test_overflow_guard(self):
        x = GridImage(np.full((2, 2), 800.0), 1.0, Units.MODEL_SPACE)
        with pytest.raises(NumericalFailure, match="overflow"):
            from_model_space(x, TransformParams())

    def test_clamp_zeroes_negatives(self):
        x = GridImage(np.array([[-1.0, 0.5], [0.0, -0.1]]), 1.0, Units.MODEL_SPACE)
        z = from_model_space(x, TransformParams(), clamp=True)
        assert np.all(z.data >= 0)
        assert z.data[0, 1] == pytest.approx(np.sinh(0.5))
        assert from_model_space(x, TransformParams()).data[0, 0] < 0

    def test_kappa_is_high_percentile(self):
        data = [np.linspace(0.0, 10.0, 1001)]
        kappa = calibrate_kappa(data, s_scale=1.0)
        assert kappa == pytest.approx(np.percentile(np.arcsinh(data[0]), 99.5))

    def test_kappa_all_zero_falls_back_to_one(self):
        assert calibrate_kappa([np.zeros((4, 4))]) == 1.0

    def test_kappa_needs_data(self):
        with pytest.raises(ConfigurationError):
            calibrate_kappa([])



class TestClipping:
    def test_clip_bounds(self):
        x = GridImage(np.array([[-3.0, 0.5], [2.0, 40.0]]), 1.0, Units.MODEL_SPACE)
        clipped = clip_model_space(x, TransformParams(1.0, 1.0, x_max=1.5))
        np.testing.assert_array_equal(clipped.data, [[0.0, 0.5], [1.5, 1.5]])
        assert clipped.units is Units.MODEL_SPACE

    def test_no_ceiling_only_clips_below(self):
        x = GridImage(np.array([[-1.0, 300.0]]), 1.0, Units.MODEL_SPACE)
        np.testing.assert_array_equal(clip_model_space(x, TransformParams()).data, [[0.0, 300.0]])

    def test_calibrated_ceiling_covers_training_peak(self):
        activities = [make_rng(1).random((8, 8)) * 4.0, make_rng(2).random((8, 8))]
        p = calibrate_transform(activities, s_scale=0.5)
        assert p.kappa == calibrate_kappa(activities, 0.5)
        peak = max(a.max() for a in activities)
        assert p.x_max == pytest.approx(1.1 * np.arcsinh(peak / 0.5) / p.kappa)
        assert peak < p.z_max < 2 * peak

    def test_all_zero_training_has_no_ceiling(self):
        p = calibrate_transform([np.zeros((4, 4))])
        assert p.x_max is None
        assert p.z_max is None

    @pytest.mark.parametrize("x_max", [0.0, -1.0, float("inf"), float("nan")])
    def test_invalid_ceiling(self, x_max):
        with pytest.raises(ConfigurationError, match="x_max"):
            TransformParams(1.0, 1.0, x_max=x_max)

class TestNoiseSchedule:
    def test_single_step(self):
        sched = make_schedule(1, 0.01, 0.02)
        np.testing.assert_allclose(sched.alpha_bars, [0.99])

    def test_default_final_alpha_bar(self):
        sched = make_schedule()
        assert sched.n_train_steps == 1000
        assert sched.alpha_bar(1000) == pytest.approx(4.04e-5, rel=0.01)
        assert sched.alpha_bar(1) == pytest.approx(1.0 - 1e-4)

    def test_alpha_bar_zero_is_clean(self):
        assert make_schedule(10).alpha_bar(0) == 1.0

    def test_alpha_bar_strictly_decreasing(self):
        assert np.all(np.diff(make_schedule(50).alpha_bars) < 0)

    def test_out_of_range_timestep(self):
        with pytest.raises(ConfigurationError, match="outside"):
            make_schedule(10).alpha_bar(11)

    def test_invalid_betas(self):
        with pytest.raises(ConfigurationError):
            make_schedule(10, 0.02, 0.01)
        with pytest.raises(ConfigurationError):
            make_schedule(0)

    def test_describe(self):
        assert make_schedule(20, 0.001, 0.01).describe() == {
            "n_train_steps": 20, "beta_min": 0.001, "beta_max": 0.01,
        }


class TestNoising:
    def test_add_noise_variance(self):
        sched = make_schedule()
        t = 300
        x0 = GridImage(np.zeros((256, 256)), 1.0, Units.MODEL_SPACE)
        noise = x0.with_data(make_rng(1).standard_normal((256, 256)))
        x_t = add_noise(x0, t, sched, noise)
        assert x_t.data.var() == pytest.approx(1.0 - sched.alpha_bar(t), rel=0.02)

    def test_add_noise_at_zero_is_identity(self):
        x0 = GridImage(make_rng(2).random((4, 4)), 1.0, Units.MODEL_SPACE)
        noise = x0.with_data(np.ones((4, 4)))
        np.testing.assert_array_equal(add_noise(x0, 0, make_schedule(10), noise).data, x0.data)

    @pytest.mark.parametrize("t", [1, 500, 1000])
    def test_tweedie_inverts_noising(self, t):
        sched = make_schedule()
        rng = make_rng(3, t)
        x0 = GridImage(rng.standard_normal((16, 16)), 1.0, Units.MODEL_SPACE)
        noise = x0.with_data(rng.standard_normal((16, 16)))
        x_t = add_noise(x0, t, sched, noise)
        np.testing.assert_allclose(tweedie_estimate(x_t, t, noise, sched).data, x0.data, atol=1e-12)

    def test_dimension_mismatch(self):
        a = GridImage(np.zeros((4, 4)), 1.0)
        b = GridImage(np.zeros((4, 5)), 1.0)
        with pytest.raises(GeometryError):
            tweedie_estimate(a, 1, b, make_schedule(10))
        with pytest.raises(GeometryError):
            add_noise(a, 1, make_schedule(10), b)

    @pytest.mark.parametrize("t", [1, 250, 999])
    def test_noise_from_estimate_inverts_tweedie(self, t):
        sched = make_schedule(1000)
        rng = make_rng(8, t)
        x_t = GridImage(rng.standard_normal((8, 8)), 1.0, Units.MODEL_SPACE)
        eps = GridImage(rng.standard_normal((8, 8)), 1.0, Units.MODEL_SPACE)
        x0 = tweedie_estimate(x_t, t, eps, sched)
        np.testing.assert_allclose(noise_from_estimate(x_t, t, x0, sched).data, eps.data, rtol=1e-6, atol=1e-9)

    def test_noise_from_estimate_at_clean_step(self):
        x = GridImage(np.ones((4, 4)), 1.0, Units.MODEL_SPACE)
        with pytest.raises(NumericalFailure, match="alpha_bar"):
            noise_from_estimate(x, 0, x, make_schedule(10))
