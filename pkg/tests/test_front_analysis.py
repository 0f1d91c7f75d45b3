import math

import numpy as np
import pytest

from kpplab import front_analysis as fa
from kpplab import traveling_wave as tw
from kpplab.errors import DataError, DomainError, FitError


def make_trace(t, xi, level=0.5, **kw):
    return fa.FrontTrace(times=np.asarray(t, float), xi=np.asarray(xi, float),
                         level=level, **kw)


class TestLevelSet:
    def test_exact_linear_ramp(self):
        x = np.arange(0.0, 20.0 + 1e-9, 0.5)
        u = np.clip((11.0 - x) / 2.0, 0.0, 1.0)  # 1 at x=9, 0 at x=11
        assert fa.level_set((x, u), 0.5) == pytest.approx(10.0, abs=1e-12)

    def test_translation_equivariance(self):
        rng = np.random.default_rng(0)
        dx = 0.1
        x = np.arange(0.0, 30.0, dx)
        u = 1.0 / (1.0 + np.exp(x - 14.0))
        base = fa.level_set((x, u), 0.3)
        for k in (1, 7, 23):
            assert fa.level_set((x + k * dx, u), 0.3) == pytest.approx(base + k * dx, abs=1e-12)

    def test_rightmost_crossing_wins(self):
        x = np.arange(0.0, 10.0, 0.1)
        u = np.exp(-((x - 3) ** 2)) + 0.8 * np.exp(-((x - 7) ** 2) / 0.25)
        pos = fa.level_set((x, u), 0.5)
        assert pos > 6.5  # the bump ahead of the main front

    def test_below_level_everywhere(self):
        x = np.arange(0.0, 5.0, 0.1)
        assert fa.level_set((x, 0.01 * np.ones_like(x)), 0.5) == -math.inf

    def test_nonfinite_rejected(self):
        x = np.arange(0.0, 5.0, 0.1)
        u = np.ones_like(x)
        u[3] = math.nan
        with pytest.raises(DataError):
            fa.level_set((x, u), 0.5)

    def test_sampled_wave_front_location(self):
        prof = tw.compute_profile(2 / math.sqrt(6), 1.0, z_min=-40, z_max=40)
        dx = 0.05
        x = np.arange(-20.0, 60.0, dx)
        u = prof.evaluate(x - 17.0)
        pos = fa.level_set((x, u), 0.25)
        assert pos == pytest.approx(17.0, abs=dx * dx)


class TestFitDelay:
    def test_exact_model_recovery(self):
        t = np.linspace(100.0, 1000.0, 400)
        xi = 2.0 * t - 1.5 * np.log(t) + 3.0
        fit = fa.fit_delay(make_trace(t, xi), mode="free", window=(100, 1000))
        assert fit.c_hat == pytest.approx(2.0, abs=1e-10)
        assert fit.theta_hat == pytest.approx(-1.5, abs=1e-8)
        assert fit.C_hat == pytest.approx(3.0, abs=1e-7)

    def test_fixed_mode_with_bounded_noise(self):
        # the sin(log t) perturbation needs > one log-period in the window to
        # decorrelate from the log t regressor
        t = np.geomspace(10.0, 1e5, 2000)
        xi = 2.0 * t - 1.5 * np.log(t) + 3.0 + 0.5 * np.sin(np.log(t))
        fit = fa.fit_delay(make_trace(t, xi), c_star=2.0, window=(10, 1e5))
        assert fit.c_hat == 2.0
        assert abs(fit.theta_hat - (-1.5)) < 0.1

    def test_free_mode_collinearity_documented(self):
        t = np.arange(50.0, 200.0, 0.5)
        c, th, C = 1.6655036280997533, -3.817831227858903, 2.0
        xi = c * t + th * np.log(t) + C
        fit = fa.fit_delay(make_trace(t, xi), mode="free", window=(50, 200))
        assert abs(fit.c_hat - c) < 1e-3
        assert abs(fit.theta_hat - th) / abs(th) < 0.05

    def test_affine_equivariance_fixed_mode(self):
        t = np.linspace(200.0, 900.0, 300)
        xi = 1.5 * t - 2.0 * np.log(t) + 1.0
        base = fa.fit_delay(make_trace(t, xi), c_star=1.5, window=(200, 900))
        shifted = fa.fit_delay(make_trace(t, xi + 0.7 * np.log(t) + 4.0),
                               c_star=1.5, window=(200, 900))
        assert shifted.theta_hat - base.theta_hat == pytest.approx(0.7, abs=1e-9)
        assert shifted.C_hat - base.C_hat == pytest.approx(4.0, abs=1e-7)

    def test_default_window_is_last_dyadic_span(self):
        t = np.linspace(1.0, 400.0, 400)
        xi = 2.0 * t
        fit = fa.fit_delay(make_trace(t, xi), c_star=2.0)
        assert fit.window == (100.0, 400.0)

    def test_short_window_raises(self):
        t = np.array([10.0, 11.0])
        with pytest.raises(FitError):
            fa.fit_delay(make_trace(t, 2 * t), c_star=2.0, window=(10, 11))

    def test_loglog_regressor(self):
        t = np.linspace(10.0, 2000.0, 800)
        xi = 1.4 * t - 2.1 * np.log(t) + 0.9 * np.log(np.log(t)) + 5.0
        fit = fa.fit_delay(make_trace(t, xi), c_star=1.4, window=(10, 2000),
                           include_loglog=True)
        assert fit.loglog_hat == pytest.approx(0.9, abs=1e-6)
        plain = fa.fit_delay(make_trace(t, xi), c_star=1.4, window=(10, 2000))
        assert fit.residual_rms < plain.residual_rms

    def test_fixed_needs_c(self):
        t = np.linspace(10.0, 100.0, 50)
        with pytest.raises(DomainError):
            fa.fit_delay(make_trace(t, 2 * t), mode="fixed")


class TestAmplitudeFit:
    def test_synthetic_recovery(self):
        t = np.linspace(50.0, 800.0, 400)
        u = np.exp(-1.4 * np.log(t) - 0.21 * t + 2.0)
        trace = make_trace(t, 2 * t, u_at_X=u, x_of_X=2.2 * t)
        af = fa.amplitude_fit(trace, window=(50, 800))
        assert af.power_exponent == pytest.approx(-1.4, abs=1e-8)
        assert af.exponential_rate == pytest.approx(-0.21, abs=1e-10)

    def test_underflow_raises_with_advice(self):
        t = np.linspace(50.0, 800.0, 200)
        u = np.exp(-0.21 * t)
        u[-50:] = 0.0
        trace = make_trace(t, 2 * t, u_at_X=u, x_of_X=2.2 * t)
        with pytest.raises(FitError, match="window"):
            fa.amplitude_fit(trace, window=(50, 800))

    def test_missing_samples(self):
        t = np.linspace(50.0, 800.0, 200)
        with pytest.raises(FitError):
            fa.amplitude_fit(make_trace(t, 2 * t), window=(50, 800))


@pytest.fixture(scope="module")
def wave():
    return tw.compute_profile(2 / math.sqrt(6), 1.0, z_min=-40, z_max=40)


class TestProfileDistance:

    def test_exact_shifted_samples(self, wave):
        x = np.arange(-30.0, 45.0, 0.02)
        u = wave.evaluate(x - 8.3)
        assert fa.profile_distance((x, u), wave, 0.25) < 1e-6

    def test_profile_selection_is_detectable(self):
        # the pulled exponent at a = 0.5 versus the critical one: the
        # level-aligned separation (0.022) clears the 0.02 convergence gate,
        # so a wrong-profile match cannot masquerade as convergence
        pulled = tw.compute_profile(0.3928932188134525, 0.5, z_min=-60, z_max=40)
        critical = tw.compute_profile(math.sqrt(0.5), 0.5, z_min=-60, z_max=40)
        x = np.arange(-50.0, 45.0, 0.02)
        u = critical.evaluate(x - 8.3)
        assert fa.profile_distance((x, u), pulled, 0.25) > 0.02

    def test_alignment_level_must_cross(self, wave):
        x = np.arange(0.0, 5.0, 0.1)
        with pytest.raises(DataError):
            fa.profile_distance((x, np.full_like(x, 1e-4)), wave, 0.25)


class TestRatioToOracle:
    def test_self_ratio_is_one(self):
        from kpplab.pde_solver import Field

        fld = Field(x_lo=0.0, dx=0.1, u=np.exp(-0.5 * np.arange(0, 30, 0.1)), t=1.0)
        pts = np.arange(2.05, 25.0, 1.0)
        stats = fa.ratio_to_oracle(fld, lambda x: fld.value_at(x), pts)
        assert stats.minimum == pytest.approx(1.0, abs=1e-12)
        assert stats.maximum == pytest.approx(1.0, abs=1e-12)
        assert stats.n_skipped == 0

    def test_skipped_points_counted(self):
        from kpplab.pde_solver import Field

        u = np.exp(-0.5 * np.arange(0, 30, 0.1))
        u[200:] = 0.0
        fld = Field(x_lo=0.0, dx=0.1, u=u, t=1.0)
        stats = fa.ratio_to_oracle(fld, lambda x: math.exp(-0.5 * x), np.arange(1.0, 29.0, 1.0))
        assert stats.n_skipped > 0
        assert stats.n + stats.n_skipped == 28


class TestFrontTrace:
    def test_times_must_increase(self):
        with pytest.raises(DataError):
            make_trace([1.0, 1.0, 2.0], [0, 0, 0])
