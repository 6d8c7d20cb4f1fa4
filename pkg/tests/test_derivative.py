import math

import numpy as np
import pytest

from wcreg import (FeasibleClass, GridFunction, GridTooCoarseError, HolderParams,
                   NoisyData, add_noise, differentiate, error_bound, integrate,
                   regularize, sample_feasible, step_size, stencil_worst_noise,
                   sup_error_estimate, sup_norm)


def exact_data(func, n, delta=1e-12):
    return NoisyData(GridFunction.from_callable(func, n), delta)


class TestStepSize:
    def test_known_values(self):
        assert step_size(1e-4, HolderParams(2, 1)) == pytest.approx(0.01, rel=1e-12)
        assert step_size(4e-4, HolderParams(2, 4)) == pytest.approx(0.01, rel=1e-12)

    def test_clips_to_quarter(self):
        # raw value (0.1/0.0005)**(2/3) ~ 34.2
        assert step_size(0.1, HolderParams(1.5, 1e-3)) == 0.25

    def test_clips_to_spacing(self):
        assert step_size(1e-12, HolderParams(2, 1), spacing=0.01) == 0.01

    def test_minimizes_bound(self):
        # scanning oracle: the returned h beats a fine grid of alternatives
        params = HolderParams(1.7, 2.0)
        delta = 3e-4
        h = step_size(delta, params)
        value = error_bound(delta, params, h)
        for trial in np.linspace(1e-4, 0.25, 4001):
            assert value <= error_bound(delta, params, trial) + 1e-12

    def test_stationarity(self):
        params = HolderParams(2, 1)
        delta = 1e-4
        h = step_size(delta, params)
        base = error_bound(delta, params, h)
        assert error_bound(delta, params, 1.01 * h) > base
        assert error_bound(delta, params, 0.99 * h) > base

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            step_size(0.0, HolderParams(2, 1))
        with pytest.raises(ValueError):
            step_size(1e-3, HolderParams(1.0, 1))


class TestDifferentiate:
    def test_exact_on_quadratic_interior(self):
        data = exact_data(lambda x: x ** 2 / 2, 101)
        out = differentiate(data, 0.1)
        x = data.g_delta.x
        k = 50
        assert out.values[k] == pytest.approx(x[k], abs=1e-13)

    def test_constant_maps_to_zero(self):
        data = NoisyData(GridFunction(np.full(51, 3.7)), 1e-6)
        assert sup_norm(differentiate(data, 0.1)) == 0.0

    def test_sine_value(self):
        data = exact_data(lambda x: np.sin(2 * np.pi * x), 101)
        out = differentiate(data, 0.01)
        expected = 2 * math.cos(2 * math.pi * 0.5) * math.sin(2 * math.pi * 0.01) / 0.02
        assert out.values[50] == pytest.approx(expected, rel=1e-12)
        assert out.values[50] == pytest.approx(-6.27905, abs=5e-6)

    def test_shift_invariance(self):
        rng = np.random.default_rng(4)
        g = rng.normal(size=101)
        base = differentiate(NoisyData(GridFunction(g), 1e-3), 0.05).values
        shifted = differentiate(NoisyData(GridFunction(g + 11.25), 1e-3), 0.05).values
        assert np.max(np.abs(base - shifted)) <= 1e-12

    def test_linearity(self):
        rng = np.random.default_rng(8)
        g1 = rng.normal(size=81)
        g2 = rng.normal(size=81)
        alpha, beta = 0.3, -1.7
        lhs = differentiate(NoisyData(GridFunction(alpha * g1 + beta * g2), 1e-3), 0.05).values
        rhs = (alpha * differentiate(NoisyData(GridFunction(g1), 1e-3), 0.05).values
               + beta * differentiate(NoisyData(GridFunction(g2), 1e-3), 0.05).values)
        scale = max(1.0, np.max(np.abs(rhs)))
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale

    def test_rejects_off_lattice_step(self):
        data = exact_data(lambda x: x, 101)
        with pytest.raises(ValueError):
            differentiate(data, 0.0151)

    def test_rejects_large_step(self):
        data = exact_data(lambda x: x, 101)
        with pytest.raises(ValueError):
            differentiate(data, 0.51)


class TestErrorBound:
    def test_known_values(self):
        assert error_bound(1e-4, HolderParams(2, 1), 0.01) == pytest.approx(0.02, rel=1e-12)
        assert error_bound(1e-2, HolderParams(2, 1), 0.1) == pytest.approx(0.2, rel=1e-12)

    def test_small_m_limit(self):
        eta = error_bound(1e-3, HolderParams(2, 1e-12), 0.05)
        assert eta == pytest.approx(1e-3 / 0.05, rel=1e-9)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            error_bound(0.0, HolderParams(2, 1), 0.1)
        with pytest.raises(ValueError):
            error_bound(1e-3, HolderParams(2, 1), 0.0)


class TestRegularize:
    def test_exactness_zero_noise(self):
        n = 1001
        x = np.linspace(0, 1, n)
        data = NoisyData(GridFunction(x ** 2 / 2), 1e-6)
        res = regularize(data, HolderParams(2, 1))
        assert res.h_used == pytest.approx(1e-3, rel=1e-12)
        assert np.max(np.abs(res.u_delta.values[1:-1] - x[1:-1])) <= 1e-12

    def test_worst_case_noise_saturates_bound(self):
        # the stencil-period +-delta pattern drives every interior symmetric
        # quotient to exactly delta/h
        n = 641
        delta = 1e-4
        params = HolderParams(2, 1)
        m = round(step_size(delta, params, spacing=1 / (n - 1)) * (n - 1))
        noise = stencil_worst_noise(n, m, delta)
        res = regularize(NoisyData(noise, delta), params)
        assert round(res.h_used * (n - 1)) == m
        interior = np.abs(res.u_delta.values[m:n - m])
        assert np.max(np.abs(interior - delta / res.h_used)) <= 1e-12

    def test_node_alternating_noise_is_annihilated(self):
        # the node-alternating pattern hits only one-sided stencils; symmetric
        # quotients see samples an even count apart and cancel exactly
        n = 641
        delta = 1e-4
        data = add_noise(GridFunction(np.zeros(n)), delta, "alternating-worst-case", 0)
        res = regularize(data, HolderParams(2, 1))
        m = round(res.h_used * (n - 1))
        assert np.max(np.abs(res.u_delta.values[m:n - m])) == 0.0

    def test_step_is_grid_multiple_and_bound_holds(self):
        res = regularize(exact_data(lambda x: x ** 2 / 2, 101, delta=3e-4), HolderParams(2, 1))
        m = res.h_used * 100
        assert abs(m - round(m)) <= 1e-9
        assert res.eta >= 3e-4 / res.h_used

    def test_grid_too_coarse(self):
        with pytest.raises(GridTooCoarseError):
            regularize(exact_data(lambda x: x, 4, delta=1e-3), HolderParams(2, 1))

    def test_certified_bound_over_ensemble(self):
        # every certified class member stays within eta of the reconstruction
        n = 641
        x = np.linspace(0, 1, n)
        u = GridFunction(0.4 * x)
        g = integrate(u)
        delta = 1e-3
        data = add_noise(g, delta, "alternating-worst-case", 0)
        res = regularize(data, HolderParams(2, 1))
        cls = FeasibleClass("holder", 1.0, data, a=2.0)
        ensemble = sample_feasible(cls, 60, 17, start=u)
        assert len(ensemble) == 60
        assert sup_error_estimate(res.u_delta, cls, ensemble) <= res.eta

    def test_rate_of_measured_error(self):
        # sup error decays at least as fast as eta; the eta exponent is 1-1/a
        n = 641
        x = np.linspace(0, 1, n)
        u = GridFunction(0.4 * x)
        g = integrate(u)
        params = HolderParams(2, 1)
        deltas = np.array([1e-2, 1e-3, 1e-4, 1e-5])
        errs = []
        etas = []
        for delta in deltas:
            data = add_noise(g, delta, "alternating-worst-case", 0)
            res = regularize(data, params)
            errs.append(sup_norm(GridFunction(res.u_delta.values - u.values)))
            etas.append(error_bound(delta, params, step_size(delta, params)))
        eta_slope = np.polyfit(np.log(deltas), np.log(etas), 1)[0]
        err_slope = np.polyfit(np.log(deltas), np.log(errs), 1)[0]
        assert eta_slope == pytest.approx(1 - 1 / params.a, abs=1e-12)
        assert err_slope >= eta_slope - 0.01


class TestStencilWorstNoise:
    def test_within_ball_and_sign_blocks(self):
        noise = stencil_worst_noise(20, 3, 0.1)
        assert np.all(np.abs(noise.values) == 0.1)
        assert np.array_equal(np.sign(noise.values[:6]), np.ones(6))
        assert np.array_equal(np.sign(noise.values[6:12]), -np.ones(6))
