import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluidsym.bargmann import (MAP_NAMES, InterchangeUndefinedError, equivariant_lift, extended_map,
                               free_equation_residual, interchange_transform, linear_phase, named_transform,
                               plane_wave, project_transform, self_similar)

XQ = np.linspace(-1.0, 1.0, 9)
BETA, R0, T = 0.6, 1.3, 0.4


def plane(beta, x, t):
    return beta * x - 0.5 * beta**2 * t


def bump(x, t):
    return np.exp(-(x**2)) * (1 + 0.1 * t**2)


class TestLift:
    def test_section_and_vertical_derivative(self):
        lift = equivariant_lift(plane_wave(BETA, R0))
        th = lift.theta(XQ, T, -plane(BETA, XQ, T))
        assert np.allclose(th, 0.0, atol=1e-15)
        dx, dt, ds = lift.dtheta(XQ, T, 0.3)
        assert np.all(ds == 1.0)
        assert np.allclose(dx, BETA) and np.allclose(dt, -0.5 * BETA**2)

    def test_density_independent_of_fibre(self):
        lift = equivariant_lift(self_similar())
        assert np.array_equal(lift.rho(XQ, T, 0.0), lift.rho(XQ, T, 5.0))


class TestClosedForms:
    def test_identity(self):
        sol = project_transform(extended_map("identity"), plane_wave(BETA, R0), T, XQ)
        assert np.allclose(sol.Theta_star, plane(BETA, XQ, T), atol=1e-15)
        assert np.allclose(sol.R_star, R0, atol=1e-15)

    def test_antiboost_slope_law(self):
        a = 0.3
        sol = project_transform(extended_map("antiboost", a), plane_wave(BETA, R0), T, XQ)
        b = BETA / (1 - 0.5 * a * BETA)
        assert np.max(np.abs(sol.Theta_star - plane(b, XQ, T))) <= 1e-12
        assert np.allclose(sol.R_star, R0 * (1 - 0.5 * a * BETA) ** 2, rtol=1e-12)

    def test_time_dilation(self):
        d = 0.2
        sol = project_transform(extended_map("time_dilation", d), plane_wave(BETA, R0), T, XQ)
        assert np.max(np.abs(sol.Theta_star - plane(np.exp(d) * BETA, XQ, T))) <= 1e-12
        assert np.allclose(sol.R_star, np.exp(-d) * R0, rtol=1e-12)

    def test_boost_shifts_slope(self):
        sol = project_transform(extended_map("boost", 0.25), plane_wave(BETA, R0), T, XQ)
        assert np.max(np.abs(sol.Theta_star - plane(BETA - 0.25, XQ, T))) <= 1e-12
        assert np.allclose(sol.R_star, R0, rtol=1e-12)

    def test_expansion(self):
        k = 0.1
        src = plane_wave(BETA, R0)
        sol = project_transform(extended_map("expansion", k), src, T, XQ)
        xs, ts = XQ / (1 - k * T), T / (1 - k * T)
        expected = plane(BETA, xs, ts) - k * XQ**2 / (2 * (1 - k * T))
        assert np.max(np.abs(sol.Theta_star - expected)) <= 1e-12
        assert np.allclose(sol.R_star, R0 / (1 - k * T), rtol=1e-12)

    @pytest.mark.parametrize("name", [n for n in MAP_NAMES if n != "interchange"])
    def test_generic_solver_matches_explicit_formula(self, name):
        src = self_similar()
        gen = project_transform(extended_map(name, 0.15), src, T, XQ)
        exp = named_transform(name, 0.15, src, T, XQ)
        assert np.max(np.abs(gen.Theta_star - exp.Theta_star)) <= 1e-10
        assert np.max(np.abs(gen.R_star - exp.R_star)) <= 1e-10
        assert gen.max_residual <= 1e-10


class TestInterchange:
    def test_linear_phase(self):
        k = 2.0
        src = linear_phase(k, bump)
        sol = interchange_transform(src, T, XQ, window=(-2.0, 2.0))
        assert np.allclose(sol.Theta_star, T / k, atol=1e-13)
        assert np.allclose(sol.t_star, -T / k, atol=1e-13)
        assert np.allclose(sol.R_star, k * bump(XQ, -T / k), rtol=1e-12)

    def test_stationary_phase_is_rejected(self):
        with pytest.raises(InterchangeUndefinedError, match="interchange undefined"):
            interchange_transform(linear_phase(0.0, bump), T, XQ, window=(-1.0, 1.0))

    def test_window_required_for_analytic_source(self):
        with pytest.raises(ValueError, match="window"):
            interchange_transform(linear_phase(1.0, bump), T, XQ)

    def test_twice_restores_the_data(self):
        k = 2.0
        src = linear_phase(k, bump)
        first = interchange_transform(src, T, XQ, window=(-2.0, 2.0))
        # the image is again a linear phase, with rate 1 / k
        again = linear_phase(1 / k, lambda x, t: k * bump(x, -t / k))
        second = interchange_transform(again, T, XQ, window=(-2.0, 2.0))
        assert np.allclose(first.R_star, k * bump(XQ, -T / k))
        assert np.allclose(second.Theta_star, k * T, atol=1e-12)
        assert np.allclose(second.R_star, bump(XQ, T), rtol=1e-12)


class TestFreeEquations:
    @pytest.mark.parametrize("name", ["antiboost", "C1", "time_dilation", "expansion"])
    def test_images_of_free_solutions_are_free(self, name):
        src = self_similar()
        residuals = []
        for h in (2e-2, 1e-2):
            hj, cont, _, _ = free_equation_residual(
                lambda x, t: named_transform(name, 0.15, src, t, x), np.array([-0.5, 0.2, 0.7]), 0.3, h)
            residuals.append(max(np.max(np.abs(hj)), np.max(np.abs(cont))))
        assert residuals[1] <= 1e-6
        assert residuals[1] < residuals[0] or residuals[1] <= 1e-10


class TestProperties:
    @settings(max_examples=30, deadline=None)
    @given(st.floats(-0.6, 0.6), st.floats(-1.0, 1.0), st.floats(-0.5, 0.5))
    def test_antiboost_slope_law_for_any_parameter(self, a, beta, t):
        sol = project_transform(extended_map("antiboost", a), plane_wave(beta, R0), t, XQ)
        b = beta / (1 - 0.5 * a * beta)
        assert np.max(np.abs(sol.Theta_star - plane(b, XQ, t))) <= 1e-10
        assert np.allclose(sol.R_star, R0 * (1 - 0.5 * a * beta) ** 2, rtol=1e-10)

    @settings(max_examples=20, deadline=None)
    @given(st.sampled_from(["boost", "time_dilation", "dilatation"]), st.floats(-0.3, 0.3))
    def test_inverse_parameter_undoes_map(self, name, p):
        src = plane_wave(BETA, R0)
        fwd = named_transform(name, p, src, T, XQ)
        img = plane_wave(float(np.polyfit(XQ, fwd.Theta_star, 1)[0]), float(fwd.R_star[0]))
        back = named_transform(name, -p, img, T, XQ)
        assert np.max(np.abs(back.Theta_star - plane(BETA, XQ, T))) <= 1e-9
