import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluidsym.dynamics import standard_datum
from fluidsym.grid import FieldError, Grid1D
from fluidsym.schrodinger import (Nonlinearity, PhaseSingularityError, WaveField, background_packet,
                                  effective_potential_check, evolve_nls, hydro_decompose, plane_wave,
                                  real_field_check)

G = Grid1D(256, 40.0)
LIN = Nonlinearity.linear()


def momentum(w):
    return G.quad(np.imag(np.conj(w.psi) * G.diff_complex(w.psi)))


class TestWaveField:
    def test_zero_field_rejected(self):
        with pytest.raises(FieldError, match="zero norm"):
            WaveField(G, np.zeros(G.n))

    def test_shape_checked(self):
        with pytest.raises(FieldError):
            WaveField(G, np.ones(3))

    def test_plane_wave_velocity(self):
        k = 2 * math.pi * 3 / G.L
        assert np.allclose(plane_wave(G, 3).velocity(), k, atol=1e-12)


class TestEvolution:
    def test_plane_wave_exact(self):
        traj = evolve_nls(plane_wave(G, 3), LIN, 0.004, 1.0)
        assert np.max(np.abs(traj.psi[-1] - plane_wave(G, 3, t=1.0).psi)) <= 1e-10

    def test_linear_norm(self):
        p = background_packet(G, momentum=0.7, centre=0.5)
        traj = evolve_nls(p, LIN, 0.004, 1.0)
        assert max(abs(w.norm() - p.norm()) for w in traj.slices()) / p.norm() <= 1e-12

    def test_quintic_invariants(self):
        nl = Nonlinearity.quintic(0.1)
        p = background_packet(G, momentum=0.7, centre=0.5)
        drift = []
        for dt in (0.004, 0.002):
            w = evolve_nls(p, nl, dt, 0.3).slices()
            assert max(abs(x.norm() - p.norm()) for x in w) / p.norm() <= 1e-12
            assert max(abs(momentum(x) - momentum(w[0])) for x in w) <= 1e-12
            drift.append(max(abs(nl.energy(x) - nl.energy(w[0])) for x in w))
        # Strang splitting: second order in dt
        assert drift[1] <= 1e-5 and drift[0] / drift[1] >= 3

    def test_unresolved_time_step(self):
        with pytest.raises(ValueError, match="highest retained mode"):
            evolve_nls(plane_wave(G, 1), LIN, 0.1, 1.0)

    def test_bad_final_time(self):
        with pytest.raises(ValueError):
            evolve_nls(plane_wave(G, 1), LIN, 0.001, 0.0)


class TestHydrodynamics:
    def test_plane_wave_decomposition(self):
        k = 2 * math.pi * 3 / G.L
        h = hydro_decompose(plane_wave(G, 3, amplitude=1.5))
        assert np.allclose(h.R.values, 2.25, atol=1e-14)
        assert np.ptp(h.Theta.values - k * G.x) <= 1e-12

    def test_vortex_rejected(self):
        psi = (G.x - 0.0).astype(complex)
        with pytest.raises(PhaseSingularityError, match="phase singularity"):
            hydro_decompose(WaveField(G, psi))

    def test_linear_hydrodynamic_equations(self):
        p = background_packet(G, momentum=0.7, centre=0.5)
        res = [effective_potential_check(evolve_nls(p, LIN, dt, 0.2).hydro()).max_abs() for dt in (0.004, 0.002)]
        assert res[1] <= 1e-8
        assert res[1] < res[0]

    def test_quintic_hydrodynamic_equations_converge(self):
        nl = Nonlinearity.quintic(0.1)
        p = background_packet(G, momentum=0.7, centre=0.5)
        res = [effective_potential_check(evolve_nls(p, nl, dt, 0.3).hydro(), nl).max_abs() for dt in (0.004, 0.002)]
        assert res[0] / res[1] >= 3

    def test_wrong_sign_potential_is_detected(self):
        nl = Nonlinearity.quintic(0.1)
        traj = evolve_nls(background_packet(G, momentum=0.7), nl, 0.002, 0.3).hydro()
        good = effective_potential_check(traj, nl).max_abs()
        bad = effective_potential_check(traj, Nonlinearity.quintic(-0.1)).max_abs()
        assert bad > 100 * good


class TestRealField:
    def test_checks_on_standard_datum(self):
        rep = real_field_check(standard_datum())
        assert rep.section_residual == 0.0
        assert rep.weak_condition_symbolic
        assert rep.weak_condition_residual <= 4 * np.finfo(float).eps
        assert rep.reduced_density_residual <= 1e-10

    def test_as_dict(self):
        assert set(real_field_check(standard_datum()).as_dict()) >= {"section_residual", "s_points"}


class TestProperties:
    @settings(max_examples=15, deadline=None)
    @given(st.integers(-5, 5), st.floats(0.1, 2.0))
    def test_plane_waves_are_exact(self, mode, amp):
        traj = evolve_nls(plane_wave(G, mode, amplitude=amp), LIN, 0.004, 0.5)
        assert np.max(np.abs(traj.psi[-1] - plane_wave(G, mode, t=0.5, amplitude=amp).psi)) <= 1e-10 * amp

    @settings(max_examples=10, deadline=None)
    @given(st.floats(-1.0, 1.0), st.floats(0.0, 0.3))
    def test_norm_conserved_for_any_packet(self, p, c):
        w0 = background_packet(G, momentum=p)
        traj = evolve_nls(w0, Nonlinearity.quintic(c), 0.004, 0.1)
        assert abs(traj.slice(len(traj) - 1).norm() - w0.norm()) <= 1e-12 * w0.norm()

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.integers(4, 128))
    def test_real_field_average_for_any_state(self, seed, s_points):
        from fluidsym.poisson import random_compact_state

        s = random_compact_state(Grid1D(128, 40.0), np.random.default_rng(seed), pedestal=0.05)
        assert real_field_check(s, s_points=s_points).reduced_density_residual <= 1e-10
