import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluidsym import emtensor
from fluidsym.charges import GENERATORS, Generator, all_charges, charge_density, drift_scale
from fluidsym.dynamics import Potential, evolve, standard_datum, window_plateau, windowed_plane_wave
from fluidsym.grid import FieldError, FieldMap2D, FieldPair, Grid1D
from fluidsym.poisson import random_compact_state
from fluidsym.schrodinger import Nonlinearity, background_packet, evolve_nls, plane_wave


def uniform(R=2.0, n=64):
    g = Grid1D(n, 10.0)
    return FieldPair.from_arrays(g, np.full(n, R), np.zeros(n)), np.ones(n)


class TestOrdinaryTensor:
    def test_hand_values_conformal(self):
        st_, u = uniform()
        T = emtensor.tensor_Q(st_, Potential.conformal(1.0), u=u)
        assert np.allclose(T.tt, 9.0) and np.allclose(T.xx, 18.0)
        assert np.allclose(T.tx, 2.0)

    def test_hand_values_quadratic(self):
        st_, u = uniform()
        pot = Potential.power(1.0, 2.0)
        T = emtensor.tensor_Q(st_, pot, u=u)
        assert np.allclose(T.tt, 5.0) and np.allclose(T.xx, 6.0)
        assert np.allclose(T.xx - 2 * T.tt, -4.0)

    def test_free_state_at_rest(self):
        st_, _ = uniform()
        T = emtensor.tensor_Q(st_, Potential.free())
        assert all(np.all(v == 0) for v in T.as_dict().values())

    def test_momentum_density_row(self):
        st_ = standard_datum()
        T = emtensor.tensor_Q(st_, Potential.free())
        assert np.allclose(T.tx, charge_density(Generator.P, st_, Potential.free()), atol=1e-15)

    def test_quantum_potential_rejected(self):
        st_, _ = uniform()
        with pytest.raises(ValueError, match="quantum pressure"):
            emtensor.tensor_Q(st_, Potential(quantum=True))


class TestContinuity:
    def test_plane_wave_plateau(self):
        g = Grid1D(1024, 40.0)
        traj = evolve(windowed_plane_wave(g, 0.5), Potential.free(), 0.01, 0.5)
        assert emtensor.continuity_residual(traj, Potential.free()).max_abs(window_plateau(g)) <= 1e-10

    def test_converges_on_free_run(self):
        pot = Potential.free()
        res = [emtensor.continuity_residual(evolve(standard_datum(), pot, dt, 0.5), pot).max_abs()
               for dt in (0.02, 0.01)]
        assert res[1] <= 1e-6
        assert res[0] / res[1] >= 8

    def test_fake_trajectory_is_detected(self):
        traj = evolve(standard_datum(), Potential.free(), 0.01, 0.1)
        rng = np.random.default_rng(0)
        noisy = FieldMap2D(traj.grid, traj.times, traj.R_samples,
                           traj.Theta_samples + 0.1 * rng.standard_normal(traj.Theta_samples.shape))
        assert emtensor.continuity_residual(noisy, Potential.free()).max_abs() > 1e-1

    def test_too_few_slices(self):
        traj = evolve(standard_datum(), Potential.free(), 0.01, 0.02)
        with pytest.raises(FieldError, match="insufficient trajectory resolution"):
            emtensor.continuity_residual(traj, Potential.free())


class TestExtendedTensor:
    def test_symmetric(self):
        assert emtensor.tensor_M(standard_datum(), Potential.conformal(0.5)).symmetry_defect() <= 1e-15

    def test_traceless_for_cubic_potential(self):
        assert np.max(np.abs(emtensor.tensor_M(standard_datum(), Potential.conformal(0.5)).trace())) <= 1e-13

    def test_trace_for_inverse_potential(self):
        st_, _ = uniform(R=1.0)
        assert np.allclose(emtensor.tensor_M(st_, Potential.membrane(1.0)).trace(), 4.0)

    def test_relation_needs_overall_sign(self):
        rep = emtensor.relation_check(standard_datum(), Potential.free())
        assert rep.sigma == -1
        assert rep.max_residual() <= 1e-10
        assert rep.max_printed() > 1e-3

    def test_evaluate_at_other_time_rejected(self):
        M = emtensor.tensor_M(standard_datum(), Potential.free())
        with pytest.raises(ValueError):
            M.evaluate("t", "t", [0.0], t=1.0)

    def test_evaluate_on_grid_matches_samples(self):
        M = emtensor.tensor_M(standard_datum(), Potential.free())
        g = M.grid
        assert np.allclose(M.evaluate("x", "s", g.x[::64]), M.lower("x", "s")[::64], atol=1e-12)


class TestCurrents:
    def test_number_current_density(self):
        st_ = standard_datum()
        j = emtensor.current(Generator.N, st_, Potential.free())
        assert np.allclose(j.density, st_.R.values, atol=1e-15)

    def test_expansion_density_matches_charge_density(self):
        st_ = standard_datum(t=0.3)
        pot = Potential.free()
        j = emtensor.current(Generator.C1, st_, pot)
        assert np.allclose(j.density, charge_density(Generator.C1, st_, pot), atol=1e-12)

    @pytest.mark.parametrize("t", [0.0, 0.4])
    def test_all_charges_from_currents(self, t):
        st_ = standard_datum(t=t)
        pot = Potential.free()
        q = all_charges(st_, pot)
        for gen in GENERATORS:
            assert abs(emtensor.current(gen, st_, pot).Q_value - q[gen]) <= 1e-8 * drift_scale(q[gen]), gen


class TestSchrodingerTensor:
    def test_plane_wave_is_constant(self):
        g = Grid1D(128, 40.0)
        M = emtensor.tensor_schrodinger(plane_wave(g, 2))
        spread = np.ptp(M.components, axis=2)
        assert np.max(spread) <= 1e-12

    def test_continuity_converges_and_ablation_breaks_it(self):
        g = Grid1D(256, 40.0)
        packet = background_packet(g, momentum=0.7, centre=0.5)
        full, ablated = [], []
        for dt in (0.004, 0.002):
            slices = evolve_nls(packet, Nonlinearity.linear(), dt, 0.2).slices()
            full.append(emtensor.tensor_continuity(emtensor.tensor_schrodinger(w) for w in slices).max_abs())
            ablated.append(emtensor.tensor_continuity(
                emtensor.tensor_schrodinger(w, ablate_hessian=True) for w in slices).max_abs())
        assert full[1] <= 1e-8
        assert full[0] / full[1] >= 4
        assert min(ablated) >= 1e-2


class TestProperties:
    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(0.05, 3.0))
    def test_trace_identity_holds_only_for_cubic(self, seed, c):
        s = random_compact_state(Grid1D(128, 40.0), np.random.default_rng(seed), pedestal=0.05)
        assert np.max(np.abs(emtensor.trace_check(s, Potential.conformal(c)))) <= 1e-13 * max(1.0, c)
        assert np.max(np.abs(emtensor.trace_check(s, Potential.power(c, 2.0)))) > 1e-6

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_relation_sign_is_state_independent(self, seed):
        s = random_compact_state(Grid1D(128, 40.0), np.random.default_rng(seed), pedestal=0.05)
        assert emtensor.relation_check(s, Potential.conformal(0.3)).sigma == -1
