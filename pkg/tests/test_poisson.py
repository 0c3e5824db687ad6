import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluidsym.charges import GENERATORS, POINCARE_SET, SCHRODINGER_SET, Generator, all_charges, charge, drift_scale
from fluidsym.dynamics import Potential, standard_datum
from fluidsym.grid import FieldPair, Grid1D
from fluidsym.poisson import (PAIRS, STRUCTURE_TABLE, antisymmetry_residual, bracket, format_combination,
                              jacobi_defect, max_residual, random_compact_state, table_entry, verify_table)

G = Generator


def explicit_time_derivative(gen, state, pot, eps=1e-4):
    """dF/dt at fixed fields: only the explicit t in the density moves."""
    def at(t):
        return charge(gen, FieldPair(state.R, state.Theta, t), pot)

    return (at(state.t + eps) - at(state.t - eps)) / (2 * eps)


class TestTable:
    def test_forty_five_pairs(self):
        assert len(PAIRS) == 45
        assert set(STRUCTURE_TABLE) == set(PAIRS)

    def test_antisymmetric_completion(self):
        e = table_entry(G.B, G.H)
        assert e.rhs == {G.P: 1}
        assert table_entry(G.H, G.H).rhs == {}

    def test_formula_text(self):
        assert format_combination({}) == "0"
        assert format_combination({G.Delta: 2, G.D: -2}) == "2 Delta - 2 D"
        assert format_combination({G.P: -1}) == "-P"

    def test_jacobi_identity_of_table(self):
        for a, b, c in itertools.combinations(GENERATORS, 3):
            assert jacobi_defect(a, b, c) == {}, (a, b, c)


class TestBrackets:
    def test_energy_number(self):
        rng = np.random.default_rng(3)
        st_ = random_compact_state(Grid1D(256, 40.0), rng)
        assert abs(bracket(G.H, G.N, st_, Potential.free())) <= 1e-10

    def test_energy_boost_gives_momentum(self):
        # with dF/dt = {F, H} + explicit part, conservation of B forces {H, B} = -P
        st_ = standard_datum()
        pot = Potential.free()
        P = charge(G.P, st_, pot)
        assert bracket(G.H, G.B, st_, pot) == pytest.approx(-P, rel=1e-7)

    def test_expansions_commute(self):
        st_ = standard_datum()
        assert abs(bracket(G.C1, G.C2, st_, Potential.free())) <= 1e-7

    def test_full_table_on_standard_datum(self):
        rows = verify_table(standard_datum(t=0.3), Potential.free())
        assert len(rows) == 45
        assert max_residual(rows) < 1e-7

    @pytest.mark.parametrize("seed", range(5))
    def test_full_table_on_random_states(self, seed):
        st_ = random_compact_state(Grid1D(512, 40.0), np.random.default_rng(seed), t=0.2 * seed)
        assert max_residual(verify_table(st_, Potential.free())) < 1e-7

    def test_poincare_subalgebra_survives_membrane_potential(self):
        st_ = random_compact_state(Grid1D(512, 40.0), np.random.default_rng(8), pedestal=0.2)
        rows = verify_table(st_, Potential.membrane(0.5), generators=[g.value for g in POINCARE_SET])
        assert len(rows) == 15
        assert max_residual(rows) < 1e-7

    def test_schrodinger_subalgebra_survives_cubic_potential(self):
        st_ = random_compact_state(Grid1D(512, 40.0), np.random.default_rng(8), pedestal=0.2)
        rows = verify_table(st_, Potential.conformal(0.5), generators=[g.value for g in SCHRODINGER_SET])
        assert len(rows) == 15
        assert max_residual(rows) < 1e-7

    def test_breaking_outside_the_subalgebra(self):
        st_ = random_compact_state(Grid1D(512, 40.0), np.random.default_rng(8), pedestal=0.2)
        assert max_residual(verify_table(st_, Potential.membrane(0.5))) > 1e-3

    def test_antisymmetry(self):
        assert antisymmetry_residual(standard_datum(), Potential.free()) <= 1e-10

    def test_background_subtraction_vanishes_for_compact_data(self):
        st_ = random_compact_state(Grid1D(256, 40.0), np.random.default_rng(1))
        rows = verify_table(st_, Potential.free())
        for r in rows:
            assert r["residual"] == pytest.approx(r["raw_residual"], abs=1e-12)


class TestProperties:
    @settings(max_examples=8, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(-1.0, 1.0))
    def test_table_holds_for_arbitrary_fields(self, seed, t):
        st_ = random_compact_state(Grid1D(256, 40.0), np.random.default_rng(seed), t=t)
        assert max_residual(verify_table(st_, Potential.free())) < 1e-7

    @settings(max_examples=8, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(-1.0, 1.0))
    def test_hamiltonian_flow_cancels_explicit_time_dependence(self, seed, t):
        """Independent of the table: conserved F obey {F, H} + dF/dt|explicit = 0."""
        st_ = random_compact_state(Grid1D(256, 40.0), np.random.default_rng(seed), t=t)
        pot = Potential.free()
        q = all_charges(st_, pot)
        scale = max(drift_scale(v) for v in q.values())
        for gen in GENERATORS:
            total = bracket(gen, G.H, st_, pot) + explicit_time_derivative(gen, st_, pot)
            assert abs(total) <= 1e-7 * scale, gen

    @settings(max_examples=8, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(0.1, 3.0))
    def test_bracket_is_bilinear(self, seed, lam):
        st_ = random_compact_state(Grid1D(128, 40.0), np.random.default_rng(seed))
        pot = Potential.free()
        scaled = FieldPair.from_arrays(st_.grid, lam * st_.R.values, st_.Theta.values)
        # N is linear in R and P is linear in R: {N, P} scales like R
        assert bracket(G.N, G.P, scaled, pot) == pytest.approx(lam * bracket(G.N, G.P, st_, pot), rel=1e-12, abs=1e-14)
