from functools import lru_cache

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from fluidsym import liealg
from fluidsym.conformal_matrix import (FAMILIES, GAMMA3, GENERATOR_NAMES, XI_HAT, PointAtInfinityError,
                                       algebra_defect, algebra_element, apply_matrix, closed_form,
                                       closed_form_factor, conformal_factor, embed, expm, family_matrix,
                                       generator_matrices, group_action, group_defect, infinitesimal_action,
                                       null_defect, project, representation_sign, schrodinger_condition)

ANTIBOOST = np.array([[0, 0, -1.0], [1.0, 0, 0], [0, 0, 0]])
coord = st.floats(-2.0, 2.0)


@lru_cache(maxsize=None)
def _field_fn(index):
    return sp.lambdify(liealg.COORDS, list(liealg.generators()[index].components), "numpy")


def field_at(index, y):
    return np.array(_field_fn(index)(*y), dtype=float)


def jacobian(fn, y, h=1e-5):
    y = np.asarray(y, float)
    cols = []
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        cols.append((fn(y + e) - fn(y - e)) / (2 * h))
    return np.array(cols).T


class TestEmbedding:
    def test_origin(self):
        assert np.array_equal(embed([0, 0, 0]), [0, 0, 0, 1, 0])

    def test_unit_x(self):
        assert np.array_equal(embed([1, 0, 0]), [1, 0, 0, 1, -0.5])

    def test_projection_inverts_embedding(self):
        y = np.array([0.3, -1.2, 2.5])
        assert np.allclose(project(3.7 * embed(y)), y, atol=1e-15)

    def test_point_at_infinity(self):
        with pytest.raises(PointAtInfinityError):
            project([1, 0, 0, 0, 1])


class TestAlgebraElement:
    def test_antiboost_block_is_valid(self):
        Z = algebra_element(Lam=0.7 * ANTIBOOST)
        assert algebra_defect(Z) == 0.0

    def test_vertical_generator(self):
        assert np.array_equal(algebra_element(V=[0, 0, 1]), XI_HAT)

    def test_zero(self):
        assert not np.any(algebra_element())

    def test_rejects_invalid_rotation(self):
        with pytest.raises(ValueError, match="invalid rotation"):
            algebra_element(Lam=np.diag([1.0, 0, 0]))


class TestActions:
    def test_vertical_translation(self):
        assert np.array_equal(infinitesimal_action(XI_HAT, [0.3, 1.1, -2.0]), [0, 0, 1])

    def test_antiboost_matches_vector_field(self):
        y = np.array([0.4, -0.7, 1.3])
        assert np.allclose(infinitesimal_action(algebra_element(Lam=ANTIBOOST), y), field_at(7, y), atol=1e-15)

    def test_c1_choice_of_w_gives_x8_up_to_sign(self):
        y = np.array([0.4, -0.7, 1.3])
        v = infinitesimal_action(algebra_element(W=[0, 1, 0]), y)
        assert np.allclose(v, field_at(8, y)) or np.allclose(v, -field_at(8, y))

    def test_generator_matrices_reproduce_vector_fields(self):
        rng = np.random.default_rng(5)
        for y in rng.uniform(-2, 2, size=(10, 3)):
            for i, Z in enumerate(generator_matrices()):
                assert np.allclose(infinitesimal_action(Z, y), field_at(i, y), atol=1e-13), GENERATOR_NAMES[i]

    def test_antiboost_finite(self):
        y = group_action(0.5 * algebra_element(Lam=ANTIBOOST), [1, 0, 2])
        assert np.allclose(y, [0, 0.25, 2], atol=1e-15)

    def test_c1_finite(self):
        y = apply_matrix(family_matrix("C1", 1.0), [1, 0, 1])
        assert np.allclose(y, [0.5, 0.25, 0.5], atol=1e-15)

    def test_identity(self):
        y = np.array([0.3, 0.2, -0.1])
        assert np.array_equal(group_action(np.zeros((5, 5)), y), y)

    def test_representation_sign(self):
        pts = np.random.default_rng(2).uniform(-1, 1, size=(4, 3))
        assert representation_sign(pts) == -1


class TestSchrodingerCondition:
    def test_boost(self):
        assert schrodinger_condition(generator_matrices()[3])

    def test_antiboost(self):
        assert not schrodinger_condition(algebra_element(Lam=ANTIBOOST))

    def test_vertical(self):
        assert schrodinger_condition(XI_HAT)

    def test_split_of_the_ten(self):
        flags = [schrodinger_condition(Z) for Z in generator_matrices()]
        assert flags == [True] * 6 + [False] * 4


class TestGroup:
    @pytest.mark.parametrize("name", sorted(FAMILIES))
    def test_group_law(self, name):
        a, b = 0.3, -0.45
        assert np.max(np.abs(family_matrix(name, a) @ family_matrix(name, b) - family_matrix(name, a + b))) <= 1e-12

    @pytest.mark.parametrize("name", sorted(FAMILIES))
    def test_preserves_quadric(self, name):
        M = family_matrix(name, 0.8)
        assert group_defect(M) <= 1e-12
        y = np.array([0.2, -0.4, 0.9])
        assert abs(null_defect(M @ embed(y))) <= 1e-12

    def test_nilpotent_series_matches_scipy(self):
        import scipy.linalg

        Z = 0.6 * generator_matrices()[9]
        assert np.allclose(expm(Z), scipy.linalg.expm(Z), atol=1e-14)


class TestProperties:
    @settings(max_examples=50, deadline=None)
    @given(coord, coord, coord)
    def test_embedding_is_null(self, x, t, s):
        assert abs(null_defect(embed([x, t, s]))) <= 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.sampled_from(sorted(FAMILIES)), st.floats(-0.4, 0.4), coord, coord, coord)
    def test_closed_forms(self, name, p, x, t, s):
        try:
            ref = closed_form(name, p, [x, t, s])
        except PointAtInfinityError:
            return
        got = apply_matrix(family_matrix(name, p), [x, t, s])
        assert np.allclose(got, ref, atol=1e-10, rtol=1e-10)
        assert conformal_factor(family_matrix(name, p), [x, t, s]) == pytest.approx(
            closed_form_factor(name, p, [x, t, s]), rel=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(st.sampled_from(sorted(FAMILIES)), st.floats(-0.3, 0.3), coord, coord, coord)
    def test_maps_are_conformal(self, name, p, x, t, s):
        """J^T gamma J = Omega^2 gamma for the finite maps."""
        y = np.array([x, t, s])
        M = family_matrix(name, p)
        try:
            omega = conformal_factor(M, y)
            J = jacobian(lambda z: apply_matrix(M, z), y)
        except PointAtInfinityError:
            return
        if abs(omega) > 10:
            return
        assert np.allclose(J.T @ GAMMA3 @ J, omega**2 * GAMMA3, atol=1e-6)
