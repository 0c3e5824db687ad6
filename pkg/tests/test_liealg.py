import itertools

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from fluidsym import liealg
from fluidsym.charges import Generator
from fluidsym.liealg import (COORDS, CORRESPONDENCE, ISOMETRY_INDICES, ClosureError, NotConformalError,
                             conformal_factor, decompose, dictionary_check, field, generators, jacobi_defects,
                             lie_bracket, standard_basis, structure_table)

x, t, s = COORDS
X = generators()


def combo(**coeffs):
    out = field()
    for name, c in coeffs.items():
        out = out + X[int(name[1:])].scale(c)
    return out


class TestGenerators:
    def test_time_translation(self):
        assert X[0].components == (0, 1, 0)

    def test_x8_time_component(self):
        assert X[8].ct == sp.Rational(1, 2) * x**2
        assert X[8].cx == -x * s and X[8].cs == -(s**2)

    def test_boost_direction_at_point(self):
        assert X[3].evaluate((1, 2, 3)) == (2, 0, -1)

    def test_all_rational_and_quadratic(self):
        for v in X:
            assert v.is_rational() and v.degree() <= 2


class TestBrackets:
    def test_time_translation_with_boost(self):
        assert lie_bracket(X[0], X[3]) == field(cx=1)
        assert lie_bracket(X[0], X[3]) == -X[1]

    def test_x8_with_boost_gives_x9(self):
        boost = field(cx=t, cs=-x)
        br = lie_bracket(X[8], boost)
        assert br == X[9] or br == -X[9]

    def test_vertical_with_x8(self):
        br = lie_bracket(X[2], X[8])
        assert br == field(cx=x, cs=2 * s)
        assert br == (X[6] - X[4]).scale(-2)

    def test_antiboost_with_boost(self):
        assert lie_bracket(X[7], X[3]) == field(ct=-t, cs=s)
        assert lie_bracket(X[7], X[3]) == -X[6]

    def test_closure_and_exact_decomposition(self):
        for i, j in itertools.combinations(range(10), 2):
            coeffs = decompose(lie_bracket(X[i], X[j]))
            rebuilt = field()
            for c, v in zip(coeffs, X):
                rebuilt = rebuilt + v.scale(c)
            assert rebuilt == lie_bracket(X[i], X[j])

    def test_outside_span_raises(self):
        with pytest.raises(ClosureError):
            decompose(field(cx=x**3))
        with pytest.raises(ClosureError):
            decompose(field(cx=x * t * s))

    def test_jacobi(self):
        assert jacobi_defects() == []


class TestStructure:
    def test_unique_uniform_sign(self):
        report = structure_table()
        assert report.sigma in (1, -1)
        assert report.mismatches[report.sigma] == []
        assert len(report.mismatches[-report.sigma]) > 0
        assert len(report.table) == 45

    def test_number_with_c1_under_sign(self):
        from fluidsym.poisson import STRUCTURE_TABLE

        report = structure_table()
        lie = report.table[(2, 8)]
        charge_side = STRUCTURE_TABLE[(Generator.N, Generator.C1)]
        for gen, c in charge_side.items():
            assert lie[CORRESPONDENCE[gen]] == report.sigma * c
        assert sum(1 for v in lie if v != 0) == len(charge_side)

    def test_corrupted_table_is_detected(self):
        from fluidsym.poisson import STRUCTURE_TABLE

        broken = dict(STRUCTURE_TABLE)
        key = (Generator.H, Generator.B)
        broken[key] = {g: -c for g, c in broken[key].items()}
        assert structure_table(broken).sigma is None

    def test_correspondence_is_a_bijection(self):
        assert sorted(CORRESPONDENCE.values()) == list(range(10))


class TestConformal:
    @pytest.mark.parametrize("i", ISOMETRY_INDICES)
    def test_isometries(self, i):
        assert conformal_factor(X[i]) == 0

    def test_dilatation(self):
        assert conformal_factor(X[4]) == 1

    def test_x8(self):
        assert sp.expand(conformal_factor(X[8]) + 2 * s) == 0

    def test_non_conformal_field(self):
        with pytest.raises(NotConformalError):
            conformal_factor(field(cx=x**2))

    def test_every_generator_is_conformal(self):
        assert len(liealg.conformal_factors()) == 10


class TestDictionary:
    def test_all_exact(self):
        res = dictionary_check()
        assert res["ok"], res["failures"]

    def test_space_translation(self):
        assert X[1] == -standard_basis()["Px"]

    def test_time_dilatation(self):
        assert X[6] == standard_basis()["M02"]

    def test_x8_cleared_of_root_two(self):
        std = standard_basis()
        r2 = sp.sqrt(2)
        assert X[8].scale(2 * r2) == std["K0"] - std["K2"]


class TestProperties:
    coeff = st.integers(-3, 3)

    @settings(max_examples=25, deadline=None)
    @given(st.lists(coeff, min_size=10, max_size=10), st.lists(coeff, min_size=10, max_size=10))
    def test_bracket_of_combinations_stays_in_span(self, a, b):
        A = combo(**{f"X{i}": c for i, c in enumerate(a)})
        B = combo(**{f"X{i}": c for i, c in enumerate(b)})
        coeffs = decompose(lie_bracket(A, B))
        assert len(coeffs) == 10

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 9), st.integers(0, 9))
    def test_bracket_antisymmetry(self, i, j):
        assert lie_bracket(X[i], X[j]) == -lie_bracket(X[j], X[i])

    @settings(max_examples=20, deadline=None)
    @given(st.lists(st.integers(-3, 3), min_size=10, max_size=10))
    def test_conformal_factor_is_linear(self, c):
        A = combo(**{f"X{i}": v for i, v in enumerate(c)})
        expected = sum(v * conformal_factor(X[i]) for i, v in enumerate(c))
        assert sp.expand(conformal_factor(A) - expected) == 0
