"""Exact polynomial vector fields on the extended space (x, t, s).

The metric is dx^2 + 2 dt ds. The ten generators close into an algebra
isomorphic to o(3,2); all arithmetic here is exact (rationals, plus sqrt(2)
for the standard-basis dictionary).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import sympy as sp

from .charges import GENERATORS, Generator

x, t, s = sp.symbols("x t s")
COORDS = (x, t, s)
HALF = sp.Rational(1, 2)
SQRT2 = sp.sqrt(2)

# ordering of the monomials used to flatten a field into a coefficient vector
_MONOMIALS = [sp.Integer(1), x, t, s, x**2, t**2, s**2, x * t, x * s, t * s]


class NotConformalError(ValueError):
    pass


class ClosureError(ArithmeticError):
    pass


@dataclass(frozen=True)
class FlatMetric3:
    matrix: sp.Matrix = sp.Matrix([[1, 0, 0], [0, 0, 1], [0, 1, 0]])

    @property
    def determinant(self):
        return self.matrix.det()

    @property
    def inverse(self) -> sp.Matrix:
        return self.matrix.inv()


METRIC = FlatMetric3()


@dataclass(frozen=True)
class PolyVectorField3:
    """Components along (d/dx, d/dt, d/ds); each an exact polynomial in x, t, s."""

    cx: sp.Expr
    ct: sp.Expr
    cs: sp.Expr

    def __post_init__(self):
        for name in ("cx", "ct", "cs"):
            object.__setattr__(self, name, sp.expand(sp.sympify(getattr(self, name))))

    @property
    def components(self) -> tuple:
        return (self.cx, self.ct, self.cs)

    def degree(self) -> int:
        degs = [sp.Poly(c, *COORDS).total_degree() for c in self.components if c != 0]
        return max(degs, default=0)

    def is_rational(self) -> bool:
        return all(sp.Poly(c, *COORDS).domain == sp.QQ or sp.Poly(c, *COORDS).domain == sp.ZZ
                   for c in self.components)

    def __add__(self, other: "PolyVectorField3") -> "PolyVectorField3":
        return PolyVectorField3(*(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "PolyVectorField3") -> "PolyVectorField3":
        return PolyVectorField3(*(a - b for a, b in zip(self.components, other.components)))

    def __neg__(self) -> "PolyVectorField3":
        return PolyVectorField3(*(-a for a in self.components))

    def scale(self, k) -> "PolyVectorField3":
        return PolyVectorField3(*(sp.sympify(k) * a for a in self.components))

    __rmul__ = scale

    def is_zero(self) -> bool:
        return all(sp.expand(c) == 0 for c in self.components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyVectorField3):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash(tuple(sp.srepr(c) for c in self.components))

    def evaluate(self, point) -> tuple:
        subs = dict(zip(COORDS, map(sp.nsimplify, point)))
        return tuple(c.subs(subs) for c in self.components)

    def coefficient_vector(self) -> list:
        """Flatten into 30 exact coefficients over the degree-2 monomials."""
        if self.degree() > 2:
            raise ValueError("degree exceeds 2")
        out = []
        for c in self.components:
            poly = sp.Poly(c, *COORDS)
            for m in _MONOMIALS:
                mono = sp.Poly(m, *COORDS).monoms()[0]
                out.append(poly.coeff_monomial(mono))
        return out

    def __repr__(self) -> str:
        terms = [f"({c})*d{v}" for c, v in zip(self.components, "xts") if c != 0]
        return " + ".join(terms) or "0"


def field(cx=0, ct=0, cs=0) -> PolyVectorField3:
    return PolyVectorField3(cx, ct, cs)


def generators() -> list[PolyVectorField3]:
    """X0..X9 in the order H, P, N, B, Delta, K, D, G, C1, C2 of their charges."""
    return [
        field(ct=1),  # X0 time translation
        field(cx=-1),  # X1 space translation
        field(cs=-1),  # X2 vertical translation
        field(cx=t, cs=-x),  # X3 galilean boost
        field(cx=HALF * x, ct=t),  # X4 non-relativistic dilatation
        field(cx=x * t, ct=t**2, cs=-HALF * x**2),  # X5 expansion
        field(ct=t, cs=-s),  # X6 time dilatation
        field(cx=-s, ct=x),  # X7 antiboost
        field(cx=-x * s, ct=HALF * x**2, cs=-(s**2)),  # X8
        field(cx=HALF * x**2 - t * s, ct=x * t, cs=x * s),  # X9
    ]


# charge <-> vector field correspondence
CORRESPONDENCE = {
    Generator.H: 0,
    Generator.P: 1,
    Generator.N: 2,
    Generator.B: 3,
    Generator.Delta: 4,
    Generator.K: 5,
    Generator.D: 6,
    Generator.G: 7,
    Generator.C1: 8,
    Generator.C2: 9,
}
INDEX_TO_GENERATOR = {i: g for g, i in CORRESPONDENCE.items()}


def lie_bracket(X: PolyVectorField3, Y: PolyVectorField3) -> PolyVectorField3:
    """[X, Y]^m = X^n d_n Y^m - Y^n d_n X^m."""
    out = []
    for ym, xm in zip(Y.components, X.components):
        term = sum(X.components[n] * sp.diff(ym, COORDS[n]) - Y.components[n] * sp.diff(xm, COORDS[n])
                   for n in range(3))
        out.append(term)
    return PolyVectorField3(*out)


def lie_derivative_metric(X: PolyVectorField3, metric: FlatMetric3 = METRIC) -> sp.Matrix:
    g = metric.matrix
    jac = sp.Matrix(3, 3, lambda sig, mu: sp.diff(X.components[sig], COORDS[mu]))  # d_mu X^sig
    return (jac.T * g + g * jac).applyfunc(sp.expand)


def conformal_factor(X: PolyVectorField3, metric: FlatMetric3 = METRIC) -> sp.Expr:
    """lambda with L_X g = lambda g; raises NotConformalError otherwise."""
    lg = lie_derivative_metric(X, metric)
    g = metric.matrix
    lam = sp.expand(lg[0, 0] / g[0, 0])
    diff = (lg - lam * g).applyfunc(sp.expand)
    for i, j in itertools.product(range(3), repeat=2):
        if diff[i, j] != 0:
            raise NotConformalError(f"not conformal: component ({i},{j}) off by {diff[i, j]}")
    return lam


def decompose(Y: PolyVectorField3, basis=None) -> list:
    """Exact coefficients of Y in the X basis; ClosureError if Y is outside the span."""
    basis = generators() if basis is None else basis
    if Y.degree() > 2:
        raise ClosureError(f"bracket has degree {Y.degree()} > 2")
    A = sp.Matrix([b.coefficient_vector() for b in basis]).T
    y = sp.Matrix(Y.coefficient_vector())
    sol, params = A.gauss_jordan_solve(y)
    if params.shape[0]:
        raise ClosureError("basis is degenerate")
    return [sp.nsimplify(c) for c in sol]


def _combination_vector(rhs: dict) -> list:
    vec = [sp.Integer(0)] * 10
    for g, c in rhs.items():
        vec[CORRESPONDENCE[Generator(g)]] += sp.Rational(c.numerator, c.denominator)
    return vec


@dataclass
class StructureReport:
    table: dict  # (i, j) -> list of 10 exact coefficients
    sigma: int | None
    mismatches: dict  # sigma -> list of (i, j) pairs that disagree

    @property
    def closed(self) -> bool:
        return True

    def as_dict(self) -> dict:
        names = [f"X{i}" for i in range(10)]
        return {
            "brackets": {
                f"[X{i},X{j}]": " ".join(f"{'+' if c > 0 else '-'}{abs(c)}*{names[k]}"
                                         for k, c in enumerate(v) if c != 0) or "0"
                for (i, j), v in self.table.items()
            },
            "sigma": self.sigma,
            "mismatch_counts": {str(k): len(v) for k, v in self.mismatches.items()},
        }


def bracket_table() -> dict:
    X = generators()
    out = {}
    for i, j in itertools.combinations(range(10), 2):
        Z = lie_bracket(X[i], X[j])
        if Z.degree() > 2:
            raise ClosureError(f"[X{i},X{j}] has degree {Z.degree()}")
        out[i, j] = decompose(Z, X)
    return out


def structure_table(poisson_table: dict | None = None) -> StructureReport:
    """All 45 brackets in the X basis, and the uniform sign relating them to the charge table.

    ``poisson_table`` maps ordered generator pairs to Fraction combinations;
    defaults to the verified table of the bracket module.
    """
    if poisson_table is None:
        from .poisson import STRUCTURE_TABLE as poisson_table
    lie = bracket_table()
    mismatches = {1: [], -1: []}
    for (a, b), rhs in poisson_table.items():
        i, j = CORRESPONDENCE[Generator(a)], CORRESPONDENCE[Generator(b)]
        target = _combination_vector(rhs)
        got = lie[(i, j)] if i < j else [-c for c in lie[(j, i)]]
        for sigma in (1, -1):
            if any(sp.simplify(g - sigma * c) != 0 for g, c in zip(got, target)):
                mismatches[sigma].append((a, b))
    sigmas = [sg for sg in (1, -1) if not mismatches[sg]]
    return StructureReport(lie, sigmas[0] if len(sigmas) == 1 else None, mismatches)


def jacobi_defects() -> list:
    """Triples whose Jacobi sum does not vanish identically (expected: none)."""
    X = generators()
    bad = []
    for i, j, k in itertools.combinations(range(10), 3):
        total = (
            lie_bracket(X[i], lie_bracket(X[j], X[k]))
            + lie_bracket(X[j], lie_bracket(X[k], X[i]))
            + lie_bracket(X[k], lie_bracket(X[i], X[j]))
        )
        if not total.is_zero():
            bad.append((i, j, k))
    return bad


# standard o(3,2) basis in light-cone coordinates (coefficients in Q(sqrt 2))


def standard_basis() -> dict:
    r = 1 / SQRT2
    return {
        "Px": field(cx=1),
        "P0": field(ct=-r, cs=r),
        "Py": field(ct=r, cs=r),
        "M01": field(cx=r * (t - s), ct=r * x, cs=-r * x),
        "M02": field(ct=t, cs=-s),
        "M12": field(cx=-r * (t + s), ct=r * x, cs=r * x),
        "d": field(cx=x, ct=t, cs=s),
        "K0": field(cx=SQRT2 * x * (t - s), ct=SQRT2 * t**2 + x**2 * r, cs=-SQRT2 * s**2 - x**2 * r),
        "K1": field(cx=HALF * x**2 - t * s, ct=x * t, cs=x * s),
        "K2": field(cx=SQRT2 * x * (t + s), ct=SQRT2 * t**2 - x**2 * r, cs=SQRT2 * s**2 - x**2 * r),
    }


# X_i = sum coef * standard element; coefficients may involve sqrt(2)
DICTIONARY = {
    0: {"Py": 1 / SQRT2, "P0": -1 / SQRT2},
    1: {"Px": -1},
    2: {"Py": -1 / SQRT2, "P0": -1 / SQRT2},
    3: {"M01": 1 / SQRT2, "M12": -1 / SQRT2},
    4: {"M02": HALF, "d": HALF},
    5: {"K0": 1 / (2 * SQRT2), "K2": 1 / (2 * SQRT2)},
    6: {"M02": 1},
    7: {"M01": 1 / SQRT2, "M12": 1 / SQRT2},
    8: {"K0": 1 / (2 * SQRT2), "K2": -1 / (2 * SQRT2)},
    9: {"K1": 1},
}


def dictionary_check() -> dict:
    """Verify every X_i against its standard-basis expression after clearing sqrt(2).

    Both sides are multiplied by 2 sqrt(2) and expanded; any leftover
    coefficient is reported.
    """
    X = generators()
    std = standard_basis()
    failures = {}
    for i, combo in DICTIONARY.items():
        clear = 2 * SQRT2
        lhs = X[i].scale(clear)
        rhs = field()
        for name, c in combo.items():
            rhs = rhs + std[name].scale(sp.expand(clear * c))
        diff = lhs - rhs
        if not diff.is_zero():
            failures[f"X{i}"] = repr(diff)
    return {"ok": not failures, "failures": failures}


ISOMETRY_INDICES = (0, 1, 2, 3, 6, 7)


def conformal_factors() -> list:
    return [conformal_factor(X) for X in generators()]


def as_fraction(c) -> Fraction:
    c = sp.nsimplify(c)
    return Fraction(int(c.p), int(c.q))
