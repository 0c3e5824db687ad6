"""Field-dependent transformations obtained by projecting maps of extended space.

A phase Theta(x, t) is lifted to theta = Theta + s on extended space (x, t, s).
A map f = (g, h, k) of extended space acts by pullback, theta~ = theta o f,
and the transformed phase Theta* solves the section condition

    Theta(g(x, t, -u), h(x, t, -u)) + k(x, t, -u) = 0,    u = Theta*(x, t).

Then x* = g(x, t, -u), t* = h(x, t, -u), and the density transforms as

    R*(x, t) = Omega * (Jtilde / J*) * R(x*, t*)

with Omega the conformal factor, Jtilde the extended Jacobian and J* the
Jacobian of (x, t) -> (x*, t*). This convention reproduces the known
implicit antiboost x* = x + alpha Theta(x*, t*).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import sympy as sp

from .grid import FieldError, FieldMap2D, FieldPair, Grid1D

xs, ts, ss, eps = sp.symbols("x t s epsilon")

NEWTON_MAX_ITER = 50
CONTINUATION_STEPS = 8
RESIDUAL_TOL = 1e-12
DEGENERATE_TOL = 1e-10
SINGULAR_TOL = 1e-10


class SectionSolveError(RuntimeError):
    pass


class DegenerateSectionError(SectionSolveError):
    pass


class ImageOutOfRangeError(SectionSolveError):
    pass


class SingularTransformError(ValueError):
    pass


class InterchangeUndefinedError(ValueError):
    pass


# phase/density sources


@dataclass(frozen=True)
class AnalyticField:
    """Closed-form (R, Theta) on space-time with the partial derivatives of Theta."""

    theta: Callable
    theta_x: Callable
    theta_t: Callable
    density: Callable
    label: str = "analytic"

    def phase(self, x, t, dx: int = 0, dt: int = 0) -> np.ndarray:
        x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
        f = {(0, 0): self.theta, (1, 0): self.theta_x, (0, 1): self.theta_t}[dx, dt]
        return np.asarray(f(x, t), dtype=float) * np.ones_like(x)

    def R(self, x, t) -> np.ndarray:
        x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
        return np.asarray(self.density(x, t), dtype=float) * np.ones_like(x)


def plane_wave(beta: float, R0: float = 1.0) -> AnalyticField:
    """Theta = beta x - beta^2 t / 2, R = R0: an exact free solution."""
    return AnalyticField(
        lambda x, t: beta * x - 0.5 * beta**2 * t,
        lambda x, t: beta + 0 * x,
        lambda x, t: -0.5 * beta**2 + 0 * x,
        lambda x, t: R0 + 0 * x,
        f"plane_wave(beta={beta})",
    )


def self_similar(t0: float = -1.0, amplitude: float = 1.0, width: float = 1.0) -> AnalyticField:
    """Theta = x^2 / (2 tau), R = A exp(-(x/tau)^2 / (2 w^2)) / tau, tau = t - t0.

    A spreading free solution; valid for t > t0.
    """

    def tau(t):
        return t - t0

    return AnalyticField(
        lambda x, t: x**2 / (2 * tau(t)),
        lambda x, t: x / tau(t),
        lambda x, t: -(x**2) / (2 * tau(t) ** 2),
        lambda x, t: amplitude * np.exp(-((x / tau(t)) ** 2) / (2 * width**2)) / tau(t),
        f"self_similar(t0={t0})",
    )


def linear_phase(k: float, density: Callable) -> AnalyticField:
    """Theta = k t with an arbitrary density R(x, t)."""
    return AnalyticField(
        lambda x, t: k * t + 0 * x,
        lambda x, t: 0 * x,
        lambda x, t: k + 0 * x,
        density,
        f"linear_phase(k={k})",
    )


@dataclass(frozen=True)
class SampledField:
    """Grid-sampled trajectory, interpolated spectrally in x and cubically in t."""

    fmap: FieldMap2D
    label: str = "sampled"

    def phase(self, x, t, dx: int = 0, dt: int = 0) -> np.ndarray:
        x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
        try:
            out = self.fmap.sample_points(x.ravel(), t.ravel(), "Theta", dx_order=dx, dt_order=dt)
        except FieldError as err:
            raise ImageOutOfRangeError(f"image out of range: {err}") from err
        return out.reshape(x.shape)

    def R(self, x, t) -> np.ndarray:
        x, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float))
        try:
            out = self.fmap.sample_points(x.ravel(), t.ravel(), "R")
        except FieldError as err:
            raise ImageOutOfRangeError(f"image out of range: {err}") from err
        return out.reshape(x.shape)


def as_source(fields):
    return SampledField(fields) if isinstance(fields, FieldMap2D) else fields


# lift


@dataclass(frozen=True)
class EquivariantLift:
    """rho(x, t, s) = R(x, t) and theta(x, t, s) = Theta(x, t) + s."""

    source: object

    def rho(self, x, t, s) -> np.ndarray:
        return self.source.R(x, t) + 0 * np.asarray(s, float)

    def theta(self, x, t, s) -> np.ndarray:
        return self.source.phase(x, t) + np.asarray(s, float)

    def dtheta(self, x, t, s) -> tuple:
        """(d_x, d_t, d_s) theta."""
        src = self.source
        return src.phase(x, t, 1, 0), src.phase(x, t, 0, 1), np.ones_like(np.asarray(x, float))


def equivariant_lift(fields) -> EquivariantLift:
    if isinstance(fields, FieldPair):
        fields = FieldMap2D.from_pairs([fields])
    return EquivariantLift(as_source(fields))


# extended maps


def _lam(expr):
    return sp.lambdify((xs, ts, ss, eps), expr, "numpy")


@dataclass
class ExtendedMap:
    """(x, t, s) -> (g, h, k) with conformal factor Omega, depending on a parameter epsilon."""

    name: str
    parameter: float
    g: sp.Expr
    h: sp.Expr
    k: sp.Expr
    omega: sp.Expr
    reference_point: tuple = (0.0, 0.0, 0.0)
    _fn: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        exprs = {"g": self.g, "h": self.h, "k": self.k, "omega": self.omega}
        for name, e in exprs.items():
            self._fn[name] = _lam(e)
            for v in (xs, ts, ss):
                self._fn[f"{name}_{v}"] = _lam(sp.diff(e, v))
        jac = sp.Matrix([[sp.diff(e, v) for v in (xs, ts, ss)] for e in (self.g, self.h, self.k)])
        self.jtilde_expr = jac.det()
        self._fn["jtilde"] = _lam(self.jtilde_expr)
        p = (*self.reference_point, self.parameter)
        ratio = float(self._fn["jtilde"](*p)) / float(self._fn["omega"](*p)) ** 3
        self.orientation = 1 if ratio > 0 else -1

    def at(self, parameter: float) -> "ExtendedMap":
        return ExtendedMap(self.name, parameter, self.g, self.h, self.k, self.omega, self.reference_point)

    def eval(self, name: str, x, t, s, parameter: float | None = None) -> np.ndarray:
        p = self.parameter if parameter is None else parameter
        x, t, s = np.broadcast_arrays(np.asarray(x, float), np.asarray(t, float), np.asarray(s, float))
        return np.asarray(self._fn[name](x, t, s, p), dtype=float) * np.ones_like(x)

    def __call__(self, x, t, s) -> tuple:
        return tuple(self.eval(n, x, t, s) for n in ("g", "h", "k"))

    def jtilde(self, x, t, s) -> np.ndarray:
        """Exact determinant of the extended Jacobian."""
        return self.eval("jtilde", x, t, s)

    def jtilde_conformal(self, x, t, s) -> np.ndarray:
        """Orientation sign times Omega^3."""
        return self.orientation * self.eval("omega", x, t, s) ** 3

    @classmethod
    def from_matrix(cls, name: str, matrix_of_eps: Callable, parameter: float) -> "ExtendedMap":
        """Projective action of a 5x5 matrix M(epsilon) given as a sympy-valued callable."""
        M = sp.Matrix(matrix_of_eps(eps))
        Y = sp.Matrix([xs, ts, ss, 1, -sp.Rational(1, 2) * (xs**2 + 2 * ts * ss)])
        P = M * Y
        a = sp.simplify(P[3])
        return cls(name, parameter, sp.simplify(P[0] / a), sp.simplify(P[1] / a), sp.simplify(P[2] / a), 1 / a)


HALF = sp.Rational(1, 2)

# closed-form extended maps; each is the flow of one generator (or its negative)
_MAPS = {
    "identity": (xs, ts, ss, sp.Integer(1)),
    "space_translation": (xs + eps, ts, ss, sp.Integer(1)),
    "time_translation": (xs, ts + eps, ss, sp.Integer(1)),
    "phase_shift": (xs, ts, ss - eps, sp.Integer(1)),
    "boost": (xs + eps * ts, ts, ss - eps * xs - HALF * eps**2 * ts, sp.Integer(1)),
    "dilatation": (sp.exp(eps / 2) * xs, sp.exp(eps) * ts, ss, sp.exp(eps / 2)),
    "expansion": (xs / (1 - eps * ts), ts / (1 - eps * ts), ss - eps * xs**2 / (2 * (1 - eps * ts)),
                  1 / (1 - eps * ts)),
    "time_dilation": (xs, sp.exp(eps) * ts, sp.exp(-eps) * ss, sp.Integer(1)),
    "antiboost": (xs - eps * ss, ts + eps * xs - HALF * eps**2 * ss, ss, sp.Integer(1)),
    "C1": (xs / (1 + eps * ss), ts + HALF * eps * xs**2 / (1 + eps * ss), ss / (1 + eps * ss),
           1 / (1 + eps * ss)),
    "C2": (
        (xs - eps * (HALF * xs**2 + ts * ss)) / ((1 - HALF * eps * xs) ** 2 + HALF * eps**2 * ts * ss),
        ts / ((1 - HALF * eps * xs) ** 2 + HALF * eps**2 * ts * ss),
        ss / ((1 - HALF * eps * xs) ** 2 + HALF * eps**2 * ts * ss),
        1 / ((1 - HALF * eps * xs) ** 2 + HALF * eps**2 * ts * ss),
    ),
    "interchange": (xs, ss, ts, sp.Integer(1)),
}
MAP_NAMES = tuple(_MAPS)
# families that do not preserve the vertical direction
NON_FIBER_PRESERVING = ("time_dilation", "antiboost", "C1", "C2", "interchange")


def extended_map(name: str, parameter: float = 0.0) -> ExtendedMap:
    if name not in _MAPS:
        raise KeyError(f"unknown transform {name!r}; choose from {', '.join(MAP_NAMES)}")
    g, h, k, om = _MAPS[name]
    return ExtendedMap(name, float(parameter), g, h, k, om)


# section solution


@dataclass
class SectionSolution:
    x: np.ndarray
    t: float
    x_star: np.ndarray
    t_star: np.ndarray
    Theta_star: np.ndarray
    R_star: np.ndarray
    J_star: np.ndarray
    residual: np.ndarray
    iterations: np.ndarray
    grid: Grid1D | None = None

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residual)))

    def as_field_pair(self) -> FieldPair:
        if self.grid is None:
            raise ValueError("solution is not on a periodic grid")
        return FieldPair.from_arrays(self.grid, self.R_star, self.Theta_star, self.t)

    def to_rows(self) -> list[dict]:
        return [
            {"x": float(a), "x_star": float(b), "t_star": float(c), "Theta_star": float(d), "R_star": float(e)}
            for a, b, c, d, e in zip(self.x, self.x_star, self.t_star, self.Theta_star, self.R_star)
        ]


def _query_points(fields, xq):
    if xq is not None:
        return np.atleast_1d(np.asarray(xq, dtype=float)), None
    if isinstance(fields, FieldMap2D):
        return fields.grid.x.copy(), fields.grid
    raise ValueError("query points are required for analytic sources")


def _section_residual(emap, src, x, t, u, p):
    s = -u
    xg = emap.eval("g", x, t, s, p)
    th = emap.eval("h", x, t, s, p)
    F = src.phase(xg, th) + emap.eval("k", x, t, s, p)
    tx = src.phase(xg, th, 1, 0)
    tt = src.phase(xg, th, 0, 1)
    dF = -(tx * emap.eval("g_s", x, t, s, p) + tt * emap.eval("h_s", x, t, s, p) + emap.eval("k_s", x, t, s, p))
    return F, dF


def _newton(emap, src, x, t, u0, p, max_iter=NEWTON_MAX_ITER):
    """Damped Newton on every point at once; returns (u, |F|, iterations, converged)."""
    u = u0.copy()
    iters = np.zeros(u.shape, dtype=int)
    F, dF = _section_residual(emap, src, x, t, u, p)
    done = np.abs(F) <= RESIDUAL_TOL * np.maximum(1.0, np.abs(u))
    for _ in range(max_iter):
        if np.all(done):
            break
        act = ~done
        if np.any(np.abs(dF[act]) < DEGENERATE_TOL):
            bad = np.abs(dF[act]).min()
            raise DegenerateSectionError(f"degenerate section (caustic of the transformation): |dF/du| = {bad:.2e}")
        step = F[act] / dF[act]
        lam = np.ones_like(step)
        ua = u[act]
        # backtrack until |F| decreases
        for _ in range(30):
            trial = ua - lam * step
            Ft, dFt = _section_residual(emap, src, x[act], t, trial, p)
            worse = np.abs(Ft) > np.abs(F[act]) * (1 - 1e-4 * lam) + 1e-300
            if not np.any(worse):
                break
            lam = np.where(worse, lam / 2, lam)
        u[act], F[act], dF[act] = trial, Ft, dFt
        iters[act] += 1
        done = np.abs(F) <= RESIDUAL_TOL * np.maximum(1.0, np.abs(u))
    return u, np.abs(F), iters, done


def _solve_section(emap, src, x, t):
    u0 = src.phase(x, np.full_like(x, t))
    u, F, iters, ok = _newton(emap, src, x, t, u0, emap.parameter)
    if not np.all(ok):
        # parameter continuation from the identity
        idx = np.flatnonzero(~ok)
        uc = u0[idx]
        for j in range(1, CONTINUATION_STEPS + 1):
            pj = emap.parameter * j / CONTINUATION_STEPS
            uc, Fc, it, okc = _newton(emap, src, x[idx], t, uc, pj)
            iters[idx] += it
        u[idx], F[idx] = uc, Fc
        ok[idx] = okc
        if not np.all(ok):
            raise SectionSolveError(f"section solve failed: worst residual {F.max():.3e}")
    return u, F, iters


def _jacobian_star(emap, src, x, t, u):
    """J* by implicit differentiation of the section condition."""
    s = -u
    ev = lambda n: emap.eval(n, x, t, s)  # noqa: E731
    xg, th = ev("g"), ev("h")
    tx = src.phase(xg, th, 1, 0)
    tt = src.phase(xg, th, 0, 1)
    Fx = tx * ev("g_x") + tt * ev("h_x") + ev("k_x")
    Ft = tx * ev("g_t") + tt * ev("h_t") + ev("k_t")
    Fu = -(tx * ev("g_s") + tt * ev("h_s") + ev("k_s"))
    ux, ut = -Fx / Fu, -Ft / Fu
    a = ev("g_x") - ev("g_s") * ux
    b = ev("g_t") - ev("g_s") * ut
    c = ev("h_x") - ev("h_s") * ux
    d = ev("h_t") - ev("h_s") * ut
    return a * d - b * c


def project_transform(emap: ExtendedMap, fields, query_t: float, xq=None) -> SectionSolution:
    """Project an extended-space map to a field-dependent transformation at time ``query_t``.

    ``fields`` is a FieldMap2D (queried on its grid) or an analytic source
    (queried at ``xq``).
    """
    src = as_source(fields)
    x, grid = _query_points(fields, xq)
    t = float(query_t)
    u, F, iters = _solve_section(emap, src, x, t)
    s = -u
    x_star = emap.eval("g", x, t, s)
    t_star = emap.eval("h", x, t, s)
    J = _jacobian_star(emap, src, x, t, u)
    omega = emap.eval("omega", x, t, s)
    R_star = omega * emap.jtilde_conformal(x, t, s) / J * src.R(x_star, t_star)
    return SectionSolution(x, t, x_star, t_star, u, R_star, J, F, iters, grid)


def jacobian_fd(emap: ExtendedMap, fields, query_t: float, xq, h: float = 1e-3) -> np.ndarray:
    """J* from 4th-order central differences of the section solution in x and t."""
    x = np.atleast_1d(np.asarray(xq, dtype=float))
    src = as_source(fields)

    def star(dx, dt):
        u, _, _ = _solve_section(emap, src, x + dx, query_t + dt)
        s = -u
        return emap.eval("g", x + dx, query_t + dt, s), emap.eval("h", x + dx, query_t + dt, s)

    def d(direction):
        out = []
        for k, w in ((-2, 1), (-1, -8), (1, 8), (2, -1)):
            pts = star(k * h, 0.0) if direction == "x" else star(0.0, k * h)
            out.append((w * pts[0], w * pts[1]))
        return sum(o[0] for o in out) / (12 * h), sum(o[1] for o in out) / (12 * h)

    gx, hx = d("x")
    gt, ht = d("t")
    return gx * ht - gt * hx


# closed-form transformations


def _closed_form_solve(src, x, t, star_of, v0):
    """Scalar fixed point v = Theta(x*(v), t*(v)) by Newton with a numerical slope."""
    v = v0.copy()
    for _ in range(NEWTON_MAX_ITER):
        xa, ta = star_of(v)
        F = src.phase(xa, ta) - v
        if np.all(np.abs(F) <= RESIDUAL_TOL * np.maximum(1.0, np.abs(v))):
            return v, np.abs(F)
        dv = 1e-7 * np.maximum(1.0, np.abs(v))
        xb, tb = star_of(v + dv)
        dF = (src.phase(xb, tb) - (v + dv) - F) / dv
        if np.any(np.abs(dF) < DEGENERATE_TOL):
            raise DegenerateSectionError("degenerate section (caustic of the transformation)")
        v = v - F / dF
    xa, ta = star_of(v)
    F = np.abs(src.phase(xa, ta) - v)
    if np.all(F <= 1e-11 * np.maximum(1.0, np.abs(v))):
        return v, F
    raise SectionSolveError(f"section solve failed: worst residual {F.max():.3e}")


def _check_denominator(den, what):
    if np.any(np.abs(den) < SINGULAR_TOL):
        raise SingularTransformError(f"transformation singular at this point ({what})")


def named_transform(name: str, parameter: float, fields, query_t: float, xq=None) -> SectionSolution:
    """Transformations evaluated from their explicit closed forms, independent of the generic solver."""
    src = as_source(fields)
    x, grid = _query_points(fields, xq)
    t = float(query_t)
    p = float(parameter)
    tt = np.full_like(x, t)
    resid = np.zeros_like(x)
    one = np.ones_like(x)

    def explicit(x_star, t_star):
        return x_star * one, t_star * one

    if name == "identity":
        xs_, ts_ = explicit(x, tt)
        Th, Rs, J = src.phase(xs_, ts_), src.R(xs_, ts_), one
    elif name == "space_translation":
        xs_, ts_ = explicit(x + p, tt)
        Th, Rs, J = src.phase(xs_, ts_), src.R(xs_, ts_), one
    elif name == "time_translation":
        xs_, ts_ = explicit(x, tt + p)
        Th, Rs, J = src.phase(xs_, ts_), src.R(xs_, ts_), one
    elif name == "phase_shift":
        xs_, ts_ = explicit(x, tt)
        Th, Rs, J = src.phase(xs_, ts_) - p, src.R(xs_, ts_), one
    elif name == "boost":
        xs_, ts_ = explicit(x + p * t, tt)
        Th = src.phase(xs_, ts_) - p * x - 0.5 * p**2 * t
        Rs, J = src.R(xs_, ts_), one
    elif name == "dilatation":
        xs_, ts_ = explicit(math.exp(p / 2) * x, math.exp(p) * tt)
        Th = src.phase(xs_, ts_)
        Rs, J = math.exp(p / 2) * src.R(xs_, ts_), math.exp(1.5 * p) * one
    elif name == "expansion":
        den = 1 - p * t
        _check_denominator(den * one, "1 - kappa t")
        xs_, ts_ = explicit(x / den, tt / den)
        Th = src.phase(xs_, ts_) - p * x**2 / (2 * den)
        Rs, J = src.R(xs_, ts_) / den, one / den**3
    elif name == "time_dilation":
        xs_, ts_ = explicit(x, math.exp(p) * tt)
        Th = math.exp(p) * src.phase(xs_, ts_)
        Rs, J = math.exp(-p) * src.R(xs_, ts_), math.exp(p) * one
    elif name == "antiboost":
        # x* = x + a Theta(x*, t*), t* = t + a (x + x*) / 2
        def star_of(v):
            xa = x + p * v
            return xa, t + 0.5 * p * (x + xa)

        v, resid = _closed_form_solve(src, x, t, star_of, src.phase(x, tt))
        xs_, ts_ = star_of(v)
        Th = v
        J = 1 / (1 - p * src.phase(xs_, ts_, 1, 0) - 0.5 * p**2 * src.phase(xs_, ts_, 0, 1))
        Rs = src.R(xs_, ts_) / J
    elif name == "C1":
        def star_of(v):
            return x * (1 + p * v), t + 0.5 * p * x**2 * (1 + p * v)

        v, resid = _closed_form_solve(src, x, t, star_of, src.phase(x, tt))
        xs_, ts_ = star_of(v)
        _check_denominator(1 + p * v, "1 + eps1 Theta")
        Th = v / (1 + p * v)
        J = (1 + p * v) / (1 - p * x * src.phase(xs_, ts_, 1, 0) - 0.5 * p**2 * x**2 * src.phase(xs_, ts_, 0, 1))
        Rs = (1 + p * v) ** 4 * src.R(xs_, ts_) / J
    elif name == "C2":
        q = 1 - 0.5 * p * x
        _check_denominator(q, "1 - eps2 x / 2")

        def star_of(v):
            return (x + p * t * v) / q, (t + 0.5 * p**2 * t**2 * v) / q**2

        v, resid = _closed_form_solve(src, x, t, star_of, src.phase(x, tt))
        xs_, ts_ = star_of(v)
        m = 1 + 0.5 * p**2 * t * v
        _check_denominator(m, "1 + eps2^2 t Theta / 2")
        Th = q**2 * v / m
        den = (q**2 - p * t * q * src.phase(xs_, ts_, 1, 0) - 0.5 * p**2 * t**2 * src.phase(xs_, ts_, 0, 1)) * q**2
        J = m / den
        Rs = m**4 / q**8 * src.R(xs_, ts_) / J
    elif name == "interchange":
        return interchange_transform(fields, query_t, xq)
    else:
        raise KeyError(f"unknown transform {name!r}; choose from {', '.join(MAP_NAMES)}")
    return SectionSolution(x, t, xs_, ts_, Th, Rs, J, resid, np.zeros(x.shape, dtype=int), grid)


# t <-> s interchange


def _check_monotone(src, x, window) -> None:
    lo, hi = window
    tgrid = np.linspace(lo, hi, 65)
    X, T = np.meshgrid(x, tgrid)
    rate = src.phase(X, T, 0, 1)
    sign = np.sign(rate)
    if np.any(rate == 0) or np.any(sign != sign[:1]):
        raise InterchangeUndefinedError("interchange undefined: phase not invertible in time")


def interchange_transform(fields, query_t: float, xq=None, window=None) -> SectionSolution:
    """x* = x, t* = -Theta*, with Theta(x, -Theta*) + t = 0 and R* = R(x, -Theta*) dTheta/dt(x, -Theta*)."""
    src = as_source(fields)
    x, grid = _query_points(fields, xq)
    t = float(query_t)
    if window is None:
        if isinstance(fields, FieldMap2D):
            window = (fields.times[0], fields.times[-1])
        else:
            raise ValueError("a time window is required for analytic sources")
    _check_monotone(src, x, window)
    lo, hi = window
    # bisection-safe Newton on v = t* in [lo, hi]: Theta(x, v) + t = 0
    v = np.full_like(x, 0.5 * (lo + hi))
    a, b = np.full_like(x, lo), np.full_like(x, hi)
    fa = src.phase(x, a) + t
    fb = src.phase(x, b) + t
    if np.any(fa * fb > 0):
        raise ImageOutOfRangeError("image out of range: no root of the interchange condition in the window")
    for _ in range(200):
        F = src.phase(x, v) + t
        if np.all(np.abs(F) <= RESIDUAL_TOL * np.maximum(1.0, abs(t))):
            break
        dF = src.phase(x, v, 0, 1)
        left = F * fa > 0
        a = np.where(left, v, a)
        fa = np.where(left, F, fa)
        b = np.where(left, b, v)
        trial = v - F / dF
        inside = (trial > np.minimum(a, b)) & (trial < np.maximum(a, b))
        v = np.where(inside, trial, 0.5 * (a + b))
    F = src.phase(x, v) + t
    if np.any(np.abs(F) > 1e-11 * max(1.0, abs(t))):
        raise SectionSolveError(f"section solve failed: worst residual {np.abs(F).max():.3e}")
    rate = src.phase(x, v, 0, 1)
    R_star = src.R(x, v) * rate
    # t* = v(x, t) and dv/dt = -1/rate
    J = -1 / rate
    return SectionSolution(x, t, x.copy(), v, -v, R_star, J, np.abs(F), np.zeros(x.shape, dtype=int), grid)


def interchange_map(fields, times, xq=None, window=None) -> FieldMap2D:
    """Sample the interchanged fields over ``times`` on the source grid."""
    if not isinstance(fields, FieldMap2D):
        raise TypeError("interchange_map needs a sampled FieldMap2D source")
    sols = [interchange_transform(fields, tq, xq, window) for tq in times]
    return FieldMap2D(
        fields.grid,
        np.asarray(times, float),
        np.array([s.R_star for s in sols]),
        np.array([s.Theta_star for s in sols]),
    )


# free equations of motion on transformed fields


def free_equation_residual(transform: Callable, x0: np.ndarray, t0: float, h: float) -> tuple:
    """Residuals of the free fluid equations for transformed fields near (x0, t0).

    ``transform(xq, t)`` returns a SectionSolution. Derivatives use 4th-order
    central differences with step ``h`` in both x and t.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    offsets = (-2, -1, 1, 2)
    weights = np.array([1, -8, 8, -1]) / (12 * h)
    centre = transform(x0, t0)
    Th, R = centre.Theta_star, centre.R_star

    def sweep(kind):
        th, rr = [], []
        for o in offsets:
            sol = transform(x0 + o * h, t0) if kind == "x" else transform(x0, t0 + o * h)
            th.append(sol.Theta_star)
            rr.append(sol.R_star)
        return np.array(th), np.array(rr)

    thx_s, rx_s = sweep("x")
    tht_s, rt_s = sweep("t")
    thx = weights @ thx_s
    tht = weights @ tht_s
    Rt = weights @ rt_s
    # flux derivative: d/dx (R dTheta/dx), the inner derivative taken from neighbouring stencils
    flux = []
    for o in offsets:
        xs_ = x0 + o * h
        th_loc = np.array([transform(xs_ + q * h, t0).Theta_star for q in offsets])
        flux.append(transform(xs_, t0).R_star * (weights @ th_loc))
    flux_x = weights @ np.array(flux)
    hj = tht + 0.5 * thx**2
    cont = Rt + flux_x
    return hj, cont, Th, R
