"""Energy-momentum tensors in ordinary space and on the extended space.

Ordinary space carries only lower-index components T_ab (a, b in {t, x}):

    T_tt = R u^2 / 2 + V        T_xt = -R u Theta_t
    T_tx = R u                  T_xx = R u^2 + R V' - V

with u = dTheta/dx, conserved as d_t T_tb + d_x T_xb = 0. On the extended
space (x, t, s) with metric dx^2 + 2 dt ds the fluid tensor is

    M_mn = -rho d_m theta d_n theta + g_mn (rho (d theta)^2 / 2 + V),

evaluated on the equivariant lift rho = R, theta = Theta + s. Contracting it
with a conformal vector field and restricting to the section s = -Theta gives
a current whose time component integrates to the corresponding charge.

The time derivative of Theta is taken from the equation of motion, so a single
slice determines every component.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import sympy as sp

from . import liealg
from .charges import Generator
from .dynamics import R_FLOOR, DensityFloorError, Potential
from .grid import FieldError, FieldMap2D, FieldPair, Grid1D, _lagrange_derivative_weights

COORD_INDEX = {"x": 0, "t": 1, "s": 2}
METRIC = np.array([[1.0, 0, 0], [0, 0, 1.0], [0, 1.0, 0]])
INVERSE_METRIC = METRIC.copy()

# printed sign in (grad_s theta) T_ab = sign * M_(index pair) for each ordinary component
RELATION_TABLE = {
    "tt": (-1, ("s", "t")),
    "tx": (+1, ("s", "x")),
    "xt": (-1, ("x", "t")),
    "xx": (+1, ("x", "x")),
}


def _index(i) -> int:
    return COORD_INDEX[i] if isinstance(i, str) else int(i)


def _reject_quantum(pot: Potential) -> None:
    if pot.quantum:
        raise ValueError("the quantum pressure term is handled by tensor_schrodinger, not the fluid tensors")


def theta_t_on_shell(state: FieldPair, pot: Potential, u: np.ndarray | None = None) -> np.ndarray:
    """dTheta/dt from the phase equation: -u^2/2 - dV/dR."""
    g = state.grid
    u = g.diff(state.Theta.values) if u is None else u
    return -0.5 * u**2 - pot.variational_derivative(state.R.values, g)


# ordinary space


@dataclass(frozen=True)
class TensorQ:
    grid: Grid1D
    t: float
    tt: np.ndarray
    xt: np.ndarray
    tx: np.ndarray
    xx: np.ndarray

    def as_dict(self) -> dict:
        return {"tt": self.tt, "xt": self.xt, "tx": self.tx, "xx": self.xx}


def tensor_Q(state: FieldPair, pot: Potential, u: np.ndarray | None = None) -> TensorQ:
    _reject_quantum(pot)
    g = state.grid
    R = state.R.values
    pot.check_floor(R, state.t)
    u = g.diff(state.Theta.values) if u is None else u
    Tht = theta_t_on_shell(state, pot, u)
    return TensorQ(
        g,
        state.t,
        tt=0.5 * R * u**2 + pot.V(R),
        xt=-R * u * Tht,
        tx=R * u,
        xx=R * u**2 + pot.pressure(R),
    )


def trace_check(state: FieldPair, pot: Potential) -> np.ndarray:
    """T_xx - 2 T_tt; identically (omega - 3) V, so zero for every state iff omega = 3."""
    T = tensor_Q(state, pot)
    return T.xx - 2 * T.tt


def _time_derivatives(times: np.ndarray, stack: np.ndarray, stencil: int = 5):
    """Centered Lagrange derivative at each slice having stencil // 2 neighbours on both sides."""
    half = stencil // 2
    if len(times) < stencil:
        raise FieldError(f"insufficient trajectory resolution: need at least {stencil} slices, got {len(times)}")
    out = []
    for i in range(half, len(times) - half):
        nodes = times[i - half : i + half + 1]
        w = _lagrange_derivative_weights(nodes - times[i], 0.0)
        out.append(np.tensordot(w, stack[i - half : i + half + 1], axes=1))
    return times[half : len(times) - half], np.array(out)


@dataclass(frozen=True)
class ContinuityResidual:
    """Residual fields at the interior slices; ``components`` maps a label to a (slices, n) array."""

    times: np.ndarray
    components: dict

    def max_abs(self, mask: np.ndarray | None = None) -> float:
        worst = 0.0
        for v in self.components.values():
            vals = v if mask is None else v[:, mask]
            worst = max(worst, float(np.max(np.abs(vals))))
        return worst


def continuity_residual(traj: FieldMap2D, pot: Potential) -> ContinuityResidual:
    """d_t T_tb + d_x T_xb for b in {t, x}: spectral in x, 5-point differences in t."""
    g = traj.grid
    Ts = [tensor_Q(traj.slice(i), pot) for i in range(len(traj))]
    times, dtt = _time_derivatives(traj.times, np.array([T.tt for T in Ts]))
    _, dtx = _time_derivatives(traj.times, np.array([T.tx for T in Ts]))
    inner = Ts[2 : len(Ts) - 2]
    res_t = np.array([d + g.diff(T.xt) for d, T in zip(dtt, inner)])
    res_x = np.array([d + g.diff(T.xx) for d, T in zip(dtx, inner)])
    return ContinuityResidual(times, {"t": res_t, "x": res_x})


# extended space


@dataclass(frozen=True)
class TensorM:
    """Symmetric 3x3 tensor field M_mn on the grid; s-independent for equivariant lifts."""

    grid: Grid1D
    t: float
    components: np.ndarray  # shape (3, 3, n), lower indices in (x, t, s) order

    def __post_init__(self):
        if self.components.shape != (3, 3, self.grid.n):
            raise ValueError("components must have shape (3, 3, n)")

    def lower(self, m, n) -> np.ndarray:
        return self.components[_index(m), _index(n)]

    def mixed(self, m, n) -> np.ndarray:
        """M^m_n = g^{ma} M_an."""
        return np.tensordot(INVERSE_METRIC[_index(m)], self.components[:, _index(n)], axes=1)

    def trace(self) -> np.ndarray:
        return sum(self.mixed(i, i) for i in range(3))

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.components - self.components.transpose(1, 0, 2))))

    def evaluate(self, m, n, x, t: float | None = None, s=None) -> np.ndarray:
        """M_mn at arbitrary x; s is accepted and ignored (equivariant lift)."""
        if t is not None and abs(t - self.t) > 1e-12:
            raise ValueError("tensor is known only at its own time slice")
        return self.grid.fourier_eval(self.lower(m, n), np.atleast_1d(np.asarray(x, dtype=float)))


def _assemble(grid, t, parts) -> TensorM:
    return TensorM(grid, t, np.array([[parts(m, n) for n in range(3)] for m in range(3)]))


def tensor_M(state: FieldPair, pot: Potential, theta_t: np.ndarray | None = None,
             u: np.ndarray | None = None) -> TensorM:
    """Fluid tensor on the lift rho = R, theta = Theta + s; theta_t defaults to the on-shell value."""
    _reject_quantum(pot)
    g = state.grid
    R = state.R.values
    pot.check_floor(R, state.t)
    u = g.diff(state.Theta.values) if u is None else u
    Tht = theta_t_on_shell(state, pot, u) if theta_t is None else np.asarray(theta_t, dtype=float)
    grad = (u, Tht, np.ones_like(R))
    scalar = 0.5 * R * (u**2 + 2 * Tht) + pot.V(R)
    return _assemble(g, state.t, lambda m, n: -R * grad[m] * grad[n] + METRIC[m, n] * scalar)


@dataclass(frozen=True)
class RelationReport:
    """Componentwise comparison of (grad_s theta) T_ab with the extended tensor.

    ``printed`` holds residuals for the signs in RELATION_TABLE; ``sigma`` is the
    uniform extra sign that makes all four components agree (None if none does);
    ``residual`` holds the residuals after applying ``sigma``.
    """

    printed: dict
    sigma: int | None
    residual: dict

    def max_printed(self) -> float:
        return max(self.printed.values())

    def max_residual(self) -> float:
        return max(self.residual.values())


def relation_check(state: FieldPair, pot: Potential, tol: float = 1e-10) -> RelationReport:
    T = tensor_Q(state, pot).as_dict()
    M = tensor_M(state, pot)
    grad_s = 1.0  # equivariant lift

    def residuals(sigma):
        out = {}
        for key, (sign, (m, n)) in RELATION_TABLE.items():
            out[key] = float(np.max(np.abs(grad_s * T[key] - sigma * sign * M.lower(m, n))))
        return out

    printed = residuals(1)
    ok = [sg for sg in (1, -1) if max(residuals(sg).values()) <= tol]
    sigma = ok[0] if len(ok) == 1 else None
    return RelationReport(printed, sigma, residuals(sigma) if sigma is not None else printed)


@lru_cache(maxsize=None)
def _vector_field_functions(index: int):
    X = liealg.generators()[index]
    return tuple(sp.lambdify(liealg.COORDS, c, "numpy") for c in X.components)


def vector_field_values(g: Generator, x, t, s) -> np.ndarray:
    """Components (X^x, X^t, X^s) of the vector field paired with ``g``, broadcast over points."""
    x, s = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(s, dtype=float))
    fns = _vector_field_functions(liealg.CORRESPONDENCE[Generator(g)])
    return np.array([np.broadcast_to(np.asarray(f(x, t, s), dtype=float), x.shape) for f in fns])


@dataclass(frozen=True)
class Current:
    generator: Generator
    tensor: TensorM
    j: np.ndarray  # (3, n): k restricted to s = -Theta
    J: np.ndarray  # (2, n): components (x, t) of the projected current
    Q_value: float

    def k(self, s) -> np.ndarray:
        """k^m = M^m_n X^n on the grid at vertical coordinate s (scalar or array)."""
        M = self.tensor
        X = vector_field_values(self.generator, M.grid.x, M.t, s)
        return np.array([sum(M.mixed(m, n) * X[n] for n in range(3)) for m in range(3)])

    @property
    def density(self) -> np.ndarray:
        return self.J[1]


def current(g: Generator, state: FieldPair, pot: Potential, u: np.ndarray | None = None,
            theta_t: np.ndarray | None = None) -> Current:
    M = tensor_M(state, pot, theta_t=theta_t, u=u)

    def contract(x):
        X = vector_field_values(g, x, state.t, -state.Theta.values)
        return np.array([sum(M.mixed(m, n) * X[n] for n in range(3)) for m in range(3)])

    j = state.grid.seam_symmetric(contract)
    grad_s = np.ones(state.grid.n)
    J = j[:2] / grad_s
    return Current(Generator(g), M, j, J, state.grid.quad(J[1]))


# linear Schrodinger tensor on flat extended space


@dataclass(frozen=True)
class _SchrodingerLift:
    """On-shell hydrodynamic fields of a free Schrodinger solution and their derivatives."""

    grid: Grid1D
    t: float
    R: np.ndarray
    u: np.ndarray

    @classmethod
    def from_source(cls, source) -> "_SchrodingerLift":
        if hasattr(source, "psi"):
            g = source.grid
            psi = source.psi
            R = np.abs(psi) ** 2
            _floor(R, source.t)
            u = np.imag(np.conj(psi) * g.diff_complex(psi)) / R
            return cls(g, source.t, R, u)
        R = source.R.values
        _floor(R, source.t)
        return cls(source.grid, source.t, R, source.grid.diff(source.Theta.values))

    def derivatives(self):
        g, R, u = self.grid, self.R, self.u
        Rx = g.diff(R)
        Rxx = g.diff(R, 2)
        Tht = -0.5 * u**2 + Rxx / (4 * R) - Rx**2 / (8 * R**2)
        Rt = -g.diff(R * u)
        Rxt = g.diff(Rt)
        ut = g.diff(Tht)
        Rtt = -g.diff(Rt * u + R * ut)
        return Rx, Rxx, Tht, Rt, Rxt, Rtt


def _floor(R: np.ndarray, t: float) -> None:
    m = float(np.min(R))
    if m < R_FLOOR:
        raise DensityFloorError(m, t)


def tensor_schrodinger(source, ablate_hessian: bool = False) -> TensorM:
    """Conserved tensor of the free Schrodinger field on flat extended space.

    ``source`` is a FieldPair or a wave field (anything with ``psi``, ``grid``,
    ``t``). With ``ablate_hessian`` the -(1/8) grad grad rho term is dropped,
    which destroys conservation.
    """
    lift = _SchrodingerLift.from_source(source)
    R, u = lift.R, lift.u
    Rx, Rxx, Tht, Rt, Rxt, Rtt = lift.derivatives()
    dth = (u, Tht, np.ones_like(R))
    drho = (Rx, Rt, np.zeros_like(R))
    zero = np.zeros_like(R)
    hess = ((Rxx, Rxt, zero), (Rxt, Rtt, zero), (zero, zero, zero))
    grad_th_sq = u**2 + 2 * Tht
    grad_rho_sq = Rx**2
    trace_part = -0.25 * R * grad_th_sq - grad_rho_sq / (16 * R)
    hw = 0.0 if ablate_hessian else 1.0

    def comp(m, n):
        return (R * dth[m] * dth[n] + METRIC[m, n] * trace_part + drho[m] * drho[n] / (4 * R)
                - hw * hess[m][n] / 8)

    return _assemble(lift.grid, lift.t, comp)


def tensor_continuity(tensors) -> ContinuityResidual:
    """d_x M_xn + d_t M_sn for n in (x, t, s) over a time-ordered list of TensorM slices."""
    tensors = list(tensors)
    g = tensors[0].grid
    times = np.array([T.t for T in tensors])
    out = {}
    for name, n in COORD_INDEX.items():
        inner_t, dts = _time_derivatives(times, np.array([T.lower("s", n) for T in tensors]))
        inner = tensors[2 : len(tensors) - 2]
        out[name] = np.array([d + g.diff(T.lower("x", n)) for d, T in zip(dts, inner)])
    return ContinuityResidual(inner_t, out)
