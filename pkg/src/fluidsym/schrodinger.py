"""Schrodinger evolution and its hydrodynamic description.

The wave equation integrated here is

    i Psi_t = -1/2 Psi_xx - 3 c |Psi|^4 Psi,

the Euler-Lagrange equation of  int 1/2 |Psi_x|^2 - c |Psi|^6.  Writing
Psi = sqrt(R) exp(i Theta) turns it into the fluid system with potential
-c R^3 plus the quantum pressure term (R_x)^2 / (8R).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import sympy as sp

from .dynamics import Potential
from .emtensor import _time_derivatives
from .grid import FieldError, FieldMap2D, FieldPair, Grid1D

AMPLITUDE_FLOOR = 1e-6


class PhaseSingularityError(FieldError):
    def __init__(self, min_amplitude: float):
        self.min_amplitude = min_amplitude
        super().__init__(f"phase singularity: Madelung map undefined (min |Psi| = {min_amplitude:.3e})")


@dataclass(frozen=True)
class WaveField:
    grid: Grid1D
    psi: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        psi = np.array(self.psi, dtype=complex)
        if psi.shape != (self.grid.n,):
            raise FieldError(f"wave field must have shape ({self.grid.n},)")
        if not np.all(np.isfinite(psi)):
            raise FieldError("wave field has non-finite values")
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)
        if not self.norm() > 0:
            raise FieldError("wave field has zero norm")

    @classmethod
    def from_function(cls, grid: Grid1D, func, t: float = 0.0) -> "WaveField":
        return cls(grid, func(grid.x), t)

    def norm(self) -> float:
        return self.grid.quad(np.abs(self.psi) ** 2)

    def velocity(self) -> np.ndarray:
        """dTheta/dx computed from Psi directly, valid for non-periodic phases."""
        R = np.abs(self.psi) ** 2
        return np.imag(np.conj(self.psi) * self.grid.diff_complex(self.psi)) / R


@dataclass(frozen=True)
class Nonlinearity:
    """Coefficient c of the sextic energy term; c = 0 is the linear equation."""

    c: float = 0.0

    @classmethod
    def linear(cls) -> "Nonlinearity":
        return cls(0.0)

    @classmethod
    def quintic(cls, c: float) -> "Nonlinearity":
        return cls(float(c))

    @property
    def is_linear(self) -> bool:
        return self.c == 0.0

    def hydro_potential(self) -> Potential:
        """Fluid potential of the amplitude-phase split, quantum pressure included."""
        if self.is_linear:
            return Potential(quantum=True)
        return Potential.power(-self.c, 3.0, quantum=True)

    def energy(self, wave: WaveField) -> float:
        g = wave.grid
        rho = np.abs(wave.psi) ** 2
        return g.quad(0.5 * np.abs(g.diff_complex(wave.psi)) ** 2 - self.c * rho**3)


@dataclass(frozen=True)
class WaveTrajectory:
    grid: Grid1D
    times: np.ndarray
    psi: np.ndarray  # (slices, n)

    def __len__(self):
        return len(self.times)

    def slice(self, i: int) -> WaveField:
        return WaveField(self.grid, self.psi[i], float(self.times[i]))

    def slices(self):
        return [self.slice(i) for i in range(len(self))]

    def hydro(self) -> FieldMap2D:
        pairs = [hydro_decompose(w) for w in self.slices()]
        return FieldMap2D(self.grid, self.times, [p.R.values for p in pairs], [p.Theta.values for p in pairs])


def evolve_nls(psi0: WaveField, nonlinearity: Nonlinearity, dt: float, t_final: float,
               stride: int = 1) -> WaveTrajectory:
    """Strang split-step Fourier integration (half nonlinear, full linear, half nonlinear)."""
    g = psi0.grid
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not t_final > psi0.t:
        raise ValueError("t_final must exceed the initial time")
    if dt * (math.pi * g.n / g.L) ** 2 / 2 >= 1:
        raise ValueError("dt does not resolve the highest retained mode")
    nsteps = max(1, math.ceil((t_final - psi0.t) / dt - 1e-9))
    k2 = g.k**2
    c = nonlinearity.c

    def half_nonlinear(psi, h):
        if c == 0.0:
            return psi
        return psi * np.exp(1j * 3 * c * np.abs(psi) ** 4 * (0.5 * h))

    psi = psi0.psi.copy()
    t = psi0.t
    times, out = [t], [psi.copy()]
    for step in range(1, nsteps + 1):
        h = (t_final - t) if step == nsteps else dt
        psi = half_nonlinear(psi, h)
        psi = np.fft.ifft(np.exp(-0.5j * k2 * h) * np.fft.fft(psi))
        psi = half_nonlinear(psi, h)
        t = t_final if step == nsteps else psi0.t + step * dt
        if step % stride == 0 or step == nsteps:
            times.append(t)
            out.append(psi.copy())
    return WaveTrajectory(g, np.array(times), np.array(out))


def hydro_decompose(wave: WaveField) -> FieldPair:
    """R = |Psi|^2 and the phase unwrapped along the grid from its principal value at the left edge."""
    amp = np.abs(wave.psi)
    if float(np.min(amp)) < AMPLITUDE_FLOOR:
        raise PhaseSingularityError(float(np.min(amp)))
    return FieldPair.from_arrays(wave.grid, amp**2, np.unwrap(np.angle(wave.psi)), wave.t)


def plane_wave(grid: Grid1D, mode: int, t: float = 0.0, amplitude: float = 1.0) -> WaveField:
    """amplitude * exp(i(k x - k^2 t / 2)) with k = 2 pi mode / L."""
    k = 2 * math.pi * mode / grid.L
    return WaveField(grid, amplitude * np.exp(1j * (k * grid.x - 0.5 * k**2 * t)), t)


def background_packet(grid: Grid1D, amplitude: float = 0.5, width: float = 1.0, centre: float = 0.0,
                      momentum: float = 0.0, t: float = 0.0) -> WaveField:
    """1 + amplitude * Gaussian: a localized disturbance on a uniform background, free of zeros."""
    x = grid.x - centre
    return WaveField(grid, 1.0 + amplitude * np.exp(-(x**2) / (2 * width**2) + 1j * momentum * x), t)


@dataclass(frozen=True)
class HydroResidual:
    times: np.ndarray
    continuity: np.ndarray
    phase: np.ndarray

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.continuity)), np.max(np.abs(self.phase))))


def effective_potential_check(traj: FieldMap2D, nonlinearity: Nonlinearity = Nonlinearity()) -> HydroResidual:
    """Residuals of the hydrodynamic pair on a sampled trajectory:

        R_t + (R Theta_x)_x
        Theta_t + Theta_x^2 / 2 + dV/dR + (R_x)^2 / (8 R^2) - R_xx / (4 R)

    with time derivatives by 5-point differences and x-derivatives spectral.
    """
    g = traj.grid
    pot = nonlinearity.hydro_potential()
    times, Rt = _time_derivatives(traj.times, traj.R_samples)
    _, Tht = _time_derivatives(traj.times, traj.Theta_samples)
    cont, phase = [], []
    for i, t in enumerate(times):
        st = traj.slice(i + 2)
        R, Th = st.R.values, st.Theta.values
        u = g.diff(Th)
        cont.append(Rt[i] + g.diff(R * u))
        phase.append(Tht[i] + 0.5 * u**2 + pot.variational_derivative(R, g))
    return HydroResidual(times, np.array(cont), np.array(phase))


# real wave field mixing the two vertical charges +1 and -1

_R, _Th, _S = sp.symbols("R Theta s", positive=True)


@dataclass(frozen=True)
class RealFieldReport:
    section_residual: float  # (a)
    weak_condition_symbolic: bool  # (b), exact symbolic identity
    weak_condition_residual: float  # (b), floating point, relative
    reduced_density_residual: float  # (c)
    s_points: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _weak_condition_symbolic() -> bool:
    rho = sp.sqrt(_R)
    theta = sp.sqrt(_R) * sp.sin(_Th + _S)
    expr = (rho * sp.diff(theta, _S)).subs(_S, -_Th)
    return sp.simplify(expr - _R) == 0


def real_field_check(state: FieldPair, theta_t: np.ndarray | None = None, R_t: np.ndarray | None = None,
                     s_points: int = 64) -> RealFieldReport:
    """Checks on the amplitude-phase split rho = sqrt(R), theta = sqrt(R) sin(Theta + s):

    (a) theta vanishes on the section s = -Theta;
    (b) rho d_s theta = R on the section;
    (c) the s-average of -(grad psi)^2 for psi = sqrt(R) cos(Theta + s), with
        (grad psi)^2 = psi_x^2 + 2 psi_t psi_s, equals
        -(R Theta_x^2 / 2 + R Theta_t + R_x^2 / (8 R)).

    Time derivatives default to the free Schrodinger flow; (c) is an algebraic
    identity in them. Points with R = 0 are excluded from (b) and (c).
    """
    g = state.grid
    R, Th = state.R.values, state.Theta.values
    u = g.diff(Th)
    Rx = g.diff(R)
    keep = R > 0
    if theta_t is None:
        safe = np.where(keep, R, 1.0)
        theta_t = -0.5 * u**2 + g.diff(R, 2) / (4 * safe) - Rx**2 / (8 * safe**2)
    if R_t is None:
        R_t = -g.diff(R * u)

    sec = -Th
    a = np.max(np.abs(np.sqrt(R) * np.sin(Th + sec)))

    rho = np.sqrt(R[keep])
    dtheta_s = np.sqrt(R[keep]) * np.cos(Th[keep] + sec[keep])
    b = float(np.max(np.abs(rho * dtheta_s - R[keep]) / R[keep])) if np.any(keep) else 0.0

    Rk, uk, Rxk, Thk = R[keep], u[keep], Rx[keep], Th[keep]
    amp = np.sqrt(Rk)
    ax = Rxk / (2 * amp)
    at = R_t[keep] / (2 * amp)
    s = 2 * math.pi * np.arange(s_points) / s_points
    phi = Thk[None, :] + s[:, None]
    psi_x = ax * np.cos(phi) - amp * uk * np.sin(phi)
    psi_t = at * np.cos(phi) - amp * theta_t[keep] * np.sin(phi)
    psi_s = -amp * np.sin(phi)
    averaged = -np.mean(psi_x**2 + 2 * psi_t * psi_s, axis=0)
    reduced = -(0.5 * Rk * uk**2 + Rk * theta_t[keep] + Rxk**2 / (8 * Rk))
    scale = max(1.0, float(np.max(np.abs(reduced)))) if reduced.size else 1.0
    c = float(np.max(np.abs(averaged - reduced))) / scale if reduced.size else 0.0
    return RealFieldReport(float(a), _weak_condition_symbolic(), b, c, s_points)
