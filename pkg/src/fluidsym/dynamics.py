"""Time evolution of the isentropic irrotational fluid.

    dR/dt     = -d/dx (R dTheta/dx)
    dTheta/dt = -1/2 (dTheta/dx)^2 - dV/dR

with power-law potentials V = c R^omega, integrated by classical RK4 on the
periodic spectral grid. The free phase equation is Hamilton-Jacobi, so
smooth data steepen into caustics in finite time; a monitor stops the run
before that happens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Field1D, FieldError, FieldMap2D, FieldPair, Grid1D

R_FLOOR = 1e-8


class DensityFloorError(FieldError):
    def __init__(self, min_density: float, t: float | None = None):
        self.min_density = min_density
        self.t = t
        msg = f"density floor violated (min R = {min_density:.3e}"
        msg += f" at t = {t})" if t is not None else ")"
        super().__init__(msg)


class CausticError(RuntimeError):
    """Raised when the caustic monitor trips; ``last_good`` is the last accepted state."""

    def __init__(self, last_good: FieldPair, diagnostic: dict, trajectory: FieldMap2D | None = None):
        self.last_good = last_good
        self.diagnostic = diagnostic
        self.trajectory = trajectory
        super().__init__(f"caustic monitor tripped after t = {last_good.t:.6g}: {diagnostic}")


@dataclass(frozen=True)
class Potential:
    """V(R) = c R^omega (``kind='power'``) or V = 0 (``kind='free'``).

    ``quantum=True`` adds the quantum pressure term (dR/dx)^2 / (8R), which makes the
    hydrodynamic system equivalent to a Schrodinger equation.
    """

    kind: str = "free"
    c: float = 0.0
    omega: float = 0.0
    quantum: bool = False
    r_floor: float = R_FLOOR

    def __post_init__(self):
        if self.kind not in ("free", "power"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if (self.kind == "free") != (self.c == 0.0):
            raise ValueError("kind 'free' if and only if c == 0")

    @classmethod
    def free(cls) -> "Potential":
        return cls()

    @classmethod
    def power(cls, c: float, omega: float, **kw) -> "Potential":
        return cls("power", float(c), float(omega), **kw)

    @classmethod
    def membrane(cls, c: float = 1.0, **kw) -> "Potential":
        return cls.power(c, -1.0, **kw)

    @classmethod
    def conformal(cls, c: float = 1.0, **kw) -> "Potential":
        return cls.power(c, 3.0, **kw)

    @property
    def singular(self) -> bool:
        return self.kind == "power" and self.omega < 1

    def check_floor(self, R: np.ndarray, t: float | None = None) -> None:
        if self.singular or self.quantum:
            m = float(np.min(R))
            if m < self.r_floor:
                raise DensityFloorError(m, t)

    def V(self, R: np.ndarray) -> np.ndarray:
        if self.kind == "free":
            return np.zeros_like(R)
        return self.c * R**self.omega

    def dV(self, R: np.ndarray) -> np.ndarray:
        if self.kind == "free":
            return np.zeros_like(R)
        return self.c * self.omega * R ** (self.omega - 1)

    def pressure(self, R: np.ndarray) -> np.ndarray:
        """R V'(R) - V(R), the flux of momentum carried by the potential."""
        if self.kind == "free":
            return np.zeros_like(R)
        return (self.omega - 1) * self.c * R**self.omega

    def energy_density(self, R: np.ndarray, grid: Grid1D) -> np.ndarray:
        e = self.V(R)
        if self.quantum:
            Rx = grid.diff(R)
            e = e + Rx**2 / (8 * R)
        return e

    def variational_derivative(self, R: np.ndarray, grid: Grid1D) -> np.ndarray:
        """delta/delta R of the integrated potential energy."""
        d = self.dV(R)
        if self.quantum:
            Rx = grid.diff(R)
            Rxx = grid.diff(R, 2)
            d = d + Rx**2 / (8 * R**2) - Rxx / (4 * R)
        return d


def _rhs_arrays(grid: Grid1D, R: np.ndarray, Th: np.ndarray, pot: Potential, dealias: bool = True):
    u = grid.diff(Th)
    if dealias:
        flux = grid.product(R, u)
        ke = 0.5 * grid.product(u, u)
    else:
        flux = R * u
        ke = 0.5 * u * u
    dR = -grid.diff(flux)
    dTh = -ke - pot.variational_derivative(R, grid)
    return dR, dTh


def rhs(state: FieldPair, pot: Potential, dealias: bool = True) -> tuple[Field1D, Field1D]:
    pot.check_floor(state.R.values, state.t)
    dR, dTh = _rhs_arrays(state.grid, state.R.values, state.Theta.values, pot, dealias)
    return Field1D(state.grid, dR), Field1D(state.grid, dTh)


def caustic_monitor(state: FieldPair, dt: float = 1e-3, threshold: float = 0.5, tail_tol: float = 1e-6) -> dict:
    g = state.grid
    Th = state.Theta.values
    max_grad = float(np.max(np.abs(g.diff(Th))))
    max_curv = float(np.max(np.abs(g.diff(Th, 2))))
    tail = g.tail_fraction(Th)
    tripped = max_curv * dt > threshold or tail > tail_tol
    return {"max_grad": max_grad, "max_curv": max_curv, "tail": tail, "tripped": bool(tripped)}


def evolve(
    initial: FieldPair,
    pot: Potential,
    dt: float,
    t_final: float,
    stride: int = 1,
    dealias: bool = True,
    monitor: bool = True,
    threshold: float = 0.5,
    tail_tol: float = 1e-6,
) -> FieldMap2D:
    """RK4 integration from ``initial.t`` to ``t_final``; every ``stride``-th step is stored.

    The last step is shortened if needed so the final slice lands on ``t_final``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not t_final > initial.t:
        raise ValueError("t_final must exceed the initial time")
    g = initial.grid
    R = initial.R.values.copy()
    Th = initial.Theta.values.copy()
    pot.check_floor(R, initial.t)
    cfl = float(np.max(np.abs(g.diff(Th)))) * dt / g.h
    if cfl >= 1:
        raise ValueError(f"CFL sanity check failed: max|dTheta/dx| dt/h = {cfl:.3g}")

    nsteps = max(1, math.ceil((t_final - initial.t) / dt - 1e-9))
    t = initial.t
    times, Rs, Ths = [t], [R.copy()], [Th.copy()]

    def f(R_, Th_):
        return _rhs_arrays(g, R_, Th_, pot, dealias)

    for step in range(1, nsteps + 1):
        h = min(dt, t_final - t) if step == nsteps else dt
        k1 = f(R, Th)
        k2 = f(R + 0.5 * h * k1[0], Th + 0.5 * h * k1[1])
        k3 = f(R + 0.5 * h * k2[0], Th + 0.5 * h * k2[1])
        k4 = f(R + h * k3[0], Th + h * k3[1])
        R_new = R + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        Th_new = Th + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        t_new = t_final if step == nsteps else initial.t + step * dt

        last_good = FieldPair.from_arrays(g, R, Th, t)
        if not (np.all(np.isfinite(R_new)) and np.all(np.isfinite(Th_new))):
            raise CausticError(last_good, {"nonfinite": True}, FieldMap2D(g, times, Rs, Ths))
        try:
            pot.check_floor(R_new, t_new)
        except DensityFloorError as err:
            err.last_good = last_good
            raise
        # exact free and smooth flows keep R >= 0; a sign change means resolution is lost near a caustic
        if np.min(R_new) < 0:
            raise CausticError(last_good, {"negative_density": float(np.min(R_new))}, FieldMap2D(g, times, Rs, Ths))
        if monitor:
            diag = caustic_monitor(FieldPair.from_arrays(g, np.abs(R_new), Th_new, t_new), dt, threshold, tail_tol)
            if diag["tripped"]:
                raise CausticError(last_good, diag, FieldMap2D(g, times, Rs, Ths))
        R, Th, t = R_new, Th_new, t_new
        if step % stride == 0 or step == nsteps:
            if times[-1] != t:
                times.append(t)
                Rs.append(R.copy())
                Ths.append(Th.copy())
    return FieldMap2D(g, np.array(times), np.array(Rs), np.array(Ths))


# test data used throughout the suite


def standard_datum(grid: Grid1D | None = None, t: float = 0.0) -> FieldPair:
    """Asymmetric Gaussian datum on L=40, n=512 with a 1e-6 density pedestal."""
    grid = grid or Grid1D(512, 40.0)
    return FieldPair.from_functions(
        grid,
        lambda x: 0.5 * np.exp(-(x**2) / 2) + 1e-6,
        lambda x: 0.3 * np.exp(-((x - 1) ** 2) / 2),
        t,
    )


def membrane_datum(grid: Grid1D | None = None, pedestal: float = 0.1, t: float = 0.0) -> FieldPair:
    """Standard datum on a thicker density pedestal, for the c/R potential.

    The c/R force scales like c |R_x| / R^3, so a 1e-6 pedestal forces c below
    ~1e-15 for a stable run, where no symmetry breaking is measurable.
    """
    grid = grid or Grid1D(512, 40.0)
    return FieldPair.from_functions(
        grid,
        lambda x: 0.5 * np.exp(-(x**2) / 2) + pedestal,
        lambda x: 0.3 * np.exp(-((x - 1) ** 2) / 2),
        t,
    )


def _smooth_step(z: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for z <= 0, 1 for z >= 1, built from exp(-1/z)."""
    z = np.clip(np.asarray(z, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(z > 0, np.exp(-1.0 / np.where(z > 0, z, 1.0)), 0.0)
        b = np.where(z < 1, np.exp(-1.0 / np.where(z < 1, 1.0 - z, 1.0)), 0.0)
    return a / (a + b)


def smooth_window(x: np.ndarray, half_width: float, edge: float) -> np.ndarray:
    """Smooth bump equal to 1 on |x| <= half_width - edge and 0 on |x| >= half_width."""
    if not 0 < edge <= half_width:
        raise ValueError("need 0 < edge <= half_width")
    return _smooth_step((half_width - np.abs(x)) / edge)


def window_plateau(grid: Grid1D, half_width: float | None = None, edge: float | None = None) -> np.ndarray:
    """Boolean mask of the points where the default (or given) window is exactly 1."""
    half_width = 0.35 * grid.L if half_width is None else half_width
    edge = 0.225 * grid.L if edge is None else edge
    return np.abs(grid.x) <= half_width - edge


def windowed_plane_wave(grid: Grid1D, beta: float, R0: float = 1.0, half_width: float | None = None,
                        edge: float | None = None, t: float = 0.0) -> FieldPair:
    """Theta = (beta x - beta^2 t / 2) w(x), R = R0: a plane wave inside a smooth window.

    The window is exactly 1 on its plateau (see ``window_plateau``), where the
    fields solve the free equations; it vanishes well before the box edge so
    the phase stays periodic.
    """
    half_width = 0.35 * grid.L if half_width is None else half_width
    edge = 0.225 * grid.L if edge is None else edge
    w = smooth_window(grid.x, half_width, edge)
    return FieldPair.from_arrays(grid, np.full(grid.n, R0), (beta * grid.x - 0.5 * beta**2 * t) * w, t)
