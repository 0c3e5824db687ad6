"""The ten conserved functionals of the fluid model and their functional gradients.

Densities (u = dTheta/dx, h = R u^2/2 + V, p = R u):

    H  = int h                      P  = int p
    B  = int (x R - t p)            N  = int R
    Dl = int (t h - x p / 2)        K  = -t^2 H + 2 t Dl + 1/2 int x^2 R
    D  = t H - int R Theta          G  = int (x h - Theta p)
    C1 = int (x^2 h / 2 - x Theta p + Theta^2 R)
    C2 = int (x t h - (x^2/2 + t Theta) p + x Theta R)

Functional gradients are written out analytically; derivatives only ever act
on periodic fields (R, Theta, R u), never on the sawtooth coordinate x.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dynamics import Potential
from .grid import Field1D, FieldMap2D, FieldPair


class Generator(str, enum.Enum):
    H = "H"
    P = "P"
    B = "B"
    N = "N"
    Delta = "Delta"
    K = "K"
    D = "D"
    G = "G"
    C1 = "C1"
    C2 = "C2"

    def __str__(self):
        return self.value


GENERATORS = tuple(Generator)
# fiber-preserving (Schrodinger) and Poincare subsets
SCHRODINGER_SET = frozenset({Generator.H, Generator.P, Generator.B, Generator.N, Generator.Delta, Generator.K})
POINCARE_SET = frozenset({Generator.H, Generator.P, Generator.B, Generator.N, Generator.G, Generator.D})


@dataclass(frozen=True)
class FunctionalGradient:
    dR: Field1D
    dTheta: Field1D


class _Local:
    """Pointwise ingredients shared by all densities and gradients."""

    def __init__(self, state: FieldPair, pot: Potential, u: np.ndarray | None = None):
        g = state.grid
        pot.check_floor(state.R.values, state.t)
        self.grid = g
        self.t = state.t
        self.R = state.R.values
        self.Th = state.Theta.values
        self.u = g.diff(self.Th) if u is None else u
        self.Rx = g.diff(self.R)
        self.p = self.R * self.u
        self.px = g.diff(self.p)
        self.h = 0.5 * self.R * self.u**2 + pot.energy_density(self.R, g)
        # delta H / delta R and delta H / delta Theta
        self.hR = 0.5 * self.u**2 + pot.variational_derivative(self.R, g)
        self.hT = -self.px


def _densities(loc: _Local) -> dict:
    return loc.grid.seam_symmetric(lambda x: _densities_at(loc, x))


def _densities_at(loc: _Local, x: np.ndarray) -> dict:
    t, R, Th, h, p = loc.t, loc.R, loc.Th, loc.h, loc.p
    dl = t * h - 0.5 * x * p
    return {
        Generator.H: h,
        Generator.P: p,
        Generator.B: x * R - t * p,
        Generator.N: R,
        Generator.Delta: dl,
        Generator.K: -(t**2) * h + 2 * t * dl + 0.5 * x**2 * R,
        Generator.D: t * h - R * Th,
        Generator.G: x * h - Th * p,
        Generator.C1: 0.5 * x**2 * h - x * Th * p + Th**2 * R,
        Generator.C2: x * t * h - (0.5 * x**2 + t * Th) * p + x * Th * R,
    }


def charge_density(g: Generator, state: FieldPair, pot: Potential, u: np.ndarray | None = None) -> np.ndarray:
    return _densities(_Local(state, pot, u))[Generator(g)]


def charge(g: Generator, state: FieldPair, pot: Potential, u: np.ndarray | None = None) -> float:
    """Value of one conserved functional; explicit times are taken from ``state.t``.

    ``u`` overrides the spectral dTheta/dx, for phases that are not periodic.
    """
    return state.grid.quad(charge_density(g, state, pot, u))


def all_charges(state: FieldPair, pot: Potential, u: np.ndarray | None = None) -> dict:
    loc = _Local(state, pot, u)
    return {k: loc.grid.quad(v) for k, v in _densities(loc).items()}


def _gradients(loc: _Local) -> dict:
    pairs = loc.grid.seam_symmetric(lambda x: {k: np.array(v) for k, v in _gradients_at(loc, x).items()})
    return {k: (v[0], v[1]) for k, v in pairs.items()}


def _gradients_at(loc: _Local, x: np.ndarray) -> dict:
    t, R, Th, u, Rx, p, px = loc.t, loc.R, loc.Th, loc.u, loc.Rx, loc.p, loc.px
    hR, hT = loc.hR, loc.hT
    one = np.ones_like(R)
    zero = np.zeros_like(R)
    dl_R = t * hR - 0.5 * x * u
    dl_T = t * hT + 0.5 * R + 0.5 * x * Rx
    return {
        Generator.H: (hR, hT),
        Generator.P: (u, -Rx),
        Generator.B: (x - t * u, t * Rx),
        Generator.N: (one, zero),
        Generator.Delta: (dl_R, dl_T),
        Generator.K: (-(t**2) * hR + 2 * t * dl_R + 0.5 * x**2, -(t**2) * hT + 2 * t * dl_T),
        Generator.D: (t * hR - Th, t * hT - R),
        Generator.G: (x * hR - Th * u, -p - x * px + Th * Rx),
        Generator.C1: (
            0.5 * x**2 * hR - x * Th * u + Th**2,
            -x * p + 3 * Th * R - 0.5 * x**2 * px + x * Th * Rx,
        ),
        Generator.C2: (
            x * t * hR - (0.5 * x**2 + t * Th) * u + x * Th,
            -t * p + 2 * x * R - x * t * px + 0.5 * x**2 * Rx + t * Th * Rx,
        ),
    }


def functional_gradient(g: Generator, state: FieldPair, pot: Potential) -> FunctionalGradient:
    dR, dT = _gradients(_Local(state, pot))[Generator(g)]
    return FunctionalGradient(Field1D(state.grid, dR), Field1D(state.grid, dT))


def all_gradients(state: FieldPair, pot: Potential) -> dict:
    loc = _Local(state, pot)
    return {k: (v[0], v[1]) for k, v in _gradients(loc).items()}


def drift_scale(q0: float) -> float:
    return max(abs(q0), 1e-3)


def conservation_report(traj: FieldMap2D, pot: Potential, slices=None) -> list[dict]:
    """Evaluate all ten charges on every stored slice and report the relative drift."""
    idx = range(len(traj)) if slices is None else slices
    values = {g: [] for g in GENERATORS}
    for i in idx:
        q = all_charges(traj.slice(i), pot)
        for g in GENERATORS:
            values[g].append(q[g])
    rows = []
    for g in GENERATORS:
        v = np.array(values[g])
        rows.append(
            {
                "generator": g.value,
                "initial": float(v[0]),
                "final": float(v[-1]),
                "max_drift": float(np.max(np.abs(v - v[0])) / drift_scale(v[0])),
            }
        )
    return rows
