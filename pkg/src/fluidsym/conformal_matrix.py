"""5x5 matrix realization of o(3,2) acting on the null quadric of R^{3,2}.

Basis order is (x, t, s, a, b); the quadratic form is x^2 + 2ts + 2ab. A
point y = (x, t, s) of extended space is embedded as (y, 1, -|y|^2/2) and
recovered by dividing by the a-component.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
import sympy as sp

GAMMA3 = np.array([[1.0, 0, 0], [0, 0, 1.0], [0, 1.0, 0]])
GAMMA = np.zeros((5, 5))
GAMMA[:3, :3] = GAMMA3
GAMMA[3, 4] = GAMMA[4, 3] = 1.0

XI = np.array([0.0, 0.0, 1.0])
INFINITY_TOL = 1e-12


class PointAtInfinityError(ValueError):
    def __init__(self, a: float):
        super().__init__(f"point at infinity: a-component {a:.3e} leaves the affine chart")
        self.a = a


def quadratic(y: np.ndarray) -> float:
    y = np.asarray(y, dtype=float)
    return float(y @ GAMMA3 @ y)


def embed(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return np.concatenate([y, [1.0, -0.5 * quadratic(y)]])


def project(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if abs(p[3]) <= INFINITY_TOL:
        raise PointAtInfinityError(p[3])
    return p[:3] / p[3]


def null_defect(p) -> float:
    p = np.asarray(p, dtype=float)
    return float(p @ GAMMA @ p)


def algebra_element(Lam=None, V=None, W=None, lam: float = 0.0, tol: float = 1e-12) -> np.ndarray:
    """Assemble [[Lam, V, W], [-Wbar, -lam, 0], [-Vbar, 0, lam]] with Vbar = (gamma V)^T."""
    Lam = np.zeros((3, 3)) if Lam is None else np.asarray(Lam, dtype=float)
    V = np.zeros(3) if V is None else np.asarray(V, dtype=float)
    W = np.zeros(3) if W is None else np.asarray(W, dtype=float)
    if np.max(np.abs(Lam.T @ GAMMA3 + GAMMA3 @ Lam)) > tol:
        raise ValueError("invalid rotation block: not in o(2,1)")
    Z = np.zeros((5, 5))
    Z[:3, :3] = Lam
    Z[:3, 3] = V
    Z[:3, 4] = W
    Z[3, :3] = -(GAMMA3 @ W)
    Z[4, :3] = -(GAMMA3 @ V)
    Z[3, 3] = -lam
    Z[4, 4] = lam
    return Z


def algebra_defect(Z: np.ndarray) -> float:
    return float(np.max(np.abs(Z.T @ GAMMA + GAMMA @ Z)))


def group_defect(M: np.ndarray) -> float:
    return float(np.max(np.abs(M.T @ GAMMA @ M - GAMMA)))


def blocks(Z: np.ndarray):
    """Inverse of ``algebra_element``: (Lam, V, W, lam)."""
    return Z[:3, :3].copy(), Z[:3, 3].copy(), Z[:3, 4].copy(), float(Z[4, 4])


def infinitesimal_action(Z: np.ndarray, y) -> np.ndarray:
    """Lam y + V - W |y|^2 / 2 + (Wbar y + lam) y."""
    y = np.asarray(y, dtype=float)
    Lam, V, W, lam = blocks(Z)
    return Lam @ y + V - 0.5 * W * quadratic(y) + (float((GAMMA3 @ W) @ y) + lam) * y


def is_nilpotent(Z: np.ndarray, tol: float = 1e-14) -> bool:
    return bool(np.max(np.abs(np.linalg.matrix_power(Z, 5))) <= tol * max(1.0, np.max(np.abs(Z)) ** 5))


def expm(Z: np.ndarray) -> np.ndarray:
    """Matrix exponential: finite series if nilpotent, exact on diagonals, scipy otherwise."""
    Z = np.asarray(Z, dtype=float)
    if is_nilpotent(Z):
        out = np.eye(5)
        term = np.eye(5)
        for k in range(1, 5):
            term = term @ Z / k
            out = out + term
        return out
    if np.count_nonzero(Z - np.diag(np.diag(Z))) == 0:
        return np.diag(np.exp(np.diag(Z)))
    return scipy.linalg.expm(Z)


def group_action(Z: np.ndarray, y) -> np.ndarray:
    """project(exp(Z) embed(y))."""
    return apply_matrix(expm(Z), y)


def apply_matrix(M: np.ndarray, y) -> np.ndarray:
    return project(M @ embed(y))


def conformal_factor(M: np.ndarray, y) -> float:
    """Omega at y for the conformal map induced by M: 1/a' with a' the new a-component."""
    a = (M @ embed(y))[3]
    if abs(a) <= INFINITY_TOL:
        raise PointAtInfinityError(a)
    return 1.0 / a


XI_HAT = algebra_element(V=XI)


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


def schrodinger_condition(Z: np.ndarray, tol: float = 1e-12) -> bool:
    """True iff Z commutes with the vertical translation XI_HAT."""
    return bool(np.max(np.abs(commutator(Z, XI_HAT))) <= tol)


def generator_matrices() -> list[np.ndarray]:
    """Matrices whose infinitesimal actions are the vector fields X0..X9."""
    z = np.zeros((3, 3))
    boost = np.array([[0, 1.0, 0], [0, 0, 0], [-1.0, 0, 0]])
    antiboost = np.array([[0, 0, -1.0], [1.0, 0, 0], [0, 0, 0]])
    return [
        algebra_element(V=[0, 1, 0]),
        algebra_element(V=[-1, 0, 0]),
        algebra_element(V=[0, 0, -1]),
        algebra_element(Lam=boost),
        algebra_element(Lam=np.diag([0, 0.5, -0.5]), lam=0.5),
        algebra_element(W=[0, 0, 1]),
        algebra_element(Lam=np.diag([0, 1.0, -1.0])),
        algebra_element(Lam=antiboost),
        algebra_element(Lam=z, W=[0, -1, 0]),
        algebra_element(W=[1, 0, 0]),
    ]


GENERATOR_NAMES = ("time", "space", "vertical", "boost", "dilatation", "expansion",
                   "time_dilation", "antiboost", "C1", "C2")

# one-parameter families that do not preserve the vertical direction
FAMILIES = {"time_dilation": 6, "antiboost": 7, "C1": 8, "C2": 9}


def family_matrix(name: str, parameter: float) -> np.ndarray:
    return expm(parameter * generator_matrices()[FAMILIES[name]])


def closed_form(name: str, parameter: float, y) -> np.ndarray:
    """Finite actions of the four families written out explicitly."""
    x, t, s = map(float, y)
    p = float(parameter)
    if name == "time_dilation":
        return np.array([x, np.exp(p) * t, np.exp(-p) * s])
    if name == "antiboost":
        return np.array([x - p * s, t + p * x - 0.5 * p**2 * s, s])
    if name == "C1":
        den = 1 + p * s
        if abs(den) <= INFINITY_TOL:
            raise PointAtInfinityError(den)
        return np.array([x / den, t + 0.5 * p * x**2 / den, s / den])
    if name == "C2":
        den = (1 - 0.5 * p * x) ** 2 + 0.5 * p**2 * t * s
        if abs(den) <= INFINITY_TOL:
            raise PointAtInfinityError(den)
        return np.array([(x - p * (0.5 * x**2 + t * s)) / den, t / den, s / den])
    raise KeyError(name)


def closed_form_factor(name: str, parameter: float, y) -> float:
    x, t, s = map(float, y)
    p = float(parameter)
    if name in ("time_dilation", "antiboost"):
        return 1.0
    if name == "C1":
        return 1.0 / (1 + p * s)
    if name == "C2":
        return 1.0 / ((1 - 0.5 * p * x) ** 2 + 0.5 * p**2 * t * s)
    raise KeyError(name)


def representation_sign(points, fields=None) -> int | None:
    """Uniform sign relating matrix commutators to vector-field brackets.

    Returns +1 or -1 if infinitesimal_action([Z_a, Z_b]) = sign * [X_a, X_b]
    at every point for every pair, else None.
    """
    from . import liealg

    Zs = generator_matrices()
    Xs = liealg.generators() if fields is None else fields
    found = set()
    for i in range(10):
        for j in range(i + 1, 10):
            br = sp.lambdify(liealg.COORDS, list(liealg.lie_bracket(Xs[i], Xs[j]).components), "numpy")
            C = commutator(Zs[i], Zs[j])
            for p in points:
                lhs = infinitesimal_action(C, p)
                rhs = np.array(br(*p), dtype=float)
                if np.allclose(lhs, rhs, atol=1e-12) and np.allclose(lhs, -rhs, atol=1e-12):
                    continue
                if np.allclose(lhs, rhs, atol=1e-12):
                    found.add(1)
                elif np.allclose(lhs, -rhs, atol=1e-12):
                    found.add(-1)
                else:
                    return None
    return found.pop() if len(found) == 1 else None
