"""Periodic 1-D grids, sampled fields, spectral calculus and space-time interpolation.

Every numerical module works on the uniform periodic grid x in [-L/2, L/2).
Derivatives are Fourier-spectral, integrals are the periodic trapezoid rule
(spectrally accurate for smooth periodic integrands).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np


class FieldError(ValueError):
    """Raised for invalid field data (non-finite values, negative density...)."""


def _require_finite(values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise FieldError("non-finite field")


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [-L/2, L/2) with ``n`` points (a power of two, n >= 16)."""

    n: int
    L: float

    def __post_init__(self):
        n = int(self.n)
        if n < 16 or n & (n - 1):
            raise ValueError(f"n_points must be a power of two >= 16, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"domain length must be positive, got {self.L}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def x(self) -> np.ndarray:
        return -0.5 * self.L + self.h * np.arange(self.n)

    @property
    def x_mirror(self) -> np.ndarray:
        """Grid coordinates with the seam point taken as +L/2 instead of -L/2."""
        x = self.x
        x[0] = 0.5 * self.L
        return x

    def seam_symmetric(self, density_of_x):
        """Evaluate an x-weighted density, averaging the two images of the seam point.

        The periodic trapezoid rule then integrates polynomial weights like the
        closed rule on [-L/2, L/2], so x-odd integrals of even data vanish.
        ``density_of_x`` may return an array or a dict of arrays.
        """
        a, b = density_of_x(self.x), density_of_x(self.x_mirror)

        def mix(u, v):
            out = np.array(u, dtype=float)
            out[..., 0] = 0.5 * (u[..., 0] + v[..., 0])
            return out

        if isinstance(a, dict):
            return {k: mix(np.asarray(a[k]), np.asarray(b[k])) for k in a}
        return mix(np.asarray(a), np.asarray(b))

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    def dealias_mask(self) -> np.ndarray:
        """Boolean mask keeping the lower two thirds of the spectrum."""
        m = np.abs(np.fft.fftfreq(self.n) * self.n)
        return m < self.n / 3.0

    # array-level calculus, used by the hot loops of the other modules

    def diff(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        """Spectral derivative of a real periodic array (order 1 or 2)."""
        if order not in (1, 2):
            raise ValueError("derivative order must be 1 or 2")
        vhat = np.fft.fft(values)
        k = self.k
        if order == 1:
            # odd derivative: the Nyquist mode has no well-defined sign
            k = k.copy()
            k[self.n // 2] = 0.0
            out = np.fft.ifft(1j * k * vhat)
        else:
            out = np.fft.ifft(-(k**2) * vhat)
        return out.real

    def diff_complex(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        """Spectral derivative of a complex periodic array (order 1 or 2)."""
        if order not in (1, 2):
            raise ValueError("derivative order must be 1 or 2")
        vhat = np.fft.fft(values)
        k = self.k.copy()
        if order == 1:
            k[self.n // 2] = 0.0
            return np.fft.ifft(1j * k * vhat)
        return np.fft.ifft(-(k**2) * vhat)

    def quad(self, values: np.ndarray) -> float:
        return float(self.h * np.sum(values))

    def dealias(self, values: np.ndarray) -> np.ndarray:
        vhat = np.fft.fft(values)
        vhat[~self.dealias_mask()] = 0.0
        return np.fft.ifft(vhat).real

    def product(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Alias-free product of two grid functions (3/2-rule zero padding)."""
        n = self.n
        m = 3 * n // 2

        def pad(v):
            vh = np.fft.fft(v)
            out = np.zeros(m, dtype=complex)
            out[: n // 2] = vh[: n // 2]
            out[m - n // 2 + 1 :] = vh[n // 2 + 1 :]
            # split the Nyquist mode between +n/2 and -n/2
            out[n // 2] = 0.5 * vh[n // 2]
            out[m - n // 2] = 0.5 * vh[n // 2]
            return np.fft.ifft(out).real * (m / n)

        ph = np.fft.fft(pad(a) * pad(b)) * (n / m)
        out = np.zeros(n, dtype=complex)
        out[: n // 2] = ph[: n // 2]
        out[n // 2 + 1 :] = ph[m - n // 2 + 1 :]
        out[n // 2] = ph[n // 2] + ph[m - n // 2]
        return np.fft.ifft(out).real

    def tail_fraction(self, values: np.ndarray) -> float:
        """Fraction of non-mean spectral energy in the modes removed by dealiasing."""
        p = np.abs(np.fft.fft(values)) ** 2
        p[0] = 0.0
        total = p.sum()
        if total == 0.0:
            return 0.0
        return float(p[~self.dealias_mask()].sum() / total)

    def fourier_eval(self, values: np.ndarray, xq: np.ndarray) -> np.ndarray:
        """Evaluate the trigonometric interpolant of ``values`` (or a stack of
        them, last axis = space) at arbitrary points ``xq`` (wrapped)."""
        xq = np.asarray(xq, dtype=float)
        coeffs = np.fft.fft(values, axis=-1) / self.n
        n = self.n
        m = np.fft.fftfreq(n) * n
        # split the Nyquist mode symmetrically so the interpolant is real
        coeffs = coeffs.copy()
        coeffs[..., n // 2] *= 0.5
        kk = np.concatenate([m, [n // 2]]) * (2 * np.pi / self.L)
        coeffs = np.concatenate([coeffs, coeffs[..., n // 2 : n // 2 + 1]], axis=-1)
        phase = np.exp(1j * np.multiply.outer(xq - self.x[0], kk))
        return np.real(np.tensordot(coeffs, phase, axes=([-1], [-1])))


@dataclass(frozen=True)
class Field1D:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise FieldError(f"expected {self.grid.n} samples, got shape {v.shape}")
        _require_finite(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def _wrap(self, other, op):
        if isinstance(other, Field1D):
            if other.grid != self.grid:
                raise FieldError("fields live on different grids")
            other = other.values
        return Field1D(self.grid, op(self.values, other))

    def __add__(self, other):
        return self._wrap(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(other, np.subtract)

    def __mul__(self, other):
        return self._wrap(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return Field1D(self.grid, -self.values)

    @classmethod
    def from_function(cls, grid: Grid1D, func) -> "Field1D":
        return cls(grid, func(grid.x))


def derivative(f: Field1D, order: int = 1) -> Field1D:
    _require_finite(f.values)
    return Field1D(f.grid, f.grid.diff(f.values, order))


def integrate(f: Field1D) -> float:
    _require_finite(f.values)
    return f.grid.quad(f.values)


@dataclass(frozen=True)
class FieldPair:
    """Fluid state at one time: density R >= 0 and phase Theta on a shared grid."""

    R: Field1D
    Theta: Field1D
    t: float = 0.0

    def __post_init__(self):
        if self.R.grid != self.Theta.grid:
            raise FieldError("R and Theta must share one grid")
        if np.any(self.R.values < 0):
            raise FieldError("density must be non-negative")

    @property
    def grid(self) -> Grid1D:
        return self.R.grid

    @classmethod
    def from_arrays(cls, grid: Grid1D, R, Theta, t: float = 0.0) -> "FieldPair":
        return cls(Field1D(grid, R), Field1D(grid, Theta), float(t))

    @classmethod
    def from_functions(cls, grid: Grid1D, R, Theta, t: float = 0.0) -> "FieldPair":
        x = grid.x
        return cls.from_arrays(grid, np.broadcast_to(R(x), x.shape), np.broadcast_to(Theta(x), x.shape), t)

    # CSV body (x, R, Theta) plus a JSON header with the grid and the time stamp

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "R", "Theta"])
        for row in zip(self.grid.x, self.R.values, self.Theta.values):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    def header(self) -> dict:
        return {"n": self.grid.n, "L": self.grid.L, "t": self.t}

    @classmethod
    def from_csv(cls, text: str, header: dict | str) -> "FieldPair":
        if isinstance(header, str):
            header = json.loads(header)
        rows = list(csv.DictReader(io.StringIO(text)))
        grid = Grid1D(int(header["n"]), float(header["L"]))
        R = np.array([float(r["R"]) for r in rows])
        Theta = np.array([float(r["Theta"]) for r in rows])
        return cls.from_arrays(grid, R, Theta, float(header["t"]))


def _lagrange_weights(nodes: np.ndarray, t: float) -> np.ndarray:
    w = np.ones(len(nodes))
    for i, ti in enumerate(nodes):
        for j, tj in enumerate(nodes):
            if i != j:
                w[i] *= (t - tj) / (ti - tj)
    return w


def _lagrange_derivative_weights(nodes: np.ndarray, t: float) -> np.ndarray:
    """Weights of d/dt of the Lagrange interpolant through ``nodes``, evaluated at t."""
    m = len(nodes)
    w = np.zeros(m)
    for i in range(m):
        denom = np.prod([nodes[i] - nodes[j] for j in range(m) if j != i])
        total = 0.0
        for k in range(m):
            if k == i:
                continue
            total += np.prod([t - nodes[j] for j in range(m) if j not in (i, k)])
        w[i] = total / denom
    return w


def _lagrange_weights_many(nodes: np.ndarray, ts: np.ndarray, derivative: bool = False) -> np.ndarray:
    """Rows of Lagrange (or Lagrange-derivative) weights through ``nodes``, one row per entry of ``ts``."""
    nodes = np.asarray(nodes, dtype=float)
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    m = len(nodes)
    diff = ts[:, None] - nodes[None, :]  # (p, m)
    out = np.empty((ts.size, m))
    for i in range(m):
        others = [j for j in range(m) if j != i]
        denom = np.prod(nodes[i] - nodes[others])
        if not derivative:
            out[:, i] = np.prod(diff[:, others], axis=1) / denom
            continue
        total = np.zeros(ts.size)
        for k in others:
            rest = [j for j in others if j != k]
            total += np.prod(diff[:, rest], axis=1) if rest else 1.0
        out[:, i] = total / denom
    return out


@dataclass(frozen=True)
class FieldMap2D:
    """Space-time block of (R, Theta) samples; rows are time slices."""

    grid: Grid1D
    times: np.ndarray
    R_samples: np.ndarray
    Theta_samples: np.ndarray
    _spectra: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        R = np.array(self.R_samples, dtype=float)
        Th = np.array(self.Theta_samples, dtype=float)
        if times.ndim != 1 or len(times) < 1:
            raise FieldError("times must be a non-empty 1-D array")
        if len(times) > 1 and np.any(np.diff(times) <= 0):
            raise FieldError("times must be strictly increasing")
        shape = (len(times), self.grid.n)
        if R.shape != shape or Th.shape != shape:
            raise FieldError(f"samples must have shape {shape}")
        _require_finite(R)
        _require_finite(Th)
        if np.any(R < 0):
            raise FieldError("density must be non-negative")
        for a in (times, R, Th):
            a.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "R_samples", R)
        object.__setattr__(self, "Theta_samples", Th)

    def __len__(self):
        return len(self.times)

    def slice(self, i: int) -> FieldPair:
        return FieldPair.from_arrays(self.grid, self.R_samples[i], self.Theta_samples[i], self.times[i])

    def slices(self):
        return [self.slice(i) for i in range(len(self))]

    @classmethod
    def from_pairs(cls, pairs) -> "FieldMap2D":
        pairs = list(pairs)
        grid = pairs[0].grid
        return cls(
            grid,
            np.array([p.t for p in pairs]),
            np.array([p.R.values for p in pairs]),
            np.array([p.Theta.values for p in pairs]),
        )

    def _time_stencil(self, t: float):
        times = self.times
        if t < times[0] or t > times[-1]:
            raise FieldError(f"time out of range: {t} not in [{times[0]}, {times[-1]}]")
        hit = np.flatnonzero(times == t)
        if hit.size:
            return hit[:1], np.ones(1)
        m = min(4, len(times))
        i = int(np.searchsorted(times, t))
        lo = int(np.clip(i - m // 2, 0, len(times) - m))
        idx = np.arange(lo, lo + m)
        return idx, _lagrange_weights(times[idx], t)

    def sample_arrays(self, xq, t: float, which: str = "both", dx_order: int = 0):
        """Interpolate at points ``xq`` and one time ``t``.

        Space: trigonometric interpolation (exact at nodes, spectral in between).
        Time: local cubic Lagrange interpolation through the four nearest slices.
        ``dx_order`` > 0 returns the interpolated spatial derivative instead.
        """
        xq = np.atleast_1d(np.asarray(xq, dtype=float))
        idx, w = self._time_stencil(float(t))
        out = []
        for name, data in (("R", self.R_samples), ("Theta", self.Theta_samples)):
            if which not in ("both", name):
                continue
            rows = data[idx]
            if dx_order:
                rows = np.array([self.grid.diff(r, dx_order) for r in rows])
            vals = self._space_eval(rows, xq)
            out.append(w @ vals)
        return out if which == "both" else out[0]

    def sample_points(self, xq, tq, which: str = "Theta", dx_order: int = 0, dt_order: int = 0) -> np.ndarray:
        """Interpolate at scattered points (xq[i], tq[i]).

        ``dt_order=1`` differentiates the cubic time interpolant; ``dx_order``
        differentiates spectrally in space.
        """
        xq = np.atleast_1d(np.asarray(xq, dtype=float))
        tq = np.broadcast_to(np.asarray(tq, dtype=float), xq.shape)
        times = self.times
        if np.any(tq < times[0]) or np.any(tq > times[-1]):
            bad = tq[(tq < times[0]) | (tq > times[-1])][0]
            raise FieldError(f"time out of range: {bad} not in [{times[0]}, {times[-1]}]")
        data = self.R_samples if which == "R" else self.Theta_samples
        m = min(4, len(times))
        i = np.searchsorted(times, tq)
        lo = np.clip(i - m // 2, 0, len(times) - m)
        out = np.empty(xq.shape)
        for start in np.unique(lo):
            sel = lo == start
            idx = np.arange(start, start + m)
            rows = data[idx]
            if dx_order:
                rows = np.array([self.grid.diff(r, dx_order) for r in rows])
            vals = self._space_eval(rows, xq[sel])
            W = _lagrange_weights_many(times[idx], tq[sel], derivative=bool(dt_order))
            out[sel] = np.einsum("pk,kp->p", W, vals)
        return out

    def _space_eval(self, rows: np.ndarray, xq: np.ndarray) -> np.ndarray:
        g = self.grid
        xw = (xq + 0.5 * g.L) % g.L - 0.5 * g.L
        pos = (xw - g.x[0]) / g.h
        on_node = np.isclose(pos, np.round(pos), rtol=0, atol=1e-12)
        vals = np.empty((rows.shape[0], xq.size))
        if np.any(on_node):
            j = np.round(pos[on_node]).astype(int) % g.n
            vals[:, on_node] = rows[:, j]
        if np.any(~on_node):
            vals[:, ~on_node] = g.fourier_eval(rows, xw[~on_node])
        return vals


def sample(fmap: FieldMap2D, x: float, t: float) -> tuple[float, float]:
    R, Th = fmap.sample_arrays([x], t)
    return float(R[0]), float(Th[0])
