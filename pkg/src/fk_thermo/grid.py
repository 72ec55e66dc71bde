"""Uniform periodic grids on the unit circle and calculus on sampled functions.

The circle is the interval [0, 1) with 0 and 1 identified.  Everything else
in the package (operators, propagators, path simulation, quadrature) is built
on the three primitives here: sampling of trigonometric sums, Fourier
differentiation and rectangle-rule quadrature.  On a uniform periodic grid the
rectangle rule coincides with the trapezoid rule and is spectrally accurate
for smooth integrands, and Fourier differentiation is exact (to roundoff) for
harmonics below the Nyquist mode.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PeriodicGrid",
    "GridFunction",
    "HarmonicSpec",
    "make_grid",
    "derivative",
    "integrate",
    "function_from_csv",
]


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform discretization of the circle with nodes x_i = i/n."""

    n: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)):
            raise ValueError(f"grid size must be an integer, got {self.n!r}")
        if self.n < 4 or self.n % 2 != 0:
            raise ValueError(f"grid size must be even and >= 4, got {self.n}")
        nodes = np.arange(self.n, dtype=float) / self.n
        nodes.setflags(write=False)
        object.__setattr__(self, "_nodes", nodes)

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes  # type: ignore[attr-defined]

    def __eq__(self, other) -> bool:
        return isinstance(other, PeriodicGrid) and other.n == self.n

    def __hash__(self) -> int:
        return hash(("PeriodicGrid", self.n))


def make_grid(n: int) -> PeriodicGrid:
    """Build a uniform periodic grid with n nodes (n even, n >= 4)."""
    return PeriodicGrid(n)


@dataclass(frozen=True)
class GridFunction:
    """Real-valued function sampled at the nodes of a PeriodicGrid."""

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise ValueError(
                f"values must have shape ({self.grid.n},), got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    # Small arithmetic surface so numerical code reads like the formulas.
    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, GridFunction):
            if other.grid != self.grid:
                raise ValueError("grid functions live on different grids")
            return other.values
        return np.asarray(other, dtype=float)

    def __add__(self, other) -> "GridFunction":
        return GridFunction(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other) -> "GridFunction":
        return GridFunction(self.grid, self.values - self._coerce(other))

    def __rsub__(self, other) -> "GridFunction":
        return GridFunction(self.grid, self._coerce(other) - self.values)

    def __mul__(self, other) -> "GridFunction":
        return GridFunction(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.grid, -self.values)

    def interp(self, x) -> np.ndarray | float:
        """Evaluate at arbitrary circle points by periodic linear interpolation."""
        xw = np.asarray(x, dtype=float) % 1.0
        xw = np.where(xw >= 1.0, xw - 1.0, xw)
        xp = np.concatenate([self.grid.nodes, [1.0]])
        fp = np.concatenate([self.values, self.values[:1]])
        out = np.interp(xw, xp, fp)
        return float(out) if np.isscalar(x) else out


@dataclass(frozen=True)
class HarmonicSpec:
    """Finite trigonometric sum: constant + sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x)."""

    constant: float = 0.0
    harmonics: tuple = field(default_factory=tuple)

    def __post_init__(self) -> None:
        norm = []
        seen = set()
        for item in self.harmonics:
            if len(item) != 3:
                raise ValueError(f"harmonic entries must be (k, a, b), got {item!r}")
            k, a, b = item
            if int(k) != k or k < 1:
                raise ValueError(f"wavenumbers must be positive integers, got {k!r}")
            k = int(k)
            if k in seen:
                raise ValueError(f"duplicate wavenumber {k}")
            seen.add(k)
            norm.append((k, float(a), float(b)))
        object.__setattr__(self, "harmonics", tuple(norm))
        object.__setattr__(self, "constant", float(self.constant))

    def max_wavenumber(self) -> int:
        return max((k for k, _, _ in self.harmonics), default=0)

    def sample(self, grid: PeriodicGrid) -> GridFunction:
        """Evaluate the sum at the grid nodes; rejects aliased wavenumbers."""
        kmax = self.max_wavenumber()
        if kmax >= grid.n // 2:
            raise ValueError(
                f"wavenumber {kmax} aliases on a grid with {grid.n} nodes "
                f"(need k < {grid.n // 2})"
            )
        x = grid.nodes
        vals = np.full(grid.n, self.constant)
        for k, a, b in self.harmonics:
            vals = vals + a * np.cos(2 * np.pi * k * x) + b * np.sin(2 * np.pi * k * x)
        return GridFunction(grid, vals)


def _angular_wavenumbers(grid: PeriodicGrid) -> np.ndarray:
    return 2.0 * np.pi * np.fft.rfftfreq(grid.n, d=grid.h)


def derivative(f: GridFunction, order: int = 1) -> GridFunction:
    """Fourier differentiation of periodic samples (order 1 or 2).

    Exact for harmonic content below the Nyquist mode.  The Nyquist mode is
    dropped for the first derivative (its sampled derivative is odd and
    unrepresentable on the grid).
    """
    if order not in (1, 2):
        raise ValueError(f"derivative order must be 1 or 2, got {order}")
    k = _angular_wavenumbers(f.grid)
    coef = np.fft.rfft(f.values)
    if order == 1:
        mult = 1j * k
        mult[-1] = 0.0
    else:
        mult = -(k**2)
    return GridFunction(f.grid, np.fft.irfft(coef * mult, f.grid.n))


def integrate(f: GridFunction) -> float:
    """Rectangle-rule integral over the circle (trapezoid-equivalent here)."""
    return float(f.grid.h * np.sum(f.values))


def function_from_csv(path, grid: PeriodicGrid) -> GridFunction:
    """Load samples from a CSV with columns x,value matching the grid nodes.

    The x column must reproduce the nodes i/n (up to 1e-12 print roundoff);
    values are used verbatim, no resampling or smoothing.
    """
    xs, vals = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["x", "value"]:
            raise ValueError(f"{path}: expected CSV header 'x,value'")
        for row in reader:
            if not row:
                continue
            xs.append(float(row[0]))
            vals.append(float(row[1]))
    if len(xs) != grid.n:
        raise ValueError(f"{path}: expected {grid.n} rows, found {len(xs)}")
    xs = np.asarray(xs)
    if np.max(np.abs(xs - grid.nodes)) > 1e-12:
        raise ValueError(f"{path}: x column does not match the grid nodes")
    return GridFunction(grid, np.asarray(vals))
