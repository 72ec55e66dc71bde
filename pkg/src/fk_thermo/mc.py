"""Path simulation on the circle with reproducible counter-based randomness.

Each path owns a Philox stream keyed by the run seed and offset in the
counter space by the path index, so the numbers a path consumes depend only
on (seed, index).  Estimates assembled from per-path values are therefore
bit-identical no matter how the work is chunked or scheduled.  Every path
draws one uniform first (used for initial-law sampling when requested) and
then its Gaussian increments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridFunction, PeriodicGrid

__all__ = ["McConfig", "PathEnsemble", "path_generator", "simulate_paths",
           "sample_from_density"]

_MAX_POSITION_DOUBLES = 300_000_000  # ~2.4 GB guard for recorded positions


@dataclass(frozen=True)
class McConfig:
    """Monte-Carlo run parameters: path count, step size and stream seed."""

    n_paths: int
    dt: float
    seed: int

    def __post_init__(self) -> None:
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be >= 1, got {self.n_paths}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


def path_generator(seed: int, index: int) -> np.random.Generator:
    """Stream for one path: Philox keyed by seed, counter offset by index."""
    return np.random.Generator(np.random.Philox(key=seed, counter=index << 128))


@dataclass(frozen=True)
class PathEnsemble:
    """Batch of circle-valued trajectories plus running potential integrals.

    positions holds the recorded states, one row per path; with
    record_stride=s the columns are steps 0, s, 2s, ..., n_steps.  The
    potential integrals are left-endpoint Riemann sums of the designated
    grid function along the full-resolution path (independent of the stride).
    """

    dt: float
    n_steps: int
    n_paths: int
    positions: np.ndarray
    record_stride: int
    potential_integrals: np.ndarray | None

    def __post_init__(self) -> None:
        n_rec = self.n_steps // self.record_stride + 1
        if self.positions.shape != (self.n_paths, n_rec):
            raise ValueError("positions shape inconsistent with stride")
        if self.potential_integrals is not None and (
            self.potential_integrals.shape != (self.n_paths,)
        ):
            raise ValueError("one potential integral per path expected")
        self.positions.setflags(write=False)
        if self.potential_integrals is not None:
            self.potential_integrals.setflags(write=False)

    @property
    def horizon(self) -> float:
        return self.n_steps * self.dt

    @property
    def recorded_steps(self) -> np.ndarray:
        return np.arange(0, self.n_steps + 1, self.record_stride)


def sample_from_density(density: GridFunction, uniforms: np.ndarray) -> np.ndarray:
    """Inverse-CDF sampling of a nonnegative grid density (piecewise constant).

    The density is treated as constant on each cell [x_i, x_{i+1}); the
    resulting CDF is piecewise linear and inverted exactly.
    """
    vals = density.values
    if np.any(vals < 0):
        raise ValueError("initial density must be nonnegative")
    h = density.grid.h
    cell_mass = vals * h
    total = cell_mass.sum()
    if total <= 0:
        raise ValueError("initial density must have positive mass")
    cdf = np.concatenate([[0.0], np.cumsum(cell_mass / total)])
    cdf[-1] = 1.0
    idx = np.clip(np.searchsorted(cdf, uniforms, side="right") - 1, 0,
                  density.grid.n - 1)
    seg = cdf[idx + 1] - cdf[idx]
    seg = np.where(seg > 0, seg, 1.0)
    frac = (uniforms - cdf[idx]) / seg
    return (density.grid.nodes[idx] + h * frac) % 1.0


def _wrap(x: np.ndarray) -> np.ndarray:
    x = x % 1.0
    return np.where(x >= 1.0, x - 1.0, x)


def simulate_paths(
    grid: PeriodicGrid,
    drift: GridFunction | None,
    start: float | GridFunction,
    T: float,
    cfg: McConfig,
    potential: GridFunction | None = None,
    record_stride: int | None = None,
    block_paths: int = 20_000,
) -> PathEnsemble:
    """Euler walk X <- wrap(X + drift(X) dt + sqrt(dt) xi) over [0, T].

    start is either a fixed circle point or an initial density to sample by
    inverse CDF.  Off-node drift and potential values come from periodic
    linear interpolation.  record_stride controls which steps land in the
    ensemble (None records endpoints only); it must divide the step count.
    """
    if not T > 0:
        raise ValueError(f"horizon must be positive, got {T}")
    steps_float = T / cfg.dt
    n_steps = int(round(steps_float))
    if n_steps < 1 or abs(steps_float - n_steps) > 1e-9 * max(1.0, steps_float):
        raise ValueError(f"T={T} is not an integer number of dt={cfg.dt} steps")
    stride = n_steps if record_stride is None else int(record_stride)
    if stride < 1 or n_steps % stride != 0:
        raise ValueError(f"record_stride {stride} must divide {n_steps} steps")
    n_rec = n_steps // stride + 1
    if cfg.n_paths * n_rec > _MAX_POSITION_DOUBLES:
        raise ValueError("recorded positions would exceed the memory guard; "
                         "increase record_stride")

    if isinstance(start, GridFunction) and start.grid != grid:
        raise ValueError("initial density lives on a different grid")
    drift_table = None
    if drift is not None:
        if drift.grid != grid:
            raise ValueError("drift lives on a different grid")
        drift_table = np.concatenate([drift.values, drift.values[:1]])
    pot_table = None
    if potential is not None:
        if potential.grid != grid:
            raise ValueError("potential lives on a different grid")
        pot_table = np.concatenate([potential.values, potential.values[:1]])

    xp = np.concatenate([grid.nodes, [1.0]])

    positions = np.empty((cfg.n_paths, n_rec))
    integrals = np.zeros(cfg.n_paths) if pot_table is not None else None
    sqrt_dt = np.sqrt(cfg.dt)

    for lo in range(0, cfg.n_paths, block_paths):
        hi = min(lo + block_paths, cfg.n_paths)
        nb = hi - lo
        normals = np.empty((nb, n_steps))
        uniforms = np.empty(nb)
        for j in range(nb):
            gen = path_generator(cfg.seed, lo + j)
            uniforms[j] = gen.random()
            normals[j] = gen.standard_normal(n_steps)
        if isinstance(start, GridFunction):
            x = sample_from_density(start, uniforms)
        else:
            x0 = float(start) % 1.0
            x = np.full(nb, x0)
        positions[lo:hi, 0] = x
        acc = np.zeros(nb) if integrals is not None else None
        col = 1
        for k in range(n_steps):
            if acc is not None:
                acc += np.interp(x, xp, pot_table) * cfg.dt
            step = sqrt_dt * normals[:, k]
            if drift_table is not None:
                step = step + np.interp(x, xp, drift_table) * cfg.dt
            x = _wrap(x + step)
            if (k + 1) % stride == 0:
                positions[lo:hi, col] = x
                col += 1
        if integrals is not None:
            integrals[lo:hi] = acc

    return PathEnsemble(
        dt=cfg.dt,
        n_steps=n_steps,
        n_paths=cfg.n_paths,
        positions=positions,
        record_stride=stride,
        potential_integrals=integrals,
    )
