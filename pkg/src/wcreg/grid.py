"""Sampled functions on the uniform unit-interval grid.

Everything downstream works with real values attached to the n equispaced
nodes x_k = k/(n-1) of [0, 1], read as the piecewise-linear interpolant
through those samples.  This module owns the shared material: the container
type, sup and Holder norms of the samples, bounded noise injection, and the
CSV serialization used by the command-line tools.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = [
    "GridFunction",
    "HolderParams",
    "NoisyData",
    "NOISE_MODELS",
    "sup_norm",
    "holder_norm",
    "integrate",
    "add_noise",
    "format_float",
    "write_grid_csv",
    "read_grid_csv",
]

NOISE_MODELS = ("uniform-iid", "alternating-worst-case")

_NOISE_ALIASES = {
    "uniform": "uniform-iid",
    "uniform-iid": "uniform-iid",
    "alternating": "alternating-worst-case",
    "alternating-worst-case": "alternating-worst-case",
}


def format_float(value: float) -> str:
    """Serialize a float with 17 significant digits (lossless round-trip)."""
    return "%.17g" % (float(value),)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real values sampled on the uniform grid over [0, 1].

    Node k sits at x_k = k/(n-1) exactly; the spacing is 1/(n-1).  Values
    are frozen after construction, so instances can be shared freely across
    threads.
    """

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("GridFunction needs a 1-D array with at least 2 nodes")
        if not np.all(np.isfinite(vals)):
            raise ValueError("GridFunction values must all be finite")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def spacing(self) -> float:
        return 1.0 / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n)

    @classmethod
    def from_callable(cls, func: Callable[[np.ndarray], np.ndarray], n: int) -> "GridFunction":
        x = np.linspace(0.0, 1.0, n)
        return cls(np.asarray(func(x), dtype=float))

    @classmethod
    def zeros(cls, n: int) -> "GridFunction":
        return cls(np.zeros(n))


@dataclass(frozen=True)
class HolderParams:
    """A-priori smoothness class: exponent a in (0, 2] and norm budget m > 0."""

    a: float
    m: float

    def __post_init__(self):
        if not (0.0 < self.a <= 2.0):
            raise ValueError(f"Holder exponent a must lie in (0, 2], got {self.a}")
        if not self.m > 0.0:
            raise ValueError(f"norm budget m must be positive, got {self.m}")


@dataclass(frozen=True, eq=False)
class NoisyData:
    """Observed samples g_delta together with their sup-norm noise radius."""

    g_delta: GridFunction
    delta: float

    def __post_init__(self):
        if not self.delta > 0.0:
            raise ValueError(f"noise level delta must be positive, got {self.delta}")


def sup_norm(f: GridFunction) -> float:
    """Maximum absolute sample value (discrete sup norm on [0, 1])."""
    return float(np.max(np.abs(f.values)))


def _max_pair_quotient(values: np.ndarray, positions: np.ndarray, power: float) -> float:
    """max over i != j of |v_i - v_j| / |x_i - x_j|**power, exhaustive O(n^2).

    Row blocks keep peak memory bounded on large grids.
    """
    n = values.size
    if n < 2:
        return 0.0
    best = 0.0
    block = max(1, 2_000_000 // n)
    for start in range(0, n, block):
        stop = min(start + block, n)
        dv = np.abs(values[start:stop, None] - values[None, :])
        dx = np.abs(positions[start:stop, None] - positions[None, :])
        quot = dv / np.where(dx == 0.0, np.inf, dx) ** power
        best = max(best, float(quot.max()))
    return best


def holder_norm(f: GridFunction, a: float) -> float:
    """Discrete Holder norm of the samples.

    For a <= 1 this is the sup norm plus the order-a difference-quotient
    seminorm over all node pairs.  For 1 < a <= 2 the forward slopes
    s_k = (f_{k+1} - f_k)/spacing stand in for the derivative (located at
    x_k), and the norm is sup|f| + sup|s| plus the order-(a-1) quotient
    seminorm of the slopes.
    """
    if not (0.0 < a <= 2.0):
        raise ValueError(f"Holder exponent a must lie in (0, 2], got {a}")
    if f.n < 3:
        raise ValueError("holder_norm needs at least 3 nodes")
    vals = f.values
    x = f.x
    if a <= 1.0:
        return float(np.max(np.abs(vals))) + _max_pair_quotient(vals, x, a)
    slopes = np.diff(vals) / f.spacing
    return (
        float(np.max(np.abs(vals)))
        + float(np.max(np.abs(slopes)))
        + _max_pair_quotient(slopes, x[:-1], a - 1.0)
    )


def integrate(v: GridFunction) -> GridFunction:
    """Cumulative trapezoid integral from 0 to each node.

    Exact for the piecewise-linear reading of the samples, so this is the
    model's integration operator with no internal quadrature error.
    """
    vals = v.values
    increments = (vals[:-1] + vals[1:]) * (0.5 * v.spacing)
    out = np.empty(v.n)
    out[0] = 0.0
    np.cumsum(increments, out=out[1:])
    return GridFunction(out)


def add_noise(g: GridFunction, delta: float, model: str = "uniform-iid",
              seed: int | np.random.SeedSequence = 0) -> NoisyData:
    """Perturb exact data within the closed sup-norm ball of radius delta.

    "uniform-iid" draws each node perturbation independently from
    [-delta, delta] (PCG64 generator, reproducible from the seed).
    "alternating-worst-case" uses the deterministic pattern (-1)^k * delta,
    the sign flip between neighbouring nodes that drives one-sided
    difference quotients to their extremes.
    """
    if not delta > 0.0:
        raise ValueError(f"noise level delta must be positive, got {delta}")
    kind = _NOISE_ALIASES.get(model)
    if kind is None:
        raise ValueError(f"unknown noise model {model!r}; choose from {NOISE_MODELS}")
    if kind == "uniform-iid":
        rng = np.random.default_rng(seed)
        pert = rng.uniform(-delta, delta, g.n)
    else:
        pert = np.where(np.arange(g.n) % 2 == 0, delta, -delta)
    noisy = g.values + pert
    # adding the perturbation rounds, which can leave the *stored* values one
    # ulp outside the ball; nudge those nodes back so the bound holds exactly
    over = np.abs(noisy - g.values) > delta
    while np.any(over):
        noisy[over] = np.nextafter(noisy[over], g.values[over])
        over = np.abs(noisy - g.values) > delta
    return NoisyData(GridFunction(noisy), delta)


def write_grid_csv(f: GridFunction, path: str | Path) -> None:
    """Write `x,value` rows at full double precision."""
    lines = ["x,value"]
    x = f.x
    for k in range(f.n):
        lines.append(f"{format_float(x[k])},{format_float(f.values[k])}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_grid_csv(path: str | Path) -> GridFunction:
    """Read a `x,value` CSV back into a GridFunction, checking the grid."""
    rows = [ln for ln in Path(path).read_text().splitlines()
            if ln.strip() and not ln.startswith("#")]
    if not rows or rows[0].strip().lower() != "x,value":
        raise ValueError(f"{path}: expected header 'x,value'")
    data = np.array([[float(c) for c in ln.split(",")] for ln in rows[1:]])
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns and at least two rows")
    n = data.shape[0]
    if np.max(np.abs(data[:, 0] - np.linspace(0.0, 1.0, n))) > 1e-12:
        raise ValueError(f"{path}: x column is not the uniform grid on [0, 1]")
    return GridFunction(data[:, 1])
