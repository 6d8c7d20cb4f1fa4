"""Certified finite-difference differentiation of noisy antiderivative data.

Given samples of g(x) = integral of u from 0 to x, observed only within a
sup-norm radius delta, the reconstruction is a symmetric difference
quotient with step h in the interior and one-sided quotients within h of
each endpoint.  The step balances noise amplification delta/h against the
smoothness penalty m * h**(a-1) of the a-priori Holder class, and

    eta = delta/h + m * h**(a-1)

certifies the worst-case sup error over every class member consistent with
the data, not just the one true solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridTooCoarseError
from .grid import GridFunction, HolderParams, NoisyData

__all__ = [
    "RegularizerOutput",
    "step_size",
    "differentiate",
    "error_bound",
    "regularize",
    "stencil_worst_noise",
]

#: longest admissible step; keeps both one-sided zones and an interior zone
MAX_STEP = 0.25


@dataclass(frozen=True, eq=False)
class RegularizerOutput:
    """Reconstruction together with the step used and its certified bound."""

    u_delta: GridFunction
    h_used: float
    eta: float


def step_size(delta: float, params: HolderParams, spacing: float | None = None) -> float:
    """Step choice h = (delta / ((a-1) m))**(1/a), clamped to [spacing, 1/4].

    The unclipped value is the exact minimizer of delta/h + m*h**(a-1) over
    h > 0.  Defined only for a > 1; the a <= 1 regime admits no convergent
    step rule for this operator (see the adversary module).
    """
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    if not params.a > 1.0:
        raise ValueError(f"step rule requires a > 1, got a={params.a}")
    h = (delta / ((params.a - 1.0) * params.m)) ** (1.0 / params.a)
    h = min(h, MAX_STEP)
    if spacing is not None:
        if spacing > MAX_STEP:
            raise GridTooCoarseError(
                f"grid spacing {spacing} exceeds the maximal step {MAX_STEP}")
        h = max(h, spacing)
    return h


def differentiate(data: NoisyData, h: float) -> GridFunction:
    """Difference-quotient derivative of the samples with step h.

    h must be a positive integer multiple of the grid spacing, at most 1/2.
    Interior nodes (h <= x <= 1-h) get the symmetric quotient over 2h; the
    first and last h-zones get forward and backward quotients over h.
    The map is linear in the data.
    """
    g = data.g_delta
    n = g.n
    m_raw = h * (n - 1)
    m = int(round(m_raw))
    if abs(m_raw - m) > 1e-8 * max(1.0, abs(m_raw)):
        raise ValueError(
            f"step h={h} is not an integer multiple of the grid spacing {g.spacing}")
    if m < 1:
        raise ValueError(f"step h={h} lies below the grid spacing {g.spacing}")
    if 2 * m > n - 1:
        raise ValueError(f"step h={h} exceeds half the interval")
    vals = g.values
    out = np.empty(n)
    out[m:n - m] = (vals[2 * m:] - vals[:n - 2 * m]) / (2.0 * h)
    out[:m] = (vals[m:2 * m] - vals[:m]) / h
    out[n - m:] = (vals[n - m:] - vals[n - 2 * m:n - m]) / h
    return GridFunction(out)


def error_bound(delta: float, params: HolderParams, h: float) -> float:
    """Certified worst-case sup error eta = delta/h + m * h**(a-1)."""
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    if not h > 0.0:
        raise ValueError(f"step h must be positive, got {h}")
    if not params.a > 1.0:
        raise ValueError(f"error bound requires a > 1, got a={params.a}")
    return delta / h + params.m * h ** (params.a - 1.0)


def regularize(data: NoisyData, params: HolderParams) -> RegularizerOutput:
    """Full reconstruction: step rule, snapped to the grid, plus certificate.

    The ideal step is snapped to the nearest positive multiple of the grid
    spacing (interpolating the data off-grid would add unanalyzed error),
    and the certified bound eta is evaluated at the snapped step.
    """
    g = data.g_delta
    n = g.n
    dx = g.spacing
    if dx > MAX_STEP:
        raise GridTooCoarseError(
            f"grid too coarse: spacing {dx} exceeds the maximal step {MAX_STEP}")
    h_ideal = step_size(data.delta, params, spacing=dx)
    m = max(1, int(round(h_ideal / dx)))
    m = min(m, (n - 1) // 2)
    h = m / (n - 1)
    u = differentiate(data, h)
    return RegularizerOutput(u, h, error_bound(data.delta, params, h))


def stencil_worst_noise(n: int, step_multiple: int, delta: float) -> GridFunction:
    """The +-delta pattern that saturates the delta/h noise bound.

    Signs flip every 2*step_multiple nodes, so the two samples of every
    interior symmetric stencil with offset step_multiple carry opposite
    signs and the quotient reaches exactly delta/h.  (The plain
    node-alternating pattern (-1)^k is annihilated by symmetric stencils,
    whose sample indices always differ by an even count.)
    """
    if step_multiple < 1:
        raise ValueError("step_multiple must be at least 1")
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    blocks = np.arange(n) // (2 * step_multiple)
    return GridFunction(np.where(blocks % 2 == 0, delta, -delta))
