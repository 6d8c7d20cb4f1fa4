"""Problem descriptions: the forward operator and the constraint functional.

The built-in operator is the cumulative trapezoid integration map of the
grid module.  Note that as an n-by-n matrix it is *not* injective: the
node-alternating vector (1, -1, 1, ...) integrates to exactly zero because
every trapezoid increment averages two neighbouring samples.  The underlying
continuum operator is injective; the alternating direction is a discrete
artifact, and it matters for worst-case probes (see the adversary and
modulus modules).  Callers that need an injective grid operator can supply
an explicit matrix, e.g. `rectangle_matrix`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridFunction, holder_norm, integrate, sup_norm

__all__ = [
    "CompactumSpec",
    "ProblemSpec",
    "integration_matrix",
    "rectangle_matrix",
]

PHI_KINDS = ("sup-norm", "holder-norm")


def integration_matrix(n: int) -> np.ndarray:
    """Dense matrix of the cumulative trapezoid integral on n nodes.

    Row k carries weights dx * (1/2, 1, ..., 1, 1/2) over nodes 0..k; row 0
    is zero.  Matches `grid.integrate` exactly.
    """
    if n < 2:
        raise ValueError("integration matrix needs at least 2 nodes")
    dx = 1.0 / (n - 1)
    a = np.tril(np.full((n, n), dx), 0)
    idx = np.arange(n)
    a[idx, idx] = 0.5 * dx
    a[:, 0] = 0.5 * dx
    a[0, :] = 0.0
    return a


def rectangle_matrix(n: int) -> np.ndarray:
    """Right-rectangle cumulative sum: lower triangular with dx diagonal.

    Unlike the trapezoid map this matrix is injective, which makes it the
    operator of choice for modulus-decay tests.
    """
    if n < 2:
        raise ValueError("rectangle matrix needs at least 2 nodes")
    dx = 1.0 / (n - 1)
    return np.tril(np.full((n, n), dx), 0)


@dataclass(frozen=True, eq=False)
class CompactumSpec:
    """Norm-like functional phi plus a bound c, defining {v : phi(v) <= c}.

    On the finite grid the sublevel set is closed and bounded, hence
    compact, for either functional choice.
    """

    phi: str
    c: float
    a: float | None = None

    def __post_init__(self):
        if self.phi not in PHI_KINDS:
            raise ValueError(f"phi must be one of {PHI_KINDS}, got {self.phi!r}")
        if not self.c > 0.0:
            raise ValueError(f"compactum bound c must be positive, got {self.c}")
        if self.phi == "holder-norm":
            if self.a is None or not (0.0 < self.a <= 2.0):
                raise ValueError("holder-norm phi needs an exponent a in (0, 2]")

    def phi_value(self, f: GridFunction) -> float:
        if self.phi == "sup-norm":
            return sup_norm(f)
        return holder_norm(f, self.a)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Forward operator: the built-in integration map or an explicit matrix.

    `injective` records whether the *grid* operator is injective.  The
    built-in integration matrix is not (alternating kernel, see module
    docstring), so the flag defaults to False for it.
    """

    operator: str | np.ndarray = "integration"
    injective: bool = False

    def __post_init__(self):
        if isinstance(self.operator, str):
            if self.operator != "integration":
                raise ValueError(f"unknown operator {self.operator!r}")
        else:
            mat = np.asarray(self.operator, dtype=float)
            if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 2:
                raise ValueError("explicit operator must be a square matrix, n >= 2")
            object.__setattr__(self, "operator", mat)

    @property
    def is_integration(self) -> bool:
        return isinstance(self.operator, str)

    def size(self) -> int | None:
        """Grid size pinned by an explicit matrix, None for the built-in map."""
        return None if self.is_integration else int(self.operator.shape[0])

    def matrix(self, n: int) -> np.ndarray:
        if self.is_integration:
            return integration_matrix(n)
        if self.operator.shape[0] != n:
            raise ValueError(
                f"operator matrix is {self.operator.shape[0]}x{self.operator.shape[0]}, "
                f"but the grid has {n} nodes")
        return self.operator

    def apply(self, f: GridFunction) -> GridFunction:
        if self.is_integration:
            return integrate(f)
        return GridFunction(self.matrix(f.n) @ f.values)
