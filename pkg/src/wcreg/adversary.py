"""Feasible-set probes and worst-case error estimation.

The feasible set pairs a data constraint with an a-priori class constraint:

    S = {v : sup|Av - g_delta| <= delta  and  class_norm(v) <= bound}

where A is the cumulative trapezoid integral (or an explicit matrix).  Any
two certified members v1, v2 of S are indistinguishable from the data, so
half their separation sup|v1 - v2| lower-bounds the worst-case error of
*every* reconstruction rule, linear or not.  Two constructions make that
bound concrete:

* `sine_pair` - for the class bounded only in sup norm, a sinusoid of
  frequency k ~ bound/(pi*delta) has an integral of size bound/(pi*k) <=
  delta yet full amplitude, so the separation stays near `bound` no matter
  how small delta gets.  No reconstruction rule can beat bound/2 on this
  class: differentiation with data known only in sup norm is unsolvable
  without a smoothness bound.

* `bump_pair` - for the literal Lipschitz class (Holder exponent 1), a
  grid-snapped triangle bump of height ~ sqrt(delta*bound/2) is feasible,
  so the class diameter shrinks like sqrt(delta) rather than staying flat.

`sample_feasible` populates ensembles of certified members around a known
feasible element; `sup_error_estimate` turns an ensemble into a certified
lower bound on the worst-case error of a given reconstruction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import GridTooCoarseError, InfeasibleProblemError
from .grid import (GridFunction, NoisyData, format_float, holder_norm,
                   integrate, sup_norm)

__all__ = [
    "FeasibleClass",
    "FeasibilityCheck",
    "PairCertificate",
    "AdversarialPair",
    "is_feasible",
    "sample_feasible",
    "sup_error_estimate",
    "sine_pair",
    "bump_pair",
    "diameter_probe",
    "write_pair_csv",
    "read_pair_csv",
]

CLASS_KINDS = ("holder", "sup-only")

#: escalating multiplicative trims used when float rounding or off-node
#: kinks push a construction an ulp past an exact constraint boundary
_SHAVE_LADDER = (0.0, 1e-15, 1e-12, 1e-9, 1e-6, 1e-4, 1e-3)


@dataclass(frozen=True, eq=False)
class FeasibleClass:
    """Membership test data for S: noise radius, class norm, and its bound.

    `kind` is "holder" (norm = discrete Holder a-norm) or "sup-only"
    (norm = plain sup norm).  The forward map defaults to the trapezoid
    integral; pass `operator_matrix` to use an explicit matrix instead.
    """

    kind: str
    bound: float
    data: NoisyData
    a: float | None = None
    operator_matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in CLASS_KINDS:
            raise ValueError(f"class kind must be one of {CLASS_KINDS}, got {self.kind!r}")
        if not self.bound > 0.0:
            raise ValueError(f"class norm bound must be positive, got {self.bound}")
        if self.kind == "holder" and (self.a is None or not (0.0 < self.a <= 2.0)):
            raise ValueError("holder class needs an exponent a in (0, 2]")
        if self.operator_matrix is not None:
            mat = np.asarray(self.operator_matrix, dtype=float)
            n = self.data.g_delta.n
            if mat.shape != (n, n):
                raise ValueError(f"operator matrix must be {n}x{n}, got {mat.shape}")
            object.__setattr__(self, "operator_matrix", mat)

    @classmethod
    def for_zero_data(cls, kind: str, bound: float, delta: float, n: int,
                      a: float | None = None) -> "FeasibleClass":
        return cls(kind, bound, NoisyData(GridFunction.zeros(n), delta), a=a)

    @property
    def delta(self) -> float:
        return self.data.delta

    @property
    def n(self) -> int:
        return self.data.g_delta.n

    def class_norm(self, v: GridFunction) -> float:
        if self.kind == "sup-only":
            return sup_norm(v)
        return holder_norm(v, self.a)

    def image(self, v: GridFunction) -> np.ndarray:
        if self.operator_matrix is not None:
            return self.operator_matrix @ v.values
        return integrate(v).values

    def misfit(self, v: GridFunction) -> float:
        return float(np.max(np.abs(self.image(v) - self.data.g_delta.values)))


class FeasibilityCheck(NamedTuple):
    feasible: bool
    misfit: float
    class_norm: float


class PairCertificate(NamedTuple):
    delta: float
    bound: float
    misfit1: float
    norm1: float
    misfit2: float
    norm2: float


@dataclass(frozen=True, eq=False)
class AdversarialPair:
    """Two certified feasible members and their sup-norm separation."""

    v1: GridFunction
    v2: GridFunction
    separation: float
    certificate: PairCertificate


def is_feasible(v: GridFunction, cls: FeasibleClass) -> FeasibilityCheck:
    """Both residuals (data misfit, class norm) plus their conjunction."""
    if v.n != cls.n:
        raise ValueError(f"grid mismatch: candidate has {v.n} nodes, class data {cls.n}")
    mis = cls.misfit(v)
    norm = cls.class_norm(v)
    return FeasibilityCheck(mis <= cls.delta and norm <= cls.bound, mis, norm)


def _assemble_pair(v1: GridFunction, v2: GridFunction, cls: FeasibleClass) -> AdversarialPair:
    c1 = is_feasible(v1, cls)
    c2 = is_feasible(v2, cls)
    if not (c1.feasible and c2.feasible):
        raise InfeasibleProblemError(
            "pair member failed the membership test: "
            f"misfits ({c1.misfit}, {c2.misfit}) vs delta {cls.delta}, "
            f"norms ({c1.class_norm}, {c2.class_norm}) vs bound {cls.bound}")
    sep = sup_norm(GridFunction(v1.values - v2.values))
    cert = PairCertificate(cls.delta, cls.bound, c1.misfit, c1.class_norm,
                           c2.misfit, c2.class_norm)
    return AdversarialPair(v1, v2, sep, cert)


# ---------------------------------------------------------------------------
# pair constructions


def _sine_profile(bound: float, k: int, n: int) -> GridFunction:
    x = np.linspace(0.0, 1.0, n)
    return GridFunction(bound * np.sin(2.0 * math.pi * k * x))


def sine_pair(bound: float, delta: float, n: int | None = None) -> AdversarialPair:
    """Flat-amplitude pair for the sup-only class: v1 = 0, v2 a sinusoid.

    Frequency k = ceil(bound / (pi * delta)) makes sup|A v2| = bound/(pi*k)
    <= delta in the continuum; on the grid the trapezoid rule damps the
    image further, so feasibility certifies exactly.  The grid must resolve
    the oscillation (at least 20 nodes per period); the default grid
    n = 20k + 1 puts the sine extrema on nodes, giving separation = bound.
    """
    if not bound > 0.0 or not delta > 0.0:
        raise ValueError("bound and delta must be positive")
    k = math.ceil(bound / (math.pi * delta))
    if n is None:
        n = 20 * k + 1
    if n - 1 < 20 * k:
        raise GridTooCoarseError(
            f"grid with {n} nodes cannot resolve frequency k={k}; "
            f"need at least {20 * k + 1} nodes")
    cls = FeasibleClass.for_zero_data("sup-only", bound, delta, n)
    v2 = _sine_profile(bound, k, n)
    try:
        return _assemble_pair(GridFunction.zeros(n), v2, cls)
    except InfeasibleProblemError as exc:
        raise GridTooCoarseError(
            f"grid with {n} nodes leaves the sinusoid image above delta: {exc}") from exc


def _snapped_bump(n: int, center: int, half_width_nodes: int, height: float) -> GridFunction:
    offsets = np.abs(np.arange(n) - center)
    vals = height * np.maximum(0.0, 1.0 - offsets / half_width_nodes)
    return GridFunction(vals)


def bump_pair(bound: float, delta: float, n: int | None = None) -> AdversarialPair:
    """Triangle-bump pair for the Lipschitz class: v1 = 0, v2 a bump.

    The bump is centered at 1/2 with slopes +-bound/2 and ideal height
    min(sqrt(delta*bound/2), bound/2); its integral then peaks at exactly
    delta (or below, in the clipped branch), and the Lipschitz norm is
    height + bound/2 <= bound.  When the support fits the grid, the kinks
    are snapped onto nodes so the trapezoid image is exact; otherwise the
    clipped profile is sampled directly.  Either way the profile is trimmed
    by the smallest ladder factor that certifies feasibility exactly.
    """
    if not bound > 0.0 or not delta > 0.0:
        raise ValueError("bound and delta must be positive")
    height_ideal = min(math.sqrt(delta * bound / 2.0), bound / 2.0)
    width_ideal = 2.0 * height_ideal / bound
    if n is None:
        n = int(max(1001, min(2_000_001, 8 * math.ceil(1.0 / width_ideal) + 1)))
        if n % 2 == 0:
            n += 1
    dx = 1.0 / (n - 1)
    center = (n - 1) // 2
    room = min(center, n - 1 - center)
    if room < 1:
        raise GridTooCoarseError(f"grid with {n} nodes leaves no room for a bump")
    p_want = int(round(width_ideal / dx))
    cls = FeasibleClass.for_zero_data("holder", bound, delta, n, a=1.0)
    zero = GridFunction.zeros(n)

    if p_want <= room:
        p = max(1, p_want)
        width = p * dx
        height = min(0.5 * bound * width, delta / width)
        for shave in _SHAVE_LADDER:
            v2 = _snapped_bump(n, center, p, height * (1.0 - shave))
            if is_feasible(v2, cls).feasible:
                return _assemble_pair(zero, v2, cls)
    else:
        # support wider than the interval: sample the clipped profile
        x = np.linspace(0.0, 1.0, n)
        profile = np.maximum(0.0, height_ideal - 0.5 * bound * np.abs(x - center * dx))
        for shave in _SHAVE_LADDER:
            v2 = GridFunction(profile * (1.0 - shave))
            if is_feasible(v2, cls).feasible:
                return _assemble_pair(zero, v2, cls)
    raise InfeasibleProblemError(
        f"bump construction failed to certify for bound={bound}, delta={delta}, n={n}")


# ---------------------------------------------------------------------------
# ensembles


def _draw_shape(rng: np.random.Generator, n: int) -> tuple[np.ndarray, str | None]:
    """One perturbation profile from the fixed dictionary.

    The draws (kind, parameters, sign, scale fraction) happen in a fixed
    order on every attempt, so the ensemble is a pure function of the seed.
    Parameter-free shapes return a cache key so their norms are computed
    once per run.
    """
    x = np.linspace(0.0, 1.0, n)
    kind = int(rng.integers(0, 5))
    if kind == 0:
        k = int(rng.integers(1, 9))
        return np.sin(2.0 * math.pi * k * x), f"sin{k}"
    if kind == 1:
        k = int(rng.integers(1, 9))
        return np.cos(2.0 * math.pi * k * x), f"cos{k}"
    if kind == 2:
        c = rng.uniform(0.25, 0.75)
        w = rng.uniform(0.05, 0.25)
        return np.maximum(0.0, 1.0 - np.abs(x - c) / w), None
    if kind == 3:
        # node-alternating profile: invisible to the trapezoid integral
        return np.where(np.arange(n) % 2 == 0, 1.0, -1.0), "alternating"
    return np.ones(n), "constant"


def sample_feasible(cls: FeasibleClass, count: int, seed: int | np.random.SeedSequence = 0,
                    start: GridFunction | None = None) -> list[GridFunction]:
    """Up to `count` certified members of S around a feasible start element.

    The start element (default: the zero function) must itself pass the
    membership test, else InfeasibleProblemError.  Perturbation amplitudes
    are capped through the triangle inequality by the remaining misfit and
    norm slack, then the candidate is re-verified exactly before being
    accepted; the first returned member is the start element itself.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    base = start if start is not None else GridFunction.zeros(cls.n)
    chk = is_feasible(base, cls)
    if not chk.feasible:
        raise InfeasibleProblemError(
            "no feasible point found: start element has "
            f"misfit {chk.misfit} (delta {cls.delta}) and norm {chk.class_norm} "
            f"(bound {cls.bound})")
    if count == 0:
        return []
    members = [base]
    rng = np.random.default_rng(seed)
    misfit_slack = cls.delta - chk.misfit
    norm_slack = cls.bound - chk.class_norm
    gain_cache: dict[str, tuple[float, float]] = {}
    attempts = 0
    max_attempts = 30 * count + 100
    while len(members) < count and attempts < max_attempts:
        attempts += 1
        shape, key = _draw_shape(rng, cls.n)
        sign = 1.0 if rng.uniform() < 0.5 else -1.0
        frac = rng.uniform(0.2, 1.0)
        if key in gain_cache:
            image_gain, norm_gain = gain_cache[key]
        else:
            image_gain = float(np.max(np.abs(cls.image(GridFunction(shape)))))
            t_mis = math.inf if image_gain == 0.0 else misfit_slack / image_gain
            if t_mis <= 0.0:
                # no room along this shape; skip before the O(n^2) norm scan
                if key is not None:
                    gain_cache[key] = (image_gain, math.inf)
                continue
            norm_gain = cls.class_norm(GridFunction(shape))
            if key is not None:
                gain_cache[key] = (image_gain, norm_gain)
        t_mis = math.inf if image_gain == 0.0 else misfit_slack / image_gain
        t_norm = math.inf if norm_gain == 0.0 else norm_slack / norm_gain
        t = 0.9 * min(t_mis, t_norm)
        if not (t > 0.0 and math.isfinite(t)):
            continue
        t *= frac
        for _ in range(40):
            candidate = GridFunction(base.values + (sign * t) * shape)
            if is_feasible(candidate, cls).feasible:
                members.append(candidate)
                break
            t *= 0.5
    return members


def sup_error_estimate(reconstruction: GridFunction, cls: FeasibleClass,
                       ensemble: Sequence[GridFunction]) -> float:
    """max over the ensemble of sup|reconstruction - v|.

    A certified *lower* bound on the true worst-case error (the supremum
    runs over the whole infinite class); members are assumed certified.
    """
    if len(ensemble) == 0:
        raise ValueError("sup_error_estimate needs a nonempty ensemble")
    worst = 0.0
    for v in ensemble:
        if v.n != reconstruction.n:
            raise ValueError("grid mismatch between reconstruction and ensemble member")
        worst = max(worst, float(np.max(np.abs(reconstruction.values - v.values))))
    return worst


# ---------------------------------------------------------------------------
# diameter search


def _sine_candidates(cls: FeasibleClass) -> Iterator[tuple[GridFunction, GridFunction]]:
    if cls.kind != "sup-only":
        return
    k0 = math.ceil(cls.bound / (math.pi * cls.delta))
    zero = GridFunction.zeros(cls.n)
    k = k0
    while 20 * k <= cls.n - 1:
        yield zero, _sine_profile(cls.bound, k, cls.n)
        k += 1


def _bump_candidates(cls: FeasibleClass) -> Iterator[tuple[GridFunction, GridFunction]]:
    if cls.kind != "holder":
        return
    n = cls.n
    dx = 1.0 / (n - 1)
    center = (n - 1) // 2
    room = min(center, n - 1 - center)
    height_ideal = min(math.sqrt(cls.delta * cls.bound / 2.0), cls.bound / 2.0)
    p0 = min(max(1, int(round(2.0 * height_ideal / cls.bound / dx))), room)
    zero = GridFunction.zeros(n)
    seen = set()
    for j in range(room):
        for p in (p0 - j, p0 + j):
            if p < 1 or p > room or p in seen:
                continue
            seen.add(p)
            width = p * dx
            height = min(0.5 * cls.bound * width, cls.delta / width)
            for shave in _SHAVE_LADDER:
                v2 = _snapped_bump(n, center, p, height * (1.0 - shave))
                if is_feasible(v2, cls).feasible:
                    yield zero, v2
                    break


def _random_candidates(cls: FeasibleClass, seed, base: GridFunction
                       ) -> Iterator[tuple[GridFunction, GridFunction]]:
    chk = is_feasible(base, cls)
    if not chk.feasible:
        return
    rng = np.random.default_rng(seed)
    misfit_slack = cls.delta - chk.misfit
    norm_slack = cls.bound - chk.class_norm
    while True:
        shape, _ = _draw_shape(rng, cls.n)
        frac = rng.uniform(0.2, 1.0)
        image_gain = float(np.max(np.abs(cls.image(GridFunction(shape)))))
        norm_gain = cls.class_norm(GridFunction(shape))
        t_mis = math.inf if image_gain == 0.0 else misfit_slack / image_gain
        t_norm = math.inf if norm_gain == 0.0 else norm_slack / norm_gain
        t = 0.9 * min(t_mis, t_norm) * frac
        if not (t > 0.0 and math.isfinite(t)):
            yield base, base
            continue
        yield (GridFunction(base.values + t * shape),
               GridFunction(base.values - t * shape))


def diameter_probe(cls: FeasibleClass, generators: Sequence[str] = ("sine", "bump", "random-search"),
                   budget: int = 32, seed: int = 0,
                   start: GridFunction | None = None) -> float:
    """Largest certified separation among feasible pairs within the budget.

    Candidate pairs are drawn round-robin from the requested generator
    streams; each candidate consumes one unit of budget whether or not it
    certifies, which makes the result monotone nondecreasing in the budget
    for a fixed seed.  Half the returned value lower-bounds the worst-case
    error of every reconstruction rule on this class.
    """
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    base = start if start is not None else GridFunction.zeros(cls.n)
    streams = []
    for name in generators:
        if name == "sine":
            streams.append(_sine_candidates(cls))
        elif name == "bump":
            streams.append(_bump_candidates(cls))
        elif name == "random-search":
            streams.append(_random_candidates(cls, seed, base))
        else:
            raise ValueError(f"unknown generator {name!r}")
    best = 0.0
    used = 0
    while used < budget and streams:
        exhausted = []
        for stream in streams:
            if used >= budget:
                break
            try:
                v1, v2 = next(stream)
            except StopIteration:
                exhausted.append(stream)
                continue
            used += 1
            if is_feasible(v1, cls).feasible and is_feasible(v2, cls).feasible:
                best = max(best, sup_norm(GridFunction(v1.values - v2.values)))
        for stream in exhausted:
            streams.remove(stream)
    return best


# ---------------------------------------------------------------------------
# serialization


def write_pair_csv(pair: AdversarialPair, path: str | Path) -> None:
    """Pair export: certificate as `# key=value` comments, then x,v1,v2 rows."""
    cert = pair.certificate
    lines = [
        f"# delta={format_float(cert.delta)}",
        f"# bound={format_float(cert.bound)}",
        f"# separation={format_float(pair.separation)}",
        f"# misfit1={format_float(cert.misfit1)}",
        f"# norm1={format_float(cert.norm1)}",
        f"# misfit2={format_float(cert.misfit2)}",
        f"# norm2={format_float(cert.norm2)}",
        "x,v1,v2",
    ]
    x = pair.v1.x
    for k in range(pair.v1.n):
        lines.append(",".join(format_float(val)
                              for val in (x[k], pair.v1.values[k], pair.v2.values[k])))
    Path(path).write_text("\n".join(lines) + "\n")


def read_pair_csv(path: str | Path) -> AdversarialPair:
    meta: dict[str, float] = {}
    rows = []
    header_seen = False
    for ln in Path(path).read_text().splitlines():
        ln = ln.strip()
        if not ln:
            continue
        if ln.startswith("#"):
            key, _, val = ln[1:].strip().partition("=")
            meta[key.strip()] = float(val)
        elif not header_seen:
            if ln.lower() != "x,v1,v2":
                raise ValueError(f"{path}: expected header 'x,v1,v2'")
            header_seen = True
        else:
            rows.append([float(c) for c in ln.split(",")])
    data = np.asarray(rows)
    if not header_seen or data.shape[0] < 2 or data.shape[1] != 3:
        raise ValueError(f"{path}: malformed pair file")
    for key in ("delta", "bound", "separation", "misfit1", "norm1", "misfit2", "norm2"):
        if key not in meta:
            raise ValueError(f"{path}: certificate line '# {key}=...' missing")
    cert = PairCertificate(meta["delta"], meta["bound"], meta["misfit1"],
                           meta["norm1"], meta["misfit2"], meta["norm2"])
    return AdversarialPair(GridFunction(data[:, 1]), GridFunction(data[:, 2]),
                           meta["separation"], cert)
