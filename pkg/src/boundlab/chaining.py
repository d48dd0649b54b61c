"""Covering numbers on finite metric spaces, tail bounds, chain
decompositions, and the dyadic entropy sum with Monte-Carlo validation on
Gaussian processes."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .config import GAUSSIAN_TAIL_C, HOEFFDING_AMPLITUDE, HOEFFDING_RATE
from .core import RandomStream
from .errors import SchemaError


class FiniteMetricSpace:
    """Finite point set with a symmetric non-negative distance matrix.

    Pseudo-metrics are allowed: zero off-diagonal distances are fine and
    triangle-inequality violations on sampled triples only warn.
    """

    def __init__(self, dist: np.ndarray, check: bool = True):
        d = np.asarray(dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise SchemaError("distance matrix must be square")
        if check:
            if not np.allclose(d, d.T, atol=1e-12):
                raise SchemaError("distance matrix must be symmetric")
            if np.any(np.abs(np.diag(d)) > 1e-12) or np.any(d < -1e-12):
                raise SchemaError("distances must be non-negative with zero diagonal")
            self._spot_check_triangle(d)
        self.dist = (d + d.T) / 2.0
        np.fill_diagonal(self.dist, 0.0)
        self.n = d.shape[0]

    @staticmethod
    def _spot_check_triangle(d: np.ndarray, samples: int = 200):
        n = d.shape[0]
        if n < 3:
            return
        rng = np.random.Generator(np.random.PCG64(12345))
        for _ in range(min(samples, n ** 3)):
            i, j, k = rng.integers(0, n, size=3)
            if d[i, j] > d[i, k] + d[k, j] + 1e-9:
                warnings.warn("triangle inequality fails on a sampled triple "
                              "(treating input as a pseudo-metric)")
                return

    @classmethod
    def from_points(cls, coords: np.ndarray) -> "FiniteMetricSpace":
        x = np.asarray(coords, dtype=float)
        if x.ndim == 1:
            x = x[:, None]  # flat input is a 1-d point cloud
        diff = x[:, None, :] - x[None, :, :]
        return cls(np.sqrt((diff ** 2).sum(axis=2)), check=False)

    @classmethod
    def from_covariance(cls, cov: np.ndarray) -> "FiniteMetricSpace":
        """Canonical pseudo-metric d(i,j) = sqrt(Var(X_i - X_j))."""
        c = np.asarray(cov, dtype=float)
        v = np.diag(c)
        sq = np.maximum(v[:, None] + v[None, :] - 2 * c, 0.0)
        return cls(np.sqrt(sq), check=False)

    def diameter(self) -> float:
        return float(self.dist.max()) if self.n else 0.0

    def min_positive_distance(self) -> float:
        pos = self.dist[self.dist > 0]
        return float(pos.min()) if pos.size else 0.0

    def n_classes(self) -> int:
        """Number of equivalence classes under distance 0 (distinct points)."""
        seen: list[int] = []
        for i in range(self.n):
            if all(self.dist[i, j] > 0 for j in seen):
                seen.append(i)
        return len(seen)

    def subspace(self, indices: Sequence[int]) -> "FiniteMetricSpace":
        idx = np.asarray(list(indices), dtype=int)
        return FiniteMetricSpace(self.dist[np.ix_(idx, idx)], check=False)


@dataclass(frozen=True)
class CoveringResult:
    size: int
    centers: tuple[int, ...]
    exact: bool  # False means a greedy upper bound


def _greedy_cover_balls(balls: list[int], full: int) -> list[int]:
    covered = 0
    chosen = []
    while covered != full:
        best, gain = -1, -1
        for i, b in enumerate(balls):
            g = (b | covered).bit_count() - covered.bit_count()
            if g > gain:
                gain, best = g, i
        chosen.append(best)
        covered |= balls[best]
    return chosen


def _exact_min_cover(balls: list[int], n: int, node_cap: int = 2_000_000) -> list[int]:
    """Branch-and-bound minimum set cover over ball bitmasks."""
    full = (1 << n) - 1
    best = _greedy_cover_balls(balls, full)
    best_size = len(best)
    max_ball = max(b.bit_count() for b in balls)
    cover_lists = [[i for i, b in enumerate(balls) if (b >> e) & 1] for e in range(n)]
    nodes = 0

    def rec(covered: int, chosen: list[int]):
        nonlocal best, best_size, nodes
        nodes += 1
        if nodes > node_cap:
            raise RuntimeError("exact cover search exceeded its node cap")
        if covered == full:
            if len(chosen) < best_size:
                best, best_size = list(chosen), len(chosen)
            return
        uncovered = full & ~covered
        lower = len(chosen) + -(-uncovered.bit_count() // max_ball)
        if lower >= best_size:
            return
        # branch on the uncovered element with fewest covering balls
        options = None
        for e in range(n):
            if (uncovered >> e) & 1:
                opts = cover_lists[e]
                if options is None or len(opts) < len(options):
                    options = opts
        for i in sorted(options, key=lambda i: -(balls[i] & uncovered).bit_count()):
            chosen.append(i)
            rec(covered | balls[i], chosen)
            chosen.pop()

    rec(0, [])
    return best


def covering_number(space: FiniteMetricSpace, eps: float,
                    exact_limit: int = 20) -> CoveringResult:
    """Minimal number of closed eps-balls centered at points that cover the space.

    Exact (search) when n <= exact_limit; greedy upper bound beyond, flagged
    via ``exact=False``.
    """
    if eps <= 0:
        raise SchemaError("eps must be positive")
    n = space.n
    if n == 0:
        return CoveringResult(0, (), True)
    within = space.dist <= eps
    balls = [int(sum(1 << j for j in range(n) if within[i, j])) for i in range(n)]
    if n <= exact_limit:
        chosen = _exact_min_cover(balls, n)
        return CoveringResult(len(chosen), tuple(chosen), True)
    chosen = _greedy_cover_balls(balls, (1 << n) - 1)
    return CoveringResult(len(chosen), tuple(chosen), False)


# -- tail bounds ---------------------------------------------------------------


def chebyshev_bound(lam: float) -> float:
    """P(|X - EX| >= lam * sd) <= min(1, 1/lam^2)."""
    if lam <= 0:
        raise SchemaError("lambda must be positive")
    return min(1.0, 1.0 / (lam * lam))


def hoeffding_bound(lam: float, ranges: Sequence[float] | None = None) -> float:
    """Bounded-sum tail bound min(1, 2 exp(-2 lam^2)).

    The deviation is normalized by sqrt(sum (b_i - a_i)^2); with that
    normalization the (2, 2) constants make this the classical sharp form.
    ``ranges`` is validated when supplied but does not change the value.
    """
    if lam < 0:
        raise SchemaError("lambda must be non-negative")
    if ranges is not None and any(r < 0 for r in ranges):
        raise SchemaError("ranges must be non-negative")
    return min(1.0, HOEFFDING_AMPLITUDE * math.exp(-HOEFFDING_RATE * lam * lam))


def gaussian_tail_bound(lam: float, c: float = GAUSSIAN_TAIL_C,
                        amplitude: float = 1.0) -> float:
    """Sub-Gaussian tail template min(1, amplitude * exp(-c lam^2)).

    The rate c is a parameter on purpose; c = 1/2 with amplitude 1 dominates
    the exact standard normal two-sided tail.
    """
    if lam < 0:
        raise SchemaError("lambda must be non-negative")
    return min(1.0, amplitude * math.exp(-c * lam * lam))


def hoeffding_deviation(lam: float, ranges: Sequence[float]) -> float:
    """Absolute deviation threshold lam * sqrt(sum (b_i - a_i)^2)."""
    return lam * math.sqrt(math.fsum(float(r) ** 2 for r in ranges))


@dataclass(frozen=True)
class TailReport:
    lambdas: tuple[float, ...]
    frequencies: tuple[float, ...]
    stderrs: tuple[float, ...]
    mean: float
    std: float
    scale: float  # deviation unit actually used


def empirical_tail(sampler: Callable[[np.random.Generator, int], np.ndarray],
                   lambda_grid: Sequence[float], samples: int, r: RandomStream,
                   scale: float | None = None) -> TailReport:
    """Empirical exceedance frequencies of |X - mean| >= lam * scale.

    The mean and standard deviation are estimated from the same run; the
    default scale is that estimated standard deviation. Degenerate samplers
    report zero tails for lam > 0.
    """
    if samples < 1000:
        raise SchemaError("at least 1e3 samples required")
    rng = r.numpy_rng()
    x = np.asarray(sampler(rng, samples), dtype=float)
    if x.shape != (samples,):
        raise SchemaError("sampler must return a flat array of the requested size")
    mean = float(x.mean())
    std = float(x.std())
    unit = std if scale is None else float(scale)
    dev = np.abs(x - mean)
    freqs, errs = [], []
    for lam in lambda_grid:
        if unit == 0.0:
            p = 1.0 if lam <= 0 else 0.0
        else:
            p = float((dev >= lam * unit).mean())
        freqs.append(p)
        errs.append(math.sqrt(max(p * (1 - p), 1e-300) / samples))
    return TailReport(tuple(float(l) for l in lambda_grid), tuple(freqs),
                      tuple(errs), mean, std, unit)


def gaussian_sampler(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.standard_normal(size)


def coin_sum_sampler(n_coins: int) -> Callable[[np.random.Generator, int], np.ndarray]:
    """Sum of n fair +-1 coins."""
    def sample(rng: np.random.Generator, size: int) -> np.ndarray:
        return 2.0 * rng.binomial(n_coins, 0.5, size=size) - n_coins
    return sample


# -- chains and the entropy sum ------------------------------------------------


@dataclass(frozen=True)
class ChainLevel:
    level: int                 # scale is 2^-level
    scale: float
    net: tuple[int, ...]
    assign: tuple[int, ...]    # nearest net member per point


@dataclass(frozen=True)
class ChainDecomposition:
    levels: tuple[ChainLevel, ...]

    def chain_of(self, point: int) -> tuple[int, ...]:
        return tuple(level.assign[point] for level in self.levels)


def build_chain(space: FiniteMetricSpace) -> ChainDecomposition:
    """Nets at dyadic scales 1, 1/2, ... down to the resolution of the space.

    Every point's consecutive net representatives are within 2^{-n+1}; the
    finest level resolves all distinct points so each chain terminates at
    the point itself (up to distance-0 twins).
    """
    if space.n == 0:
        raise SchemaError("empty space")
    if space.diameter() > 2.0 + 1e-12:
        raise SchemaError("diameter must be <= 2; rescale the metric first")
    classes = space.n_classes()
    levels = []
    level = 0
    while True:
        scale = 2.0 ** (-level)
        cov = covering_number(space, scale)
        net = cov.centers
        d_to_net = space.dist[:, list(net)]
        assign = tuple(int(net[j]) for j in np.argmin(d_to_net, axis=1))
        levels.append(ChainLevel(level, scale, net, assign))
        if cov.size >= classes:
            break
        level += 1
        if level > 80:
            raise RuntimeError("chain construction failed to terminate")
    return ChainDecomposition(tuple(levels))


def chain_rhs(chain: ChainDecomposition, sample: np.ndarray) -> float:
    """Right-hand side of the telescoped sup bound for one process sample.

    sup over the coarsest net of |X| plus, per consecutive level pair, the
    sup of |X_t - X_t'| over realized parent links.
    """
    x = np.asarray(sample, dtype=float)
    levels = chain.levels
    total = max(abs(x[t]) for t in levels[0].net)
    n_points = len(levels[0].assign)
    for a, b in zip(levels, levels[1:]):
        links = {(a.assign[p], b.assign[p]) for p in range(n_points)}
        inc = max((abs(x[u] - x[v]) for u, v in links), default=0.0)
        total += inc
    return total


def dudley_bound(space: FiniteMetricSpace) -> float:
    """Dyadic entropy sum: sum over scales 2^-n of 2^-n sqrt(ln N(T, 2^-n)).

    Levels run from the first scale at or above the diameter down to the
    first scale whose covering number hits the number of distinct points;
    the remaining geometric tail is added in closed form.
    """
    return _dudley(space)[0]


def dudley_profile(space: FiniteMetricSpace):
    """Per-level rows (level, scale, covering_number, term) plus the tail."""
    return _dudley(space)[1]


def _dudley(space: FiniteMetricSpace):
    classes = space.n_classes()
    diam = space.diameter()
    if space.n == 0 or classes <= 1 or diam == 0.0:
        return 0.0, []
    n_start = math.floor(-math.log2(diam))
    rows = []
    total = 0.0
    level = n_start
    while True:
        scale = 2.0 ** (-level)
        N = covering_number(space, scale).size
        term = scale * math.sqrt(math.log(N)) if N > 1 else 0.0
        rows.append((level, scale, N, term))
        total += term
        if N >= classes:
            break
        level += 1
        if level - n_start > 200:
            raise RuntimeError("entropy sum failed to terminate")
    tail = 2.0 ** (-level) * math.sqrt(math.log(classes))
    rows.append(("tail", 0.0, classes, tail))
    total += tail
    return total, rows


# -- Gaussian processes ----------------------------------------------------------


@dataclass(frozen=True)
class GaussianProcessSpec:
    """Mean-zero Gaussian vector given by its covariance matrix."""

    covariance: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.covariance, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise SchemaError("covariance must be square")
        if not np.allclose(c, c.T, atol=1e-10):
            raise SchemaError("covariance must be symmetric")
        if np.any(np.diag(c) < -1e-12):
            raise SchemaError("variances must be non-negative")
        object.__setattr__(self, "covariance", (c + c.T) / 2.0)

    @property
    def n(self) -> int:
        return self.covariance.shape[0]

    def metric_space(self) -> FiniteMetricSpace:
        return FiniteMetricSpace.from_covariance(self.covariance)

    def factor(self, ridge: float = 1e-12) -> np.ndarray:
        try:
            return np.linalg.cholesky(self.covariance + ridge * np.eye(self.n))
        except np.linalg.LinAlgError as exc:
            raise SchemaError("covariance not PSD within ridge tolerance") from exc

    @classmethod
    def iid(cls, n: int, variance: float = 1.0) -> "GaussianProcessSpec":
        return cls(variance * np.eye(n))


@dataclass(frozen=True)
class SupEstimate:
    mean: float
    stderr: float
    samples: int


def empirical_sup(spec: GaussianProcessSpec, samples: int, r: RandomStream,
                  chunk: int = 100_000) -> SupEstimate:
    """Monte-Carlo estimate of E sup_t X_t by factorized sampling."""
    if samples < 1:
        raise SchemaError("samples >= 1 required")
    L = spec.factor()
    rng = r.numpy_rng()
    tot, tot2, done = 0.0, 0.0, 0
    while done < samples:
        k = min(chunk, samples - done)
        z = rng.standard_normal((k, spec.n))
        sups = (z @ L.T).max(axis=1)
        tot += math.fsum(sups.tolist())
        tot2 += math.fsum((sups * sups).tolist())
        done += k
    mean = tot / samples
    var = max(tot2 / samples - mean * mean, 0.0)
    return SupEstimate(mean, math.sqrt(var / samples), samples)


def random_process_spec(n: int, r: RandomStream, target_diameter: float = 2.0
                        ) -> GaussianProcessSpec:
    """Random PSD covariance rescaled so the canonical diameter equals the target."""
    rng = r.numpy_rng()
    a = rng.standard_normal((n, n))
    cov = a @ a.T / n
    ms = FiniteMetricSpace.from_covariance(cov)
    diam = ms.diameter()
    if diam <= 0:
        cov = np.eye(n)
        diam = math.sqrt(2.0)
    return GaussianProcessSpec(cov * (target_diameter / diam) ** 2)
