"""Dyadic decomposition utilities: condensation sandwich checks, good-scale
selection by pigeonholing, and Bohr sets with regular-radius search."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import BOHR_DOUBLING_C0
from .errors import SchemaError


@dataclass(frozen=True)
class ScaleLadder:
    """Finite decreasing sequence of positive scales t_1 > ... > t_J."""

    scales: tuple[float, ...]
    lacunary: bool = False

    def __post_init__(self):
        t = self.scales
        if not t:
            raise SchemaError("ladder needs at least one scale")
        if any(x <= 0 for x in t):
            raise SchemaError("scales must be positive")
        if any(t[j + 1] >= t[j] for j in range(len(t) - 1)):
            raise SchemaError("scales must be strictly decreasing")
        if self.lacunary and any(t[j + 1] > t[j] / 2 for j in range(len(t) - 1)):
            raise SchemaError("lacunarity t_{j+1} <= t_j/2 violated")

    @classmethod
    def geometric(cls, J: int, t1: float = 1.0, ratio: float = 0.5) -> "ScaleLadder":
        if not 0 < ratio < 1:
            raise SchemaError("ratio must be in (0,1)")
        return cls(tuple(t1 * ratio ** j for j in range(J)), lacunary=(ratio <= 0.5))

    def __len__(self) -> int:
        return len(self.scales)


@dataclass(frozen=True)
class CondensationReport:
    partial_sum: float
    condensed_partial_sum: float
    sandwich_ok: bool
    blocks: tuple[tuple[float, float, float], ...]  # (lower, block_sum, upper) per k


def condensation_test(f_values: Sequence[float], K: int) -> CondensationReport:
    """Check the dyadic-block sandwich 2^k f(2^{k+1}) <= sum_{2^k<=n<2^{k+1}} f(n) <= 2^k f(2^k).

    ``f_values[i]`` is f(i+1); the sequence must cover n = 1 .. 2^K and be
    non-negative and non-increasing. Returns the plain partial sum, the
    condensed partial sum sum_{k<K} 2^k f(2^k), and the per-block sandwich.
    """
    n_max = 1 << K
    f = [float(v) for v in f_values[:n_max]]
    if len(f) < n_max:
        raise SchemaError(f"need f at 1..2^K = {n_max} values, got {len(f)}")
    if any(v < 0 for v in f):
        raise SchemaError("f must be non-negative")
    if any(f[i + 1] > f[i] for i in range(n_max - 1)):
        raise SchemaError("f must be non-increasing")

    def fv(n: int) -> float:  # 1-based
        return f[n - 1]

    partial = math.fsum(f)
    condensed = math.fsum((1 << k) * fv(1 << k) for k in range(K))
    blocks = []
    ok = True
    for k in range(K):
        lo, hi = 1 << k, 1 << (k + 1)
        block = math.fsum(fv(n) for n in range(lo, hi))
        lower = (1 << k) * fv(hi)
        upper = (1 << k) * fv(lo)
        blocks.append((lower, block, upper))
        if not (lower <= block <= upper):
            ok = False
    return CondensationReport(partial, condensed, ok, tuple(blocks))


@dataclass(frozen=True)
class PigeonholeResult:
    index: int        # 1-based scale index
    weight: float
    certificate: float  # mean for the plain form, threshold for the weighted form


def pigeonhole_scale(weights: Sequence[float]) -> PigeonholeResult:
    """Smallest-weight scale. Guarantees w_{j*} <= mean(w); ties break low."""
    w = [float(x) for x in weights]
    if not w:
        raise SchemaError("empty weight vector")
    if any(x < 0 for x in w):
        raise SchemaError("weights must be non-negative")
    j = min(range(len(w)), key=lambda i: (w[i], i))
    return PigeonholeResult(j + 1, w[j], math.fsum(w) / len(w))


def pigeonhole_weighted_scale(weights: Sequence[float],
                              penalties: Sequence[float]) -> PigeonholeResult:
    """Locate a large coordinate under a penalty schedule.

    With sum_j 1/pi_j <= 1 there is always an index where
    w_j >= (1/pi_j) * sum(w) / sum(1/pi); the maximizer of w_j*pi_j is such
    an index (summing w_j = (w_j pi_j)/pi_j against the penalty reciprocals
    forces the max to clear the threshold). Ties break to the smallest index.
    """
    w = [float(x) for x in weights]
    pi = [float(x) for x in penalties]
    if not w or len(w) != len(pi):
        raise SchemaError("weights and penalties must be non-empty and equal length")
    if any(x < 0 for x in w):
        raise SchemaError("weights must be non-negative")
    if any(x <= 0 for x in pi):
        raise SchemaError("penalties must be positive")
    recip = math.fsum(1.0 / x for x in pi)
    if recip > 1.0 + 1e-12:
        raise SchemaError("penalty reciprocals must sum to <= 1")
    j = max(range(len(w)), key=lambda i: (w[i] * pi[i], -i))
    threshold = (1.0 / pi[j]) * math.fsum(w) / recip if recip > 0 else 0.0
    return PigeonholeResult(j + 1, w[j], threshold)


# -- Bohr sets ---------------------------------------------------------------


def dist_to_int(x: float) -> float:
    """Distance of x to the nearest integer."""
    return abs(x - round(x))


@dataclass(frozen=True)
class BohrSet:
    N: int
    freqs: tuple[float, ...]
    rho: float
    members: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)


def _max_dists(N: int, freqs: Sequence[float]) -> np.ndarray:
    """For n = -N..N, the largest distance of n*theta to the integers over theta in S."""
    n = np.arange(-N, N + 1, dtype=float)
    if not freqs:
        return np.zeros(2 * N + 1)
    worst = np.zeros(2 * N + 1)
    for th in freqs:
        x = n * th
        d = np.abs(x - np.round(x))
        np.maximum(worst, d, out=worst)
    return worst


def bohr_build(N: int, freqs: Sequence[float], rho: float) -> BohrSet:
    """Exact enumeration of {n : |n| <= N, dist(n*theta) <= rho for all theta}."""
    if N < 1:
        raise SchemaError("N >= 1 required")
    if not 0 < rho <= 0.5:
        raise SchemaError("rho must be in (0, 1/2]")
    worst = _max_dists(N, freqs)
    members = tuple(int(v) for v in np.arange(-N, N + 1)[worst <= rho])
    return BohrSet(N, tuple(float(t) for t in freqs), float(rho), members)


def bohr_size(N: int, freqs: Sequence[float], rho: float,
              sorted_dists: np.ndarray | None = None) -> int:
    """|B(S, rho)| without materializing members; reuses a sorted distance array."""
    if sorted_dists is None:
        sorted_dists = np.sort(_max_dists(N, freqs))
    return int(np.searchsorted(sorted_dists, rho, side="right"))


@dataclass(frozen=True)
class DoublingReport:
    ratio: float
    size_rho: int
    size_2rho: int
    threshold: float
    ok: bool


def bohr_doubling_check(N: int, freqs: Sequence[float], rho: float,
                        c0: float = BOHR_DOUBLING_C0) -> DoublingReport:
    """Ratio |B(S,2rho)| / |B(S,rho)| against the c0^{|S|} doubling budget."""
    if 2 * rho > 0.5:
        raise SchemaError("need 2*rho <= 1/2")
    sd = np.sort(_max_dists(N, freqs))
    a = bohr_size(N, freqs, rho, sd)
    b = bohr_size(N, freqs, 2 * rho, sd)
    ratio = b / a  # a >= 1 because n = 0 always qualifies
    threshold = c0 ** len(tuple(freqs))
    return DoublingReport(ratio, a, b, threshold, ratio <= threshold)


@dataclass(frozen=True)
class RegularityCheck:
    rho_prime: float
    size: int
    ratio: float
    lo: float
    hi: float
    ok: bool


@dataclass(frozen=True)
class RegularRadiusReport:
    found: bool
    rho: float | None
    size: int
    candidates: tuple[tuple[float, int, bool], ...]  # (rho_candidate, size, verified)
    checks: tuple[RegularityCheck, ...]              # transcript for the winner


def regular_radius(N: int, freqs: Sequence[float], rho0: float, kappa: float,
                   n_candidates: int = 64, n_checks: int = 11) -> RegularRadiusReport:
    """Search [rho0, 2*rho0] for a radius whose Bohr set size is kappa-regular.

    A candidate rho verifies when every rho' on a grid within the window
    |rho' - rho| <= rho / (100 (|S|+1)) keeps |B(S,rho')| / |B(S,rho)| inside
    [exp(-kappa |S| |d|/rho), exp(kappa |S| |d|/rho)]. Candidates are scanned
    on a geometric grid; the first verified one wins.
    """
    s = len(tuple(freqs))
    window_rel = 1.0 / (100.0 * (s + 1))
    if rho0 <= 0:
        raise SchemaError("rho0 must be positive")
    if 2 * rho0 * (1 + window_rel) > 0.5:
        raise SchemaError("verification window exceeds the maximal radius 1/2")

    sd = np.sort(_max_dists(N, freqs))
    candidates = []
    winner_checks: tuple[RegularityCheck, ...] = ()
    found_rho = None
    found_size = 0
    for i in range(n_candidates):
        rho = rho0 * 2.0 ** (i / (n_candidates - 1)) if n_candidates > 1 else rho0
        base = bohr_size(N, freqs, rho, sd)
        window = rho * window_rel
        checks = []
        ok = True
        for rp_raw in np.linspace(rho - window, rho + window, n_checks):
            rp = float(rp_raw)
            sz = bohr_size(N, freqs, rp, sd)
            ratio = sz / base
            d = abs(rp - rho)
            hi = math.exp(kappa * s * d / rho)
            lo = 1.0 / hi
            c_ok = lo <= ratio <= hi
            checks.append(RegularityCheck(rp, sz, ratio, lo, hi, c_ok))
            if not c_ok:
                ok = False
        candidates.append((rho, base, ok))
        if ok and found_rho is None:
            found_rho = rho
            found_size = base
            winner_checks = tuple(checks)
            break
    return RegularRadiusReport(found_rho is not None, found_rho, found_size,
                               tuple(candidates), winner_checks)
