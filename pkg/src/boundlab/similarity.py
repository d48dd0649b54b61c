"""Geometric-ladder orbit construction on high-dimensional tori.

Three geometric ladders supply J0^3 sums; the reciprocal vector turns each
dilation parameter t into an orbit of J0^3 well-separated points whose
coordinates are sums of three stored ratio terms, so the whole t-family is
described by O(J^2) parameters. Random cube sets then probe how often a
single dilation, and an entire certified net of dilations, hits the set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iter_product
from typing import Sequence

import numpy as np

from .core import GridTorus, IndicatorSet, RandomStream, procedural_member
from .errors import BudgetError, InvariantError, SchemaError


@dataclass(frozen=True)
class Ladder:
    """Values s[i][j] = base * ratio^((i-1) J0 + (j-1)) for i = 1..3, j = 1..J0."""

    J0: int
    ratio: float
    base: float = 1.0

    def __post_init__(self):
        if self.J0 < 1:
            raise SchemaError("J0 >= 1 required")
        if not 0 < self.ratio <= 0.5:
            raise SchemaError("ratio must be in (0, 1/2]")
        if self.base == 0:
            raise SchemaError("base must be nonzero")

    def value(self, i: int, j: int) -> float:
        """s_{i,j} with 1-based indices."""
        return self.base * self.ratio ** ((i - 1) * self.J0 + (j - 1))

    def flattened(self) -> np.ndarray:
        return np.array([self.value(i, j)
                         for i in (1, 2, 3) for j in range(1, self.J0 + 1)])


@dataclass(frozen=True)
class SimilarityConfig:
    J0: int
    ratio: float = 0.25
    eps: float = 0.5
    cube_side: float | None = None      # default 1/(100 J) with J = 3 J0
    t_lo: float = 1.0
    t_hi: float = 2.0
    seed: int = 0
    x_samples: int = 1000
    t_samples: int | None = None        # None = auto-certified net
    max_net_points: int = 500_000       # the net is held in memory as one array

    @property
    def J(self) -> int:
        return 3 * self.J0

    def resolved_cube_side(self) -> float:
        side = self.cube_side if self.cube_side is not None else 1.0 / (100 * self.J)
        M = 1.0 / side
        if abs(M - round(M)) > 1e-9:
            raise SchemaError("cube_side must divide 1 evenly")
        if not 0 < self.eps <= 1:
            raise SchemaError("eps must be in (0, 1]")
        return side

    def cube_count(self) -> int:
        return int(round(1.0 / self.resolved_cube_side()))


class OrbitFamily:
    """The t-parametrized point sets t*S0*v mod Z^J.

    Coordinates are evaluated as sums of exactly three stored ratio terms
    ratios[c, i, j] = s_{i,j} * v_c (a J x 3 x J0 table, O(J^2) numbers),
    in the fixed order i = 1, 2, 3, so a reconstruction from the stored
    table reproduces every orbit point bit for bit.
    """

    def __init__(self, ladder: Ladder):
        self.ladder = ladder
        J0 = ladder.J0
        self.J = 3 * J0
        s = ladder.flattened()                     # J ladder values
        self.v = 1.0 / (10.0 * s)                  # one reciprocal per coordinate
        # ratio table: term contributed by ladder entry (i, j) to coordinate c
        self.ratios = np.empty((self.J, 3, J0))
        for c in range(self.J):
            for i in (1, 2, 3):
                for j in range(1, J0 + 1):
                    self.ratios[c, i - 1, j - 1] = ladder.value(i, j) * self.v[c]
        self.triples = list(iter_product(range(J0), repeat=3))
        self.S0 = np.array([ladder.value(1, a + 1) + ladder.value(2, b + 1)
                            + ladder.value(3, c + 1) for a, b, c in self.triples])
        if len(np.unique(self.S0)) != J0 ** 3:
            raise SchemaError("duplicate sums in S0; the ladder ratio is resonant")
        # per-point coordinate sums y * v_c, assembled once in the fixed order
        R = self.ratios
        self._coord_sums = np.stack([R[:, 0, a] + R[:, 1, b] + R[:, 2, c]
                                     for a, b, c in self.triples])

    @property
    def n_points(self) -> int:
        return len(self.triples)

    def orbit_points(self, t: float) -> np.ndarray:
        """J0^3 x J array of orbit points at dilation t, coordinates in [0, 1)."""
        return (t * self._coord_sums) % 1.0

    def orbit_stack(self, ts: np.ndarray) -> np.ndarray:
        """Orbit points for every dilation in ts, shaped (len(ts), J0^3, J)."""
        return (np.asarray(ts)[:, None, None] * self._coord_sums[None, :, :]) % 1.0

    def reconstruct_orbit(self, t: float, ratio_table: np.ndarray) -> np.ndarray:
        """Rebuild the orbit from an externally stored ratio table."""
        pts = np.empty((self.n_points, self.J))
        for k, (a, b, c) in enumerate(self.triples):
            pts[k] = (t * (ratio_table[:, 0, a] + ratio_table[:, 1, b]
                           + ratio_table[:, 2, c])) % 1.0
        return pts

    def max_coordinate_speed(self) -> float:
        """max over points and coordinates of |d/dt (t y v_c)| = |y v_c|."""
        return float(self.S0.max() * np.abs(self.v).max())


def build_construction(cfg: SimilarityConfig) -> OrbitFamily:
    """Deterministic ladder, reciprocal vector, and sum set for the config."""
    fam = OrbitFamily(Ladder(cfg.J0, cfg.ratio))
    assert fam.n_points == cfg.J0 ** 3
    return fam


def torus_linf(p: np.ndarray, q: np.ndarray) -> float:
    """ell-infinity distance on the torus between two points."""
    d = np.abs(p - q)
    return float(np.max(np.minimum(d, 1.0 - d)))


def _pairwise_min_linf(pts: np.ndarray) -> tuple[float, tuple[int, int]]:
    k = pts.shape[0]
    best = math.inf
    pair = (0, 0)
    for i in range(k - 1):
        d = np.abs(pts[i + 1:] - pts[i])
        d = np.minimum(d, 1.0 - d).max(axis=1)
        j = int(np.argmin(d))
        if d[j] < best:
            best = float(d[j])
            pair = (i, i + 1 + j)
    return best, pair


@dataclass(frozen=True)
class SeparationReport:
    minimum: float
    t_witness: float
    pair: tuple[int, int]


def separation(fam: OrbitFamily, t_probes: Sequence[float]) -> SeparationReport:
    """Minimum pairwise ell-infinity orbit separation over the probed dilations."""
    if fam.n_points < 2:
        return SeparationReport(math.inf, float(t_probes[0]) if len(t_probes) else 1.0, (0, 0))
    best = math.inf
    t_w = float(t_probes[0])
    pair = (0, 0)
    for t in t_probes:
        val, pr = _pairwise_min_linf(fam.orbit_points(float(t)))
        if val < best:
            best, t_w, pair = val, float(t), pr
    return SeparationReport(best, t_w, pair)


def hausdorff_linf(P: np.ndarray, Q: np.ndarray) -> float:
    """Hausdorff distance between two point sets under torus ell-infinity."""
    d = np.abs(P[:, None, :] - Q[None, :, :])
    d = np.minimum(d, 1.0 - d).max(axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def _hausdorff_vs_stack(P: np.ndarray, stack: np.ndarray) -> np.ndarray:
    """Hausdorff distance from P to each member of a (w, k, J) stack."""
    d = np.abs(stack[:, :, None, :] - P[None, None, :, :])
    d = np.minimum(d, 1.0 - d).max(axis=3)        # (w, k, k) pairwise linf
    return np.maximum(d.min(axis=2).max(axis=1), d.min(axis=1).max(axis=1))


@dataclass(frozen=True)
class EntropyReport:
    net_size: int
    exponent: float           # log(net_size) / log(1/delta)
    delta: float
    t_samples: int
    lookback: int


def orbit_entropy(fam: OrbitFamily, delta: float, t_samples: int,
                  t_lo: float = 1.0, t_hi: float = 2.0,
                  lookback: int = 8) -> EntropyReport:
    """Size of a greedy delta-net of the sampled orbit family under Hausdorff
    distance. Samples must be dense enough that consecutive orbits move less
    than delta/2 (checked with the coordinate speed bound). New net members
    are opened whenever no recent member is within delta; the result is a
    certified delta-cover of the sampled family.
    """
    if not 0 < delta < 0.5:
        raise SchemaError("delta must be in (0, 1/2)")
    speed = fam.max_coordinate_speed()
    required = int(math.ceil(2.0 * speed * (t_hi - t_lo) / delta)) + 1
    if t_samples < required:
        raise SchemaError(
            f"t_samples too sparse for the Lipschitz bound; need >= {required}")
    ts = np.linspace(t_lo, t_hi, t_samples)
    net: list[np.ndarray] = []
    for t in ts:
        P = fam.orbit_points(float(t))
        if net and hausdorff_linf(P, net[-1]) <= delta:
            continue  # newest member almost always covers the next sample
        if len(net) > 1:
            window = np.stack(net[-lookback:-1])
            if _hausdorff_vs_stack(P, window).min() <= delta:
                continue
        net.append(P)
    exponent = math.log(max(len(net), 1)) / math.log(1.0 / delta)
    return EntropyReport(len(net), exponent, delta, t_samples, lookback)


# -- random cube sets -------------------------------------------------------------


def cube_set(cfg: SimilarityConfig, seed: int | None = None) -> IndicatorSet:
    """Procedural random union of cubes on the J-torus (each cube kept with
    probability eps, independently, keyed by the seed)."""
    M = cfg.cube_count()
    torus = GridTorus(cfg.J, M)
    return IndicatorSet.procedural(torus, cfg.seed if seed is None else seed, cfg.eps)


def _cube_of(x: np.ndarray, M: int) -> tuple[int, ...]:
    return tuple(int(v) % M for v in np.floor(x * M).astype(int))


@dataclass(frozen=True)
class CoverageReport:
    empirical: float
    exact: float              # 1 - (1 - eps)^{J0^3}
    stderr: float
    trials: int
    t: float
    min_separation: float


def coverage_probability(cfg: SimilarityConfig, fam: OrbitFamily, trials: int,
                         t: float = 1.5) -> CoverageReport:
    """Empirical probability over (x, cube-set seed) that some orbit point of
    x + t S0 v lands in the random cube set, against the exact Bernoulli law.

    Requires the orbit points at t to be pairwise farther apart than one
    cube side, so the J0^3 cube memberships are independent for every x.
    """
    if trials < 1:
        raise SchemaError("trials >= 1 required")
    side = cfg.resolved_cube_side()
    M = cfg.cube_count()
    pts = fam.orbit_points(t)
    if fam.n_points >= 2:
        min_sep, _ = _pairwise_min_linf(pts)
        if min_sep <= side:
            raise InvariantError(
                "orbit-points-in-distinct-cubes",
                f"separation {min_sep:.3g} <= cube side {side:.3g} at t={t}")
    else:
        min_sep = math.inf
    exact = 1.0 - (1.0 - cfg.eps) ** fam.n_points
    base = RandomStream(cfg.seed, stream_id=0xC07E)
    hits = 0
    for k in range(trials):
        rs = base.substream(k)
        e_seed = rs.next_u64()
        x = rs.uniform_vec(cfg.J)
        shifted = (pts + x) % 1.0
        ok = False
        for row in shifted:
            if procedural_member(e_seed, _cube_of(row, M), cfg.eps):
                ok = True
                break
        hits += ok
    p = hits / trials
    stderr = math.sqrt(max(p * (1 - p), 1e-300) / trials)
    return CoverageReport(p, exact, stderr, trials, t, min_sep)


@dataclass(frozen=True)
class InfSupReport:
    int_f: float
    int_F: float              # certified net infimum (lower bound for the continuum)
    int_F_plain: float        # uncertified value on a bounded subnet (upper envelope)
    ratio: float              # int_F / int_f, nan when undefined
    stderr_f: float
    stderr_F: float
    x_samples: int
    net_points: int
    plain_net_points: int
    ball_radius: float


def _ball_cubes(q: float, rho: float, M: int) -> list[int]:
    lo = math.floor((q - rho) * M)
    hi = math.floor((q + rho) * M)
    if hi == lo:
        return [lo % M]
    return [c % M for c in range(lo, hi + 1)]


def _cert_success(pts: np.ndarray, x: np.ndarray, e_seed: int, eps: float,
                  M: int, rho: float) -> bool:
    """Some orbit point has every cube meeting its rho-ball inside the set."""
    for row in (pts + x) % 1.0:
        if not procedural_member(e_seed, _cube_of(row, M), eps):
            continue
        ok = True
        for cube in iter_product(*[_ball_cubes(float(q), rho, M) for q in row]):
            if not procedural_member(e_seed, cube, eps):
                ok = False
                break
        if ok:
            return True
    return False


def _plain_success(pts: np.ndarray, x: np.ndarray, e_seed: int, eps: float,
                   M: int) -> bool:
    for row in (pts + x) % 1.0:
        if procedural_member(e_seed, _cube_of(row, M), eps):
            return True
    return False


def inf_sup_experiment(cfg: SimilarityConfig, fam: OrbitFamily,
                       plain_net_cap: int = 1024) -> InfSupReport:
    """Monte-Carlo estimate of the mass of F(x) = inf over the certified
    dilation net of sup_{y in S0} 1_E(x + t y v), against the mass of 1_E.

    Certification: a net point succeeds only if every cube meeting the
    ell-infinity ball of radius (speed * spacing / 2) around some orbit
    point belongs to E; the success then extends to the whole net cell, so
    the estimate is a true lower bound for the continuum infimum (and the
    full-set case eps = 1 passes every net point exactly). The uncertified
    value on a subnet of at most ``plain_net_cap`` points is reported as a
    cheap upper envelope.
    """
    side = cfg.resolved_cube_side()
    M = cfg.cube_count()
    speed = fam.max_coordinate_speed()
    margin = side / 4.0
    spacing_required = margin / speed
    span = cfg.t_hi - cfg.t_lo
    if cfg.t_samples is None:
        n_net = int(math.ceil(span / spacing_required)) + 1
    else:
        n_net = int(cfg.t_samples)
        if n_net < 2 or span / (n_net - 1) > spacing_required:
            raise SchemaError(
                "t net too coarse to certify; need >= "
                f"{int(math.ceil(span / spacing_required)) + 1} points")
    if n_net > cfg.max_net_points:
        raise BudgetError(
            f"certified net needs {n_net} points, over the budget {cfg.max_net_points}",
            required=n_net)
    ts = np.linspace(cfg.t_lo, cfg.t_hi, n_net)
    spacing = span / (n_net - 1) if n_net > 1 else 0.0
    rho = speed * spacing / 2.0
    orbits = fam.orbit_stack(ts)
    plain_idx = list(range(n_net)) if n_net <= plain_net_cap else \
        [int(i) for i in np.linspace(0, n_net - 1, plain_net_cap).round()]

    base = RandomStream(cfg.seed, stream_id=0x1F5B)
    f_hits = 0
    F_hits = 0
    plain_hits = 0
    for k in range(cfg.x_samples):
        rs = base.substream(k)
        e_seed = rs.next_u64()
        x = rs.uniform_vec(cfg.J)
        if procedural_member(e_seed, _cube_of(x, M), cfg.eps):
            f_hits += 1
        cert_all = True
        for P in orbits:
            if not _cert_success(P, x, e_seed, cfg.eps, M, rho):
                cert_all = False
                break
        if cert_all:
            F_hits += 1
            plain_hits += 1      # certification implies plain success pointwise
        else:
            plain_all = True
            for i in plain_idx:
                if not _plain_success(orbits[i], x, e_seed, cfg.eps, M):
                    plain_all = False
                    break
            plain_hits += plain_all
    n = cfg.x_samples
    int_f = f_hits / n
    int_F = F_hits / n
    int_plain = plain_hits / n
    se_f = math.sqrt(max(int_f * (1 - int_f), 1e-300) / n)
    se_F = math.sqrt(max(int_F * (1 - int_F), 1e-300) / n)
    ratio = int_F / int_f if int_f > 0 else math.nan
    return InfSupReport(int_f, int_F, int_plain, ratio, se_f, se_F, n, n_net,
                        len(plain_idx), rho)


@dataclass(frozen=True)
class B1Report:
    result: IndicatorSet
    measure: float


def build_B1(B: IndicatorSet, S0_scaled: Sequence[float], t_grid: Sequence[float],
             v: Sequence[float]) -> B1Report:
    """Exact reduction set: intersection over the t grid of the union over y
    of the translates B - t y v, on a small explicit torus."""
    if not B.is_explicit:
        raise SchemaError("build_B1 needs an explicit set")
    torus = B.carrier
    if not isinstance(torus, GridTorus) or torus.dims > 3 or torus.n_cells > 64 ** 3:
        raise BudgetError("build_B1 is limited to explicit tori with J <= 3 "
                          "and at most 64^3 cells")
    if not list(t_grid):
        raise SchemaError("t grid must be non-empty")
    v = np.asarray(list(v), dtype=float)
    if v.shape != (torus.dims,):
        raise SchemaError("v dimension mismatch")
    inter = None
    for t in t_grid:
        union = IndicatorSet.empty(torus)
        for y in S0_scaled:
            shift = tuple(-float(t) * float(y) * v)
            union = union.union(B.translate(shift))
        inter = union if inter is None else inter.intersect(union)
    count = inter.member_count()
    return B1Report(inter, count / torus.n_cells)
