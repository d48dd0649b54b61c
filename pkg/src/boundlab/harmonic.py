"""Planar annular-correlation scans, random orthonormal-subset norm
constants, and ergodic averages along squares on finite cyclic systems.

The planar experiments live on a [-2,2)^2 torus grid with normalized
measure (the full torus has measure 1); sets of interest sit inside the
central [-1,1]^2 window so that shifts of length up to the guard margin
never wrap around into the support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import FKW_SCAN_CONSTANT
from .core import RandomStream
from .dyadic import ScaleLadder
from .errors import BudgetError, SchemaError


# -- planar grid and circle measure ---------------------------------------------


@dataclass(frozen=True)
class CircleMeasure:
    """K equispaced unit-mass/K atoms on the unit circle."""

    atoms: int

    def __post_init__(self):
        if self.atoms < 1:
            raise SchemaError("need at least one atom")

    def directions(self) -> np.ndarray:
        th = 2.0 * np.pi * np.arange(self.atoms) / self.atoms
        return np.stack([np.cos(th), np.sin(th)], axis=1)


@dataclass(frozen=True)
class PlaneGrid:
    """Square torus [-half, half)^2 discretized at m cells per unit length."""

    m_per_unit: int
    half_extent: float = 2.0

    def __post_init__(self):
        n = 2 * self.half_extent * self.m_per_unit
        if self.m_per_unit < 1 or abs(n - round(n)) > 1e-9:
            raise SchemaError("grid must tile the torus with an integer cell count")

    @property
    def n_axis(self) -> int:
        return int(round(2 * self.half_extent * self.m_per_unit))

    @property
    def cell_side(self) -> float:
        return 1.0 / self.m_per_unit

    def axis_coords(self) -> np.ndarray:
        """Cell-center physical coordinates along one axis."""
        return -self.half_extent + (np.arange(self.n_axis) + 0.5) * self.cell_side

    def empty_mask(self) -> np.ndarray:
        return np.zeros((self.n_axis, self.n_axis), dtype=bool)

    def rect_mask(self, rects: Sequence[tuple[float, float, float, float]]) -> np.ndarray:
        """Union of axis-aligned rectangles (x0, y0, x1, y1) in physical coords."""
        xs = self.axis_coords()
        mask = self.empty_mask()
        for (x0, y0, x1, y1) in rects:
            mx = (xs >= min(x0, x1)) & (xs <= max(x0, x1))
            my = (xs >= min(y0, y1)) & (xs <= max(y0, y1))
            mask |= mx[:, None] & my[None, :]
        return mask

    def disk_mask(self, cx: float, cy: float, radius: float) -> np.ndarray:
        xs = self.axis_coords()
        dx = xs - cx
        dy = xs - cy
        return (dx[:, None] ** 2 + dy[None, :] ** 2) <= radius ** 2

    def relative_measure(self, mask: np.ndarray) -> float:
        return float(mask.sum()) / mask.size

    def support_radius(self, mask: np.ndarray) -> float:
        """Largest ell-infinity coordinate of any member cell (outer edge)."""
        if not mask.any():
            return 0.0
        xs = self.axis_coords()
        ix, iy = np.nonzero(mask)
        r = max(np.abs(xs[ix]).max(), np.abs(xs[iy]).max())
        return float(r + 0.5 * self.cell_side)

    def random_rect_union(self, r: RandomStream, target_measure: float,
                          max_rects: int = 200, side_range=(0.05, 0.5),
                          window: float = 1.0) -> np.ndarray:
        """Seeded union of random rectangles inside the central window, grown
        until the relative measure reaches the target."""
        mask = self.empty_mask()
        for _ in range(max_rects):
            w = side_range[0] + (side_range[1] - side_range[0]) * r.uniform()
            h = side_range[0] + (side_range[1] - side_range[0]) * r.uniform()
            cx = (2 * r.uniform() - 1) * (window - w / 2)
            cy = (2 * r.uniform() - 1) * (window - h / 2)
            mask |= self.rect_mask([(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2)])
            if self.relative_measure(mask) >= target_measure:
                break
        return mask


def _snapped_shift_counts(grid: PlaneGrid, t: float, circle: CircleMeasure):
    """Snap t*omega to integer cell offsets; collapse duplicates with counts."""
    m = grid.m_per_unit
    n = grid.n_axis
    dirs = circle.directions()
    sx = np.rint(t * dirs[:, 0] * m).astype(int) % n
    sy = np.rint(t * dirs[:, 1] * m).astype(int) % n
    flat = sx * n + sy
    uniq, counts = np.unique(flat, return_counts=True)
    return uniq // n, uniq % n, counts


def _guard_check(grid: PlaneGrid, mask: np.ndarray, t: float):
    margin = 2.0 * grid.half_extent - 2.0 * grid.support_radius(mask)
    if t >= margin:
        raise SchemaError(
            f"scale t={t} exceeds the wraparound guard {margin:.4f}; "
            "keep the set inside the central window or lower t")


def fkw_correlation(grid: PlaneGrid, mask: np.ndarray, t: float,
                    circle: CircleMeasure, method: str = "fft",
                    enforce_guard: bool = True) -> float:
    """Correlation of a planar set with its own t-shifts averaged over the circle.

    Returns (1/K) sum_omega (1/n^2) sum_x 1_B(x) 1_B(x + t omega), shifts
    snapped to the grid. The direct and spectral paths agree to 1e-9 because
    both use the identical snapped shifts.
    """
    if t <= 0:
        raise SchemaError("t must be positive")
    if enforce_guard:
        _guard_check(grid, mask, t)
    sx, sy, counts = _snapped_shift_counts(grid, t, circle)
    B = mask.astype(float)
    n2 = mask.size
    K = circle.atoms
    if method == "direct":
        tot = 0.0
        for ax, ay, c in zip(sx, sy, counts):
            shifted = np.roll(B, shift=(-int(ax), -int(ay)), axis=(0, 1))
            tot += c * float((B * shifted).sum())
        return tot / (K * n2)
    if method != "fft":
        raise SchemaError("method must be 'direct' or 'fft'")
    acorr = autocorrelation_table(mask)
    return float((counts * acorr[sx, sy]).sum() / (K * n2))


def autocorrelation_table(mask: np.ndarray) -> np.ndarray:
    """A(s) = sum_x 1_B(x) 1_B(x+s) for every offset s, via the spectral identity."""
    F = np.fft.fft2(mask.astype(float))
    return np.fft.ifft2(np.abs(F) ** 2).real


@dataclass(frozen=True)
class ScanReport:
    scales: tuple[float, ...]
    correlations: tuple[float, ...]
    argmax: int               # 1-based scale index
    max_correlation: float
    measure: float
    threshold: float          # c * measure^2
    passed: bool


def fkw_scan(grid: PlaneGrid, mask: np.ndarray, ladder: ScaleLadder,
             circle: CircleMeasure, c: float = FKW_SCAN_CONSTANT,
             enforce_guard: bool = True) -> ScanReport:
    """Evaluate the correlation at every ladder scale and test max >= c * measure^2."""
    mu = grid.relative_measure(mask)
    if enforce_guard and len(ladder.scales) > 0:
        _guard_check(grid, mask, max(ladder.scales))
    acorr = autocorrelation_table(mask)
    n2 = mask.size
    K = circle.atoms
    vals = []
    for t in ladder.scales:
        sx, sy, counts = _snapped_shift_counts(grid, t, circle)
        vals.append(float((counts * acorr[sx, sy]).sum() / (K * n2)))
    best = max(range(len(vals)), key=lambda i: (vals[i], -i))
    threshold = c * mu * mu
    return ScanReport(tuple(ladder.scales), tuple(vals), best + 1, vals[best],
                      mu, threshold, vals[best] >= threshold)


@dataclass(frozen=True)
class SplitReport:
    low: float
    medium: float
    high: float
    correlation: float

    @property
    def total(self) -> float:
        return self.low + self.medium + self.high


def fkw_frequency_split(grid: PlaneGrid, mask: np.ndarray, t: float, delta: float,
                        circle: CircleMeasure, enforce_guard: bool = True) -> SplitReport:
    """Partition the spectral energy of the correlation at |xi| <= delta/t,
    delta/t < |xi| <= 1/(delta t), and beyond. The three parts sum to the
    correlation exactly (same snapped shifts, same transform)."""
    if not 0 < delta <= 0.5:
        raise SchemaError("delta must be in (0, 1/2]")
    if enforce_guard:
        _guard_check(grid, mask, t)
    n = grid.n_axis
    n2 = mask.size
    K = circle.atoms
    sx, sy, counts = _snapped_shift_counts(grid, t, circle)
    g = np.zeros((n, n))
    np.add.at(g, (sx, sy), counts / K)
    F = np.fft.fft2(mask.astype(float))
    W = np.fft.fft2(g)
    summand = (np.abs(F) ** 2 * W).real / (n2 * n2)
    # physical frequency of bin k is k_wrapped / (2 * half_extent)
    k = np.fft.fftfreq(n, d=1.0 / n)
    xi = np.hypot(k[:, None], k[None, :]) / (2.0 * grid.half_extent)
    low_cut = delta / t
    high_cut = 1.0 / (delta * t)
    low = float(summand[xi <= low_cut].sum())
    med = float(summand[(xi > low_cut) & (xi <= high_cut)].sum())
    high = float(summand[xi > high_cut].sum())
    corr = float(summand.sum())
    return SplitReport(low, med, high, corr)


def mean_translate_correlation(grid: PlaneGrid, mask: np.ndarray, t: float,
                               circle: CircleMeasure) -> tuple[float, float]:
    """Average, over every grid translate z, of the correlation of B against B+z.

    Returns (numerical average, measure(B)^2); the two agree on the grid
    because averaging the translate washes the set out to its density.
    """
    n = grid.n_axis
    n2 = mask.size
    K = circle.atoms
    sx, sy, counts = _snapped_shift_counts(grid, t, circle)
    g = np.zeros((n, n))
    np.add.at(g, (sx, sy), counts / K)
    acorr = autocorrelation_table(mask)
    # V(z) = (1/n^2) * (g (*) acorr)(z), one value per translate z
    V = np.fft.ifft2(np.fft.fft2(g) * np.fft.fft2(acorr)).real / n2
    mu = grid.relative_measure(mask)
    return float(V.mean()), mu * mu


def translate_correlation(grid: PlaneGrid, mask: np.ndarray, z_cells: tuple[int, int],
                          t: float, circle: CircleMeasure) -> float:
    """Correlation of B against the translate B+z (z in cells); spot-check oracle."""
    shifted = np.roll(mask, shift=z_cells, axis=(0, 1))
    sx, sy, counts = _snapped_shift_counts(grid, t, circle)
    B = mask.astype(float)
    S = shifted.astype(float)
    tot = 0.0
    for ax, ay, c in zip(sx, sy, counts):
        tot += c * float((B * np.roll(S, shift=(-int(ax), -int(ay)), axis=(0, 1))).sum())
    return tot / (circle.atoms * mask.size)


def annulus_multiplicity(ladder: ScaleLadder, delta: float, xi: float) -> int:
    """How many ladder annuli (delta/t_j, 1/(delta t_j)] contain |xi|."""
    return sum(1 for t in ladder.scales if delta / t < xi <= 1.0 / (delta * t))


# -- character systems and the p-norm constant ----------------------------------


@dataclass(frozen=True)
class CharacterSystem:
    """Characters x -> exp(2 pi i k x / n) on uniform Z_n, indexed by residues."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise SchemaError("modulus must be positive")

    def rows(self, indices: Sequence[int]) -> np.ndarray:
        idx = np.asarray([int(i) % self.n for i in indices], dtype=float)
        x = np.arange(self.n, dtype=float)
        return np.exp(2j * np.pi * np.outer(idx, x) / self.n)


def _p_norm(g: np.ndarray, p: float) -> float:
    """L^p norm against the uniform probability measure."""
    return float(np.mean(np.abs(g) ** p) ** (1.0 / p))


def lambda_p_estimate(n: int, p: float, S: Sequence[int], probes: int,
                      r: RandomStream, ascent_iters: int = 200) -> float:
    """Certified lower bound on sup_{|a|<=1} ||sum_{i in S} a_i phi_i||_p.

    Probes random unit coefficient vectors, the flat vector, and coordinate
    vectors (each coordinate vector attains exactly 1 since the characters
    are unimodular), then runs projected gradient ascent from the best start.
    """
    if p <= 2:
        raise SchemaError("p > 2 required")
    S = [int(i) for i in S]
    if not S:
        return 0.0
    system = CharacterSystem(n)
    phi = system.rows(S)          # |S| x n complex
    k = len(S)
    rng = r.numpy_rng()

    def norm_of(a: np.ndarray) -> float:
        return _p_norm(a @ phi, p)

    best_val = 1.0                # coordinate vectors attain exactly 1
    best_a = np.zeros(k, dtype=complex)
    best_a[0] = 1.0
    flat = np.ones(k, dtype=complex) / math.sqrt(k)
    cand = [flat]
    for _ in range(max(probes, 0)):
        v = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        cand.append(v / np.linalg.norm(v))
    for a in cand:
        val = norm_of(a)
        if val > best_val:
            best_val, best_a = val, a.copy()

    a = best_a.copy()
    val = norm_of(a)
    step = 0.5
    for _ in range(ascent_iters):
        g = a @ phi
        grad = (np.abs(g) ** (p - 2) * g) @ phi.conj().T / n
        norm_grad = np.linalg.norm(grad)
        if norm_grad == 0:
            break
        trial = a + step * grad / norm_grad
        trial /= np.linalg.norm(trial)
        tval = norm_of(trial)
        if tval > val:
            a, val = trial, tval
            step = min(step * 1.25, 1.0)
        else:
            step *= 0.5
            if step < 1e-12:
                break
    return max(1.0, max(val, best_val))


@dataclass(frozen=True)
class LambdaPTrialReport:
    random_sizes: tuple[int, ...]
    random_estimates: tuple[float, ...]
    random_median: float
    random_max: float
    structured_indices: tuple[int, ...]
    structured_estimate: float


def square_index_set(n: int, size: int) -> tuple[int, ...]:
    """First ``size`` distinct residues of the squares 1^2, 2^2, ... mod n."""
    out: list[int] = []
    seen = set()
    i = 1
    while len(out) < size and i <= n * n:
        q = (i * i) % n
        if q not in seen:
            seen.add(q)
            out.append(q)
        i += 1
    return tuple(out)


def lambda_p_random_trial(n: int, p: float, trials: int, r: RandomStream,
                          probes: int = 8) -> LambdaPTrialReport:
    """Distribution of the norm constant for random index sets with inclusion
    probability n^{2/p-1}, against the square-residue set of equal expected size."""
    if trials < 1:
        raise SchemaError("trials >= 1 required")
    incl = n ** (2.0 / p - 1.0)
    sizes, vals = [], []
    for tr in range(trials):
        rs = r.substream(tr)
        S = [i for i in range(n) if rs.uniform() < incl]
        sizes.append(len(S))
        vals.append(lambda_p_estimate(n, p, S, probes, rs.substream(1 << 20)))
    target = max(1, round(n ** (2.0 / p)))
    structured = square_index_set(n, target)
    s_val = lambda_p_estimate(n, p, structured, probes, r.substream(0x5A5A5A))
    svals = sorted(vals)
    median = svals[len(svals) // 2] if len(svals) % 2 else 0.5 * (
        svals[len(svals) // 2 - 1] + svals[len(svals) // 2])
    return LambdaPTrialReport(tuple(sizes), tuple(vals), median, max(vals),
                              structured, s_val)


# -- ergodic averages along squares ----------------------------------------------


@dataclass(frozen=True)
class CyclicSystem:
    """Rotation x -> x + shift on Z_m carrying a real-valued function f."""

    m: int
    shift: int
    f: tuple[float, ...]

    def __post_init__(self):
        if self.m < 1:
            raise SchemaError("modulus must be positive")
        if len(self.f) != self.m:
            raise SchemaError("f must assign a value to every residue")

    @classmethod
    def indicator(cls, m: int, point: int, shift: int = 1) -> "CyclicSystem":
        vals = tuple(1.0 if i == point % m else 0.0 for i in range(m))
        return cls(m, shift, vals)

    def orbit_values(self, x: int, N: int) -> np.ndarray:
        """f(T^{n^2} x) for n = 1..N."""
        n = np.arange(1, N + 1, dtype=np.int64)
        idx = (x + self.shift * (n * n)) % self.m
        return np.asarray(self.f, dtype=float)[idx]


def ergodic_average(sys: CyclicSystem, x: int, N: int) -> float:
    """A_N f(x) = (1/N) sum_{n<=N} f(T^{n^2} x); exact for integer-valued f."""
    if N < 1:
        raise SchemaError("N >= 1 required")
    return float(sys.orbit_values(x, N).sum() / N)


def ergodic_averages_prefix(sys: CyclicSystem, x: int, N_max: int) -> np.ndarray:
    """A_1 f(x), ..., A_{N_max} f(x) via prefix sums."""
    if N_max < 1:
        raise SchemaError("N_max >= 1 required")
    vals = sys.orbit_values(x, N_max)
    return np.cumsum(vals) / np.arange(1, N_max + 1)


def maximal_function(sys: CyclicSystem, x: int, N_max: int) -> float:
    """sup_{1<=N<=N_max} |A_N f(x)|."""
    return float(np.abs(ergodic_averages_prefix(sys, x, N_max)).max())


def z_lambda(lam: float, N_max: int) -> list[int]:
    """The thinned index set {floor(lam^n)} intersected with [1, N_max]."""
    if lam <= 1.0:
        raise SchemaError("lambda must exceed 1")
    out = []
    n = 1
    while n < 10_000_000:
        v = math.floor(lam ** n)
        if v > N_max:
            break
        if v >= 1 and (not out or v != out[-1]):
            out.append(v)
        n += 1
    return out


@dataclass(frozen=True)
class VariationalReport:
    total: float
    blocks: tuple[float, ...]
    l2_total: float
    l2_blocks: tuple[float, ...]


def variational_sum(sys: CyclicSystem, x: int, lam: float,
                    N_breaks: Sequence[int]) -> VariationalReport:
    """Sum over blocks of sup_{N in [N_j, N_{j+1}] cap Z_lambda} |A_N - A_{N_j}|.

    Also returns the L^2(Z_m) version with the same blocks: per block, the
    pointwise sup is taken at every start x and its L^2 norm accumulated.
    """
    breaks = [int(b) for b in N_breaks]
    if len(breaks) < 2 or any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
        raise SchemaError("breaks must be strictly increasing with at least two entries")
    zset = set(z_lambda(lam, breaks[-1]))
    missing = [b for b in breaks if b not in zset]
    if missing:
        raise SchemaError(f"breaks must come from the lam-thinned index set; bad: {missing}")

    n_max = breaks[-1]
    if sys.m * n_max > 50_000_000:
        raise BudgetError("variation sum over all starts needs an m x N_max "
                          "table that exceeds the memory budget",
                          required=sys.m * n_max)
    prefix_all = np.stack([ergodic_averages_prefix(sys, x0, n_max) for x0 in range(sys.m)])
    blocks = []
    l2_blocks = []
    for a, b in zip(breaks, breaks[1:]):
        window = [n for n in sorted(zset) if a <= n <= b]
        dev = np.abs(prefix_all[:, [n - 1 for n in window]]
                     - prefix_all[:, [a - 1]])
        sup_per_x = dev.max(axis=1)
        blocks.append(float(sup_per_x[x]))
        l2_blocks.append(float(math.sqrt(np.mean(sup_per_x ** 2))))
    return VariationalReport(float(math.fsum(blocks)), tuple(blocks),
                             float(math.fsum(l2_blocks)), tuple(l2_blocks))
