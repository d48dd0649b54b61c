"""Discrete carriers and seeded randomness shared by every experiment.

Continuous tori are modelled by uniform grids with total measure exactly 1,
finite groups stand in for compact groups with Haar measure, and all
randomness flows through a counter-based stream so that any draw is a pure
function of (seed, stream_id, counter).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iter_product
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import SchemaError

MASK64 = (1 << 64) - 1

# Enumerating a procedural set cell-by-cell is only allowed below this size.
PROCEDURAL_ENUM_LIMIT = 1 << 20


def mix64(z: int) -> int:
    """SplitMix64 finalizer; a bijection on 64-bit words."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def counter_hash(seed: int, stream_id: int, counter: int) -> int:
    """Stateless 64-bit hash of the (seed, stream_id, counter) triple."""
    h = mix64((seed & MASK64) ^ 0x243F6A8885A308D3)
    h = mix64(h ^ (stream_id & MASK64) ^ 0x13198A2E03707344)
    h = mix64(h ^ (counter & MASK64) ^ 0xA4093822299F31D0)
    return h


def cell_hash(seed: int, cell: Sequence[int]) -> int:
    """Fold a cell index tuple into a 64-bit value, keyed by seed."""
    h = mix64((seed & MASK64) ^ 0x452821E638D01377)
    for c in cell:
        h = mix64(h ^ ((c & MASK64) + 0x9E3779B97F4A7C15))
    return h


def procedural_member(seed: int, cell: Sequence[int], prob: float) -> bool:
    """Pure membership rule: include the cell with probability ``prob``."""
    if prob <= 0.0:
        return False
    if prob >= 1.0:
        return True
    return cell_hash(seed, cell) < int(prob * 2.0 ** 64)


@dataclass
class RandomStream:
    """Counter-based splittable random stream.

    Every output is a pure function of (seed, stream_id, counter), so
    independent work items keyed by distinct stream ids reproduce exactly
    regardless of evaluation order.
    """

    seed: int
    stream_id: int = 0
    counter: int = 0

    def next_u64(self) -> int:
        v = counter_hash(self.seed, self.stream_id, self.counter)
        self.counter += 1
        return v

    def uniform(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def uniform_vec(self, k: int) -> np.ndarray:
        return np.array([self.uniform() for _ in range(k)])

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via rejection."""
        if n <= 0:
            raise SchemaError("randint needs n >= 1")
        limit = (2 ** 64 // n) * n
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def substream(self, tag: int) -> "RandomStream":
        """Derive an independent stream; counter restarts at zero."""
        return RandomStream(self.seed, mix64(self.stream_id ^ mix64(tag ^ 0xD6E8FEB86659FD93)), 0)

    def numpy_rng(self) -> np.random.Generator:
        """A numpy generator seeded deterministically from this stream's identity."""
        ss = np.random.SeedSequence([self.seed & MASK64, self.stream_id & MASK64])
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class GridTorus:
    """Uniform grid on the d-dimensional unit torus; total measure is 1 exactly."""

    dims: int
    resolution: int

    def __post_init__(self):
        if self.dims < 1 or self.resolution < 1:
            raise SchemaError("GridTorus needs dims >= 1 and resolution >= 1")

    @property
    def n_cells(self) -> int:
        return self.resolution ** self.dims

    @property
    def cell_volume(self) -> float:
        return float(self.resolution) ** (-self.dims)

    def wrap(self, cell: Sequence[int]) -> tuple[int, ...]:
        m = self.resolution
        return tuple(int(c) % m for c in cell)

    def flat(self, cell: Sequence[int]) -> int:
        idx = 0
        m = self.resolution
        for c in cell:
            idx = idx * m + (int(c) % m)
        return idx

    def unflat(self, idx: int) -> tuple[int, ...]:
        m = self.resolution
        out = []
        for _ in range(self.dims):
            out.append(idx % m)
            idx //= m
        return tuple(reversed(out))

    def cell_of_point(self, x: Sequence[float]) -> tuple[int, ...]:
        """Cell containing a point of [0,1)^d (coordinates wrap)."""
        m = self.resolution
        return tuple(int(math.floor((xi % 1.0) * m)) % m for xi in x)

    def snap_shift(self, shift: Sequence[float]) -> tuple[int, ...]:
        """Nearest-cell integer offset for a real shift vector.

        Snapping error is at most 1/(2m) per axis.
        """
        if len(shift) != self.dims:
            raise SchemaError("shift dimension mismatch")
        m = self.resolution
        return tuple(int(round(s * m)) % m for s in shift)


@dataclass(frozen=True)
class FiniteGroup:
    """Finite abelian group (cyclic or product of cyclics) with uniform measure."""

    moduli: tuple[int, ...]

    def __post_init__(self):
        if not self.moduli or any(m < 1 for m in self.moduli):
            raise SchemaError("group moduli must be positive")

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        return cls((n,))

    @classmethod
    def product_of(cls, moduli: Iterable[int]) -> "FiniteGroup":
        return cls(tuple(int(m) for m in moduli))

    @property
    def kind(self) -> str:
        if len(self.moduli) == 1:
            return f"cyclic:{self.moduli[0]}"
        return "product:" + ",".join(str(m) for m in self.moduli)

    @property
    def order(self) -> int:
        out = 1
        for m in self.moduli:
            out *= m
        return out

    @property
    def identity(self) -> int:
        return 0

    def decode(self, idx: int) -> tuple[int, ...]:
        out = []
        for m in reversed(self.moduli):
            out.append(idx % m)
            idx //= m
        return tuple(reversed(out))

    def encode(self, parts: Sequence[int]) -> int:
        idx = 0
        for m, p in zip(self.moduli, parts):
            idx = idx * m + (p % m)
        return idx

    def op(self, a: int, b: int) -> int:
        pa, pb = self.decode(a), self.decode(b)
        return self.encode([x + y for x, y in zip(pa, pb)])

    def inverse(self, a: int) -> int:
        return self.encode([-x for x in self.decode(a)])

    def elements(self) -> range:
        return range(self.order)


Carrier = Union[GridTorus, FiniteGroup]


def _carrier_size(carrier: Carrier) -> int:
    return carrier.n_cells if isinstance(carrier, GridTorus) else carrier.order


class IndicatorSet:
    """Indicator of a subset of a grid torus or finite group.

    Membership is either an explicit bit per cell or a procedural rule
    (seed-keyed hash of the cell index against an inclusion probability).
    Instances are immutable; translation returns a new set.
    """

    def __init__(self, carrier: Carrier, *, mask: np.ndarray | None = None,
                 seed: int | None = None, prob: float | None = None,
                 offset: tuple[int, ...] | None = None):
        self.carrier = carrier
        if mask is not None:
            mask = np.asarray(mask, dtype=bool).reshape(-1)
            if mask.size != _carrier_size(carrier):
                raise SchemaError("mask size does not match carrier")
            self._mask = mask
            self._seed = None
            self._prob = None
            self._offset = None
        else:
            if seed is None or prob is None:
                raise SchemaError("procedural set needs seed and prob")
            if not isinstance(carrier, GridTorus):
                raise SchemaError("procedural sets live on grid tori")
            if not 0.0 <= prob <= 1.0:
                raise SchemaError("inclusion probability must be in [0,1]")
            self._mask = None
            self._seed = seed
            self._prob = float(prob)
            self._offset = tuple(offset) if offset is not None else (0,) * carrier.dims

    # -- constructors ------------------------------------------------------

    @classmethod
    def explicit(cls, carrier: Carrier, members: Iterable) -> "IndicatorSet":
        size = _carrier_size(carrier)
        mask = np.zeros(size, dtype=bool)
        for m in members:
            if isinstance(carrier, GridTorus) and isinstance(m, (tuple, list)):
                mask[carrier.flat(m)] = True
            else:
                mask[int(m) % size] = True
        return cls(carrier, mask=mask)

    @classmethod
    def from_mask(cls, carrier: Carrier, mask: np.ndarray) -> "IndicatorSet":
        return cls(carrier, mask=np.asarray(mask, dtype=bool))

    @classmethod
    def full(cls, carrier: Carrier) -> "IndicatorSet":
        return cls(carrier, mask=np.ones(_carrier_size(carrier), dtype=bool))

    @classmethod
    def empty(cls, carrier: Carrier) -> "IndicatorSet":
        return cls(carrier, mask=np.zeros(_carrier_size(carrier), dtype=bool))

    @classmethod
    def procedural(cls, torus: GridTorus, seed: int, prob: float) -> "IndicatorSet":
        return cls(torus, seed=seed, prob=prob)

    # -- queries -----------------------------------------------------------

    @property
    def is_explicit(self) -> bool:
        return self._mask is not None

    def contains_index(self, idx) -> bool:
        if isinstance(self.carrier, GridTorus) and isinstance(idx, (tuple, list)):
            cell = self.carrier.wrap(idx)
            if self._mask is not None:
                return bool(self._mask[self.carrier.flat(cell)])
            shifted = tuple((c - o) % self.carrier.resolution for c, o in zip(cell, self._offset))
            return procedural_member(self._seed, shifted, self._prob)
        if self._mask is None:
            raise SchemaError("flat index queries on procedural sets need a cell tuple")
        return bool(self._mask[int(idx) % _carrier_size(self.carrier)])

    def contains_point(self, x: Sequence[float]) -> bool:
        if not isinstance(self.carrier, GridTorus):
            raise SchemaError("point queries only make sense on grid tori")
        return self.contains_index(self.carrier.cell_of_point(x))

    def member_count(self) -> int:
        if self._mask is not None:
            return int(self._mask.sum())
        n = self.carrier.n_cells
        if n > PROCEDURAL_ENUM_LIMIT:
            raise SchemaError(
                f"procedural set too large to enumerate ({n} cells); "
                "use estimate_measure instead")
        count = 0
        for cell in iter_product(range(self.carrier.resolution), repeat=self.carrier.dims):
            if self.contains_index(cell):
                count += 1
        return count

    def member_indices(self) -> list[int]:
        if self._mask is None:
            raise SchemaError("member_indices requires an explicit set")
        return [int(i) for i in np.flatnonzero(self._mask)]

    # -- algebra (explicit sets) -------------------------------------------

    def _require_explicit_pair(self, other: "IndicatorSet"):
        if self._mask is None or other._mask is None:
            raise SchemaError("set algebra requires explicit sets")
        if _carrier_size(self.carrier) != _carrier_size(other.carrier):
            raise SchemaError("carrier mismatch")

    def union(self, other: "IndicatorSet") -> "IndicatorSet":
        self._require_explicit_pair(other)
        return IndicatorSet(self.carrier, mask=self._mask | other._mask)

    def intersect(self, other: "IndicatorSet") -> "IndicatorSet":
        self._require_explicit_pair(other)
        return IndicatorSet(self.carrier, mask=self._mask & other._mask)

    def complement(self) -> "IndicatorSet":
        if self._mask is None:
            raise SchemaError("complement requires an explicit set")
        return IndicatorSet(self.carrier, mask=~self._mask)

    # -- translation -------------------------------------------------------

    def translate(self, g) -> "IndicatorSet":
        """Translate by a group element or a real shift vector (snapped)."""
        carrier = self.carrier
        if isinstance(carrier, FiniteGroup):
            g = int(g)
            if not 0 <= g < carrier.order:
                raise SchemaError("shift outside group")
            mask = np.zeros_like(self._mask)
            for e in np.flatnonzero(self._mask):
                mask[carrier.op(g, int(e))] = True
            return IndicatorSet(carrier, mask=mask)
        if isinstance(g, (int, np.integer)):
            if carrier.dims != 1:
                raise SchemaError("integer shifts only on 1-d grids")
            offset = (int(g) % carrier.resolution,)
        else:
            offset = carrier.snap_shift(g)
        if self._mask is not None:
            cube = self._mask.reshape((carrier.resolution,) * carrier.dims)
            cube = np.roll(cube, offset, axis=tuple(range(carrier.dims)))
            return IndicatorSet(carrier, mask=cube.reshape(-1))
        new_off = tuple((a + b) % carrier.resolution for a, b in zip(self._offset, offset))
        return IndicatorSet(carrier, seed=self._seed, prob=self._prob, offset=new_off)


def measure(s: IndicatorSet) -> float:
    """Normalized measure: member cells times cell volume, in [0, 1]."""
    size = _carrier_size(s.carrier)
    return s.member_count() / size


def estimate_measure(s: IndicatorSet, samples: int, r: RandomStream) -> tuple[float, float]:
    """Monte-Carlo density of a (typically procedural) set with its standard error."""
    if samples < 1:
        raise SchemaError("need at least one sample")
    torus = s.carrier
    if not isinstance(torus, GridTorus):
        raise SchemaError("estimate_measure runs on grid tori")
    hits = 0
    for _ in range(samples):
        cell = torus.unflat(r.randint(torus.n_cells))
        if s.contains_index(cell):
            hits += 1
    p = hits / samples
    return p, math.sqrt(max(p * (1 - p), 1e-300) / samples)


def translate_set(s: IndicatorSet, g) -> IndicatorSet:
    """Translate: output membership at x equals input membership at x - g."""
    return s.translate(g)


def sample_uniform(carrier: Carrier, r: RandomStream):
    """Uniform element of a finite group (index) or grid torus (cell tuple)."""
    size = _carrier_size(carrier)
    idx = r.randint(size)
    if isinstance(carrier, GridTorus):
        return carrier.unflat(idx)
    return idx
