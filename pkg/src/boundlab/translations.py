"""Random-translation covering on finite groups.

The expectation identity E mu(g_1 E u ... u g_N E) = 1 - (1 - mu(E))^N is
checkable exactly by enumerating shift tuples; the searches here provide a
Monte-Carlo witness and a greedy derandomized witness for the same bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iter_product
from typing import Sequence

import numpy as np

from .core import FiniteGroup, IndicatorSet, RandomStream, measure
from .errors import SchemaError


@dataclass(frozen=True)
class CoverResult:
    shifts: tuple[int, ...]
    union_measure: float
    bound: float          # 1 - (1 - mu(E))^N
    achieved: bool        # union_measure >= bound


@dataclass(frozen=True)
class CoverSearchReport:
    best: CoverResult
    empirical_mean: float
    trial_measures: tuple[float, ...]


def _group_of(E: IndicatorSet) -> FiniteGroup:
    if not isinstance(E.carrier, FiniteGroup):
        raise SchemaError("translation covering runs on finite groups")
    return E.carrier


def _translated_masks(E: IndicatorSet) -> list[int]:
    """Bitmask of g+E for every g, for fast unions."""
    group = _group_of(E)
    members = E.member_indices()
    masks = []
    for g in group.elements():
        m = 0
        for e in members:
            m |= 1 << group.op(g, e)
        masks.append(m)
    return masks


def union_measure(E: IndicatorSet, shifts: Sequence[int]) -> float:
    """Exact measure of the union of the translates g_i + E."""
    group = _group_of(E)
    members = E.member_indices()
    covered = set()
    for g in shifts:
        g = int(g)
        if not 0 <= g < group.order:
            raise SchemaError("shift outside group")
        covered.update(group.op(g, e) for e in members)
    return len(covered) / group.order


def expected_union_exact(mu_E: float, N: int) -> float:
    """Closed-form expected union measure for N independent uniform shifts."""
    if not 0.0 <= mu_E <= 1.0:
        raise SchemaError("mu_E must lie in [0,1]")
    if N < 1:
        raise SchemaError("N >= 1 required")
    return 1.0 - (1.0 - mu_E) ** N


def exhaustive_mean_union(E: IndicatorSet, N: int) -> Fraction:
    """Average union measure over ALL |G|^N shift tuples, as an exact rational.

    This is the Fubini computation behind the expectation identity, done by
    brute force; feasible only for small groups.
    """
    group = _group_of(E)
    g = group.order
    if g ** N > 5_000_000:
        raise SchemaError("group too large for exhaustive tuple enumeration")
    masks = _translated_masks(E)
    total = 0
    for tup in iter_product(range(g), repeat=N):
        u = 0
        for i in tup:
            u |= masks[i]
        total += u.bit_count()
    return Fraction(total, (g ** N) * g)


def random_cover_search(E: IndicatorSet, N: int, trials: int,
                        r: RandomStream) -> CoverSearchReport:
    """Best-of-trials random shift tuples plus the empirical mean union measure."""
    if trials < 1:
        raise SchemaError("trials >= 1 required")
    group = _group_of(E)
    g = group.order
    masks = _translated_masks(E)
    mu = measure(E)
    bound = expected_union_exact(mu, N)
    best_val = -1.0
    best_shifts: tuple[int, ...] = ()
    vals = []
    for t in range(trials):
        rs = r.substream(t)
        shifts = tuple(rs.randint(g) for _ in range(N))
        u = 0
        for i in shifts:
            u |= masks[i]
        val = u.bit_count() / g
        vals.append(val)
        if val > best_val:
            best_val = val
            best_shifts = shifts
    mean = math.fsum(vals) / trials
    best = CoverResult(best_shifts, best_val, bound, best_val >= bound)
    return CoverSearchReport(best, mean, tuple(vals))


def greedy_cover(E: IndicatorSet, N: int) -> CoverResult:
    """Pick shifts one at a time, each maximizing newly covered measure.

    Each step covers at least mu(E) of what remains (the average translate
    does), so the greedy union also clears 1 - (1-mu(E))^N.
    """
    group = _group_of(E)
    g = group.order
    masks = _translated_masks(E)
    mu = measure(E)
    bound = expected_union_exact(mu, N)
    covered = 0
    shifts = []
    for _ in range(N):
        best_gain = -1
        best_g = 0
        for cand in range(g):
            gain = (masks[cand] | covered).bit_count() - covered.bit_count()
            if gain > best_gain:
                best_gain = gain
                best_g = cand
        covered |= masks[best_g]
        shifts.append(best_g)
    val = covered.bit_count() / g
    return CoverResult(tuple(shifts), val, bound, val >= bound)


def all_subsets(group: FiniteGroup):
    """Iterate every subset of the group as an IndicatorSet (small groups only)."""
    g = group.order
    if g > 16:
        raise SchemaError("subset enumeration limited to |G| <= 16")
    for bits in range(1 << g):
        mask = np.array([(bits >> i) & 1 for i in range(g)], dtype=bool)
        yield IndicatorSet.from_mask(group, mask)


def coset_space(group: FiniteGroup, subgroup: Sequence[int]):
    """Quotient of the group by the subgroup generated by the given elements.

    Returns (quotient group, lift) where ``lift(coset_index)`` is the sorted
    list of parent elements in that coset. Subsets of the quotient lift to
    coset unions upstairs, which is how covering statements transfer between
    the homogeneous space and the group.
    """
    n = group.order
    gen = {group.identity}
    frontier = list(gen)
    while frontier:
        e = frontier.pop()
        for s in subgroup:
            for cand in (group.op(e, int(s)), group.op(e, group.inverse(int(s)))):
                if cand not in gen:
                    gen.add(cand)
                    frontier.append(cand)
    h = len(gen)
    if n % h != 0:
        raise SchemaError("subgroup closure does not divide the group order")
    coset_of = {}
    reps = []
    for e in range(n):
        if e in coset_of:
            continue
        idx = len(reps)
        reps.append(e)
        for s in gen:
            coset_of[group.op(e, s)] = idx
    table = [[coset_of[group.op(reps[a], reps[b])] for b in range(len(reps))]
             for a in range(len(reps))]

    def lift(coset_index: int) -> list[int]:
        return sorted(e for e, c in coset_of.items() if c == coset_index)

    return QuotientSpace(len(reps), table, lift)


@dataclass(frozen=True)
class QuotientSpace:
    """Coset space of a finite abelian group, with its induced group law."""

    order: int
    op_table: list
    lift: callable

    def op(self, a: int, b: int) -> int:
        return self.op_table[a][b]

    @property
    def identity(self) -> int:
        return 0

    def elements(self) -> range:
        return range(self.order)
