"""Interior construction: every level average hits a prescribed grid target.

Targets rho_n live strictly inside the shrunken simplex
Delta_delta = {s v_1 + t v_2 : s, t > delta, s + t < 1 - delta} and have both
coordinates on the 1/a_n grid, so each level can be filled to meet its target
exactly.  Free positions are shared between the needed extra 1s, 2s and 0s by
even interleaving; inherited block content stays untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .blocks import BlockSchedule, LevelRule
from .segment import ParamError
from .sequences import MATERIALIZE_CAP, MaterializedSequence

# plastic-constant Kronecker pair (1/rho, 1/rho^2), fixed rational truncations;
# the classic golden pair (1/phi, 1/phi^2) is useless here: 1/phi + 1/phi^2 = 1
# makes all its 2-d points collinear
KRONECKER_X = Fraction(7548776662466927, 10 ** 16)
KRONECKER_Y = Fraction(5698402909980531, 10 ** 16)


@dataclass(frozen=True)
class InteriorParams:
    schedule: BlockSchedule
    delta: Fraction
    seed: int

    def in_target_region(self, s, t) -> bool:
        """Strict membership of (s, t) in Delta_delta."""
        d = self.delta
        return s > d and t > d and s + t < 1 - d


def make_interior_params(a1: int = 20, d_shift: int = 4, seed: int = 0,
                         max_level: int = 32) -> InteriorParams:
    """Schedule with b_n = 1, d_n = 2^(n + d_shift) and exact delta = 2^-d_shift < 1/10."""
    schedule = BlockSchedule(a1, LevelRule.const(1), LevelRule.pow2(d_shift),
                             max_level=max_level)
    delta = schedule.delta_limit()
    if delta >= Fraction(1, 10):
        raise ParamError(f"delta_inf = {delta} violates delta < 1/10")
    params = InteriorParams(schedule=schedule, delta=delta, seed=seed)
    if not any(params.in_target_region(Fraction(c1, a1), Fraction(c2, a1))
               for c1 in range(1, a1) for c2 in range(1, a1 - c1 + 1)):
        raise ParamError(f"no grid point of resolution 1/{a1} inside the target region")
    return params


@dataclass(frozen=True)
class TargetVector:
    level: int
    rho: tuple           # (Fraction, Fraction), both multiples of 1/a_n
    counts: tuple        # (c0, c1, c2) summing to a_n
    snapped: bool
    raw_point: tuple     # the low-discrepancy point before grid snapping

    @property
    def c1(self) -> int:
        return self.counts[1]

    @property
    def c2(self) -> int:
        return self.counts[2]

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "rho": [f"{c.numerator}/{c.denominator}" for c in self.rho],
            "counts": list(self.counts),
            "snapped": self.snapped,
            "raw_point": [f"{c.numerator}/{c.denominator}" for c in self.raw_point],
        }


def _round_half_up(x: Fraction) -> int:
    return (2 * x.numerator + x.denominator) // (2 * x.denominator)


def low_discrepancy_point(params: InteriorParams, n: int):
    """The n-th accepted Kronecker point inside the target region (exact rationals)."""
    d = params.delta
    width = 1 - 3 * d
    k = params.seed + 13 * n
    while True:
        k += 1
        u1 = (k * KRONECKER_X) % 1
        u2 = (k * KRONECKER_Y) % 1
        s = d + u1 * width
        t = d + u2 * width
        if params.in_target_region(s, t):
            return s, t


def next_target(params: InteriorParams, n: int, existing_counts) -> TargetVector:
    """Pick rho_n: the grid point nearest the level's low-discrepancy point,
    moved (if needed) to the nearest achievable point given the counts already
    fixed by lower levels.  Ties in the L1 count distance resolve toward
    smaller c1, then smaller c2.
    """
    a_n = params.schedule.a(n)
    e0, e1, e2 = existing_counts
    free = a_n - e0 - e1 - e2
    if free < 0:
        raise ValueError("existing counts exceed the level length")
    s, t = low_discrepancy_point(params, n)
    c1_0 = _round_half_up(s * a_n)
    c2_0 = _round_half_up(t * a_n)

    def achievable(c1, c2):
        if c1 < e1 or c2 < e2 or (c1 - e1) + (c2 - e2) > free:
            return False
        return params.in_target_region(Fraction(c1, a_n), Fraction(c2, a_n))

    choice = None
    for radius in range(0, 3 * a_n + 1):
        cands = []
        for dx in range(-radius, radius + 1):
            rem = radius - abs(dx)
            for dy in ({rem, -rem} if rem else {0}):
                cands.append((c1_0 + dx, c2_0 + dy))
        for c1, c2 in sorted(cands):
            if achievable(c1, c2):
                choice = (c1, c2)
                break
        if choice:
            break
    if choice is None:
        raise ParamError(f"no achievable target at level {n}")
    c1, c2 = choice
    return TargetVector(
        level=n,
        rho=(Fraction(c1, a_n), Fraction(c2, a_n)),
        counts=(a_n - c1 - c2, c1, c2),
        snapped=(c1, c2) != (c1_0, c2_0),
        raw_point=(s, t),
    )


def _interleave(add0: int, add1: int, add2: int):
    """Yield add0 zeros, add1 ones and add2 twos, evenly interleaved."""
    total = add0 + add1 + add2
    rest = total - add1
    ri = 0
    for i in range(total):
        if (i + 1) * add1 // total > i * add1 // total:
            yield 1
        else:
            if rest and (ri + 1) * add2 // rest > ri * add2 // rest:
                yield 2
            else:
                yield 0
            ri += 1


class InteriorSequence(MaterializedSequence):
    """Materialized interior sequence together with its level targets."""

    construction = "interior"

    def __init__(self, params: InteriorParams, levels=None, cap: int = MATERIALIZE_CAP,
                 targets=None):
        sched = params.schedule
        top = 0
        for n in range(1, sched.max_level + 1):
            if sched.a(n) > cap or (levels is not None and n > levels):
                break
            top = n
        if top == 0:
            raise ParamError("a_1 exceeds the materialization cap")
        if levels is not None and top < levels:
            raise ParamError(f"level {levels} needs a_{levels} = {sched.a(levels)} > cap {cap}")

        data = bytearray(sched.a(top))
        chosen = []
        level_counts = {}  # level -> (c1, c2) over [1, a_n]
        for n in range(1, top + 1):
            a_n = sched.a(n)
            start = sched.a(n - 1) + 1 if n > 1 else 1
            blocks = sched.maximal_blocks(start, a_n, n - 1) if n > 1 else []
            occ = sched.a(n - 1) if n > 1 else 0
            e1, e2 = level_counts.get(n - 1, (0, 0))
            for blk, k in blocks:
                occ += blk.length
                b1, b2 = level_counts[k]
                e1 += b1
                e2 += b2
            free = a_n - occ
            # feasibility from the density bound: free >= (1 - delta_{n-1}) a_n
            if n > 1:
                dprev = sched.delta(n - 1)
                if free * dprev.denominator < (dprev.denominator - dprev.numerator) * a_n:
                    raise ParamError(f"level {n} leaves too few free positions")
            if targets is not None and n <= len(targets):
                tv = targets[n - 1]
                if tv.counts[1] < e1 or tv.counts[2] < e2 or \
                        (tv.counts[1] - e1) + (tv.counts[2] - e2) > free:
                    raise ParamError(f"injected target at level {n} is not achievable")
            else:
                tv = next_target(params, n, (occ - e1 - e2, e1, e2))
            fill = _interleave(free - (tv.c1 - e1) - (tv.c2 - e2), tv.c1 - e1, tv.c2 - e2)
            pos = start
            for blk, k in blocks:
                for j in range(pos, blk.lo):
                    data[j - 1] = next(fill)
                data[blk.lo - 1:blk.hi] = data[0:blk.length]
                pos = blk.hi + 1
            for j in range(pos, a_n + 1):
                data[j - 1] = next(fill)
            level_counts[n] = (tv.c1, tv.c2)
            chosen.append(tv)

        super().__init__(sched, data)
        self.params = params
        self.targets = chosen
        self.level_counts = level_counts
        self.top_level = top


def generate_interior(a1=20, d_shift=4, levels=None, seed=0,
                      cap: int = MATERIALIZE_CAP) -> InteriorSequence:
    return InteriorSequence(make_interior_params(a1, d_shift, seed), levels=levels, cap=cap)
