"""Block schedules: the combinatorial skeleton shared by all three constructions.

A schedule is a triple (a_1, (b_n), (d_n)) of positive integers with d_{n+1}
always a multiple of d_n.  It determines the level lengths

    a_{n+1} = (b_n * d_n + 1) * a_n,

the level sets A_n = [1, a_n] + a_n*d_n*N, their unions B_n, and the block
densities delta_n = sum_{j<=n} 1/d_j.  Indices are 1-based throughout and all
index arithmetic is arbitrary precision: the a_n grow super-exponentially and
overflow machine words after a handful of levels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

DEFAULT_MAX_LEVEL = 48


class ScheduleError(ValueError):
    """Schedule parameters violate a structural invariant."""


@dataclass(frozen=True)
class IndexInterval:
    """Closed interval [lo, hi] of 1-based integer indices (big-int safe)."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo < 1:
            raise ValueError(f"interval must start at >= 1, got lo={self.lo}")
        if self.hi < self.lo:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> int:
        # not __len__: lengths exceed sys.maxsize at deep levels
        return self.hi - self.lo + 1

    def __contains__(self, j) -> bool:
        return self.lo <= j <= self.hi

    def shifted(self, offset: int) -> "IndexInterval":
        return IndexInterval(self.lo + offset, self.hi + offset)

    def clipped(self, lo: int, hi: int):
        """Intersection with [lo, hi], or None when empty."""
        a, b = max(self.lo, lo), min(self.hi, hi)
        return IndexInterval(a, b) if a <= b else None


@dataclass(frozen=True)
class LevelRule:
    """Per-level positive integer rule: a constant, 2**(n+shift), or an explicit list."""

    kind: str  # "const" | "pow2" | "list"
    value: int = 0
    shift: int = 0
    values: tuple = ()

    @staticmethod
    def const(value: int) -> "LevelRule":
        return LevelRule("const", value=value)

    @staticmethod
    def pow2(shift: int) -> "LevelRule":
        return LevelRule("pow2", shift=shift)

    @staticmethod
    def explicit(values) -> "LevelRule":
        return LevelRule("list", values=tuple(values))

    def __call__(self, n: int) -> int:
        if n < 1:
            raise ValueError("levels are 1-based")
        if self.kind == "const":
            return self.value
        if self.kind == "pow2":
            return 1 << (n + self.shift)
        if self.kind == "list":
            if n > len(self.values):
                raise ScheduleError(f"rule defines only {len(self.values)} levels, asked for {n}")
            return self.values[n - 1]
        raise ScheduleError(f"unknown rule kind {self.kind!r}")

    @property
    def level_cap(self):
        return len(self.values) if self.kind == "list" else None

    def to_json(self) -> dict:
        if self.kind == "const":
            return {"kind": "const", "value": self.value}
        if self.kind == "pow2":
            return {"kind": "pow2", "shift": self.shift}
        return {"kind": "list", "values": list(self.values)}

    @staticmethod
    def from_json(obj: dict) -> "LevelRule":
        kind = obj.get("kind")
        if kind == "const":
            return LevelRule.const(int(obj["value"]))
        if kind == "pow2":
            return LevelRule.pow2(int(obj["shift"]))
        if kind == "list":
            return LevelRule.explicit(int(v) for v in obj["values"])
        raise ScheduleError(f"unknown rule kind {kind!r}")


class BlockSchedule:
    """Immutable block schedule with cached level data.

    Construction validates positivity and the divisibility chain of the d_n.
    Instances are safe for concurrent readers; the internal caches are only
    appended to and every cached value is a pure function of the parameters.
    """

    def __init__(self, a1: int, b_rule: LevelRule, d_rule: LevelRule,
                 max_level: int = DEFAULT_MAX_LEVEL):
        if a1 < 1:
            raise ScheduleError(f"a1 must be a positive integer, got {a1}")
        caps = [c for c in (b_rule.level_cap, d_rule.level_cap, max_level) if c is not None]
        self.max_level = min(caps)
        if self.max_level < 1:
            raise ScheduleError("schedule must define at least one level")
        self.a1 = a1
        self.b_rule = b_rule
        self.d_rule = d_rule
        for n in range(1, self.max_level + 1):
            if b_rule(n) < 1 or d_rule(n) < 1:
                raise ScheduleError(f"b_{n} and d_{n} must be positive")
            if n < self.max_level and d_rule(n + 1) % d_rule(n) != 0:
                raise ScheduleError(f"d_{n+1}={d_rule(n+1)} is not a multiple of d_{n}={d_rule(n)}")
        self._a = [None, a1]  # level-indexed cache of a_n
        self._period_count = {}   # level -> |B_n ∩ [1, a_n d_n]|
        self._initial_count = {}  # level -> |B_{n-1} ∩ [1, a_n]|

    def b(self, n: int) -> int:
        self._check_level(n)
        return self.b_rule(n)

    def d(self, n: int) -> int:
        self._check_level(n)
        return self.d_rule(n)

    def a(self, n: int) -> int:
        """Level length a_n by the recursion a_{n+1} = (b_n d_n + 1) a_n, cached."""
        self._check_level(n)
        while len(self._a) <= n:
            k = len(self._a) - 1
            self._a.append((self.b_rule(k) * self.d_rule(k) + 1) * self._a[k])
        return self._a[n]

    def period(self, n: int) -> int:
        """Repetition period a_n * d_n of level n."""
        return self.a(n) * self.d(n)

    def delta(self, n: int) -> Fraction:
        """Exact block density bound delta_n = sum_{j<=n} 1/d_j."""
        self._check_level(n)
        return sum((Fraction(1, self.d_rule(j)) for j in range(1, n + 1)), Fraction(0))

    def delta_limit(self):
        """sup_n delta_n as an exact rational, when the d-rule has a closed form.

        Returns None for rules whose tail is unknown (explicit lists) and for
        constant rules, whose density sum diverges.
        """
        if self.d_rule.kind == "pow2":
            # sum_{n>=1} 2^-(n+shift) = 2^-shift
            return Fraction(1, 1 << self.d_rule.shift)
        return None

    def _check_level(self, n: int):
        if not 1 <= n <= self.max_level:
            raise ScheduleError(f"level {n} outside [1, {self.max_level}]")

    # --- membership ---------------------------------------------------

    def in_level(self, j: int, n: int) -> bool:
        """True iff j belongs to A_n = [1, a_n] + a_n d_n N."""
        if j < 1:
            raise ValueError("indices are 1-based")
        return (j - 1) % self.period(n) < self.a(n)

    def in_B(self, j: int, n: int) -> bool:
        """True iff j belongs to B_n = union of A_1 .. A_n (B_0 is empty)."""
        return any(self.in_level(j, i) for i in range(1, n + 1))

    def fill_level(self, j: int) -> int:
        """Smallest n with j in A_n: the level at which position j gets fixed."""
        for n in range(1, self.max_level + 1):
            if self.in_level(j, n):
                return n
        raise ScheduleError(f"position {j} not reached within {self.max_level} levels")

    def enclosing_block(self, j: int, n: int):
        """The level-n block containing j, or None when j is not in A_n."""
        per = self.period(n)
        r = (j - 1) % per
        if r >= self.a(n):
            return None
        lo = j - r
        return IndexInterval(lo, lo + self.a(n) - 1)

    def level_blocks(self, n: int, lo: int, hi: int):
        """Yield the level-n blocks whose start lies in [lo, hi], in order."""
        per = self.period(n)
        a_n = self.a(n)
        m = max(0, -(-(lo - 1) // per))  # first m with 1 + m*per >= lo
        start = 1 + m * per
        while start <= hi:
            yield IndexInterval(start, start + a_n - 1)
            start += per

    def maximal_blocks(self, lo: int, hi: int, top: int):
        """Blocks of level <= top starting in [lo, hi] that are not contained in a
        higher block of level <= top.  Sorted by start; block ends may exceed hi."""
        found = []
        for k in range(top, 0, -1):
            for blk in self.level_blocks(k, lo, hi):
                if any(self.in_level(blk.lo, kk) for kk in range(k + 1, top + 1)):
                    continue  # sits inside a larger block
                found.append((blk, k))
        found.sort(key=lambda item: item[0].lo)
        return found

    # --- depth ----------------------------------------------------------

    def depth(self, j: int) -> int:
        """Length of the longest strictly nested chain of blocks around j.

        Chains start at an initial block [1, a_n] and each following block has
        strictly interior endpoints in its predecessor.  Computed by recursive
        descent: enter the highest-level usable repeated block, translate to
        [1, a_k], repeat.
        """
        if j < 1:
            raise ValueError("indices are 1-based")
        d = 1
        cap = self.max_level
        limit = None  # frame length a_k once inside a block; None = initial frame
        while True:
            step = None
            for k in range(cap, 0, -1):
                per = self.period(k)
                if limit is None and j <= per:
                    continue  # block containing j would be the initial one
                if limit is not None and per >= limit:
                    continue
                r = (j - 1) % per
                if r >= self.a(k):
                    continue
                lo = j - r
                if lo <= 1:
                    continue
                if limit is not None and lo + self.a(k) - 1 >= limit:
                    continue  # endpoint not strictly interior
                step = (k, lo)
                break
            if step is None:
                return d
            k, lo = step
            j = j - lo + 1
            limit = self.a(k)
            cap = k - 1
            d += 1

    # --- exact prefix counting -------------------------------------------

    def count_in_B(self, n: int, y: int) -> int:
        """|[1, y] ∩ B_n|, exact, in O(n) big-int operations.

        Uses the period decomposition B_n ∩ [1, a_n d_n] =
        [1, a_n] ∪ (B_{n-1} ∩ (a_n, a_n d_n]) and the a_n d_n-periodicity of B_n.
        """
        if n <= 0 or y <= 0:
            return 0
        per = self.period(n)
        a_n = self.a(n)
        full, r = divmod(y, per)
        if n not in self._period_count:
            self._initial_count[n] = self.count_in_B(n - 1, a_n)
            self._period_count[n] = a_n + self.count_in_B(n - 1, per) - self._initial_count[n]
        if r <= a_n:
            partial = r
        else:
            partial = a_n + self.count_in_B(n - 1, r) - self._initial_count[n]
        return full * self._period_count[n] + partial

    # --- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        return {"a1": self.a1, "b": self.b_rule.to_json(), "d": self.d_rule.to_json()}

    @staticmethod
    def from_json(obj: dict, max_level: int = DEFAULT_MAX_LEVEL) -> "BlockSchedule":
        return BlockSchedule(int(obj["a1"]), LevelRule.from_json(obj["b"]),
                             LevelRule.from_json(obj["d"]), max_level=max_level)

    def __repr__(self):
        return f"BlockSchedule(a1={self.a1}, b={self.b_rule.to_json()}, d={self.d_rule.to_json()})"


# --- structure fact verification -------------------------------------------


@dataclass
class FactCheck:
    name: str
    passed: bool
    checked: int
    counterexample: dict | None = None
    detail: dict = field(default_factory=dict)


@dataclass
class FactsReport:
    horizon: int
    density_factor: int
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> FactCheck:
        return next(c for c in self.checks if c.name == name)


def verify_facts(schedule: BlockSchedule, horizon: int, density_factor: int = 2, *,
                 f4_lengths: int = 5, f4_starts: int = 48) -> FactsReport:
    """Verify the block-structure facts F1, F2 and F4 over [1, horizon].

    F1: every block of level k' >= 2 starts and ends with a block of each level
    k < k'.  F2: disjoint blocks of levels k <= k' are at least (d_k - 1) a_k
    apart.  F4: every sampled interval J with |J| >= a_n d_n / density_factor
    satisfies |J ∩ B_n| / |J| <= density_factor * delta_n (F3 is the asymptotic
    form of F4 and is covered by the same check).  All comparisons are exact.
    """
    levels = [n for n in range(1, schedule.max_level + 1) if schedule.a(n) <= horizon]
    if not levels:
        raise ScheduleError("horizon smaller than a_1")
    top = levels[-1]

    f1 = FactCheck("F1", True, 0)
    f2 = FactCheck("F2", True, 0)
    min_gap = {}
    for kp in range(1, top + 1):
        a_kp = schedule.a(kp)
        for blk in schedule.level_blocks(kp, 1, horizon):
            if blk.hi > horizon:
                continue
            for k in range(1, kp):
                f1.checked += 1
                head = schedule.enclosing_block(blk.lo, k)
                tail = schedule.enclosing_block(blk.hi - schedule.a(k) + 1, k)
                ok = (head is not None and head.lo == blk.lo
                      and tail is not None and tail.lo == blk.hi - schedule.a(k) + 1
                      and tail.hi == blk.hi)
                if not ok and f1.passed:
                    f1.passed = False
                    f1.counterexample = {"level": kp, "block": [blk.lo, blk.hi], "inner_level": k}
            # F2: nearest disjoint level-k blocks on both sides
            for k in range(1, kp + 1):
                per_k = schedule.period(k)
                a_k = schedule.a(k)
                need = (schedule.d(k) - 1) * a_k
                m_right = (blk.hi - 1) // per_k + 1
                lo_right = 1 + m_right * per_k
                gaps = []
                if lo_right + a_k - 1 <= horizon:
                    gaps.append(lo_right - blk.hi - 1)
                m_left = (blk.lo - a_k - 1) // per_k if blk.lo > a_k else -1
                if m_left >= 0:
                    hi_left = m_left * per_k + a_k
                    gaps.append(blk.lo - hi_left - 1)
                for gap in gaps:
                    f2.checked += 1
                    key = (k, kp)
                    if key not in min_gap or gap < min_gap[key]:
                        min_gap[key] = gap
                    if gap < need and f2.passed:
                        f2.passed = False
                        f2.counterexample = {
                            "levels": [k, kp], "block": [blk.lo, blk.hi],
                            "gap": gap, "required": need,
                        }
    f2.detail = {"min_gap_by_levels": {f"{k},{kp}": g for (k, kp), g in sorted(min_gap.items())}}

    f4 = FactCheck("F4", True, 0)
    worst = None  # (density - bound) witness, tracked as exact cross products
    for n in levels:
        per = schedule.period(n)
        delta_n = schedule.delta(n)
        base = -(-per // density_factor)  # ceil(a_n d_n / M)
        for i in range(1, f4_lengths + 1):
            length = base * i
            if length > horizon:
                break
            stride = max(1, (horizon - length) // f4_starts)
            lo = 1
            while lo + length - 1 <= horizon:
                f4.checked += 1
                count = schedule.count_in_B(n, lo + length - 1) - schedule.count_in_B(n, lo - 1)
                # count / length <= M * delta_n, cross-multiplied
                lhs = count * delta_n.denominator
                rhs = density_factor * delta_n.numerator * length
                if worst is None or lhs * worst[1] > worst[0] * rhs:
                    worst = (lhs, rhs, n, lo, length)
                if lhs > rhs and f4.passed:
                    f4.passed = False
                    f4.counterexample = {
                        "level": n, "interval": [lo, lo + length - 1],
                        "count": count, "bound": f"{rhs}/{length * delta_n.denominator}",
                    }
                lo += stride
    if worst is not None:
        f4.detail = {"max_density_ratio": float(worst[0] / worst[1]) if worst[1] else None,
                     "witness": {"level": worst[2], "lo": worst[3], "length": worst[4]}}

    return FactsReport(horizon=horizon, density_factor=density_factor, checks=[f1, f2, f4])
