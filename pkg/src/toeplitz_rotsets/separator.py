"""Plane-separating construction: seven-interval levels with pointwise access.

Each level n splits [1, a_{n+1}] into seven intervals around the two markers
p_n, q_n; positions not already fixed by lower levels receive the interval's
fill symbol (0, 1 or 2).  Level lengths explode (a_2 is already ~7*10^8 in the
reference parameters), so the sequence is never materialized: `evaluate` is a
pure O(depth) function and window statistics come from exact prefix counts.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

from .blocks import BlockSchedule, IndexInterval, LevelRule
from .segment import ParamError

INTERVAL_ORDER = ("I01", "I11", "I12c", "I12", "I02", "I22", "I03")
INTERVAL_FILL = {"I01": 0, "I11": 1, "I12c": 2, "I12": 1, "I02": 0, "I22": 2, "I03": 0}


@dataclass(frozen=True)
class SeparatorParams:
    K: int
    L: int
    schedule: BlockSchedule
    toy_mode: bool
    delta_limit: Fraction | None

    @property
    def a1(self) -> int:
        return self.schedule.a1


def make_separator_params(K: int = 17, L: int = 64, d_shift: int = 5, *,
                          d_rule: LevelRule | None = None, toy_mode: bool = False,
                          max_level: int = 24) -> SeparatorParams:
    """Build parameters with a_1 = b_n = (3L + 4) K and even d_n.

    Outside toy mode this enforces K >= 17, L >= 64, d_n >= 8 (which gives
    a_{n+1} >= 8 a_n b_n) and an exact density limit delta_inf <= 1/32, which
    requires a closed-form d rule.
    """
    if d_rule is None:
        d_rule = LevelRule.pow2(d_shift)
    a1 = (3 * L + 4) * K
    schedule = BlockSchedule(a1, LevelRule.const(a1), d_rule, max_level=max_level)
    for n in range(1, schedule.max_level + 1):
        if schedule.d(n) % 2:
            raise ParamError(f"d_{n}={schedule.d(n)} must be even")
    limit = schedule.delta_limit()
    if not toy_mode:
        if K < 17:
            raise ParamError(f"K={K} violates K >= 17")
        if L < 64:
            raise ParamError(f"L={L} violates L >= 64")
        if schedule.d(1) < 8:
            raise ParamError("d_1 < 8 breaks the level growth bound a_{n+1} >= 8 a_n b_n")
        if limit is None:
            raise ParamError("density limit unknown: use a closed-form d rule or toy mode")
        if limit > Fraction(1, 32):
            raise ParamError(f"delta_inf = {limit} exceeds 1/32")
    return SeparatorParams(K=K, L=L, schedule=schedule, toy_mode=toy_mode, delta_limit=limit)


@dataclass(frozen=True)
class IntervalDecomposition:
    """The seven intervals of one level, with the p/q markers and PQ flags."""

    level: int
    p: int
    q: int
    intervals: tuple  # ((tag, IndexInterval), ...) in positional order
    flags: tuple      # names of violated PQ properties (empty outside toy mode)

    def interval(self, tag: str) -> IndexInterval:
        for t, iv in self.intervals:
            if t == tag:
                return iv
        raise KeyError(tag)

    @property
    def istar(self) -> IndexInterval:
        return IndexInterval(self.interval("I11").lo, self.interval("I12").hi)

    def tag_of(self, j: int) -> str:
        for t, iv in self.intervals:
            if j in iv:
                return t
        raise ValueError(f"{j} outside [1, a_{self.level + 1}]")

    def to_json(self) -> dict:
        return {
            "level": self.level, "p": str(self.p), "q": str(self.q),
            "intervals": [{"tag": t, "lo": str(iv.lo), "hi": str(iv.hi)}
                          for t, iv in self.intervals],
            "flags": list(self.flags),
        }


def _half_period_sum(schedule: BlockSchedule, n: int) -> int:
    # sum_{j<=n} a_j d_j / 2; every a_j d_j is even because d_j is
    return sum(schedule.period(j) for j in range(1, n + 1)) // 2


def decompose(params: SeparatorParams, n: int, check: bool = True) -> IntervalDecomposition:
    """Exact interval decomposition of [1, a_{n+1}] at level n >= 1."""
    sched = params.schedule
    K, L = params.K, params.L
    a_n = sched.a(n)
    d_n = sched.d(n)
    per = a_n * d_n
    half = _half_period_sum(sched, n)
    center = (L + 1) * K * per
    p = center - per + 1 + half
    q = center + per - half - 1
    cuts = [
        ("I01", 1, (L * K * d_n + 1) * a_n),
        ("I11", (L * K * d_n + 1) * a_n + 1, p - 1),
        ("I12c", p, q),
        ("I12", q + 1, (L + 2) * K * d_n * a_n),
        ("I02", (L + 2) * K * d_n * a_n + 1, ((2 * L + 2) * K * d_n + 1) * a_n),
        ("I22", ((2 * L + 2) * K * d_n + 1) * a_n + 1, (2 * L + 4) * K * d_n * a_n),
        ("I03", (2 * L + 4) * K * d_n * a_n + 1, sched.a(n + 1)),
    ]
    try:
        intervals = tuple((tag, IndexInterval(lo, hi)) for tag, lo, hi in cuts)
    except ValueError as exc:
        raise ParamError(f"degenerate decomposition at level {n}: {exc}") from exc
    deco = IntervalDecomposition(level=n, p=p, q=q, intervals=intervals, flags=())
    if check:
        flags = tuple(c.name for c in _pq_checks(params, deco) if not c.passed)
        deco = IntervalDecomposition(level=n, p=p, q=q, intervals=intervals, flags=flags)
    return deco


@dataclass
class PQCheck:
    name: str
    passed: bool
    detail: dict


@dataclass
class PQReport:
    level: int
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> PQCheck:
        return next(c for c in self.checks if c.name == name)


def _marker_distance_ok(schedule: BlockSchedule, x: int, n: int):
    # distance from x to the nearest level-k block must be >= a_k d_k / 4, all k <= n
    worst = None
    for k in range(1, n + 1):
        per_k = schedule.period(k)
        a_k = schedule.a(k)
        r = (x - 1) % per_k
        if r < a_k:
            return False, {"level": k, "inside_block": True}
        dist = min(r - (a_k - 1), per_k - r)
        if 4 * dist < per_k:
            return False, {"level": k, "distance": dist, "required": f"{per_k}/4"}
        if worst is None or 4 * dist * worst[1] < worst[0] * per_k:
            worst = (4 * dist, per_k, k)
    return True, {"tightest_level": worst[2] if worst else None}


def _pq_checks(params: SeparatorParams, deco: IntervalDecomposition) -> list:
    sched = params.schedule
    n = deco.level
    K, L = params.K, params.L
    a_n = sched.a(n)
    d_n = sched.d(n)
    per = a_n * d_n
    checks = []

    # PQ1: the three 0-fill intervals share length (LKd_n + 1) a_n and are
    # flanked by blocks of every level k <= n
    want = (L * K * d_n + 1) * a_n
    ok = True
    detail = {"length": str(want)}
    for tag in ("I01", "I02", "I03"):
        iv = deco.interval(tag)
        if iv.length != want:
            ok, detail = False, {"tag": tag, "length": str(iv.length), "want": str(want)}
            break
        for k in range(1, n + 1):
            head = sched.enclosing_block(iv.lo, k)
            tail = sched.enclosing_block(iv.hi, k)
            if head is None or head.lo != iv.lo or tail is None or tail.hi != iv.hi:
                ok, detail = False, {"tag": tag, "block_level": k}
                break
        if not ok:
            break
    checks.append(PQCheck("PQ1", ok, detail))

    # PQ2: (K-1) a_n d_n <= |I11|, |I12| <= K a_n d_n
    l11 = deco.interval("I11").length
    l12 = deco.interval("I12").length
    ok = all((K - 1) * per <= ln <= K * per for ln in (l11, l12))
    checks.append(PQCheck("PQ2", ok, {"I11": str(l11), "I12": str(l12)}))

    # PQ3: a_n d_n / 2 <= |I12c| <= a_n d_n
    lc = deco.interval("I12c").length
    ok = per <= 2 * lc and lc <= per
    checks.append(PQCheck("PQ3", ok, {"I12c": str(lc)}))

    # PQ4: I12c is concentric around a single level-n block: exactly one block
    # inside, midpoint on the period grid, side distances equal up to the
    # block's own extent (the exact structural offset is a_n + 1)
    m_lo = -(-(deco.p - 1) // per)
    m_hi = (deco.q - a_n) // per
    blocks_inside = m_hi - m_lo + 1
    ok = blocks_inside == 1 and (deco.p + deco.q) % 2 == 0
    detail = {"blocks_inside": blocks_inside}
    if ok:
        mid = (deco.p + deco.q) // 2
        dist_left = (1 + m_lo * per) - deco.p
        dist_right = deco.q - (m_lo * per + a_n)
        ok = mid % per == 0 and abs(dist_left - dist_right) <= a_n + 1
        detail.update({"dist_left": str(dist_left), "dist_right": str(dist_right)})
    checks.append(PQCheck("PQ4", ok, detail))

    # PQ5: p and q keep distance >= a_k d_k / 4 from every level-k block, k <= n
    ok_p, dp = _marker_distance_ok(sched, deco.p, n)
    ok_q, dq = _marker_distance_ok(sched, deco.q, n)
    checks.append(PQCheck("PQ5", ok_p and ok_q, {"p": dp, "q": dq}))

    # PQ6: |I*| = |I22| = (2Kd_n - 1) a_n
    want = (2 * K * d_n - 1) * a_n
    listar = deco.istar.length
    l22 = deco.interval("I22").length
    checks.append(PQCheck("PQ6", listar == want and l22 == want,
                          {"Istar": str(listar), "I22": str(l22), "want": str(want)}))
    return checks


def verify_pq(params: SeparatorParams, n: int) -> PQReport:
    """Exact big-integer verification of the six decomposition properties."""
    deco = decompose(params, n, check=False)
    return PQReport(level=n, checks=_pq_checks(params, deco))


class SeparatorSequence:
    """Pointwise-evaluable separator sequence with exact prefix counts.

    evaluate(j) reduces j into [1, a_n] at its fill level and reads off the
    interval symbol; prefix_counts(m) returns the exact numbers of 1s and 2s in
    [1, m] in O(level^2) big-integer operations, which makes window averages
    over astronomically long ranges cheap.
    """

    construction = "separator"
    horizon = None  # pointwise access is unbounded (within schedule.max_level)

    def __init__(self, params: SeparatorParams):
        self.params = params
        self.schedule = params.schedule
        self._deco = {}
        self._lookup = {}       # level -> (los, fills) for bisect classification
        self._tn = {}           # level -> counts over [1, a_n]
        self._period_content = {}
        self._initial_content = {}

    def decomposition(self, n: int) -> IntervalDecomposition:
        if n not in self._deco:
            self._deco[n] = decompose(self.params, n)
        return self._deco[n]

    def _level_lookup(self, n: int):
        if n not in self._lookup:
            deco = self.decomposition(n)
            los = [iv.lo for _, iv in deco.intervals]
            fills = [INTERVAL_FILL[t] for t, _ in deco.intervals]
            tags = [t for t, _ in deco.intervals]
            self._lookup[n] = (los, fills, tags)
        return self._lookup[n]

    def classify(self, j: int, n: int) -> str:
        """Tag of the level-n interval containing j in [1, a_{n+1}]."""
        if not 1 <= j <= self.schedule.a(n + 1):
            raise ValueError(f"{j} outside [1, a_{n + 1}]")
        los, _, tags = self._level_lookup(n)
        return tags[bisect_right(los, j) - 1]

    def fill_level(self, j: int) -> int:
        return self.schedule.fill_level(j)

    def evaluate(self, j: int) -> int:
        if j < 1:
            raise ValueError("indices are 1-based")
        sched = self.schedule
        n = sched.fill_level(j)
        if n == 1:
            return 0  # base convention: [1, a_1] is all 0s
        r = (j - 1) % sched.period(n) + 1
        los, fills, _ = self._level_lookup(n - 1)
        return fills[bisect_right(los, r) - 1]

    def values(self, lo: int, hi: int):
        for j in range(lo, hi + 1):
            yield self.evaluate(j)

    # --- exact counting ------------------------------------------------

    def level_counts(self, n: int):
        """(#1s, #2s) over [1, a_n], exact."""
        if n not in self._tn:
            self._tn[n] = self.prefix_counts(self.schedule.a(n))
        return self._tn[n]

    def _bsum(self, n: int, y: int):
        """(#1s, #2s) over B_n ∩ [1, y]."""
        if n <= 0 or y <= 0:
            return (0, 0)
        sched = self.schedule
        per = sched.period(n)
        a_n = sched.a(n)
        full, r = divmod(y, per)
        if n not in self._period_content:
            t1, t2 = self.level_counts(n)
            i1, i2 = self._bsum(n - 1, a_n)
            self._initial_content[n] = (i1, i2)
            p1, p2 = self._bsum(n - 1, per)
            self._period_content[n] = (t1 + p1 - i1, t2 + p2 - i2)
        f1, f2 = self._period_content[n]
        if r <= a_n:
            q1, q2 = self.prefix_counts(r)
        else:
            t1, t2 = self.level_counts(n)
            i1, i2 = self._initial_content[n]
            b1, b2 = self._bsum(n - 1, r)
            q1, q2 = t1 + b1 - i1, t2 + b2 - i2
        return (full * f1 + q1, full * f2 + q2)

    def prefix_counts(self, m: int):
        """(#1s, #2s) over [1, m], exact for any m within the schedule's levels."""
        sched = self.schedule
        if m <= 0:
            return (0, 0)
        if m <= sched.a(1):
            return (0, 0)
        n = 1
        while sched.a(n + 1) < m:
            n += 1
        count_b = sched.count_in_B
        c1 = c2 = 0
        for tag, iv in self.decomposition(n).intervals:
            if iv.lo > m:
                break
            hi = min(iv.hi, m)
            occ = count_b(n, hi) - count_b(n, iv.lo - 1)
            b1_hi, b2_hi = self._bsum(n, hi)
            b1_lo, b2_lo = self._bsum(n, iv.lo - 1)
            c1 += b1_hi - b1_lo
            c2 += b2_hi - b2_lo
            free = (hi - iv.lo + 1) - occ
            fill = INTERVAL_FILL[tag]
            if fill == 1:
                c1 += free
            elif fill == 2:
                c2 += free
        return (c1, c2)

    def counts(self, lo: int, hi: int):
        h1, h2 = self.prefix_counts(hi)
        l1, l2 = self.prefix_counts(lo - 1)
        return (h1 - l1, h2 - l2)
