"""Line-segment construction: greedy Toeplitz filling with a bounded drift walk.

Given an admissible direction v, the sequence is built level by level.  New
positions get symbol 0 or the level's alternating symbol (1 on odd levels, 2 on
even ones), chosen greedily so that the projected drift

    D(1, j) = <sum_{i<=j} v_{omega(i)}, v/|v|> - j * |v|

stays inside [0, M] away from repeated blocks and inside [-M, M] on the K-step
run-up before each repeated block, landing so the block's own drift keeps the
walk in range.  All comparisons are exact: D(1, j) * |v| is a rational with a
fixed denominator, so the walk is tracked as a scaled integer.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .blocks import BlockSchedule, LevelRule
from .sequences import MaterializedSequence


class ParamError(ValueError):
    """Construction parameters violate an admissibility condition."""


class GenerationError(RuntimeError):
    """The greedy filling ran out of feasible choices (invalid parameters)."""


@dataclass(frozen=True)
class SegmentParams:
    """Derived constants for a direction v = (vx, vy).

    norm_sq is |v|^2; scale clears every denominator so the drift walk
    D(1, j) * |v| * scale is an integer; corridor is M * |v| * scale.
    """

    v: tuple
    norm_sq: Fraction
    vmax: Fraction
    t: int
    a1: int
    K: int
    delta: Fraction
    schedule: BlockSchedule
    scale: int
    inc: tuple
    corridor: int

    @property
    def alpha_sq(self) -> Fraction:
        return self.v[0] ** 2 / self.norm_sq

    @property
    def beta_sq(self) -> Fraction:
        return self.v[1] ** 2 / self.norm_sq

    @property
    def m_sq(self) -> Fraction:
        """M^2 where M = |v| + max(alpha, beta)."""
        return (self.norm_sq + self.vmax) ** 2 / self.norm_sq

    @property
    def norm(self) -> float:
        return math.sqrt(self.norm_sq)

    @property
    def m_value(self) -> float:
        return math.sqrt(self.m_sq)

    def displacement_from_scaled(self, scaled: int) -> float:
        """Convert a scaled walk value to the real drift D."""
        return scaled / (self.scale * self.norm)


def derive_segment_params(v, a1_override=None, max_level=48) -> SegmentParams:
    """Validate v and derive (t, a1, K, schedule) plus the exact walk constants.

    v must lie in the open simplex with |v| <= min(alpha, beta), equivalently
    |v|^2 <= min(vx, vy).  t is the smallest integer with 2^-t <= |v| /
    (10 max(alpha, beta)) and a1 the smallest integer >= 2M/|v| + 1 unless
    overridden upward.
    """
    vx, vy = (Fraction(c) for c in v)
    if not (vx > 0 and vy > 0 and vx + vy < 1):
        raise ParamError(f"v={v} is not in the open simplex spanned by (0,0),(1,0),(0,1)")
    s = vx * vx + vy * vy
    if s > min(vx, vy):
        raise ParamError(f"v={v} fails |v| <= min(alpha, beta) (|v|^2={s} > min coord)")
    vmax = max(vx, vy)
    dens_bound = s / (10 * vmax)  # equals |v| / (10 max(alpha, beta))
    t = 0
    while Fraction(1, 1 << t) > dens_bound:
        t += 1
    a_min = 2 * (s + vmax) / s + 1
    a1 = -(-a_min.numerator // a_min.denominator)
    if a1_override is not None:
        if a1_override < a1:
            raise ParamError(f"a1 override {a1_override} below the required minimum {a1}")
        a1 = a1_override
    schedule = BlockSchedule(a1, LevelRule.const(1), LevelRule.pow2(t), max_level=max_level)
    scale = math.lcm(s.denominator, vx.denominator, vy.denominator)
    inc = (int(-s * scale), int((vx - s) * scale), int((vy - s) * scale))
    corridor = int((s + vmax) * scale)
    return SegmentParams(v=(vx, vy), norm_sq=s, vmax=vmax, t=t, a1=a1, K=a1 - 1,
                         delta=dens_bound, schedule=schedule, scale=scale,
                         inc=inc, corridor=corridor)


def level_symbol(n: int) -> int:
    """The non-zero symbol used when filling level n: 1 on odd, 2 on even levels."""
    return 1 if n % 2 == 1 else 2


def _reachable(y, r, tlo, thi, inc0, step):
    # can r further steps (each inc0 or inc0+step) land in [tlo, thi]?
    lowest = y + r * inc0
    c_lo = -((lowest - tlo) // step)
    c_hi = (thi - lowest) // step
    if c_lo < 0:
        c_lo = 0
    if c_hi > r:
        c_hi = r
    return c_lo <= c_hi


def _rule2(data, lo, hi, x, iota, params):
    # free run: keep the walk in [0, corridor], preferring 0
    inc0 = params.inc[0]
    inci = params.inc[iota]
    top = params.corridor
    for j in range(lo, hi + 1):
        y = x + inc0
        if y >= 0:
            x = y  # data preset to 0
        else:
            x += inci
            if x > top:
                raise GenerationError(f"free run left [0, M] at position {j}")
            data[j - 1] = iota
    return x


def _rule3(data, lo, hi, run_end, x, tlo, thi, iota, params):
    # run-up before a repeated block: stay in [-corridor, corridor] and land in
    # [tlo, thi]; always take the smallest feasible value
    inc0 = params.inc[0]
    inci = params.inc[iota]
    step = inci - inc0
    bot = -params.corridor
    top = params.corridor
    forced = 0
    for j in range(lo, hi + 1):
        r = run_end - j
        y = x + inc0
        if y >= bot and _reachable(y, r, tlo, thi, inc0, step):
            x = y
        else:
            y = x + inci
            if y > top or not _reachable(y, r, tlo, thi, inc0, step):
                raise GenerationError(f"run-up infeasible at position {j}")
            x = y
            data[j - 1] = iota
            forced += 1
    return x, forced


def _generate_prefix(params: SegmentParams, horizon: int):
    sched = params.schedule
    K = params.K
    data = bytearray(horizon)
    ends = {}  # level -> scaled walk value at a_n
    forced = 0

    lim = min(sched.a(1), horizon)
    x = _rule2(data, 1, lim, 0, 1, params)
    if lim < sched.a(1):
        return data, ends, forced
    ends[1] = x

    n = 2
    while n <= sched.max_level and sched.a(n - 1) < horizon:
        a_prev = sched.a(n - 1)
        a_n = sched.a(n)
        lim = min(a_n, horizon)
        iota = level_symbol(n)
        x = ends[n - 1]
        pos = a_prev + 1
        # blocks starting within K past the limit still own run-up positions <= lim
        for blk, k in sched.maximal_blocks(a_prev + 1, lim + K, n - 1):
            run_start = blk.lo - K
            if run_start < pos:
                raise GenerationError("blocks too close: run-up would overlap")
            r2_hi = min(run_start - 1, lim)
            if r2_hi >= pos:
                x = _rule2(data, pos, r2_hi, x, iota, params)
                pos = r2_hi + 1
            if run_start > lim:
                pos = lim + 1
                break
            r3_hi = min(blk.lo - 1, lim)
            x, nf = _rule3(data, run_start, r3_hi, blk.lo - 1, x,
                           -ends[k], params.corridor - ends[k], iota, params)
            forced += nf
            pos = r3_hi + 1
            if r3_hi < blk.lo - 1:
                break
            chunk = min(blk.hi, lim) - blk.lo + 1
            data[blk.lo - 1: blk.lo - 1 + chunk] = data[0:chunk]
            pos = blk.lo + chunk
            if chunk < blk.length:
                break
            x += ends[k]
        if pos <= lim:
            x = _rule2(data, pos, lim, x, iota, params)
            pos = lim + 1
        if lim == a_n:
            if not 0 <= x <= params.corridor:
                raise GenerationError(f"level {n} ended outside [0, M]")
            ends[n] = x
        n += 1
    return data, ends, forced


class SegmentSequence(MaterializedSequence):
    """Materialized prefix of the line-segment sequence for one direction v."""

    construction = "segment"

    def __init__(self, params: SegmentParams, horizon: int):
        data, ends, forced = _generate_prefix(params, horizon)
        super().__init__(params.schedule, data)
        self.params = params
        self.level_ends = ends
        self.forced_symbol_steps = forced


def generate_segment(v, horizon, a1_override=None) -> SegmentSequence:
    return SegmentSequence(derive_segment_params(v, a1_override=a1_override), horizon)


# --- exact drift queries ----------------------------------------------------


def displacement_scaled(params: SegmentParams, seq, l: int, j: int) -> Fraction:
    """D(l, j) * |v| as an exact rational (0 for the empty range l = j + 1)."""
    if j < l - 1:
        raise ValueError("need l <= j + 1")
    if j == l - 1:
        return Fraction(0)
    c1, c2 = seq.counts(l, j)
    vx, vy = params.v
    return c1 * vx + c2 * vy - (j - l + 1) * params.norm_sq


def displacement(params: SegmentParams, seq, l: int, j: int) -> float:
    """The drift D(l, j) as a float; exact comparisons should use the scaled form."""
    return float(displacement_scaled(params, seq, l, j)) / params.norm


@dataclass
class DisplacementReport:
    level: int
    lo: int
    hi: int
    window: int
    pairs_checked: int
    exhaustive: bool
    stride: int
    max_abs_scaled: int
    max_pair: tuple
    passed: bool
    bound_float: float
    max_abs_float: float


def check_displacement_bound(params: SegmentParams, seq, n: int, *, lo: int = 1,
                             hi: int | None = None, stride: int = 16,
                             exhaustive_limit: int = 100_000) -> DisplacementReport:
    """Scan |D(i, j)| over pairs with 0 < j - i <= a_n and test it against 2nM + 1.

    Exhaustive over the scan range when it holds at most `exhaustive_limit`
    positions, otherwise every stride-th right endpoint is checked (all left
    endpoints are still covered through running window extrema).  The bound
    comparison is exact; floats are attached for reporting only.
    """
    sched = params.schedule
    if hi is None:
        hi = min(seq.horizon, sched.a(min(n + 1, sched.max_level)))
    window = sched.a(n)
    inc = params.inc
    total = hi - lo + 1
    stride_eff = 1 if total <= exhaustive_limit else max(1, stride)

    rvals = [0] * (total + 1)
    x = 0
    for idx, sym in enumerate(seq.values(lo, hi), start=1):
        x += inc[sym]
        rvals[idx] = x

    maxdq: deque = deque()
    mindq: deque = deque()
    best = -1
    best_pair = (0, 0)
    pairs = 0
    for jm in range(2, total + 1):
        enter = jm - 2
        while maxdq and rvals[maxdq[-1]] <= rvals[enter]:
            maxdq.pop()
        maxdq.append(enter)
        while mindq and rvals[mindq[-1]] >= rvals[enter]:
            mindq.pop()
        mindq.append(enter)
        floor_idx = jm - window - 1
        while maxdq[0] < floor_idx:
            maxdq.popleft()
        while mindq[0] < floor_idx:
            mindq.popleft()
        if stride_eff > 1 and jm % stride_eff:
            continue
        pairs += jm - 1 - max(floor_idx, 0)
        up = rvals[jm] - rvals[mindq[0]]
        dn = rvals[maxdq[0]] - rvals[jm]
        for diff, im1 in ((up, mindq[0]), (dn, maxdq[0])):
            if diff > best:
                best = diff
                best_pair = (lo + im1, lo - 1 + jm)

    # |D| <= 2nM + 1  <=>  |scaled| <= 2n * corridor + sqrt(norm_sq) * scale
    rational_part = 2 * n * params.corridor
    rem = best - rational_part
    s_scaled_sq = int(params.norm_sq * params.scale * params.scale)
    passed = rem <= 0 or rem * rem <= s_scaled_sq
    bound_float = 2 * n * params.m_value + 1
    return DisplacementReport(
        level=n, lo=lo, hi=hi, window=window, pairs_checked=pairs,
        exhaustive=(stride_eff == 1), stride=stride_eff,
        max_abs_scaled=best, max_pair=best_pair, passed=passed,
        bound_float=bound_float,
        max_abs_float=params.displacement_from_scaled(best),
    )


@dataclass
class FrequencyReport:
    level: int
    freq1: Fraction
    freq2: Fraction
    expected_dominant: int
    dominant_passed: bool
    minor_passed: bool
    minor_bound: Fraction


def endpoint_frequencies(seq, n: int):
    """Exact symbol-1 and symbol-2 frequencies on [1, a_n]."""
    a_n = seq.schedule.a(n)
    c1, c2 = seq.counts(1, a_n)
    return Fraction(c1, a_n), Fraction(c2, a_n)


def frequency_report(params: SegmentParams, seq, n: int) -> FrequencyReport:
    """Check the endpoint-frequency expectations on [1, a_n].

    The level's dominant symbol should exceed 9 * delta in frequency; the other
    non-zero symbol is confined to inherited lower-level blocks, so its
    frequency is bounded by the exact density of B_{n-1} on [1, a_n].
    """
    f1, f2 = endpoint_frequencies(seq, n)
    dom = level_symbol(n)
    dom_freq, minor_freq = (f1, f2) if dom == 1 else (f2, f1)
    a_n = params.schedule.a(n)
    minor_bound = Fraction(params.schedule.count_in_B(n - 1, a_n), a_n)
    return FrequencyReport(
        level=n, freq1=f1, freq2=f2, expected_dominant=dom,
        dominant_passed=dom_freq > 9 * params.delta,
        minor_passed=minor_freq <= minor_bound,
        minor_bound=minor_bound,
    )
