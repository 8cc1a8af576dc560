"""Symbolic rotation-vector calculus over {0, 1, 2} sequences.

Symbols displace by v_0 = (0,0), v_1 = (1,0), v_2 = (0,1); a window J gets the
exact rational average rho(J) = psi(J) / |J|.  Everything here is exact: window
clouds and sweep paths carry integer displacement counts, region membership is
decided through rational squared distances, and winding numbers come from
signed crossing counts without any floating point.
"""

from __future__ import annotations

import random
from array import array
from dataclasses import dataclass, field
from fractions import Fraction

from .blocks import IndexInterval

DISPLACEMENTS = ((0, 0), (1, 0), (0, 1))
V0 = (Fraction(0), Fraction(0))
V1 = (Fraction(1), Fraction(0))
V2 = (Fraction(0), Fraction(1))
S_RADIUS = Fraction(1, 8)


class BudgetExceeded(RuntimeError):
    """An analysis exceeded its evaluation budget; .partial holds what was done."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


def _as_symbols(word):
    if isinstance(word, str):
        return [int(ch) for ch in word]
    return list(word)


def psi(word):
    """Total displacement of a finite word: (number of 1s, number of 2s)."""
    c1 = c2 = 0
    for s in _as_symbols(word):
        if s == 1:
            c1 += 1
        elif s == 2:
            c2 += 1
        elif s != 0:
            raise ValueError(f"symbol {s!r} outside {{0,1,2}}")
    return (c1, c2)


@dataclass(frozen=True)
class RotationVector:
    """Exact rational window average; always inside the closed simplex."""

    x: Fraction
    y: Fraction

    def __post_init__(self):
        if self.x < 0 or self.y < 0 or self.x + self.y > 1:
            raise ValueError(f"({self.x}, {self.y}) outside the displacement simplex")

    def as_floats(self):
        return (float(self.x), float(self.y))


def _normalize_range(j, hi=None):
    if hi is not None:
        return int(j), int(hi)
    if isinstance(j, IndexInterval):
        return j.lo, j.hi
    lo, hi = j
    return int(lo), int(hi)


def rho(seq, j, hi=None, *, method="auto") -> RotationVector:
    """Exact average rho(J) = psi(J)/|J| over J = [lo, hi].

    method="auto" uses the sequence's fastest exact path (prefix counts or the
    materialized buffer); method="stream" walks symbol by symbol and serves as
    the independent oracle in tests.
    """
    lo, hi = _normalize_range(j, hi)
    if hi < lo:
        raise ValueError("empty window")
    n = hi - lo + 1
    if method == "stream":
        c1 = c2 = 0
        for s in seq.values(lo, hi):
            if s == 1:
                c1 += 1
            elif s == 2:
                c2 += 1
    elif method == "auto":
        c1, c2 = seq.counts(lo, hi)
    else:
        raise ValueError(f"unknown method {method!r}")
    return RotationVector(Fraction(c1, n), Fraction(c2, n))


def rho_word(word) -> RotationVector:
    syms = _as_symbols(word)
    c1, c2 = psi(syms)
    return RotationVector(Fraction(c1, len(syms)), Fraction(c2, len(syms)))


# --- window clouds -----------------------------------------------------------


@dataclass
class RotationCloud:
    """Strided window averages, stored as integer displacement counts."""

    window: int
    stride: int
    lo: int
    hi: int
    starts: list
    counts: list  # (c1, c2) per start
    truncated: bool = False

    def vectors(self):
        for start, (c1, c2) in zip(self.starts, self.counts):
            yield start, RotationVector(Fraction(c1, self.window), Fraction(c2, self.window))

    def rotation_vectors(self):
        return [v for _, v in self.vectors()]


def window_cloud(seq, window, lo=1, hi=None, stride=1, budget=None) -> RotationCloud:
    """rho over all windows [i, i+window-1] with i on the stride grid in [lo, hi].

    Sequences with exact prefix counts answer each window directly; otherwise a
    single sliding pass updates the counts incrementally.  budget caps the
    number of symbol evaluations and raises BudgetExceeded with the partial
    cloud attached.
    """
    if hi is None:
        if seq.horizon is None:
            raise ValueError("hi is required for unbounded sequences")
        hi = seq.horizon
    if stride < 1 or window < 1:
        raise ValueError("window and stride must be >= 1")
    last_start = hi - window + 1
    if last_start < lo:
        raise ValueError("range shorter than the window")
    starts = []
    counts = []
    spent = 0

    if hasattr(seq, "prefix_counts"):
        pc = seq.prefix_counts
        for start in range(lo, last_start + 1, stride):
            if budget is not None and spent >= budget:
                raise BudgetExceeded(
                    "window budget exhausted",
                    RotationCloud(window, stride, lo, hi, starts, counts, truncated=True))
            h1, h2 = pc(start + window - 1)
            l1, l2 = pc(start - 1)
            starts.append(start)
            counts.append((h1 - l1, h2 - l2))
            spent += 1
        return RotationCloud(window, stride, lo, hi, starts, counts)

    c1 = c2 = 0
    buf = [0] * window  # ring buffer of the current window's symbols
    pos = 0
    for idx, s in enumerate(seq.values(lo, hi)):
        j = lo + idx
        if budget is not None and spent >= budget:
            raise BudgetExceeded(
                "window budget exhausted",
                RotationCloud(window, stride, lo, hi, starts, counts, truncated=True))
        spent += 1
        if idx >= window:
            old = buf[pos]
            if old == 1:
                c1 -= 1
            elif old == 2:
                c2 -= 1
        buf[pos] = s
        pos = (pos + 1) % window
        if s == 1:
            c1 += 1
        elif s == 2:
            c2 += 1
        start = j - window + 1
        if start >= lo and (start - lo) % stride == 0:
            starts.append(start)
            counts.append((c1, c2))
    return RotationCloud(window, stride, lo, hi, starts, counts)


# --- region S ---------------------------------------------------------------


def dist_sq_to_segment(p, a, b) -> Fraction:
    """Exact squared distance from p to the segment [a, b]."""
    px, py = Fraction(p[0]), Fraction(p[1])
    ax, ay = Fraction(a[0]), Fraction(a[1])
    bx, by = Fraction(b[0]), Fraction(b[1])
    ux, uy = bx - ax, by - ay
    wx, wy = px - ax, py - ay
    denom = ux * ux + uy * uy
    if denom == 0:
        return wx * wx + wy * wy
    t = (wx * ux + wy * uy) / denom
    if t < 0:
        t = Fraction(0)
    elif t > 1:
        t = Fraction(1)
    dx, dy = wx - t * ux, wy - t * uy
    return dx * dx + dy * dy


T_SEGMENTS = ((V0, V1), (V0, V2), (V1, V2))


def dist_sq_to_T(p) -> Fraction:
    """Exact squared distance to the triangle boundary T (three edge segments)."""
    return min(dist_sq_to_segment(p, a, b) for a, b in T_SEGMENTS)


def dist_to_T(p) -> float:
    import math
    return math.sqrt(dist_sq_to_T(p))


def in_S(p, radius: Fraction = S_RADIUS) -> bool:
    """Membership in the closed radius-neighborhood of T (L2 balls)."""
    return dist_sq_to_T(p) <= radius * radius


def in_s_scaled(c1: int, c2: int, den: int, radius: Fraction = S_RADIUS) -> bool:
    """in_S for the simplex point (c1/den, c2/den), integer arithmetic only.

    Inside the simplex the distance to T reduces to min(x, y, |x+y-1|/sqrt(2)),
    so membership needs no general segment projections.  Precondition:
    0 <= c1, c2 and c1 + c2 <= den.
    """
    rp, rq = radius.numerator, radius.denominator
    if c1 * rq <= rp * den or c2 * rq <= rp * den:
        return True
    e = c1 + c2 - den
    return e * e * rq * rq <= 2 * rp * rp * den * den


# --- winding numbers ---------------------------------------------------------


def _crossing(ax, ay, bx, by, cx, cy) -> int:
    if ax == cx and ay == cy:
        raise ValueError("path vertex coincides with the center")
    if ay <= cy:
        if by > cy:
            d = (bx - ax) * (cy - ay) - (cx - ax) * (by - ay)
            if d == 0:
                raise ValueError("center lies on the path")
            return 1 if d > 0 else 0
    elif by <= cy:
        d = (bx - ax) * (cy - ay) - (cx - ax) * (by - ay)
        if d == 0:
            raise ValueError("center lies on the path")
        return -1 if d < 0 else 0
    return 0


def winding_number(points, center) -> int:
    """Signed winding number of a closed polyline around center, exact.

    Accepts any iterable of coordinate pairs with exact arithmetic (ints or
    Fractions).  The polyline is closed implicitly if its last point differs
    from the first.  Raises if a vertex or an edge hits the center.
    """
    cx, cy = center
    it = iter(points)
    try:
        first = prev = next(it)
    except StopIteration:
        raise ValueError("empty path") from None
    w = 0
    for cur in it:
        w += _crossing(prev[0], prev[1], cur[0], cur[1], cx, cy)
        prev = cur
    if prev != first:
        w += _crossing(prev[0], prev[1], first[0], first[1], cx, cy)
    return w


# --- convex hulls ------------------------------------------------------------


def hull(points):
    """Convex hull (counterclockwise vertex list) and exact area of a point set."""
    pts = sorted({(Fraction(x), Fraction(y)) for x, y in points})
    if not pts:
        raise ValueError("empty point set")
    if len(pts) <= 2:
        return pts, Fraction(0)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    verts = lower[:-1] + upper[:-1]
    if len(verts) < 3:
        return verts, Fraction(0)
    area = Fraction(0)
    for i, (x0, y0) in enumerate(verts):
        x1, y1 = verts[(i + 1) % len(verts)]
        area += x0 * y1 - x1 * y0
    return verts, abs(area) / 2


# --- sweep paths -------------------------------------------------------------


@dataclass
class SweepPath:
    """Window averages rho(J1 + i) as J1 slides onto its partner window J2.

    J2 = J1 + offset with offset a multiple of the level period, so the two
    windows see the same block configuration and rho(J1) = rho(J2) exactly.
    Points are stored as integer displacement counts over the common
    denominator den = |J1|.
    """

    level: int
    j1: IndexInterval
    j2: IndexInterval
    offset: int
    stride: int
    den: int
    offsets: list
    xs: array
    ys: array

    def __len__(self):
        return len(self.offsets)

    def raw_points(self):
        return zip(self.xs, self.ys)

    def points(self):
        for x, y in self.raw_points():
            yield RotationVector(Fraction(x, self.den), Fraction(y, self.den))

    def winding_number(self, center=(Fraction(1, 3), Fraction(1, 3))) -> int:
        cx = Fraction(center[0])
        cy = Fraction(center[1])
        # per-axis positive rescaling to integers preserves crossing signs
        pts = ((x * cx.denominator - cx.numerator * self.den,
                y * cy.denominator - cy.numerator * self.den)
               for x, y in self.raw_points())
        return winding_number(pts, (0, 0))

    def closed(self) -> bool:
        return self.xs[0] == self.xs[-1] and self.ys[0] == self.ys[-1]

    def out_of_band_offsets(self, radius: Fraction = S_RADIUS):
        return [off for off, x, y in zip(self.offsets, self.xs, self.ys)
                if not in_s_scaled(x, y, self.den, radius)]

    def max_consecutive_l1_gap(self) -> Fraction:
        worst = 0
        for i in range(1, len(self.xs)):
            gap = abs(self.xs[i] - self.xs[i - 1]) + abs(self.ys[i] - self.ys[i - 1])
            if gap > worst:
                worst = gap
        return Fraction(worst, self.den)


def sweep_path(seq, level: int, stride: int) -> SweepPath:
    """Slide the central window of a separator level onto its twin inside I22.

    J1 is the central interval [p_n, q_n]; J2 is the window of equal length
    shifted by a period multiple so that it sits (centrally) inside I22 around
    a level-n block.  The path visits every stride-th offset plus the endpoint.
    """
    deco = seq.decomposition(level)
    j1 = deco.interval("I12c")
    i22 = deco.interval("I22")
    per = seq.schedule.period(level)
    if stride < 1 or 100 * stride > j1.length:
        raise ValueError(f"stride {stride} too coarse: must be <= |J1|/100 = {j1.length // 100}")
    m_min = -(-(i22.lo - j1.lo) // per)
    m_max = (i22.hi - j1.hi) // per
    if m_min > m_max:
        raise ValueError("I22 too short for an aligned twin window")
    offset = ((m_min + m_max) // 2) * per
    j2 = j1.shifted(offset)
    den = j1.length

    try:
        xs, ys = array("q"), array("q")
    except OverflowError:  # pragma: no cover
        xs, ys = [], []
    offsets = []
    pc = seq.prefix_counts
    append_off = offsets.append
    for i in range(0, offset + 1, stride):
        h1, h2 = pc(j1.hi + i)
        l1, l2 = pc(j1.lo + i - 1)
        append_off(i)
        xs.append(h1 - l1)
        ys.append(h2 - l2)
    if offsets[-1] != offset:
        h1, h2 = pc(j2.hi)
        l1, l2 = pc(j2.lo - 1)
        append_off(offset)
        xs.append(h1 - l1)
        ys.append(h2 - l2)
    return SweepPath(level=level, j1=j1, j2=j2, offset=offset, stride=stride,
                     den=den, offsets=offsets, xs=xs, ys=ys)


# --- recurrence checks --------------------------------------------------------


@dataclass
class ToeplitzReport:
    passed: bool
    samples: int
    horizon: int
    seed: int
    repeats_checked: int
    violations: list = field(default_factory=list)


def toeplitz_check(seq, horizon: int, samples: int = 1000, seed: int = 0,
                   max_violations: int = 20) -> ToeplitzReport:
    """Sample positions and verify omega(j + k p) = omega(j) for the fill period p.

    p = a_n d_n where n is the level at which position j was fixed; every k with
    j + k p <= horizon is checked.
    """
    rng = random.Random(seed)
    sched = seq.schedule
    violations = []
    repeats = 0
    for _ in range(samples):
        j = rng.randint(1, horizon)
        p = sched.period(sched.fill_level(j))
        base = seq.evaluate(j)
        pos = j + p
        while pos <= horizon:
            repeats += 1
            got = seq.evaluate(pos)
            if got != base:
                violations.append({"position": j, "period": p, "repeat_at": pos,
                                   "expected": base, "got": got})
                if len(violations) >= max_violations:
                    return ToeplitzReport(False, samples, horizon, seed, repeats, violations)
            pos += p
    return ToeplitzReport(not violations, samples, horizon, seed, repeats, violations)


@dataclass
class RecurrenceReport:
    word_length: int
    horizon: int
    words_seen: int
    words_possible: int
    max_gap: int
    worst_words: list


def almost_periodicity_check(seq, word_length: int, horizon: int,
                             max_report: int = 10) -> RecurrenceReport:
    """Maximum gap between consecutive occurrences of each word in [1, horizon].

    A finite-horizon surrogate for almost periodicity: words that never recur
    within the horizon are reported by count, not flagged.
    """
    if word_length < 1 or word_length > 16:
        raise ValueError("word_length must be in [1, 16]")
    last = {}
    gaps = {}
    window = []
    for idx, s in enumerate(seq.values(1, horizon)):
        window.append(s)
        if len(window) < word_length:
            continue
        w = tuple(window[-word_length:])
        if len(window) > word_length:
            window.pop(0)
        pos = idx + 2 - word_length  # start position of this occurrence
        if w in last:
            gap = pos - last[w]
            if gap > gaps.get(w, 0):
                gaps[w] = gap
        last[w] = pos
    worst = sorted(gaps.items(), key=lambda kv: (-kv[1], kv[0]))[:max_report]
    return RecurrenceReport(
        word_length=word_length, horizon=horizon, words_seen=len(last),
        words_possible=3 ** word_length,
        max_gap=max(gaps.values(), default=0),
        worst_words=[{"word": "".join(map(str, w)), "max_gap": g} for w, g in worst],
    )
