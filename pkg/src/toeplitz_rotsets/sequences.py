"""Sequence objects over the alphabet {0, 1, 2}.

All generated sequences are one-sided Toeplitz sequences following a block
schedule: the value at any position j is fixed at level n = fill_level(j) and
repeats with period a_n * d_n.  A materialized prefix therefore determines the
sequence far beyond its own length, which `evaluate` exploits.
"""

from __future__ import annotations

from .blocks import BlockSchedule

MATERIALIZE_CAP = 10_000_000


class EvaluationRangeError(ValueError):
    """Asked for a position the sequence cannot resolve."""


class MaterializedSequence:
    """A sequence backed by an explicit prefix omega[1..len(data)].

    Positions beyond the prefix are resolved by reducing modulo the period of
    their fill level, which lands inside [1, a_n]; this succeeds whenever the
    reduced position is materialized.
    """

    construction = "raw"

    def __init__(self, schedule: BlockSchedule, data, construction=None, params_manifest=None):
        self.schedule = schedule
        self.data = bytearray(data)
        if construction is not None:
            self.construction = construction
        self.params_manifest = params_manifest or {}

    @property
    def horizon(self) -> int:
        return len(self.data)

    def fill_level(self, j: int) -> int:
        return self.schedule.fill_level(j)

    def evaluate(self, j: int) -> int:
        if j < 1:
            raise ValueError("indices are 1-based")
        if j <= len(self.data):
            return self.data[j - 1]
        n = self.schedule.fill_level(j)
        r = (j - 1) % self.schedule.period(n) + 1
        if r <= len(self.data):
            return self.data[r - 1]
        raise EvaluationRangeError(f"position {j} reduces to {r}, beyond the materialized prefix")

    def values(self, lo: int, hi: int):
        """Iterate omega(lo..hi)."""
        if 1 <= lo and hi <= len(self.data):
            yield from self.data[lo - 1:hi]
            return
        for j in range(lo, hi + 1):
            yield self.evaluate(j)

    def counts(self, lo: int, hi: int):
        """(#1s, #2s) on [lo, hi]; exact and O(1)-ish on the materialized prefix."""
        if 1 <= lo and hi <= len(self.data):
            return (self.data.count(1, lo - 1, hi), self.data.count(2, lo - 1, hi))
        c1 = c2 = 0
        for s in self.values(lo, hi):
            if s == 1:
                c1 += 1
            elif s == 2:
                c2 += 1
        return (c1, c2)
