"""Closed-interval set algebra: unions, sums, box counts, thickness.

Endpoints may be float, int, Fraction or gmpy2.mpfr; the operations only
rely on comparisons and ring arithmetic, so mixed precisions flow through
unchanged. All sets are kept normalized: sorted, disjoint, lo <= hi.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import PreconditionError
from .precision import exact_rational

_INF = float("inf")


def _merge_sorted(pairs, merge_tol):
    """Fuse a lo-sorted list of (lo, hi) pairs, closing gaps <= merge_tol.

    Decisions compare endpoint differences rather than inflated endpoints:
    differences keep full relative accuracy for arbitrary-precision values
    even when the ambient arithmetic context is coarser.
    """
    out = []
    for lo, hi in pairs:
        if out and lo - out[-1][1] <= merge_tol:
            if hi > out[-1][1]:
                out[-1][1] = hi
        else:
            out.append([lo, hi])
    return [tuple(p) for p in out]


class IntervalSet:
    """Finite union of closed intervals, stored normalized."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[Sequence] = (), merge_tol=0):
        pairs = []
        for iv in intervals:
            lo, hi = iv[0], iv[1]
            if hi < lo:
                raise PreconditionError(f"interval with hi < lo: ({lo}, {hi})")
            pairs.append((lo, hi))
        pairs.sort(key=lambda p: (p[0], p[1]))
        self.intervals = tuple(_merge_sorted(pairs, merge_tol))

    # ---- basic protocol ----

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __repr__(self) -> str:
        return f"IntervalSet({len(self.intervals)} components)"

    def is_empty(self) -> bool:
        return not self.intervals

    def hull(self):
        if not self.intervals:
            raise PreconditionError("hull of an empty set")
        return (self.intervals[0][0], self.intervals[-1][1])

    def measure(self):
        return sum((hi - lo for lo, hi in self.intervals), 0)

    # ---- set algebra ----

    def union(self, other: "IntervalSet", merge_tol=0) -> "IntervalSet":
        return IntervalSet(list(self.intervals) + list(other.intervals), merge_tol)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet(out)

    def minkowski_sum(self, other: "IntervalSet", merge_tol=0) -> "IntervalSet":
        """Pairwise interval sums, merged. Chunks the pair grid so memory
        stays proportional to the output, not to len(a)*len(b)."""
        a, b = self.intervals, other.intervals
        if not a or not b:
            return IntervalSet()
        chunk = max(1, 4_000_000 // max(1, len(b)))
        partial = []
        for start in range(0, len(a), chunk):
            rows = [
                (lo + blo, hi + bhi)
                for lo, hi in a[start:start + chunk]
                for blo, bhi in b
            ]
            rows.sort(key=lambda p: (p[0], p[1]))
            partial.extend(_merge_sorted(rows, merge_tol))
        partial.sort(key=lambda p: (p[0], p[1]))
        return IntervalSet(_merge_sorted(partial, merge_tol))

    # ---- point and set queries ----

    def contains_point(self, x, tol=0) -> bool:
        k = bisect.bisect_right([iv[0] for iv in self.intervals], x)
        for idx in (k - 1, k):
            if 0 <= idx < len(self.intervals):
                lo, hi = self.intervals[idx]
                if lo - x <= tol and x - hi <= tol:
                    return True
        return False

    def contains_set(self, other: "IntervalSet", tol=0) -> bool:
        """True when every interval of other sits inside some interval of
        self inflated by tol."""
        starts = [iv[0] for iv in self.intervals]
        for lo, hi in other.intervals:
            k = bisect.bisect_right(starts, lo)
            ok = False
            for idx in (k - 1, k):
                if 0 <= idx < len(self.intervals):
                    a, b = self.intervals[idx]
                    if a - lo <= tol and hi - b <= tol:
                        ok = True
                        break
            if not ok:
                return False
        return True

    def gaps(self) -> list:
        """Bounded complementary gaps, left to right."""
        iv = self.intervals
        return [(iv[i][1], iv[i + 1][0]) for i in range(len(iv) - 1)]


# ---- box counting ----

def box_count(s: IntervalSet, eps) -> int:
    """Number of grid boxes [j*eps, (j+1)*eps) meeting s.

    The grid is anchored at 0. Counting is exact: endpoints and eps are
    converted to rationals and the index ranges floor(lo/eps)..floor(hi/eps)
    are merged as integer ranges.
    """
    eq = exact_rational(eps)
    if not (0 < eq < 1):
        raise PreconditionError(f"eps must lie in (0, 1), got {eps}")
    total = 0
    last = None
    for lo, hi in s.intervals:
        ql, qh = exact_rational(lo) / eq, exact_rational(hi) / eq
        j0 = ql.numerator // ql.denominator
        j1 = qh.numerator // qh.denominator
        if last is not None and j0 <= last:
            j0 = last + 1
        if j1 >= j0:
            total += j1 - j0 + 1
            last = j1
    return total


@dataclass(frozen=True)
class DimEstimate:
    value: float
    argmin_eps: Fraction
    rows: tuple  # (eps, count, estimate) per grid point


def dim_estimate(s: IntervalSet, eps_grid: Iterable) -> DimEstimate:
    """Box-count dimension estimate inf over a grid of scales.

    For each eps the estimate is log(count)/log(1/eps); the reported value
    is the infimum over the grid, which is an upper-bound-flavored proxy
    for the box dimension of the underlying limit set.
    """
    if s.is_empty():
        raise PreconditionError("dim_estimate of an empty set")
    rows = []
    best = None
    for eps in eps_grid:
        eq = exact_rational(eps)
        c = box_count(s, eq)
        est = math.log(c) / -math.log(eq) if c > 0 else 0.0
        rows.append((eq, c, est))
        if best is None or est < best[0]:
            best = (est, eq)
    if not rows:
        raise PreconditionError("empty eps grid")
    return DimEstimate(value=best[0], argmin_eps=best[1], rows=tuple(rows))


# ---- thickness and denseness ----

@dataclass(frozen=True)
class GapBridge:
    """One bounded gap with its bridges at processing time.

    Bridges run from the gap to the nearest previously processed (larger)
    gap or hull endpoint on each side, following the ordering of gaps by
    decreasing length with ties broken by smaller left endpoint.
    """

    lo: object
    hi: object
    width: object
    bridge_left: object
    bridge_right: object

    @property
    def ratio_min(self) -> float:
        return float(min(self.bridge_left, self.bridge_right) / self.width)

    @property
    def ratio_max(self) -> float:
        return float(max(self.bridge_left, self.bridge_right) / self.width)


def gap_bridges(s: IntervalSet) -> list[GapBridge]:
    gaps = s.gaps()
    if not gaps:
        return []
    hull_lo, hull_hi = s.hull()
    order = sorted(range(len(gaps)), key=lambda i: (-(gaps[i][1] - gaps[i][0]), gaps[i][0]))
    bounds = [hull_lo, hull_hi]
    out = []
    for i in order:
        glo, ghi = gaps[i]
        j = bisect.bisect_right(bounds, glo) - 1
        left = glo - bounds[j]
        right = bounds[bisect.bisect_left(bounds, ghi)] - ghi
        out.append(GapBridge(glo, ghi, ghi - glo, left, right))
        bisect.insort(bounds, glo)
        bisect.insort(bounds, ghi)
    return out


def thickness(s: IntervalSet) -> float:
    """Newhouse thickness of the finite approximation.

    min over gaps of min(bridge)/width under the decreasing-length gap
    ordering; inf when the set has fewer than two components.
    """
    bridges = gap_bridges(s)
    if not bridges:
        return _INF
    return min(b.ratio_min for b in bridges)


def denseness_estimate(s: IntervalSet) -> float:
    """Denseness companion to thickness: max over gaps of max(bridge)/width.

    The true denseness takes an infimum over all gap orderings; only the
    decreasing-length ordering is evaluated here, so treat the result as
    an estimate from above.
    """
    bridges = gap_bridges(s)
    if not bridges:
        return _INF
    return max(b.ratio_max for b in bridges)


def newhouse_criterion(a: IntervalSet, b: IntervalSet) -> bool:
    """Gap lemma test: thickness product >= 1 means the sum of the two
    (Cantor-like) sets contains an interval."""
    ta, tb = thickness(a), thickness(b)
    if math.isinf(ta) or math.isinf(tb):
        return True
    return ta * tb >= 1.0


# ---- serialization ----

def to_json(s: IntervalSet) -> str:
    return json.dumps([[float(lo), float(hi)] for lo, hi in s.intervals])


def from_json(text: str) -> IntervalSet:
    return IntervalSet(json.loads(text))


def to_csv_rows(s: IntervalSet) -> list[tuple]:
    return [("lo", "hi")] + [(lo, hi) for lo, hi in s.intervals]
