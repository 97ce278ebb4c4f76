"""Square and cubic spectra as Minkowski sums, and transition searches.

The spectrum of the separable square (cubic) operator is the two-fold
(three-fold) sum of one-dimensional spectra, computed here on the
level-k covers. Component counts as a function of coupling locate the
values where the sum splits into more intervals; thickness crossings
locate where the Newhouse interval guarantee expires. Counts are not
monotone in coupling for higher split indices, so searches report the
first crossing and keep the full scan trace.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .approximant_spectra import sigma_cover
from .errors import NotFoundError, PreconditionError
from .interval_sets import IntervalSet, thickness
from .precision import DOUBLE_BITS, PrecisionContext, resolve_context

DEFAULT_SCAN_STEP = 1e-3
DEFAULT_TOL = 1e-7


def _sum_merge_tol(parts, bits: int):
    """Merge tolerance for sums: 2^(10-bits) of the summed hull width,
    the same precision-tied policy used for single-level bands."""
    lo = sum(p.hull()[0] for p in parts)
    hi = sum(p.hull()[1] for p in parts)
    return 2.0 ** (10 - bits) * float(hi - lo)


def square_spectrum(k: int, coupling1, coupling2,
                    ctx: PrecisionContext | None = None) -> IntervalSet:
    """Level-k cover of the square-operator spectrum: the Minkowski sum
    of the two one-dimensional covers."""
    ctx = resolve_context(ctx)
    a = sigma_cover(k, coupling1, ctx)
    b = a if coupling2 == coupling1 else sigma_cover(k, coupling2, ctx)
    with ctx.activate():
        return a.minkowski_sum(b, merge_tol=_sum_merge_tol((a, b), ctx.bits))


def cubic_spectrum(k: int, coupling,
                   ctx: PrecisionContext | None = None) -> IntervalSet:
    """Level-k cover of the cubic-operator spectrum: three-fold sum."""
    ctx = resolve_context(ctx)
    a = sigma_cover(k, coupling, ctx)
    with ctx.activate():
        tol2 = _sum_merge_tol((a, a), ctx.bits)
        tol3 = _sum_merge_tol((a, a, a), ctx.bits)
        return a.minkowski_sum(a, merge_tol=tol2).minkowski_sum(a, merge_tol=tol3)


def count_components(k: int, dim: int, coupling,
                     ctx: PrecisionContext | None = None) -> int:
    """Component count of the dim-fold sum at level k."""
    if dim == 2:
        return len(square_spectrum(k, coupling, coupling, ctx))
    if dim == 3:
        return len(cubic_spectrum(k, coupling, ctx))
    raise PreconditionError(f"dim must be 2 or 3, got {dim}")


@dataclass(frozen=True)
class TransitionResult:
    """Outcome of a component-count transition search.

    lambda_star is None when no crossing exists in the scanned range;
    trace holds every (coupling, count) the scan evaluated, in order.
    """

    level: int
    dimension: int
    m: int
    lambda_star: Optional[float]
    bracket: Optional[tuple]
    count_left: Optional[int]
    count_right: Optional[int]
    trace: tuple

    @property
    def found(self) -> bool:
        return self.lambda_star is not None


def transition_scan(k: int, dim: int, m: int, lambda_range: tuple,
                    scan_step: float = DEFAULT_SCAN_STEP,
                    tol: float = DEFAULT_TOL,
                    ctx: PrecisionContext | None = None) -> TransitionResult:
    """First coupling where the dim-fold sum splits past m components.

    A coarse upward scan at double precision brackets the first count
    change from <= m to > m; the bracket is then bisected at the working
    precision down to width tol. Counts are not monotone in coupling for
    larger m, so only the FIRST crossing is reported and the scan trace
    is preserved for inspection.
    """
    ctx = resolve_context(ctx)
    if scan_step <= 0:
        raise PreconditionError("scan_step must be > 0")
    if tol <= 0:
        raise PreconditionError("tol must be > 0")
    if m < 1:
        raise PreconditionError("m must be >= 1")
    lo, hi = float(lambda_range[0]), float(lambda_range[1])
    if not lo < hi:
        raise PreconditionError("lambda_range must be increasing")
    scan_ctx = PrecisionContext(bits=DOUBLE_BITS)
    trace = []
    prev_lam, prev_count = None, None
    bracket = None
    lam = lo
    while lam <= hi + scan_step * 0.5:
        lam_c = min(lam, hi)
        count = count_components(k, dim, lam_c, scan_ctx)
        trace.append((lam_c, count))
        if prev_count is not None and prev_count <= m < count:
            bracket = (prev_lam, lam_c)
            break
        prev_lam, prev_count = lam_c, count
        lam += scan_step
    if bracket is None:
        return TransitionResult(k, dim, m, None, None, None, None, tuple(trace))
    blo, bhi = bracket
    count_left = count_components(k, dim, blo, ctx)
    count_right = count_components(k, dim, bhi, ctx)
    if not (count_left <= m < count_right):
        # the coarse-precision bracket failed re-validation at working
        # precision; step the right endpoint outward once before giving up
        bhi = min(hi, bhi + scan_step)
        count_right = count_components(k, dim, bhi, ctx)
        if not (count_left <= m < count_right):
            return TransitionResult(k, dim, m, None, None, None, None, tuple(trace))
    while bhi - blo > tol:
        mid = 0.5 * (blo + bhi)
        cmid = count_components(k, dim, mid, ctx)
        trace.append((mid, cmid))
        if cmid <= m:
            blo, count_left = mid, cmid
        else:
            bhi, count_right = mid, cmid
    return TransitionResult(
        k, dim, m, 0.5 * (blo + bhi), (blo, bhi), count_left, count_right,
        tuple(trace),
    )


def thickness_threshold(k: int, lambda_range: tuple, tol: float = 1e-7,
                        ctx: PrecisionContext | None = None) -> float:
    """Coupling where the thickness of the level-k cover crosses one.

    Thickness decreases in the coupling over the bracketed range, so a
    plain bisection on thickness-minus-one applies. Raises NotFoundError
    (with the endpoint thickness values) when the range shows no sign
    change.
    """
    ctx = resolve_context(ctx)
    if tol <= 0:
        raise PreconditionError("tol must be > 0")
    lo, hi = float(lambda_range[0]), float(lambda_range[1])
    if not lo < hi:
        raise PreconditionError("lambda_range must be increasing")

    def tau(lam):
        cover = sigma_cover(k, lam, ctx)
        with ctx.activate():
            return float(thickness(cover))

    t_lo, t_hi = tau(lo), tau(hi)
    if not (t_lo >= 1.0 > t_hi):
        raise NotFoundError(
            f"thickness does not cross 1 on [{lo}, {hi}]: "
            f"tau({lo})={t_lo:.6f}, tau({hi})={t_hi:.6f}",
            endpoints=((lo, t_lo), (hi, t_hi)),
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if tau(mid) >= 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
