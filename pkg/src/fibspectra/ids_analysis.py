"""Integrated density of states for Dirichlet finite sections.

Counting eigenvalues below an energy needs only the signs of the LDL
pivots of (T - E), an O(n) scan, so IDS queries never diagonalize.
Full eigensolves are reserved for the Hölder-exponent scan, which needs
every eigenvalue gap. Gap labeling ties approximant gaps to the value
set {m*alpha mod 1} union {1}.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .approximant_spectra import band_spectrum, fibonacci_numbers
from .bounds_reference import ALPHA
from .errors import PreconditionError
from .precision import PrecisionContext, resolve_context
from .trace_dynamics import fib_char

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DirichletSection:
    """Tridiagonal restriction to sites 1..size, unit off-diagonals,
    no corner entries; diagonal values lie in {0, coupling}."""

    size: int
    coupling: float
    diagonal: tuple

    @classmethod
    def fibonacci(cls, n: int, coupling) -> "DirichletSection":
        """Sites carry coupling exactly where the Fibonacci indicator
        fires; the indicator is evaluated in exact integer arithmetic."""
        if n < 1:
            raise PreconditionError("size must be >= 1")
        lam = float(coupling)
        diag = tuple(lam * fib_char(i) for i in range(1, n + 1))
        return cls(size=n, coupling=lam, diagonal=diag)


def eig_count_below(section: DirichletSection, energy: float) -> int:
    """Number of eigenvalues strictly below energy.

    Sign-count recursion on the pivots d_1 = v_1 - E,
    d_i = v_i - E - 1/d_{i-1}; negative pivots count eigenvalues.
    Exact zero pivots are nudged by one ulp (logged at debug level).
    """
    e = float(energy)
    count = 0
    d = None
    for i, v in enumerate(section.diagonal):
        d = (v - e) if d is None else (v - e - 1.0 / d)
        if d == 0.0:
            d = -math.ulp(1.0)
            log.debug("zero pivot at site %d nudged by one ulp", i + 1)
        if d < 0.0:
            count += 1
    return count


@functools.lru_cache(maxsize=16)
def _section(n: int, coupling: float) -> DirichletSection:
    return DirichletSection.fibonacci(n, coupling)


def ids_value(n: int, coupling, energy) -> float:
    """Fraction of the n section eigenvalues below energy; monotone
    nondecreasing in energy."""
    if n < 1:
        raise PreconditionError("n must be >= 1")
    return eig_count_below(_section(n, float(coupling)), energy) / n


def holder_exclusion(coupling) -> float:
    """Smallest eigenvalue spacing the Hölder scan trusts: ten times the
    eigensolver noise floor for the section's operator norm."""
    return 10.0 * np.finfo(np.float64).eps * (2.0 + abs(float(coupling)))


def holder_scan(n: int, coupling, delta: float = 0.025) -> float:
    """Local Hölder-exponent estimate of the IDS from one dense solve.

    Minimizes log((j-i)/n)/log(E_j - E_i) over sorted-eigenvalue pairs
    closer than delta; pairs closer than the exclusion floor are skipped
    because such spacings are numerically indistinguishable from
    degeneracy.
    """
    if n < 2:
        raise PreconditionError("n must be >= 2")
    if delta <= 0:
        raise PreconditionError("delta must be > 0")
    section = _section(n, float(coupling))
    ev = eigh_tridiagonal(
        np.asarray(section.diagonal), np.ones(n - 1), eigvals_only=True
    )
    ev.sort()
    floor = holder_exclusion(coupling)
    best = math.inf
    logn = math.log(n)
    j = 0
    for i in range(n - 1):
        if j <= i:
            j = i + 1
        while j < n and ev[j] - ev[i] < delta:
            j += 1
        for jj in range(i + 1, j):
            de = ev[jj] - ev[i]
            if de <= floor:
                continue
            # log((jj-i)/n)/log(de), both logs negative
            val = (math.log(jj - i) - logn) / math.log(de)
            if val < best:
                best = val
    if not math.isfinite(best):
        raise PreconditionError(
            f"no eigenvalue pairs closer than delta={delta}; increase delta or n"
        )
    return best


@dataclass(frozen=True)
class GapLabel:
    """One spectral gap with its IDS value and its label m, the integer
    minimizing |ids_value - frac(m*alpha)| over |m| <= the scan cap.
    The region above the spectrum carries the constant label value 1
    from the label set, encoded as m None with residual 0."""

    gap: tuple
    ids_value: float
    m: Optional[int]
    residual: float


def _frac_alpha(m: int) -> float:
    """frac(m*alpha) with the integer part removed exactly."""
    am = m * ALPHA
    return am - math.floor(am)


def gap_labels(k: int, coupling, m_cap: int,
               ctx: PrecisionContext | None = None) -> list[GapLabel]:
    """Label every gap of the level-k approximant spectrum.

    The IDS on the j-th gap is exactly j/F_k; the label is the m of the
    nearest frac(m*alpha), ties resolved toward smaller |m|.
    """
    ctx = resolve_context(ctx)
    if k < 2:
        raise PreconditionError("level must be >= 2")
    if float(coupling) <= 0:
        raise PreconditionError("coupling must be > 0")
    fk = fibonacci_numbers(k)[k]
    if m_cap < fk:
        raise PreconditionError(f"m_cap must be >= F_k = {fk}")
    spectrum = band_spectrum(k, coupling, ctx)
    labels = []
    for j, (glo, ghi) in enumerate(spectrum.bands.gaps(), start=1):
        ids = j / fk
        best_m, best_r = None, math.inf
        for mm in range(1, m_cap + 1):
            for m in (mm, -mm):
                r = abs(ids - _frac_alpha(m))
                if r < best_r:
                    best_m, best_r = m, r
        labels.append(GapLabel((glo, ghi), ids, best_m, best_r))
    top = spectrum.bands.hull()[1]
    labels.append(GapLabel((top, math.inf), 1.0, None, 0.0))
    return labels


def gap_width_scaling(m: int, k: int, lambda_grid: list,
                      ctx: PrecisionContext | None = None) -> list[tuple]:
    """Width/coupling ratio of the gap labeled m along a coupling grid.

    Emits (coupling, ratio) rows; a gap that is absent or unresolved at
    some coupling yields (coupling, None) instead of failing the sweep.
    """
    ctx = resolve_context(ctx)
    if m == 0:
        raise PreconditionError("label m must be nonzero")
    grid = [float(x) for x in lambda_grid]
    if not grid or any(x <= 0 for x in grid):
        raise PreconditionError("lambda_grid must be positive")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise PreconditionError("lambda_grid must be strictly decreasing")
    fk = fibonacci_numbers(k)[k]
    out = []
    for lam in grid:
        rows = [g for g in gap_labels(k, lam, fk, ctx) if g.m == m
                and math.isfinite(g.gap[1])]
        if not rows:
            out.append((lam, None))
            continue
        g = min(rows, key=lambda r: r.residual)
        width = float(g.gap[1] - g.gap[0])
        if width <= float(ctx.eq_tol):
            out.append((lam, None))
        else:
            out.append((lam, width / lam))
    return out
