"""Band spectra of periodic approximants.

Level-k approximants are period-F_k (or q_k for general Sturmian data)
Jacobi matrices; their periodic/antiperiodic eigenvalues are the band
edges. Three construction paths share one interface:

* dense: LAPACK eigensolve of the corner-modified matrices, the reference
  path for moderate periods;
* refined: dense seeds polished to working precision by bracketed
  root-finding on the trace recursion;
* hierarchical: for coupling > 4 the band nesting across three
  consecutive levels locates every band by certified sign changes, with
  O(k) work per edge, which is the only viable route once bands drop
  below double-precision resolution.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import BandPairingError, PreconditionError, RefinementError
from .interval_sets import IntervalSet
from .precision import DOUBLE_BITS, PrecisionContext, resolve_context
from .trace_dynamics import ContinuedFraction

DENSE_LEVEL_CEILING = 16  # F_16 = 1597; dense eigensolve stays cheap below this


def fibonacci_numbers(k_max: int) -> list[int]:
    """F_0..F_k_max with F_0 = F_1 = 1."""
    fs = [1, 1]
    while len(fs) <= k_max:
        fs.append(fs[-1] + fs[-2])
    return fs[: k_max + 1]


# ---- potentials ----

def fib_potential(k: int, coupling) -> np.ndarray:
    """Diagonal of the level-k Fibonacci approximant, n = 1..F_k.

    v_n = coupling * chi_[F_k - F_{k-1}, F_k)(n F_{k-1} mod F_k); the
    congruence form keeps every indicator decision in exact integers.
    """
    if k < 1:
        raise PreconditionError("level must be >= 1")
    fs = fibonacci_numbers(k)
    fk, fk1 = fs[k], fs[k - 1] if k >= 1 else 1
    n = np.arange(1, fk + 1, dtype=np.int64)
    window = (n * fk1) % fk >= fk - fk1
    return float(coupling) * window.astype(np.float64)


def sturmian_potential(cf: ContinuedFraction, level: int, coupling) -> np.ndarray:
    """Diagonal for the level-th convergent p/q of cf:
    v_n = coupling * chi_[q - p, q)(n p mod q), n = 1..q."""
    conv = cf.convergents()
    if not (1 <= level <= len(conv)):
        raise PreconditionError(f"level must be in 1..{len(conv)}")
    p, q = conv[level - 1]
    n = np.arange(1, q + 1, dtype=np.int64)
    window = (n * p) % q >= q - p
    return float(coupling) * window.astype(np.float64)


@dataclass(frozen=True)
class PeriodicApproximant:
    """A period-q diagonal together with its provenance."""

    level: int
    period: int
    coupling: object
    diagonal: tuple

    @classmethod
    def fibonacci(cls, k: int, coupling) -> "PeriodicApproximant":
        d = fib_potential(k, coupling)
        return cls(level=k, period=len(d), coupling=coupling, diagonal=tuple(d))

    @classmethod
    def sturmian(cls, cf: ContinuedFraction, level: int, coupling) -> "PeriodicApproximant":
        d = sturmian_potential(cf, level, coupling)
        return cls(level=level, period=len(d), coupling=coupling, diagonal=tuple(d))


def periodic_matrices(approx: PeriodicApproximant) -> tuple[np.ndarray, np.ndarray]:
    """Periodic (+1 corners) and antiperiodic (-1 corners) Jacobi matrices.

    Period 1 has no meaningful corner structure and is rejected; callers
    handle that level analytically.
    """
    p = approx.period
    if p < 2:
        raise PreconditionError("period must be >= 2")
    base = np.diag(np.asarray(approx.diagonal, dtype=np.float64))
    off = np.ones(p - 1)
    base += np.diag(off, 1) + np.diag(off, -1)
    jp = base.copy()
    jm = base.copy()
    jp[0, p - 1] += 1.0
    jp[p - 1, 0] += 1.0
    jm[0, p - 1] -= 1.0
    jm[p - 1, 0] -= 1.0
    return jp, jm


def all_eigenvalues(matrix: np.ndarray, ctx: PrecisionContext | None = None):
    """Sorted eigenvalues of a real symmetric matrix.

    Uses LAPACK at 53 bits; above that the matrix is handed to mpmath's
    symmetric eigensolver at the working precision (costly, intended for
    small matrices only).
    """
    ctx = resolve_context(ctx)
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise PreconditionError("matrix must be square")
    if not np.allclose(a, a.T, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise PreconditionError("matrix must be symmetric")
    if not ctx.uses_mpfr:
        return np.sort(np.linalg.eigvalsh(a))
    import gmpy2
    import mpmath

    with mpmath.workprec(ctx.bits + 10):
        ev = mpmath.eigsy(mpmath.matrix(matrix.tolist()), eigvals_only=True)
        vals = []
        for i in range(ev.rows):
            sign, man, exp, _ = mpmath.mpf(ev[i])._mpf_
            with ctx.activate():
                v = gmpy2.mpfr(man) * gmpy2.mpfr(2) ** exp
            vals.append(-v if sign else v)
    return sorted(vals)


# ---- trace evaluation helpers (float or mpfr, O(k) per call) ----

def _half_trace(k: int, lam, energy):
    """x_k(E) by the three-term recursion; operand types set the precision."""
    one = lam - lam + 1
    xm, x = one, energy / 2
    if k == -1:
        return xm
    if k == 0:
        return x
    xp = (energy - lam) / 2
    for _ in range(k - 1):
        xm, x, xp = x, xp, 2 * xp * x - xm
    return xp


def _sturmian_half_trace(level: int, lam, energy, quotients):
    """x_level(E) for general quotients via the Chebyshev power identity."""
    one = lam - lam + 1
    xp, x, t = one, energy / 2, (energy - lam) / 2
    if level == 0:
        return x
    for a in quotients[:level]:
        um, u = one - one, one
        for _ in range(a):
            um, u = u, 2 * x * u - um
        uam1 = 2 * x * um - u
        x_new = um * t - uam1 * xp
        t_new = u * t - um * xp
        xp, x, t = x, x_new, t_new
    return x


def _illinois(f, lo, hi, flo, fhi, width_floor, max_iter=2000):
    """Bracketed root via Illinois false position; returns the midpoint of
    the final bracket. Requires a sign change."""
    if (flo < 0) == (fhi < 0):
        raise RefinementError("no sign change in bracket")
    for _ in range(max_iter):
        denom = fhi - flo
        mid = (lo * fhi - hi * flo) / denom if denom != 0 else (lo + hi) / 2
        if not (lo < mid < hi):
            mid = (lo + hi) / 2
            if not (lo < mid < hi):
                break  # bracket at the representable limit
        fm = f(mid)
        if fm == 0:
            return mid
        if hi - lo <= width_floor:
            break
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
            fhi = fhi / 2
        else:
            hi, fhi = mid, fm
            flo = flo / 2
    return (lo + hi) / 2


# ---- band spectrum result ----

@dataclass(frozen=True)
class BandSpectrum:
    """Bands of one periodic approximant plus construction diagnostics."""

    level: int
    coupling: object
    bands: IntervalSet
    edge_residuals: tuple
    method: str
    bits: int

    @property
    def count(self) -> int:
        return len(self.bands)

    def max_residual(self) -> float:
        return max(self.edge_residuals) if self.edge_residuals else 0.0


def _pair_bands(eigenvalues, signs, discriminant, hull_scale) -> list:
    """Pair sorted edge values into bands and verify each midpoint sits
    strictly inside the discriminant window |x| < 1."""
    n = len(eigenvalues)
    if n % 2:
        raise BandPairingError("odd number of band edges")
    pair_tol = 2.0 ** -40 * hull_scale
    bands = []
    for i in range(0, n, 2):
        lo, hi = eigenvalues[i], eigenvalues[i + 1]
        slo, shi = signs[i], signs[i + 1]
        if hi - lo > pair_tol:
            mid = (lo + hi) / 2
            if abs(discriminant(mid)) >= 1:
                raise BandPairingError(
                    f"midpoint discriminant {discriminant(mid):+.3e} outside (-1,1)",
                    band_index=i // 2,
                )
        bands.append((lo, hi, slo, shi))
    return bands


GUARD_BITS = 64  # extra internal precision so refined roots round cleanly


def _refine_edges(bands, discriminant, ctx: PrecisionContext):
    """Polish each paired edge, returning rounded edges plus residuals.

    The bracket for an edge runs from the adjacent band midpoint to the
    adjacent gap midpoint, where x - s is guaranteed to change sign for
    the recorded edge sign s. Refinement carries GUARD_BITS of extra
    precision; the residual diagnostic is taken at the refined root
    before rounding to the working precision, so it certifies the root
    finder rather than the final representation. Failures keep the seed.
    """
    guard = PrecisionContext(bits=ctx.bits + GUARD_BITS)
    edges = []
    for i, (lo, hi, slo, shi) in enumerate(bands):
        edges.append((lo, slo, i, 0))
        edges.append((hi, shi, i, 1))
    flat = [e[0] for e in edges]
    refined = {}
    residuals = []
    with guard.activate():
        one = guard.real(1)
        for j, (e, s, bi, side) in enumerate(edges):
            left = flat[j - 1] if j > 0 else e - 1
            right = flat[j + 1] if j + 1 < len(flat) else e + 1
            lo_b = guard.real((left + e) / 2)
            hi_b = guard.real((e + right) / 2)
            sgn = one if s > 0 else -one
            f = lambda t: discriminant(t) - sgn
            floor = 2.0 ** (1 - guard.bits) * max(1.0, abs(float(e)))
            try:
                root = _illinois(f, lo_b, hi_b, f(lo_b), f(hi_b), guard.real(floor))
            except RefinementError:
                root = guard.real(e)
            refined[(bi, side)] = root
            residuals.append(float(abs(abs(discriminant(root)) - 1)))
    out = []
    for i, (lo, hi, slo, shi) in enumerate(bands):
        out.append((ctx.real(refined[(i, 0)]), ctx.real(refined[(i, 1)]), slo, shi))
    return out, tuple(residuals)


def _dense_band_pipeline(approx: PeriodicApproximant, discriminant, ctx: PrecisionContext):
    """Eigensolve + sorted pairing + optional high-precision edge polish."""
    jp, jm = periodic_matrices(approx)
    ep = np.linalg.eigvalsh(jp)
    em = np.linalg.eigvalsh(jm)
    merged = sorted([(float(e), +1) for e in ep] + [(float(e), -1) for e in em])
    values = [e for e, _ in merged]
    signs = [s for _, s in merged]
    hull_scale = max(1.0, values[-1] - values[0])
    bands = _pair_bands(values, signs, discriminant, hull_scale)
    if ctx.uses_mpfr and approx.coupling != 0:
        bands, residuals = _refine_edges(bands, discriminant, ctx)
    else:
        residuals = []
        with ctx.activate():
            for lo, hi, slo, shi in bands:
                residuals.append(float(abs(abs(discriminant(lo)) - 1)))
                residuals.append(float(abs(abs(discriminant(hi)) - 1)))
        residuals = tuple(residuals)
    intervals = [(lo, hi) for lo, hi, _, _ in bands]
    return intervals, residuals


def _merge_tol_for(intervals, bits: int):
    if not intervals:
        return 0
    width = intervals[-1][1] - intervals[0][0]
    return 2.0 ** (10 - bits) * float(width)


def band_spectrum(k: int, coupling, ctx: PrecisionContext | None = None,
                  method: str = "auto") -> BandSpectrum:
    """Level-k Fibonacci approximant bands as an IntervalSet.

    method 'auto' picks dense for moderate levels or coupling <= 4 and the
    hierarchical generator otherwise; 'dense' and 'hierarchical' force a
    path. Level 1 is the analytic single band [coupling-2, coupling+2].
    """
    ctx = resolve_context(ctx)
    if k < 1:
        raise PreconditionError("level must be >= 1")
    lam_f = float(coupling)
    if lam_f < 0:
        raise PreconditionError("coupling must be >= 0")
    if method not in ("auto", "dense", "hierarchical"):
        raise PreconditionError(f"unknown method {method!r}")
    if method == "auto":
        method = "hierarchical" if (k > DENSE_LEVEL_CEILING and lam_f > 4) else "dense"
        if method == "dense" and k > DENSE_LEVEL_CEILING + 2:
            raise PreconditionError(
                f"level {k} needs the hierarchical path, which requires coupling > 4"
            )
    if k == 1:
        with ctx.activate():
            lam = ctx.real(coupling)
            iv = IntervalSet([(lam - 2, lam + 2)])
        return BandSpectrum(k, coupling, iv, (0.0, 0.0), "analytic", ctx.bits)
    if method == "hierarchical":
        return _hierarchical_band_spectrum(k, coupling, ctx)
    lam = ctx.real(coupling)
    disc = lambda e: _half_trace(k, lam, e)
    approx = PeriodicApproximant.fibonacci(k, coupling)
    intervals, residuals = _dense_band_pipeline(approx, disc, ctx)
    iv = IntervalSet(intervals, merge_tol=_merge_tol_for(intervals, ctx.bits))
    return BandSpectrum(k, coupling, iv, residuals, "dense", ctx.bits)


def sturmian_band_spectrum(cf: ContinuedFraction, level: int, coupling,
                           ctx: PrecisionContext | None = None) -> BandSpectrum:
    """Bands of the level-th Sturmian convergent approximant.

    Same dense pipeline as the Fibonacci path, with the discriminant taken
    from the general quotient recursion. A midpoint failure triggers one
    local sign-scan re-pairing pass before giving up, since gap openness
    is not guaranteed for arbitrary quotients.
    """
    ctx = resolve_context(ctx)
    lam_f = float(coupling)
    if lam_f < 0:
        raise PreconditionError("coupling must be >= 0")
    conv = cf.convergents()
    if not (1 <= level <= len(conv)):
        raise PreconditionError(f"level must be in 1..{len(conv)}")
    lam = ctx.real(coupling)
    disc = lambda e: _sturmian_half_trace(level, lam, e, cf.quotients)
    p, q = conv[level - 1]
    if q == 1:
        # single site of value coupling*chi(...): the level-1 window is
        # [q-p, q) = [0, 1) so the site carries the coupling
        with ctx.activate():
            iv = IntervalSet([(lam - 2, lam + 2)])
        return BandSpectrum(level, coupling, iv, (0.0, 0.0), "analytic", ctx.bits)
    approx = PeriodicApproximant.sturmian(cf, level, coupling)
    try:
        intervals, residuals = _dense_band_pipeline(approx, disc, ctx)
    except BandPairingError:
        intervals, residuals = _sign_scan_bands(approx, disc, ctx)
    iv = IntervalSet(intervals, merge_tol=_merge_tol_for(intervals, ctx.bits))
    return BandSpectrum(level, coupling, iv, residuals, "dense", ctx.bits)


def _sign_scan_bands(approx: PeriodicApproximant, discriminant, ctx: PrecisionContext):
    """Fallback band builder scanning |x| <= 1 windows on a fine grid
    seeded by the eigenvalue hull; used when sorted pairing fails."""
    jp, jm = periodic_matrices(approx)
    ev = np.sort(np.concatenate([np.linalg.eigvalsh(jp), np.linalg.eigvalsh(jm)]))
    lo, hi = ev[0] - 1e-6, ev[-1] + 1e-6
    grid = np.linspace(lo, hi, max(4096, 64 * approx.period))
    vals = np.array([float(discriminant(g)) for g in grid])
    inside = np.abs(vals) <= 1
    intervals = []
    i = 0
    while i < len(grid):
        if inside[i]:
            j = i
            while j + 1 < len(grid) and inside[j + 1]:
                j += 1
            intervals.append((grid[i], grid[j]))
            i = j + 1
        else:
            i += 1
    residuals = tuple(abs(abs(float(discriminant(e))) - 1)
                      for lo_, hi_ in intervals for e in (lo_, hi_))
    return intervals, residuals


# ---- hierarchical generator (coupling > 4) ----

def _band_inside(level: int, lam, lo, hi, f_lo, f_hi, width_floor):
    """The unique band of sigma_level strictly inside (lo, hi).

    Requires exactly one zero of x_level in the bracket, which the type
    A/B nesting rules certify. Returns (e_lo, e_hi, x_at_zero_sign)."""
    f = lambda e: _half_trace(level, lam, e)
    z = _illinois(f, lo, hi, f_lo, f_hi, width_floor)
    s = 1 if f_lo > 0 else -1
    one = lam - lam + 1
    sgn = one if s > 0 else -one
    e1 = _illinois(lambda e: f(e) - sgn, lo, z, f_lo - sgn, -sgn, width_floor)
    e2 = _illinois(lambda e: f(e) + sgn, z, hi, sgn, f_hi + sgn, width_floor)
    return e1, e2


class _HierarchicalGenerator:
    """Level-by-level band tracker for coupling > 4.

    Band nesting across three consecutive levels (types A and B below) is
    what makes this work: a type-B band of level k contains exactly one
    type-A band of level k+1 flanked by two level k+2 bands, while a
    type-A band contains exactly one level k+2 band and nothing of level
    k+1. Each of those bands is located by sign-change-certified root
    finding on the trace recursion, and the Fibonacci band counts are
    asserted at every level as a global certificate.
    """

    SEED_LEVEL = 5

    def __init__(self, coupling, ctx: PrecisionContext):
        if float(coupling) <= 4:
            raise PreconditionError("hierarchical path requires coupling > 4")
        self.ctx = ctx
        self.work = PrecisionContext(bits=ctx.bits + GUARD_BITS)
        self.lam = self.work.real(coupling)
        self.levels: dict[int, list] = {}
        self._fibs = fibonacci_numbers(64)
        with self.work.activate():
            self._seed()

    def _seed(self):
        k0 = self.SEED_LEVEL
        dense = {}
        seed_ctx = PrecisionContext(bits=DOUBLE_BITS)
        lam53 = float(self.lam)
        for k in (k0 - 1, k0, k0 + 1):
            approx = PeriodicApproximant.fibonacci(k, lam53)
            disc = lambda e, _k=k: _half_trace(_k, lam53, e)
            intervals, _ = _dense_band_pipeline(approx, disc, seed_ctx)
            dense[k] = intervals
        def typed(k):
            out = []
            for lo, hi in dense[k]:
                in_parent = any(a <= lo and hi <= b for a, b in dense[k - 1])
                out.append((self._polish(k, lo, hi), "A" if in_parent else "B"))
            return out
        self._bands = [(iv[0], iv[1], t) for iv, t in typed(k0)]
        self._pending = [(iv[0], iv[1], t) for iv, t in typed(k0 + 1) if t == "B"]
        self._k = k0
        self.levels[k0] = [(a, b) for a, b, _ in self._bands]
        self.levels[k0 + 1] = None  # filled on first advance

    def _polish(self, k, lo, hi):
        """Re-root a double-precision seed band at the working precision."""
        w = hi - lo
        a, b = self.work.real(lo - w / 2), self.work.real(hi + w / 2)
        f = lambda e: _half_trace(k, self.lam, e)
        floor = self._floor(a)
        e1, e2 = _band_inside(k, self.lam, a, b, f(a), f(b), floor)
        return (e1, e2)

    def _floor(self, near):
        return 2.0 ** (1 - self.work.bits) * max(1.0, abs(float(near)))

    def advance_to(self, k_target: int):
        with self.work.activate():
            while self._k < k_target:
                self._advance()

    def _advance(self):
        k = self._k
        lam = self.lam
        next_a = []
        next_b = []
        for lo, hi, t in self._bands:
            f1 = lambda e: _half_trace(k + 1, lam, e)
            f2 = lambda e: _half_trace(k + 2, lam, e)
            floor = self._floor(lo)
            if t == "B":
                a1, a2 = _band_inside(k + 1, lam, lo, hi, f1(lo), f1(hi), floor)
                next_a.append((a1, a2, "A"))
                b1 = _band_inside(k + 2, lam, lo, a1, f2(lo), f2(a1), floor)
                b2 = _band_inside(k + 2, lam, a2, hi, f2(a2), f2(hi), floor)
                next_b.append((b1[0], b1[1], "B"))
                next_b.append((b2[0], b2[1], "B"))
            else:
                b = _band_inside(k + 2, lam, lo, hi, f2(lo), f2(hi), floor)
                next_b.append((b[0], b[1], "B"))
        bands = sorted(next_a + self._pending)
        self._k = k + 1
        expect = self._fibs[self._k]
        if len(bands) != expect:
            raise BandPairingError(
                f"hierarchical level {self._k}: {len(bands)} bands, expected {expect}"
            )
        self._bands = bands
        self._pending = next_b
        self.levels[self._k] = [(a, b) for a, b, _ in bands]

    def bands(self, k: int) -> list:
        if k < self.SEED_LEVEL:
            raise PreconditionError(f"hierarchical levels start at {self.SEED_LEVEL}")
        if k not in self.levels or self.levels[k] is None:
            self.advance_to(k)
        return self.levels[k]


@functools.lru_cache(maxsize=4)
def _generator_for(coupling, bits: int) -> _HierarchicalGenerator:
    return _HierarchicalGenerator(coupling, PrecisionContext(bits=bits))


def _hierarchical_band_spectrum(k: int, coupling, ctx: PrecisionContext) -> BandSpectrum:
    gen = _generator_for(float(coupling), ctx.bits)
    if k < gen.SEED_LEVEL:
        lam = ctx.real(coupling)
        disc = lambda e: _half_trace(k, lam, e)
        approx = PeriodicApproximant.fibonacci(k, coupling)
        intervals, residuals = _dense_band_pipeline(approx, disc, ctx)
        iv = IntervalSet(intervals, merge_tol=_merge_tol_for(intervals, ctx.bits))
        return BandSpectrum(k, coupling, iv, residuals, "dense", ctx.bits)
    raw = gen.bands(k)
    with gen.work.activate():
        residuals = tuple(
            float(abs(abs(_half_trace(k, gen.lam, e)) - 1))
            for lo, hi in raw[: min(len(raw), 64)]
            for e in (lo, hi)
        )
    intervals = [(ctx.real(lo), ctx.real(hi)) for lo, hi in raw]
    if any(lo == hi for lo, hi in intervals):
        raise PreconditionError(
            f"{ctx.bits} bits cannot resolve the level-{k} band widths; increase bits"
        )
    iv = IntervalSet(intervals, merge_tol=_merge_tol_for(intervals, ctx.bits))
    if len(iv) != fibonacci_numbers(k)[k]:
        raise BandPairingError(f"level {k}: merged band count {len(iv)} != F_{k}")
    return BandSpectrum(k, coupling, iv, residuals, "hierarchical", ctx.bits)


# ---- covers ----

def sigma_cover(k: int, coupling, ctx: PrecisionContext | None = None,
                method: str = "auto") -> IntervalSet:
    """The level-k cover: union of the level-k and level-(k+1) bands.

    These unions decrease in k and squeeze down onto the spectrum, which
    is what every sum-set and dimension computation consumes.
    """
    ctx = resolve_context(ctx)
    bk = band_spectrum(k, coupling, ctx, method)
    bk1 = band_spectrum(k + 1, coupling, ctx, method)
    tol = _merge_tol_for(list(bk.bands) + list(bk1.bands), ctx.bits)
    return bk.bands.union(bk1.bands, merge_tol=tol)
