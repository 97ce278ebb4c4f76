"""Band spectra against closed forms, eigensolvers, and level cross-checks."""

import math

import numpy as np
import pytest

from fibspectra import (
    ContinuedFraction,
    PrecisionContext,
    TransferParams,
    band_spectrum,
    escape_index,
    fib_potential,
    fibonacci_numbers,
    sigma_cover,
    sturmian_band_spectrum,
    sturmian_potential,
)
from fibspectra.approximant_spectra import PeriodicApproximant, periodic_matrices
from fibspectra.errors import PreconditionError


def test_fibonacci_numbers():
    assert fibonacci_numbers(10) == [1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89]


def test_potential_period_and_site_count():
    # one period F_k with F_{k-1} coupled sites
    for k in range(2, 9):
        fibs = fibonacci_numbers(k)
        v = fib_potential(k, 2.0)
        assert len(v) == fibs[k]
        assert np.count_nonzero(v) == fibs[k - 1]


def test_sturmian_potential_all_ones_matches_fibonacci():
    cf = ContinuedFraction((1,) * 8)
    v_st = sturmian_potential(cf, 7, 3.0)
    v_fib = fib_potential(7, 3.0)
    assert np.array_equal(v_st, v_fib)


def test_periodic_matrices_k2_closed_form():
    approx = PeriodicApproximant.fibonacci(2, 2.0)
    j_plus, j_minus = periodic_matrices(approx)
    # period 2, diagonal (2, 0), wrap adds +-1 to the off-diagonal corner
    ev_plus = sorted(np.linalg.eigvalsh(np.array(j_plus, dtype=float)))
    ev_minus = sorted(np.linalg.eigvalsh(np.array(j_minus, dtype=float)))
    assert ev_plus == pytest.approx([1 - math.sqrt(5), 1 + math.sqrt(5)], abs=1e-12)
    assert ev_minus == pytest.approx([0.0, 2.0], abs=1e-12)


def test_band_spectrum_k1_closed_form():
    bs = band_spectrum(1, 3.0)
    assert len(bs.bands) == 1
    lo, hi = next(iter(bs.bands))
    assert float(lo) == pytest.approx(1.0)
    assert float(hi) == pytest.approx(5.0)


def test_band_spectrum_k2_closed_form():
    # discriminant x_2 = E(E - lam)/2 - 1; bands where |x_2| <= 1
    bs = band_spectrum(2, 2.0)
    assert bs.count == 2
    bands = list(bs.bands)
    assert float(bands[0][0]) == pytest.approx(1 - math.sqrt(5), abs=1e-9)
    assert float(bands[0][1]) == pytest.approx(0.0, abs=1e-9)
    assert float(bands[1][0]) == pytest.approx(2.0, abs=1e-9)
    assert float(bands[1][1]) == pytest.approx(1 + math.sqrt(5), abs=1e-9)


def test_band_counts_are_fibonacci():
    for k in range(1, 9):
        bs = band_spectrum(k, 2.0)
        assert bs.count == fibonacci_numbers(k)[k]


def test_zero_coupling_fills_free_spectrum():
    bs = band_spectrum(6, 0.0)
    lo, hi = bs.bands.hull()
    assert float(lo) == pytest.approx(-2.0, abs=1e-9)
    assert float(hi) == pytest.approx(2.0, abs=1e-9)
    assert float(bs.bands.measure()) == pytest.approx(4.0, abs=1e-6)


def test_negative_coupling_rejected():
    with pytest.raises(PreconditionError):
        band_spectrum(5, -1.0)


def test_cover_membership_agrees_with_escape():
    # energies escaping by level k must be outside the level-k cover;
    # energies in the cover must not escape by level k
    rng = np.random.default_rng(7)
    ctx = PrecisionContext(bits=64)
    cover = sigma_cover(8, 2.0, ctx)
    tol = 1e-9
    for e in rng.uniform(-3, 6, size=200):
        esc = escape_index(TransferParams(float(e), 2.0), 8)
        inside = cover.contains_point(e, tol=tol)
        if esc is not None and esc <= 8:
            assert not cover.contains_point(e, tol=-1e-7) or inside
        if inside and not cover.contains_point(e, tol=-tol):
            continue  # on the boundary within tolerance, either verdict fine
        if esc is None:
            # bounded traces up to level 8 lie in the level-8 cover
            assert inside
        else:
            assert not cover.contains_point(e, tol=-tol)


def test_covers_nest_shallow():
    ctx = PrecisionContext(bits=128)
    for lam in (0.5, 2.0):
        prev = sigma_cover(4, lam, ctx)
        for k in range(5, 9):
            cur = sigma_cover(k, lam, ctx)
            assert prev.contains_set(cur, tol=1e-20)
            prev = cur


def test_refined_edges_have_small_residuals():
    ctx = PrecisionContext(bits=128)
    for lam in (0.5, 2.0, 8.0):
        bs = band_spectrum(9, lam, ctx)
        assert bs.max_residual() < 2.0 ** (30 - 128)


def test_hierarchical_matches_dense():
    ctx = PrecisionContext(bits=128)
    dense = band_spectrum(9, 8.0, ctx, method="dense")
    hier = band_spectrum(9, 8.0, ctx, method="hierarchical")
    assert dense.count == hier.count == 55
    for (dl, dh), (hl, hh) in zip(dense.bands, hier.bands):
        assert abs(float(dl - hl)) < 1e-25
        assert abs(float(dh - hh)) < 1e-25


def test_hierarchical_requires_large_coupling():
    with pytest.raises(PreconditionError):
        band_spectrum(9, 2.0, PrecisionContext(bits=128), method="hierarchical")


def test_sturmian_all_ones_matches_fibonacci_bands():
    ctx = PrecisionContext(bits=96)
    cf = ContinuedFraction((1,) * 6)
    st = sturmian_band_spectrum(cf, 6, 2.0, ctx)
    fib = band_spectrum(6, 2.0, ctx)
    assert st.count == fib.count
    for (sl, sh), (fl, fh) in zip(st.bands, fib.bands):
        assert abs(float(sl - fl)) < 1e-12
        assert abs(float(sh - fh)) < 1e-12


def test_sturmian_period_counts():
    # quotients (2,1,2): q = 2, 3, 8 -> level 3 has 8 bands
    cf = ContinuedFraction((2, 1, 2))
    bs = sturmian_band_spectrum(cf, 3, 1.5, PrecisionContext(bits=64))
    assert bs.count == 8


def test_band_spectrum_is_within_hull_bound():
    # all bands live in [-2 - lam, 2 + lam] (crude operator-norm bound)
    bs = band_spectrum(7, 3.0)
    lo, hi = bs.bands.hull()
    assert float(lo) >= -2 - 3.0 - 1e-9
    assert float(hi) <= 2 + 3.0 + 1e-9


def test_auto_depth_cap_without_hierarchical_route():
    # deep levels at small coupling have no hierarchical fallback; auto
    # refuses rather than running an enormous dense eigensolve
    with pytest.raises(PreconditionError):
        band_spectrum(19, 2.0, PrecisionContext(bits=128), method="auto")
