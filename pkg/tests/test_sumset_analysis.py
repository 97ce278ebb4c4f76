"""Sum-set spectra, component counting, and transition searches."""

import pytest

from fibspectra import (
    IntervalSet,
    PrecisionContext,
    count_components,
    cubic_spectrum,
    newhouse_criterion,
    sigma_cover,
    square_spectrum,
    thickness,
    thickness_threshold,
    transition_scan,
)
from fibspectra.errors import NotFoundError, PreconditionError


CTX128 = PrecisionContext(bits=128)


def test_square_spectrum_is_minkowski_of_covers():
    ctx = PrecisionContext(bits=64)
    cover = sigma_cover(6, 2.0, ctx)
    with ctx.activate():
        brute = IntervalSet(
            [(a + c, b + d) for a, b in cover for c, d in cover]
        )
        got = square_spectrum(6, 2.0, 2.0, ctx)
    # identical up to the merge tolerance used for near-touching pieces
    assert got.contains_set(brute, tol=1e-12)
    assert brute.contains_set(got, tol=1e-9)


def test_square_with_interval_summand_is_connected():
    # sigma(0) = [-2, 2] out-widens every gap of sigma_8(2)
    s = square_spectrum(8, 2.0, 0.0, CTX128)
    assert len(s) == 1


def test_square_hull_is_sum_of_hulls():
    ctx = PrecisionContext(bits=64)
    a = sigma_cover(6, 2.0, ctx)
    b = sigma_cover(6, 3.0, ctx)
    s = square_spectrum(6, 2.0, 3.0, ctx)
    assert float(s.hull()[0]) == pytest.approx(float(a.hull()[0] + b.hull()[0]), abs=1e-9)
    assert float(s.hull()[1]) == pytest.approx(float(a.hull()[1] + b.hull()[1]), abs=1e-9)


def test_component_counts_published_figures():
    assert len(sigma_cover(8, 2.0, CTX128)) == 42
    assert count_components(8, 2, 4.0, CTX128) == 311


def test_count_nondecreasing_in_level():
    for lam in (2.0, 4.0):
        counts = [count_components(k, 2, lam, CTX128) for k in range(6, 10)]
        assert all(b >= a for a, b in zip(counts, counts[1:]))


def test_small_coupling_square_connected():
    for k in range(6, 11):
        assert count_components(k, 2, 1.2, CTX128) == 1


def test_newhouse_coherence_with_counts():
    ctx = CTX128
    thick = sigma_cover(8, 1.2, ctx)
    assert thickness(thick) > 1.0
    assert newhouse_criterion(thick, thick)
    assert count_components(8, 2, 1.2, ctx) == 1
    thin = sigma_cover(8, 4.0, ctx)
    assert thickness(thin) < 1.0
    assert not newhouse_criterion(thin, thin)
    assert count_components(8, 2, 4.0, ctx) > 1


def test_cubic_count_at_least_square_trend():
    # three-fold sums of the same cover connect no later than two-fold ones
    for lam in (1.2, 2.0):
        sq = count_components(7, 2, lam, CTX128)
        cu = count_components(7, 3, lam, CTX128)
        assert cu <= sq * sq  # sanity ceiling
        if sq == 1:
            assert cu == 1


def test_transition_k6_m1_table_value():
    res = transition_scan(6, 2, 1, (1.25, 1.4), ctx=CTX128)
    assert res.found
    assert res.count_left == 1 and res.count_right >= 2
    assert res.lambda_star == pytest.approx(1.313172936, abs=1e-5)
    lo, hi = res.bracket
    assert lo <= res.lambda_star <= hi
    assert res.trace  # scan history retained


def test_transition_k7_m2_table_value():
    res = transition_scan(7, 2, 2, (1.45, 1.65), ctx=CTX128)
    assert res.found
    assert res.lambda_star == pytest.approx(1.543759898, abs=1e-5)


def test_transition_not_found_keeps_trace():
    res = transition_scan(6, 2, 50, (1.0, 1.1), ctx=CTX128)
    assert not res.found
    assert res.lambda_star is None
    assert len(res.trace) >= 2


def test_transition_rejects_bad_range():
    with pytest.raises(PreconditionError):
        transition_scan(6, 2, 1, (1.4, 1.2), ctx=CTX128)


def test_thickness_threshold_matches_first_transition():
    lam_tau = thickness_threshold(6, (1.0, 2.0), tol=1e-7, ctx=CTX128)
    res = transition_scan(6, 2, 1, (1.25, 1.4), ctx=CTX128)
    assert lam_tau == pytest.approx(res.lambda_star, abs=1e-4)


def test_thickness_threshold_requires_crossing():
    with pytest.raises(NotFoundError) as exc_info:
        thickness_threshold(6, (0.1, 0.2), tol=1e-6, ctx=CTX128)
    assert exc_info.value.endpoints is not None
