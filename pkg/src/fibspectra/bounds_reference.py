"""Closed-form bound curves for dimensions, Hölder exponents, transport.

Every function here evaluates a displayed closed-form expression on its
stated coupling range; nothing is fitted or iterated. These serve as
overlay curves and as envelopes for the numerical estimates produced by
the other modules. ALPHA is the single golden-ratio constant shared by
all formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import PreconditionError

ALPHA = (math.sqrt(5.0) - 1.0) / 2.0
_LOG_SILVER = math.log(1.0 + math.sqrt(2.0))
_LOG_INV_ALPHA = -math.log(ALPHA)


def _large_coupling_base(lam: float) -> float:
    """((lam-4) + sqrt((lam-4)^2 - 12))/2, the growth rate entering every
    large-coupling upper bound; real for lam >= 4 + 2*sqrt(3)."""
    t = lam - 4.0
    return (t + math.sqrt(t * t - 12.0)) / 2.0


def dim_upper(lam) -> float:
    """Box-counting dimension upper bound, valid for coupling >= 8."""
    lam = float(lam)
    if lam < 8:
        raise PreconditionError(f"dim_upper needs coupling >= 8, got {lam}")
    return _LOG_SILVER / math.log(_large_coupling_base(lam))


def dim_lower(lam) -> float:
    """Hausdorff dimension lower bound, valid for coupling > 4."""
    lam = float(lam)
    if lam <= 4:
        raise PreconditionError(f"dim_lower needs coupling > 4, got {lam}")
    return _LOG_SILVER / math.log(2.0 * lam + 22.0)


def holder_bounds_large(lam) -> tuple[float, float]:
    """(lower, upper) Hölder exponents of the IDS at large coupling.

    The lower expression is valid for coupling > 4, the upper for
    coupling >= 8; both are required here so a single range guard of
    coupling >= 8 applies.
    """
    lam = float(lam)
    if lam < 8:
        raise PreconditionError(f"holder_bounds_large needs coupling >= 8, got {lam}")
    lower = 3.0 * _LOG_INV_ALPHA / (2.0 * math.log(2.0 * lam + 22.0))
    upper = 3.0 * _LOG_INV_ALPHA / (2.0 * math.log(_large_coupling_base(lam)))
    return lower, upper


def holder_small_limit() -> float:
    """Small-coupling limiting Hölder exponent; the finite-coupling
    exponent approaches 1/2 from below."""
    return 0.5


def transport_lower(lam, p, D) -> float:
    """Lower bound on the time-averaged transport exponent at moment p.

    D is the unspecified universal growth constant and must be supplied
    by the caller. With gamma = D*log(2+sqrt(8+lam^2)) and
    kappa = log(sqrt(17)/(20*log(1+ALPHA))), the bound is
    (p+2*kappa)/((p+1)*(gamma+kappa+1/2)) for p <= 2*gamma+1 and the
    constant 1/(gamma+1) beyond; the two branches meet continuously.
    """
    lam, p, D = float(lam), float(p), float(D)
    if lam <= 0:
        raise PreconditionError("coupling must be > 0")
    if p <= 0:
        raise PreconditionError("moment p must be > 0")
    if D <= 0:
        raise PreconditionError("D must be > 0")
    gamma = D * math.log(2.0 + math.sqrt(8.0 + lam * lam))
    kappa = math.log(math.sqrt(17.0) / (20.0 * math.log(1.0 + ALPHA)))
    if p <= 2.0 * gamma + 1.0:
        return (p + 2.0 * kappa) / ((p + 1.0) * (gamma + kappa + 0.5))
    return 1.0 / (gamma + 1.0)


def transport_asymptotic(lam) -> tuple[float, float]:
    """(lower, upper) bounds for the asymptotic transport exponent.

    Lower valid for coupling > sqrt(24), upper for coupling >= 8; both
    behave like 2*log(1+ALPHA)/log(coupling) at large coupling.
    """
    lam = float(lam)
    if lam <= math.sqrt(24.0):
        raise PreconditionError(
            f"transport_asymptotic needs coupling > sqrt(24), got {lam}"
        )
    two_log = 2.0 * math.log(1.0 + ALPHA)
    lower = two_log / math.log(2.0 * lam + 22.0)
    if lam < 8:
        raise PreconditionError(
            f"transport_asymptotic upper bound needs coupling >= 8, got {lam}"
        )
    upper = two_log / math.log(_large_coupling_base(lam))
    return lower, upper


def sturmian_dim_bounds(lam, m_star) -> tuple[float, float]:
    """(lower, upper) Hausdorff-dimension bounds for general quotient
    sequences with limsup partial-quotient average m_star.

    Infinite m_star forces dimension one. Valid for coupling > 20.
    """
    lam = float(lam)
    if lam <= 20:
        raise PreconditionError(f"sturmian_dim_bounds needs coupling > 20, got {lam}")
    if m_star == math.inf:
        return 1.0, 1.0
    ms = float(m_star)
    if ms < 1:
        raise PreconditionError("m_star must be >= 1 or infinite")
    log_m = math.log(ms)
    upper = (2.0 * log_m + math.log(3.0)) / (
        2.0 * log_m - math.log(3.0 / (lam - 8.0))
    )
    lower = max(
        math.log(2.0)
        / (10.0 * math.log(2.0) - 3.0 * math.log(1.0 / (4.0 * (lam - 8.0)))),
        (log_m - math.log(3.0))
        / (log_m - math.log(1.0 / (12.0 * (lam - 8.0)))),
    )
    return lower, upper


@dataclass(frozen=True)
class BoundCurve:
    """A named bound sampled on a coupling grid, for CSV emission."""

    name: str
    valid_range: tuple
    values: tuple


_CURVES = {
    "dim_upper": (dim_upper, (8.0, math.inf)),
    "dim_lower": (dim_lower, (4.0, math.inf)),
    "holder_lower": (lambda x: holder_bounds_large(x)[0], (8.0, math.inf)),
    "holder_upper": (lambda x: holder_bounds_large(x)[1], (8.0, math.inf)),
    "transport_lower": (lambda x: transport_asymptotic(x)[0], (8.0, math.inf)),
    "transport_upper": (lambda x: transport_asymptotic(x)[1], (8.0, math.inf)),
}


def bound_curve(name: str, lambda_grid) -> BoundCurve:
    """Sample a named bound on a grid, skipping out-of-range points."""
    if name not in _CURVES:
        raise PreconditionError(
            f"unknown bound {name!r}; available: {sorted(_CURVES)}"
        )
    fn, rng = _CURVES[name]
    rows = []
    for lam in lambda_grid:
        try:
            rows.append((float(lam), fn(float(lam))))
        except PreconditionError:
            continue
    return BoundCurve(name=name, valid_range=rng, values=tuple(rows))
