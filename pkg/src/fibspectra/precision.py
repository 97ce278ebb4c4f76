"""Working-precision control for all numerical kernels.

Every operation that does real arithmetic accepts a PrecisionContext.
53 bits selects plain IEEE doubles (the exploration default); anything
above routes through gmpy2 mpfr with the requested significand size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import gmpy2
from gmpy2 import mpfr

from .errors import PreconditionError

Real = Any  # float | gmpy2.mpfr | Fraction | int

DOUBLE_BITS = 53


@dataclass(frozen=True)
class PrecisionContext:
    """Significand width in bits plus an equality tolerance.

    eq_tol is the slack used by value comparisons downstream; it defaults
    to 2**(20 - bits) and may not be tighter than one ulp at the working
    precision.
    """

    bits: int = DOUBLE_BITS
    eq_tol: Fraction = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not isinstance(self.bits, int) or self.bits < DOUBLE_BITS:
            raise PreconditionError(f"bits must be an int >= {DOUBLE_BITS}, got {self.bits!r}")
        tol = self.eq_tol
        if tol is None:
            tol = Fraction(1, 2 ** (self.bits - 20))
        else:
            tol = Fraction(tol)
            if tol < Fraction(1, 2 ** (self.bits - 1)):
                raise PreconditionError("eq_tol below one ulp at the requested precision")
        object.__setattr__(self, "eq_tol", tol)

    @property
    def uses_mpfr(self) -> bool:
        return self.bits > DOUBLE_BITS

    def real(self, x) -> Real:
        """Coerce x to the working real type (float at 53 bits, mpfr above)."""
        if not self.uses_mpfr:
            return float(x)
        with self.activate():
            return mpfr(x)

    def activate(self):
        """Context manager installing this precision for gmpy2 arithmetic."""
        return gmpy2.context(precision=self.bits)

    def decimal_digits(self) -> int:
        """Significant decimal digits carried by this precision."""
        return math.ceil(self.bits * math.log10(2))


DEFAULT_CONTEXT = PrecisionContext()


def resolve_context(ctx: PrecisionContext | None) -> PrecisionContext:
    return DEFAULT_CONTEXT if ctx is None else ctx


def exact_rational(x) -> Fraction:
    """Exact Fraction from a float, int, Fraction, mpfr or numeric string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, mpfr):
        q = gmpy2.mpq(x)
        return Fraction(int(q.numerator), int(q.denominator))
    raise PreconditionError(f"cannot convert {type(x).__name__} to an exact rational")


def is_finite(x) -> bool:
    if isinstance(x, float):
        return math.isfinite(x)
    if isinstance(x, (int, Fraction)):
        return True
    return bool(gmpy2.is_finite(x))


def format_real(x, bits: int = DOUBLE_BITS) -> str:
    """Deterministic decimal rendering with ceil(bits*log10(2)) digits."""
    digits = math.ceil(bits * math.log10(2))
    if isinstance(x, (int,)):
        return str(x)
    if isinstance(x, Fraction):
        x = mpfr(gmpy2.mpq(x.numerator, x.denominator), bits)
    if isinstance(x, float):
        return f"{x:.{digits - 1}e}"
    if not gmpy2.is_finite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if x == 0:
        return "0." + "0" * (digits - 1) + "e+00"
    mant, exp, _ = gmpy2.digits(x, 10, digits)
    sign = "-" if mant.startswith("-") else ""
    mant = mant.lstrip("-")
    sci_exp = exp - 1
    return f"{sign}{mant[0]}.{mant[1:]}e{sci_exp:+03d}"


def parse_real(text: str, ctx: PrecisionContext | None = None) -> Real:
    ctx = resolve_context(ctx)
    if not ctx.uses_mpfr:
        return float(text)
    with ctx.activate():
        return mpfr(text)
