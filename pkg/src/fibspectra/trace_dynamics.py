"""Trace-map dynamics for Fibonacci and Sturmian transfer matrices.

The half-traces x_k = Tr(M_k)/2 of the matrices M_{k+1} = M_{k-1} M_k^{a_{k+1}}
obey closed three-term recursions; everything in this module is built on
those recursions rather than explicit matrix products, so one evaluation
costs O(k) ring operations at any precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import PreconditionError
from .precision import PrecisionContext, is_finite, resolve_context

# bound beyond which a trace orbit is reported as overflowed; far above any
# bounded orbit and still far below IEEE double range
OVERFLOW_LIMIT = 1e290


@dataclass(frozen=True)
class TransferParams:
    """Energy, coupling and phase of the operator family.

    Only phase 0 is supported; the phase field exists so configurations
    are explicit about that choice.
    """

    energy: object
    coupling: object
    phase: float = 0.0

    def __post_init__(self):
        if self.coupling < 0:
            raise PreconditionError("coupling must be >= 0")
        if self.phase != 0.0:
            raise PreconditionError("only phase 0 is supported")


@dataclass(frozen=True)
class ContinuedFraction:
    """Positive continued-fraction quotients a_1, a_2, ... of an irrational
    in (0, 1), with cached convergents p_k/q_k."""

    quotients: tuple

    def __post_init__(self):
        q = tuple(int(a) for a in self.quotients)
        if not q or any(a < 1 for a in q):
            raise PreconditionError("quotients must be a nonempty sequence of positive integers")
        object.__setattr__(self, "quotients", q)

    @classmethod
    def golden(cls, depth: int) -> "ContinuedFraction":
        """All-ones expansion: the inverse golden mean."""
        return cls(tuple([1] * depth))

    def convergents(self) -> list[tuple[int, int]]:
        """(p_k, q_k) for k = 1..len(quotients); p_0/q_0 = 0/1."""
        pm, qm = 0, 1
        p, q = 1, self.quotients[0]
        out = [(p, q)]
        for a in self.quotients[1:]:
            pm, p = p, a * p + pm
            qm, q = q, a * q + qm
            out.append((p, q))
        return out


@dataclass(frozen=True)
class TraceTriple:
    """State of the Sturmian trace recursion at depth k.

    x_prev, x_cur are half-traces of M_{k-1}, M_k; x_mixed is the
    half-trace of M_k M_{k-1}.
    """

    x_prev: object
    x_cur: object
    x_mixed: object


@dataclass(frozen=True)
class TraceSequence:
    """Half-traces x_{-1}, x_0, ..., truncated at overflow if any."""

    values: tuple
    overflow_index: Optional[int] = None

    def x(self, k: int):
        """x_k with k >= -1."""
        return self.values[k + 1]

    def max_index(self) -> int:
        return len(self.values) - 2


def trace_map_step(point):
    """One application of T(x, y, z) = (2xy - z, x, y)."""
    x, y, z = point
    return (2 * x * y - z, x, y)


def fricke(x, y, z):
    """Conserved quantity of the trace map: x^2+y^2+z^2-2xyz-1."""
    return x * x + y * y + z * z - 2 * x * y * z - 1


def line_point(params: TransferParams, ctx: PrecisionContext | None = None):
    """Initial trace-map point ((E-lambda)/2, E/2, 1) of the operator line."""
    ctx = resolve_context(ctx)
    e = ctx.real(params.energy)
    lam = ctx.real(params.coupling)
    one = ctx.real(1)
    with ctx.activate():
        return ((e - lam) / 2, e / 2, one)


def fib_trace_seq(params: TransferParams, k_max: int,
                  ctx: PrecisionContext | None = None) -> TraceSequence:
    """Half-traces x_{-1}..x_{k_max} of the Fibonacci transfer matrices.

    x_{-1} = 1, x_0 = E/2, x_1 = (E-lambda)/2 and
    x_{k+1} = 2 x_k x_{k-1} - x_{k-2}. Overflow is reported through the
    overflow_index field, never as a silent non-finite entry.
    """
    if k_max < 1:
        raise PreconditionError("k_max must be >= 1")
    ctx = resolve_context(ctx)
    e = ctx.real(params.energy)
    lam = ctx.real(params.coupling)
    with ctx.activate():
        vals = [ctx.real(1), e / 2, (e - lam) / 2]
        for k in range(2, k_max + 1):
            nxt = 2 * vals[-1] * vals[-2] - vals[-3]
            if not is_finite(nxt) or abs(nxt) > OVERFLOW_LIMIT:
                return TraceSequence(tuple(vals), overflow_index=k)
            vals.append(nxt)
    return TraceSequence(tuple(vals))


def trace_derivative_seq(params: TransferParams, k_max: int,
                         ctx: PrecisionContext | None = None) -> list[tuple]:
    """Pairs (x_k, dx_k/dE) for k = -1..k_max.

    The derivative obeys dx_{k+1} = 2(dx_k x_{k-1} + x_k dx_{k-1}) - dx_{k-2}
    with dx_{-1} = 0 and dx_0 = dx_1 = 1/2.
    """
    if k_max < 1:
        raise PreconditionError("k_max must be >= 1")
    ctx = resolve_context(ctx)
    e = ctx.real(params.energy)
    lam = ctx.real(params.coupling)
    half = ctx.real(0.5)
    with ctx.activate():
        xs = [ctx.real(1), e / 2, (e - lam) / 2]
        ds = [ctx.real(0), half, half]
        for _ in range(2, k_max + 1):
            xs.append(2 * xs[-1] * xs[-2] - xs[-3])
            ds.append(2 * (ds[-1] * xs[-3] + xs[-2] * ds[-2]) - ds[-3])
    return list(zip(xs, ds))


def escape_index(params: TransferParams, k_cap: int,
                 ctx: PrecisionContext | None = None) -> Optional[int]:
    """Smallest k <= k_cap with |x_k| > 1 and |x_{k+1}| > 1, else None.

    Two consecutive half-traces beyond 1 certify super-exponential growth,
    hence that the energy lies outside the level-k cover.
    """
    if k_cap < 0:
        raise PreconditionError("k_cap must be >= 0")
    seq = fib_trace_seq(params, k_cap + 1, ctx)
    top = seq.max_index()
    for k in range(0, min(k_cap, top - 1) + 1):
        if abs(seq.x(k)) > 1 and abs(seq.x(k + 1)) > 1:
            return k
    if seq.overflow_index is not None:
        # growth hit the overflow bound before the window ended
        return max(0, seq.overflow_index - 1)
    return None


def _cheb_pair(x, a: int, one):
    """(U_a, U_{a+1}) of the Chebyshev-like family U_{j+1} = 2x U_j - U_{j-1},
    U_0 = 0, U_1 = 1, evaluated at x."""
    um, u = one - one, one
    for _ in range(a):
        um, u = u, 2 * x * u - um
    return um, u


def sturmian_trace_seq(energy, coupling, cf: ContinuedFraction,
                       ctx: PrecisionContext | None = None) -> list[TraceTriple]:
    """Trace triples for the matrices M_{k+1} = M_{k-1} M_k^{a_{k+1}}.

    Uses the power identity M^a = U_a(x) M - U_{a-1}(x) I to advance the
    triple (x_{k-1}, x_k, half-trace(M_k M_{k-1})) one quotient at a time:

        x_{k+1} = U_a(x_k) * x_mixed - U_{a-1}(x_k) * x_{k-1}
        mixed'  = U_{a+1}(x_k) * x_mixed - U_a(x_k) * x_{k-1}

    The list holds one triple per depth k = 0..len(cf.quotients). With
    all-ones quotients the x_cur column reproduces fib_trace_seq.
    """
    ctx = resolve_context(ctx)
    e = ctx.real(energy)
    lam = ctx.real(coupling)
    if lam < 0:
        raise PreconditionError("coupling must be >= 0")
    one = ctx.real(1)
    with ctx.activate():
        xp, x, t = one, e / 2, (e - lam) / 2
        out = [TraceTriple(xp, x, t)]
        for a in cf.quotients:
            ua, ua1 = _cheb_pair(x, a, one)
            uam1 = 2 * x * ua - ua1
            x_new = ua * t - uam1 * xp
            t_new = ua1 * t - ua * xp
            xp, x, t = x, x_new, t_new
            out.append(TraceTriple(xp, x, t))
    return out


def sturmian_invariant_drift(triples: Sequence[TraceTriple], coupling, ctx=None) -> float:
    """Max |fricke(x_mixed, x_cur, x_prev) - coupling^2/4| over the triples."""
    ctx = resolve_context(ctx)
    lam = ctx.real(coupling)
    with ctx.activate():
        target = lam * lam / 4
        drift = max(abs(fricke(t.x_mixed, t.x_cur, t.x_prev) - target) for t in triples)
    return float(drift)


# ---- Fibonacci word and potential values ----

def fib_char(n: int) -> int:
    """Indicator chi_[1-alpha,1)({n*alpha}) at the inverse golden mean,
    via exact integer arithmetic: floor((n+1)a) - floor(na)."""
    if n < 1:
        raise PreconditionError("site index must be >= 1")

    def fl(m: int) -> int:
        return (math.isqrt(5 * m * m) - m) // 2

    return fl(n + 1) - fl(n)


def fibonacci_word(n: int) -> np.ndarray:
    """First n letters (as 0/1 ints) of the Fibonacci substitution word
    a -> ab, b -> a, with a mapped to 1."""
    if n < 1:
        raise PreconditionError("n must be >= 1")
    word = [1]
    while len(word) < n:
        word = [x for w in word for x in ((1, 0) if w else (1,))]
    return np.array(word[:n], dtype=np.int64)


# ---- Lyapunov exponent ----

def lyapunov_estimate(params: TransferParams, n: int,
                      ctx: PrecisionContext | None = None) -> float:
    """(1/n) log of the spectral norm of the n-step transfer product.

    One-step matrices [[E - v(m), -1], [1, 0]] over the Fibonacci potential
    at phase 0. The running product is renormalized by its norm whenever
    entries grow large, accumulating logs, so no overflow occurs. The
    matrix norm used throughout is the spectral (largest singular value)
    norm.
    """
    if n < 1:
        raise PreconditionError("n must be >= 1")
    ctx = resolve_context(ctx)
    e = float(params.energy)
    lam = float(params.coupling)
    word = fibonacci_word(n)
    m = np.eye(2)
    log_acc = 0.0
    for i in range(n):
        v = lam * word[i]
        m = np.array([[e - v, -1.0], [1.0, 0.0]]) @ m
        if np.abs(m).max() > 1e120:
            nrm = np.linalg.norm(m, 2)
            log_acc += math.log(nrm)
            m /= nrm
    nrm = np.linalg.norm(m, 2)
    return (log_acc + math.log(nrm)) / n
