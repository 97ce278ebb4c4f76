"""Spectra of Fibonacci and Sturmian discrete Schrödinger operators.

Band spectra of periodic approximants, fractal statistics of the
resulting covers (box counts, thickness), density-of-states analysis,
square/cubic sum-set spectra with transition searches, and closed-form
theorem bounds, all under selectable arbitrary-precision arithmetic.
"""

from .approximant_spectra import (
    BandSpectrum,
    PeriodicApproximant,
    band_spectrum,
    fib_potential,
    fibonacci_numbers,
    sigma_cover,
    sturmian_band_spectrum,
    sturmian_potential,
)
from .bounds_reference import (
    ALPHA,
    BoundCurve,
    bound_curve,
    dim_lower,
    dim_upper,
    holder_bounds_large,
    holder_small_limit,
    sturmian_dim_bounds,
    transport_asymptotic,
    transport_lower,
)
from .errors import (
    BandPairingError,
    NotFoundError,
    PreconditionError,
    RefinementError,
    SpectraError,
)
from .ids_analysis import (
    DirichletSection,
    GapLabel,
    eig_count_below,
    gap_labels,
    gap_width_scaling,
    holder_scan,
    ids_value,
)
from .interval_sets import (
    DimEstimate,
    GapBridge,
    IntervalSet,
    box_count,
    denseness_estimate,
    dim_estimate,
    gap_bridges,
    newhouse_criterion,
    thickness,
)
from .precision import (
    DEFAULT_CONTEXT,
    DOUBLE_BITS,
    PrecisionContext,
    format_real,
    parse_real,
)
from .sumset_analysis import (
    TransitionResult,
    count_components,
    cubic_spectrum,
    square_spectrum,
    thickness_threshold,
    transition_scan,
)
from .trace_dynamics import (
    ContinuedFraction,
    TraceSequence,
    TransferParams,
    escape_index,
    fib_char,
    fib_trace_seq,
    fibonacci_word,
    fricke,
    line_point,
    lyapunov_estimate,
    sturmian_trace_seq,
    trace_derivative_seq,
    trace_map_step,
)

__version__ = "0.1.0"
