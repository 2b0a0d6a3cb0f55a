"""Past entropy of lifetime distributions: measures, the reversed hazard rate
relation, cdf reconstruction from a past-entropy curve, a probe of the
single-point uniqueness claim, and a sample-based estimator."""

from .characterization import (
    Regime,
    ReconstructionResult,
    RootSolveOutcome,
    TheoremVerdict,
    Verdict,
    mismatch_integral,
    ode_rhs,
    reconstruct_cdf,
    solve_reversed_hazard,
    theorem_check,
    uniqueness_probe,
)
from .distributions import Exponential, PowerFunction, Uniform, Weibull, parse_distribution
from .estimation import Sample, empirical_cdf, past_entropy_estimate, spacings_entropy
from .measures import (
    MeasureCurve,
    MeasureKind,
    measure_curve,
    measure_value,
    past_entropy_condexp,
    past_entropy_direct,
    past_entropy_pit,
    residual_entropy,
    reversed_hazard,
    shannon_entropy,
)
from .numerics import QuadratureConfig, RootConfig, central_diff, find_root, integrate

__version__ = "0.1.0"
