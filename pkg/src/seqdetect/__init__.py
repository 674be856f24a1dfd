"""Active sequential signal detection toolkit.

Simulates SPRT-based multi-stream detection procedures under an
active-sampling constraint (one observation per time instant), estimates
expected detection times and familywise error rates by Monte Carlo, and
evaluates the matching information-theoretic lower bounds.
"""

from .bounds import (
    AllocationResult,
    LowerBoundReport,
    bernoulli_kl,
    calibrate_thresholds,
    lower_bounds,
    maxmin_allocation,
)
from .errors import (
    ConfigError,
    DegenerateModel,
    DomainError,
    HorizonExceeded,
    InsufficientTrials,
    SampledInactiveStream,
    SeqDetectError,
)
from .llr_core import DEFAULT_HORIZON, LLRState, Status, Thresholds, apply_increment, run_local_sprt
from .montecarlo import (
    AggregateStats,
    ExperimentConfig,
    Sweep,
    estimate_error_rates,
    run_experiment,
)
from .procedures import (
    ProcedureSpec,
    TrialResult,
    run_follow_the_leader,
    run_oracle,
    run_procedure,
    run_proposed,
    sort_streams,
)
from .rng import TrialRng, mix64, splitmix64, trial_key
from .stream_models import (
    Bernoulli,
    GaussianMeanShift,
    GroundTruth,
    Hypothesis,
    StreamModel,
    TableLookup,
    kl_divergences,
    llr_increment,
    model_from_dict,
    model_to_dict,
    sample_llr_increment,
)

__version__ = "0.1.0"
