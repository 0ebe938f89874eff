"""Gamma-process duration-of-load model for lumber."""

__version__ = "0.1.0"

from . import (
    adm_reference,
    cli,
    dataset,
    failure_dist,
    inference,
    load_profile,
    shape_model,
    simulate,
    specfn,
)
from .adm_reference import (
    ADMPieceParams,
    ADMPopulationParams,
    adm_failure_prob,
    adm_integrate,
    illustrative_population,
)
from .dataset import Dataset, FailureRecord
from .errors import (
    DiscontinuityWarning,
    DolgammaError,
    MedianBeyondHorizon,
    NumericError,
    ValidationError,
)
from .failure_dist import (
    FailureTimeDistribution,
    failure_probabilities,
    residual_life_samples,
    save_curve,
)
from .inference import (
    LikelihoodEvaluator,
    PTConfig,
    PosteriorSamples,
    PosteriorTarget,
    PriorSpec,
    fit,
    nelder_mead_init,
    run_parallel_tempering,
)
from .load_profile import (
    LoadProfile,
    LoadSegment,
    ResidentialConfig,
    generate_residential,
    ramp_profile,
    ramp_then_constant,
)
from .shape_model import REFERENCE_PARAMS, DegradationParams, LoadGrid, ShapeEvaluator
from .simulate import (
    STANDARD_RAMP_RATE,
    DesignArm,
    ExperimentDesign,
    sample_failure_time,
    sample_path,
    simulate_dataset,
    standard_experiment,
)
from .units import HOURS_PER_YEAR
