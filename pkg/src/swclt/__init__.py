"""Sliced Wasserstein distances and their asymptotic inference."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DomainError,
    IncompatibleInputError,
    NumericalError,
    SwcltError,
    UnsupportedConfigurationError,
)
from .measures import Direction, EmpiricalMeasure, SortedSlice, project, quantile  # noqa: E402
from .ot1d import (  # noqa: E402
    PiecewisePotential,
    c_transform,
    dual_value,
    kantorovich_potential,
    sign_potential,
    wasserstein_1d,
)
from .sliced import (  # noqa: E402
    Functional,
    MaxSlicedOptions,
    amplitude_stat,
    discrete_sliced,
    distributional_sliced,
    max_sliced,
    sliced_wasserstein,
)
from .inference import (  # noqa: E402
    SampleRatio,
    bootstrap_distribution,
    confidence_interval,
    covariance_estimate,
    msw_limit_variance,
    sw_limit_variance,
)
from .samplers import ModelSpec, sample, spiked_pair  # noqa: E402
