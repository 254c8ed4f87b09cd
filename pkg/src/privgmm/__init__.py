"""Differentially private learning of Gaussian mixtures.

The package implements a two-stage univariate learner (dyadic gap candidates
plus a thresholded location histogram, then exponential-mechanism selection
over a parameter net), net construction and private hypothesis selection for
d <= 3, and executable checks for the sensitivity and geometry facts the
privacy analysis rests on.
"""

from ._kernels import backend_name
from .errors import ConfigError, InvalidArgumentError, UnsupportedDimensionError
from .mech import (
    TruncLapSpec,
    advanced_composition,
    exp_mech,
    exp_mech_probabilities,
    tlap_bound,
    tlap_sample,
    tlap_sample_batch,
)
from .model import (
    Dataset,
    GaussianParams,
    Mixture,
    PrivacyBudget,
    density,
    load_dataset,
    load_mixture,
    log_density_batch,
    mixture_from_dict,
    mixture_to_dict,
    sample,
    save_dataset,
    save_mixture,
    tv_upper_bound,
)
from .nets import CrudeBall, HypothesisClass, gaussian_cover, mixture_hypotheses, weight_grid
from .selection import (
    IntegrationSpec,
    mde_scores,
    mde_scores_grid,
    private_select,
    private_select_report,
    scheffe_estimate,
    scheffe_mass,
    scheffe_membership,
)
from .tvdist import TVEstimate, tv_monte_carlo, tv_univariate
from .univariate import (
    CandidateSet,
    bucket_counts,
    candidate_threshold,
    consecutive_pairs,
    noisy_candidates,
)
from .cli import RunConfig, fine_stage, learn_univariate, sweep

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "ConfigError",
    "InvalidArgumentError",
    "UnsupportedDimensionError",
    "TruncLapSpec",
    "tlap_bound",
    "tlap_sample",
    "tlap_sample_batch",
    "exp_mech",
    "exp_mech_probabilities",
    "advanced_composition",
    "GaussianParams",
    "Mixture",
    "Dataset",
    "PrivacyBudget",
    "density",
    "log_density_batch",
    "sample",
    "tv_upper_bound",
    "mixture_to_dict",
    "mixture_from_dict",
    "save_mixture",
    "load_mixture",
    "save_dataset",
    "load_dataset",
    "CrudeBall",
    "HypothesisClass",
    "gaussian_cover",
    "weight_grid",
    "mixture_hypotheses",
    "IntegrationSpec",
    "scheffe_membership",
    "scheffe_mass",
    "scheffe_estimate",
    "mde_scores",
    "mde_scores_grid",
    "private_select",
    "private_select_report",
    "TVEstimate",
    "tv_univariate",
    "tv_monte_carlo",
    "CandidateSet",
    "consecutive_pairs",
    "bucket_counts",
    "candidate_threshold",
    "noisy_candidates",
    "RunConfig",
    "learn_univariate",
    "fine_stage",
    "sweep",
    "__version__",
]
