"""Numerical checks of the Fisher information inequality on grid densities."""

__version__ = "0.1.0"

from .channel import (  # noqa: E402
    ChannelModel,
    bayesian_var_identities,
    conditional_variance,
    lemma1_residual,
    mmse_fisher,
    orthogonality_residual,
    posterior,
    score_mmse_identity_residual,
    var_additivity_mc_check,
)
from .density import (  # noqa: E402
    GridDensity,
    GridSpec,
    JointDensity2D,
    affine_push,
    convolve,
    default_grid,
    default_grid_2d,
    differential_entropy,
    grid_for,
    materialize,
    moments,
    shared_grid,
    sum_density_of_joint,
)
from .errors import *  # noqa: E402,F401,F403
from .harness import (  # noqa: E402
    bayesian_proof_sweep,
    communications_proof_sweep,
    cross_pipeline_check,
    dependent_fii_check,
    fii_check,
    gaussianity_gap_probe,
    stam_check,
)
from .kernels import BACKEND  # noqa: E402
from .mutual_info import (  # noqa: E402
    de_bruijn_sweep,
    mi_additive,
    mi_pair_bound_check,
    moment_matched_nongaussian,
)
from .results import CheckResult, SweepReport  # noqa: E402
from .score import fisher_information, fisher_matrix, score, score_conditional_mean_residual  # noqa: E402
from .specs import Gaussian, Gaussian2D, GaussianMixture, Laplace, Mixture2D  # noqa: E402
