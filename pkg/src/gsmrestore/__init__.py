"""Edge-preserving image restoration with latent-scale gradient priors.

The prior couples image gradients to nonnegative latent scales; smoothing
strength per pixel is the conditional mean of that scale.  On top of one
shared linear operator the package provides MAP restoration (EM / lagged
diffusivity), an approximate mean-field variant with a per-pixel variance
correction, and an exact-conditional Gibbs sampler for posterior means.
"""

from .grid import (
    diffusion_diagonal,
    divergence,
    edge_statistic,
    gradient,
    gradient_variance,
    indicator_gradient_sq,
)
from .operators import ConvolutionOperator, IdentityOperator, gaussian_kernel
from .priors import (
    CapabilityError,
    ExponentialDiffusivityPrior,
    GammaPrior,
    TwoPointPrior,
    complete_monotonicity_check,
    latent_mean_oracle,
    mixture_integral,
)
from .solver import ConvergenceError, DiffusionOperator, cg_solve, dense_oracle
from .restore import (
    RestoreConfig,
    RestoreResult,
    em_restore,
    gradient_descent_restore,
    lagged_diffusivity_restore,
    mean_field_restore,
    objective,
    objective_gradient,
    restore,
)
from .sampler import ChainResult, ChainState, SamplerConfig, gibbs_step, run_chain
from .image_io import load_image, save_image
from .experiments import (
    PRESETS,
    ExperimentPreset,
    add_noise,
    export_edge_map,
    make_test_image,
    psnr,
    make_test_image_masks,
)

__all__ = [
    "CapabilityError",
    "ChainResult",
    "ChainState",
    "ConvergenceError",
    "ConvolutionOperator",
    "DiffusionOperator",
    "ExperimentPreset",
    "ExponentialDiffusivityPrior",
    "GammaPrior",
    "IdentityOperator",
    "PRESETS",
    "RestoreConfig",
    "RestoreResult",
    "SamplerConfig",
    "TwoPointPrior",
    "add_noise",
    "cg_solve",
    "complete_monotonicity_check",
    "dense_oracle",
    "diffusion_diagonal",
    "divergence",
    "edge_statistic",
    "em_restore",
    "export_edge_map",
    "gaussian_kernel",
    "gibbs_step",
    "gradient",
    "gradient_descent_restore",
    "gradient_variance",
    "indicator_gradient_sq",
    "lagged_diffusivity_restore",
    "latent_mean_oracle",
    "load_image",
    "make_test_image",
    "mean_field_restore",
    "mixture_integral",
    "objective",
    "objective_gradient",
    "psnr",
    "restore",
    "run_chain",
    "save_image",
    "make_test_image_masks",
]
