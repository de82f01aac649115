"""Derivative-free hyperparameter search over bounded integer lattices."""

from .acquisition import (
    AcquisitionConfig,
    SpaceExhaustedError,
    probability_of_improvement,
    select_next,
    ucb,
)
from .baselines import CobylaConfig, Particle, PsoConfig, run_cobyla, run_pso, run_random
from .bo import BoConfig, RunAbortedError, run_bo
from .config import ConfigError, RunConfig, default_config, load_config
from .gp import (
    GpModel,
    IllConditionedError,
    KernelConfig,
    Posterior,
    fit,
    fit_centered,
    fit_grid_search,
    kernel_eval,
    kernel_matrix,
    log_marginal_likelihood,
)
from .history import EvalRecord, FailureRecord, History
from .metrics import Image, SsimConfig, mse, psnr, ssim
from .objectives import (
    EvaluationError,
    Objective,
    ObjectiveSpec,
    ObjectiveTimeoutError,
    ProtocolError,
    evaluate,
    gan_proxy,
    make_objective,
    PROXY_PEAK,
)
from .space import (
    LatticeTooLargeError,
    ParamDef,
    ParamPoint,
    SearchSpace,
    default_space,
)

__version__ = "0.1.0"
