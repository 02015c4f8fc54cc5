"""Linear response of chaotic maps with a one-dimensional unstable
manifold, computed as well-conditioned ergodic averages by splitting the
parameter perturbation along and across the unstable direction."""

from .config import RunConfig, load_config_file
from .dynamics import (MAPS, BakerMap, MapModel, Trajectory,
                       generate_trajectory, srb_histogram)
from .errors import (ConfigError, DegenerateTangentError, InvalidStateError,
                     SpaceSplitError)
from .observables import OBSERVABLES, Observable
from .response import (DirectRuelleResult, SensitivityResult, batch_means,
                       direct_ruelle_estimate, s3_sensitivity,
                       stable_contribution, unstable_contribution)
from .tangent import (DiagnosticFrames, TangentFrames, TangentInit,
                      iter_tangent_frames, run_tangent_stack,
                      step_g, step_gamma, step_p, step_regularized_tangent,
                      step_unstable_direction, step_w, step_y)
from .validation import (ResponseCurve, central_difference, convergence_slope,
                         ensemble_average, fd_tolerance, response_curve,
                         unstable_derivative_fd)

__version__ = "0.1.0"

__all__ = [
    "BakerMap", "ConfigError", "DegenerateTangentError", "DiagnosticFrames",
    "DirectRuelleResult", "InvalidStateError", "MAPS", "MapModel",
    "OBSERVABLES", "Observable", "ResponseCurve", "RunConfig",
    "SensitivityResult", "SpaceSplitError", "TangentFrames", "TangentInit",
    "Trajectory", "batch_means", "central_difference", "convergence_slope",
    "direct_ruelle_estimate", "ensemble_average", "fd_tolerance",
    "generate_trajectory", "iter_tangent_frames", "load_config_file",
    "response_curve", "run_tangent_stack", "s3_sensitivity",
    "srb_histogram", "stable_contribution", "step_g", "step_gamma", "step_p",
    "step_regularized_tangent", "step_unstable_direction", "step_w", "step_y",
    "unstable_contribution", "unstable_derivative_fd", "__version__",
]
