"""Black-box robustness evaluation of classifier/explainer pairs.

Worst-case explanation drift is found by a constrained genetic algorithm;
rare misinterpretation probabilities are estimated by subset simulation.
Both solvers see the target only through the SueHandle batch surface, so
bundled toy models and out-of-process adapters are interchangeable.
"""

from .core import (Metric, MisinterpretationSpec, NormBall, Region, as_point,
                   classification_indicator, prediction_loss, project_to_ball,
                   region_membership, sample_uniform_ball)
from .diagnostics import lipschitz_bound_diagnostic
from .discrepancy import DiscrepancyValue, discrepancy_value, mse, pcc, ssim
from .ga import GaConfig, GaProblem, GaResult, run_ga
from .oracles import SmcResult, grid_worst_case, run_smc, run_smc_event, smc_worst_case
from .rng import RngSpec
from .subset import (SsConfig, SsResult, adaptive_threshold, cov_estimate, run_ss,
                     run_ss_event, smc_equivalent_samples, staged_property)
from .sue import ModelSue, SueHandle, make_builtin_sue
from .bridge import remote_sue_connect

__version__ = "0.1.0"

__all__ = [
    "DiscrepancyValue", "GaConfig", "GaProblem", "GaResult", "Metric",
    "MisinterpretationSpec", "ModelSue", "NormBall", "Region", "RngSpec", "SmcResult",
    "SsConfig", "SsResult", "SueHandle", "adaptive_threshold", "as_point",
    "classification_indicator", "cov_estimate", "discrepancy_value", "grid_worst_case",
    "lipschitz_bound_diagnostic", "make_builtin_sue", "mse", "pcc", "prediction_loss",
    "project_to_ball", "region_membership", "remote_sue_connect", "run_ga", "run_smc",
    "run_smc_event", "run_ss", "run_ss_event", "sample_uniform_ball",
    "smc_equivalent_samples", "smc_worst_case", "ssim", "staged_property",
]
