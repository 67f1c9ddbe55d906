"""Flexible antenna array simulator.

Models arrays whose surface shape (rotation, bend, fold) is set by a single
scalar angle, synthesizes the resulting multipath channels, and evaluates
channel power, angle Cramer-Rao bounds, and multi-sector zero-forcing
sum-rates, with a Gaussian-process optimizer for the shape angles.
"""

__version__ = "0.1.0"

from .bayesopt import (GpDataset, GpPosterior, Kernel, OptimizeResult, expected_improvement,
                       gp_posterior, kernel_eval, optimize, propose_next)
from .channel import (MultiSectorChannel, PathSet, array_manifold, channel_power,
                      channel_power_expansion, flexible_channel, full_channel,
                      manifold_derivatives, sector_channel_matrix)
from .errors import (ConfigError, FlexArrayError, GramConditionError, OptimizationError,
                     PatternBoundaryError, RankDeficiencyError, SingularFisherError)
from .estimation import (FisherMatrix, channel_param_derivatives, crb, fisher_matrix,
                         mean_angle_crb, optimal_psi_for_crb, stack_parameters)
from .geometry import (ArrayConfig, ArrayGeometry, FlexModel, bent_geometry, flex_geometry,
                       folded_geometry, mounted_geometry, planar_positions, rotated_geometry)
from .harness import (Scenario, StrategyResult, generate_scenario, optimize_strategy,
                      run_experiment)
from .precoding import (PrecodingResult, effective_gain, jfp_sumrate, sfp_sumrate,
                        single_sector_sumrate, sjfp_sumrate, zf_precoder, zf_solution)
from .radiation import (PatternKind, PatternSpec, element_pattern_vector,
                        normalization_integral, pattern_coefficient, pattern_derivatives,
                        pattern_gain, wrap_angle)

__all__ = [name for name in dir() if not name.startswith("_")]
