"""idlalab: internal-DLA clusters, odometer fields, divisible sandpiles and
lattice Green's functions on Z^d, with Monte Carlo verification of their
limit laws."""

from .green import (ChiLaw, GreensTable, chi_law, chi_variance_paper, free_green,
                    green_asymptotic, hit_probability, stopped_green_column,
                    stopped_green_exact)
from .idla import (Cluster, GrowthRecord, OdometerField, UntrackedSiteError,
                   grow, grow_for_radius, odometer_at)
from .lattice import (ball_sites, ball_volume, discrete_laplacian, in_ball,
                      neighbors, norm_sq, scale_point)
from .limits import (limit_f, limit_integral_check, near_origin_prediction,
                     timescale_constant, timescale_integral)
from .rng import WalkRng
from .sandpile import (ConvergenceError, MassField, SandpileOdometer, gamma_field,
                       gamma_fn, gamma_limit, laplacian_residual, majorant_check,
                       majorant_limit, relax)
from .stats import EnsembleStats
from .verify import (measure_fluctuations, verify_theorem1, verify_theorem2,
                     verify_timescale)
from .walks import (StepBudgetExceeded, WalkOutcome, hitting_before_exit,
                    hitting_frequency, visit_count_ensemble, walk_until_exit_ball,
                    walk_until_exit_set)

__version__ = "0.1.0"
