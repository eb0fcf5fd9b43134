"""Kerr-modified cavity magnomechanics: fixed points, stability, dynamics and
Gaussian entanglement of a driven cavity-magnon-phonon system."""

from .dynamics import (EntanglementAverage, LimitCycleReport, LyapunovEstimate, Trajectory,
                       detect_limit_cycle, integrate_covariance, integrate_mean_field,
                       max_lyapunov_exponent, perturb, select_fixed_point,
                       steady_entanglement, time_averaged_entanglement)
from .errors import (BistabilitySignError, ConfigError, DomainError, InsufficientDataError,
                     IntegrationError, KerrMagnoError, NoKerrTurningPoints,
                     NoStationaryStateError, NumericalError, PhysicalityError)
from .gaussian import (WignerField, anisotropy, diffusion_matrix, entanglement,
                       initial_covariance, is_physical, log_negativity, nu_minus,
                       partial_transpose, reduce_two_mode, squeezing_degree,
                       steady_covariance, symplectic_eigenvalues, wigner_field)
from .params import (DerivedParams, SystemParams, derive, drive_amplitude, load_params,
                     params_from_dict, params_to_dict, reference_params, save_params,
                     thermal_occupation)
from .stability import (DriftMatrix, FixedPointReport, PhasePoint, classify_fixed_point,
                        classify_phase, drift_matrix, mean_field_rhs)
from .steady import (CubicSolution, MeanState, bistable_amplitude_window,
                     bistable_power_window, critical_drive, fixed_points,
                     magnon_intensities, mean_state_from_intensity, switching_points,
                     three_root_discriminant)
from .sweep import Axis, SweepResult, SweepSpec, bistability_curve, preset, run_sweep

__version__ = "0.1.0"
