"""Koopman-lifted adaptive identification and one-step control of planar robots."""

from .control import (ClosedLoopRecord, ControlProblem, affine_form, box_lp_value,
                      closed_loop_run, effective_gain, optimal_control, solve_box_lp)
from .errors import (ConfigurationError, DivergenceError, EvaluationError, KoopctlError,
                     RejectedSampleError)
from .ident import (BilinearKoopmanModel, BilinearLayout, LinearKoopmanModel, OperatingPoint,
                    RlsEstimator, batch_least_squares, bilinear_regressor,
                    build_bilinear_regressor, build_linear_regressor, compute_f0_reference,
                    linear_regressor, predict, regularized_least_squares, rls_step)
from .kernels import BACKEND
from .observables import (KoopmanState, LiftedSample, ObservableSet, generate_trajectory, lift,
                          linear_observables)
from .robots import ExcitationSpec, RobotSystem, excitation, excitation_signal, step
from .utility import UtilityBank, UtilityParams, eval_components, total_utility
from .validation import ValidationReport, rollout_approx_model, validate, validation_errors

__version__ = "0.1.0"
