"""fwkit: numerics for small-noise drift dynamics.

Given a drift field b(x), the toolkit samples the perturbed dynamics
dX = b dt + sqrt(2 eps) dW, computes most probable paths and their costs,
evolves the rate-function Hamilton-Jacobi equation on grids, and evaluates
nonequilibrium diagnostics, with closed-form linear-drift oracles for
validation.
"""

__version__ = "0.1.0"

from .errors import (BlowUpError, ConfigError, FwkitError, NoMonotonePathError,
                     QuadratureError)
from .fields import (DriftField, FieldSpec, build_field, check_decomposition,
                     curl_component, eval_jacobian, fd_jacobian)
from .simulate import (PathSample, RateReport, RateRow, Region, euler_maruyama,
                       ode_solve, path_weight_exponent, rare_event_probability,
                       rate_sweep, step_normals)
from .mechanics import (CharacteristicTrajectory, Equilibrium,
                        HamiltonianTrajectory, PhasePoint, action,
                        classify_equilibria, hamiltonian, integrate_hamiltonian,
                        lagrangian, phase_contour, solve_characteristics)
from .mpp import MppResult, mpp_minimize, mpp_shoot_1d, uphill_action_1d
from .hje import (EvolveResult, GridAxis, GridFn, ModalTrace,
                  characteristic_solution, hje_evolve, stationary_rate_1d,
                  track_minimum)
from .oracle import KernelMoments, OuState, ou_params, ou_rate, ou_transition_kernel
from .ratefn import (BernoulliSource, CgfTable, EmpiricalRate, GaussianSource,
                     LegendreValue, RateProperties, SampleSource, cgf, legendre,
                     rate_properties, sample_mean_rate)
from .circle import (CircleTrace, CurvatureDecayReport, TorusFixedPoint,
                     circle_flow, curvature_decay_check, limit_cycle_period,
                     torus_fixed_points)
from .neq import (EpEstimate, MomentumLandscapeReport, TimeReversal,
                  entropy_production, lorentz_residual, momentum_landscape_check,
                  sample_stationary, time_reversed_drift)
from .quadrature import adaptive_simpson
