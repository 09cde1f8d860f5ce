"""Error-state LQR for quadrotor trajectory tracking.

Modules
-------
rotations     SO(3)/quaternion primitives
vehicle       parameters and true/nominal dynamics
error_state   error compositions, error dynamics, Jacobians
riccati       CARE solver and LQR gain
controllers   outer LQR step and inner bodyrate law
trajectory    hover and lemniscate references via differential flatness
simulation    RK4 closed loop, logging, metrics
cli           ``eslqr`` command
"""

from .controllers import BodyrateGains, bodyrate_torque, lqr_step
from .error_state import ErrorControl, ErrorState
from .riccati import CareError, CareSolution, LqrWeights, solve_care
from .simulation import SimConfig, SimLog, compute_metrics, run_closed_loop
from .trajectory import LemniscateParams, hover_trajectory, lemniscate_trajectory
from .vehicle import Control, NominalState, TrueState, VehicleParams, Wrench

__version__ = "0.1.0"
