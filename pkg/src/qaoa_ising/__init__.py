"""Digitized quantum annealing and QAOA on the antiferromagnetic Ising ring.

Energies are computed through the free-fermion (pseudo-spin) reduction,
angles are optimised with an adjoint gradient and BFGS, and a dense
state-vector simulator serves as an independent check on small rings.
"""

from .model import Boundary, ChainSpec, EnergyReport, Gradient, OptimResult, QaoaAngles
from .fermion import (digitize, energy_expectation, epsilon_k, evaluate, k_grid, propagate_mode,
                      residual_energy, rotate, schedule_duration)
from .gradient import finite_diff_gradient, value_and_gradient
from .optimize import (MinimaSearch, NumericalFailure, OptimOptions, cost_accounting, enumerate_minima,
                       field_continuation, interpolate_angles, minimize, regular_ladder, regular_schedule)
from .dynamics import (AnnealSchedule, ScalingFit, Variant, bloch_evolve, digitized_evolve, linear_schedule,
                       roland_cerf_schedule, scaling_fit, step_discretize, tune_roland_cerf)
from .ed import eps_res_ed

__version__ = "0.1.0"
