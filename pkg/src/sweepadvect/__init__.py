"""Semi-implicit advection schemes whose implicit systems are solved exactly
by one forward and one backward substitution per step, with a benchmark
harness for error/convergence/mass/oscillation studies."""

from .analysis import (amplification_factor, eoc, final_error, global_error,
                       mass_series, min_series, stencil_coefficients)
from .conservative import (FluxSet, dense_oracle_fv_step, fluxes, solve_fv,
                           step_fv_first_order, step_fv_second_order, total_mass)
from .driver import SchemeConfig, solve
from .grid import Grid1D, TimeGrid, Trajectory, make_grid, sample, sample2d
from .nonconservative import (AlphaPolicy, BoundaryData1D, dense_oracle_step,
                              step_first_order, step_second_order, upwind_gradient)
from .optimizer import (AlphaField, OptimizationReport, descent_step, grad_J,
                        loss_J, optimize_once)
from .problems import BenchmarkProblem, get_problem, problem_names
from .splitting import evolve2d, solve2d, strang_step
from .velocity import (VelocityField1D, ZeroCrossing, cminus, courant, cplus,
                       find_zero_crossings, freeze_midtime)

__version__ = "0.1.0"
