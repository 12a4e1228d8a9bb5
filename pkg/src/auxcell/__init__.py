"""auxcell: inverse homogenization of 2D periodic four-phase unit cells.

A periodic P1 cell solver drives a two-level-set shape optimization of
the homogenized elasticity tensor toward prescribed targets (for
example a negative apparent Poisson ratio).
"""

from .mesh import UnitCellMesh, build_mesh, periodic_dof_count
from .materials import (ElasticTensor4, PhaseSet, isotropic_tensor,
                        heaviside, heaviside_derivative, interpolate_tensor,
                        phase_densities, a_star, h_star)
from .fem import (CellSolutions, assemble_stiffness, material_field,
                  solve_cell_problems)
from .homogenization import (ObjectiveSpec, apparent_poisson,
                             homogenized_tensor, objective)
from .levelset import (MultiLevelSet, cfl_timestep, init_pattern,
                       reinitialize, transport)
from .velocity import (ConstraintState, extend_velocity, multiplier_update,
                       phase_volumes, velocity_integrand)
from .optimizer import OptState, Problem, RunHistory, run, step
from .config import Config, parse_config, preset_config, serialize_config
from .runner import build_problem, build_state, homogenize_config, run_config

__version__ = "0.1.0"
