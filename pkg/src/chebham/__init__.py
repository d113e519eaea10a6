"""chebham: differential equations solved as ground states of effective
Hamiltonians built in a Chebyshev latent space."""

from .basis import (LatentVector, basis_weights, chebyshev_nodes, chebyshev_value,
                    chebyshev_values, function_state, tau_matrix, tau_state)
from .operators import (LatentOperator, build_B, build_D, build_G_T, build_M_xp,
                        build_N, build_Pa, build_Qa, gram)
from .problems import (DataConstraint, DiffTerm, ProblemSpec, SourceSpec,
                       SpecValidationError, bundled_spec, bundled_spec_ids,
                       maclaurin_coefficients, parse_spec, resolve_shift,
                       shift_transform)
from .assembly import (AssembledProblem, EffectiveHamiltonian, assemble,
                       assemble_constraints, assemble_inhomogeneous,
                       assemble_nde, assemble_ode_constant, assemble_ode_variable,
                       assemble_pde, build_hamiltonian)
from .groundstate import (GroundPrepConfig, ProductSearchResult, QiteResult,
                          SpectrumResult, eigensolve, evolution_time_bound,
                          nde_product_search, qite_evolve)
from .measurement import (OverlapEstimate, SolutionModel, feature_map_unitary,
                          interferometric_1d, interferometric_2d,
                          interferometric_nde, overlap_direct, reconstruct,
                          recover_scale)
from .qsvt import (BlockEncoding, PhaseSequence, block_encode_B, block_encode_D,
                   block_encode_G, block_encode_dense, build_reflection,
                   load_phases, mixed_value, qsp_fit_angles, qsp_value,
                   qsvt_apply, qsvt_prepare_ground)
from .runner import RunReport, StageError, compare, evaluate_grid, run
from .solver import EffectiveHamiltonianSolver, as_spec
from . import registry

__version__ = "0.1.0"
