"""Branches of relative equilibria bifurcating, with symmetry breaking, from
steady torus motions of simple mechanical systems with compact symmetry.

The package computes, at a symmetric base configuration: the locked inertia
tensor and its identities, the symmetry-adapted splittings of the algebra and
its dual, the blow-up regularization of the amended potential, certified
branch seeds, continued branches of relative equilibria, and their formal
stability for abelian symmetry.
"""

from .branching import (Branch, BranchPoint, SeedResult, SliceChart, Stability,
                        amended_limit, amended_on_slice, blown_up_orbit_gradient,
                        blown_up_potential, continue_branch, find_seed,
                        make_slice, orbit_gradient, read_branch_csv,
                        seed_jacobian, slice_gradient, verify_branch,
                        write_branch_csv)
from .catalog import CATALOG, CatalogEntry, make_system
from .errors import (BadParams, ConfigError, DeltaDegenerate, DimensionMismatch,
                     GeoTolerance, InZMu, IsotropyNotInTorus, LeftChart,
                     MetricDegenerate, NewtonDiverged, NonAbelian, NonFinite,
                     NotInTorus, SingularInertia, StepFailed, SymbreakError,
                     SymmetricPoint, TrivialIsotropyFailed, UnknownSystem)
from .geometry import (DiffScheme, MetricField, christoffel, dir_derivative,
                       integrate_geodesic, riemannian_exp)
from .lie import LieAlgebra, abelian_algebra, is_regular, so3_algebra, \
    split_torus_complement
from .mechanics import (ChartSystem, IdentityReport, amended_potential,
                        augmented_potential, d_amended, d_augmented, exp_ray,
                        generator_matrix, locked_inertia, momentum,
                        validate_system, verify_identities,
                        verify_steady_motion)
from .reduction import (BetaFamily, LSData, ZetaPath, base_torus_velocity,
                        beta_family, extended_velocity, ls_data, momentum_path,
                        solve_isotropy_velocity, transverse_residual,
                        velocity_system_matrix, velocity_system_offset)
from .splittings import (SymmetryAnalysis, analyze_symmetry,
                         check_center_conditions, check_torus_equilibria)
from .stability import (classify_branch, classify_definiteness,
                        formal_stability, slice_hessian)

__version__ = "0.1.0"
