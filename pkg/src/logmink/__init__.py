"""Discrete logarithmic Minkowski problem toolkit.

Solves ``V_K = mu`` for polytopes invariant under a finite reflection group,
computes cone-volume and surface-area measures, exact discrete optimal
transport distances on the sphere, and the explicit constructions used to
probe forward and inverse stability of the problem.
"""

from . import constructions, coxeter, geometry, measures, solver
from .coxeter import (
    InvariantDecomposition,
    ReflectionGroup,
    enumerate_invariant_subspaces,
    generate_group,
    invariant_decomposition,
    symmetrize_measure,
    symmetrize_supports,
)
from .geometry import (
    BodyMetrics,
    FacetComplex,
    HPolytope,
    build_facet_complex,
    direct_sum,
    hausdorff_distance,
    norm_in_difference_body,
    radii_and_centroid,
    support_eval,
    volume,
)
from .measures import (
    DiscreteSphericalMeasure,
    SCCReport,
    bounded_lipschitz,
    check_quantitative_concentration,
    check_subspace_concentration,
    cone_volume_measure,
    surface_area_measure,
    tube_mass,
    wasserstein,
)
from .solver import (
    SolveOptions,
    SolveReport,
    solve_any_mass,
    solve_log_minkowski,
    verify_solution,
)
from .constructions import (
    StabilityConstants,
    chopped_cube,
    diagonal_stretch,
    non_splitting_margin,
    stability_constants,
    stretched_direct_sum,
    two_point_measure,
)

__version__ = "0.1.0"
