"""Optimal transport between measures on discretized paths and loops
over compact groups: group geodesics, path distances, exact and entropic
Kantorovich solvers with dual potentials, displacement fields and
Wasserstein geodesics of empirical measures."""

from .accel import backend
from .groups import (
    SO3,
    Group,
    GroupMismatchError,
    Heisenberg,
    HeisenbergGeodesicParams,
    MetricData,
    Torus,
    geodesic_point,
    group_from_tag,
    heisenberg_geodesic,
    heisenberg_geodesic_velocity,
    integrate_geodesic,
    levi_civita,
    metric_from_structure,
)
from .paths import (
    CameronMartinVector,
    CylindricalFunction,
    DiscreteLoop,
    DiscretePath,
    EmpiricalMeasure,
    GridMismatchError,
    cameron_martin_distance,
    cylindrical_gradient,
    green_kernel,
    h_inner,
    hat_basis,
    l2_distance,
    pointwise_product,
    sample_brownian_path,
    sample_loop,
    trapezoid_weights,
    uniform_distance,
)
from .ot import (
    CostMatrix,
    Coupling,
    DualPotentials,
    LipschitzReport,
    SinkhornError,
    SolverError,
    assignment_margin,
    c_transform,
    cost_matrix,
    dual_from_primal,
    lipschitz_check,
    solve_exact,
    solve_sinkhorn,
)
from .transport import (
    DisplacementField,
    InterpolationResult,
    ctransform_value,
    directional_derivative,
    displacement_field,
    displacement_interpolation,
    has_cut_pair,
    interpolate_measure,
    interpolate_path,
    mollifier_extract,
    potential_gradient,
    reconstruct_geodesic_from_velocity,
    reconstruct_map,
    window_average,
)
from .bundles import measure_from_dict, measure_to_dict, read_bundle, write_bundle

__version__ = "0.1.0"
