"""Tree metrics on R^n and the Brownian fields they index.

Radial and river metrics, finite-set tree-metric certification,
closed-form beyond-point regions, the field covariance model with a
Cholesky oracle, and exact increment simulators.
"""

from .field import (
    CholeskyFactor,
    CovMatrix,
    NotPSD,
    SampleBatch,
    cholesky_psd,
    covariance_matrix,
    field_generator,
    increment_covariance,
    increment_indep_member,
    increment_indep_rows,
    sample_exact,
    tree_covariance,
)
from .geometry import (
    DEFAULT_TOL,
    DimensionError,
    InvalidPoint,
    RayPoint,
    Tolerance,
    as_point,
    collinear_through_origin,
    same_directed_ray,
    to_ray_point,
)
from .metrics import (
    DistanceMatrix,
    LinearFamily,
    MedianError,
    MetricKind,
    PowerFamily,
    distance,
    distance_matrix,
    distance_rows,
    gromov_median,
    radial_distance,
    river_distance,
    segment_contains,
)
from .regions import (
    BOUNDARY,
    INSIDE,
    OUTSIDE,
    FitError,
    MismatchRecord,
    RadialRegion,
    RiverRegion,
    beyond_member,
    beyond_member_rows,
    cauchy_fit,
    closed_form_region,
    radial_region,
    region_classify_rows,
    region_contains,
    region_equivalence_scan,
    river_region,
)
from .simulate import (
    NotLabelled,
    NotOrdered,
    RadialPlan,
    RiverPlan,
    induced_covariance_radial,
    induced_covariance_river,
    radial_plan,
    river_closure,
    river_plan,
    simulate_radial,
    simulate_river,
)
from .tree_checks import (
    ViolationReport,
    check_condition_b,
    four_point_holds,
    four_point_slacks,
    is_tree_metric,
    is_ultrametric,
    ultrametric_violation,
)
from .verify import VerifyReport, mc_covariance_test, oracle_batch, run_verify_suite

__version__ = "0.1.0"
