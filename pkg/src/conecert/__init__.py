"""Numerical certificates and solutions for positive solutions of
second-order boundary value problems with jump nonlinearities, plus a
planar closed-convex-envelope engine for discontinuous maps."""

__version__ = "0.1.0"

from .certifier import (
    Certificate,
    Condition,
    certificate_json,
    certificate_to_dict,
    certify,
    compute_M,
    compute_m,
)
from .cone import (
    ConeSpec,
    GridFunction,
    cone_member,
    min_on_interval,
    norm_sup,
    v_rho_boundary_distance,
)
from .envelope2d import (
    AnnulusScanReport,
    EnvelopeApprox,
    annulus_fixed_point_scan,
    cc_envelope,
    convex_hull,
    envelope_condition_check,
    hausdorff_distance,
    point_hull_distance,
    polar_jump_operator,
    polygon_diameter,
    sample_ball_cone,
    usc_sequence_probe,
)
from .errors import (
    AdmissibilityError,
    ConecertError,
    ConfigError,
    CoverageError,
    DegenerateWeightError,
    DivergenceError,
    DomainError,
    EvaluationError,
    ExpressionError,
    OrderingError,
    ParameterError,
)
from .expressions import Expr, parse_expression, parse_predicate
from .hammerstein import (
    ProbeReport,
    Problem,
    QBoundReport,
    Solution,
    annulus_seed,
    apply_T,
    cone_mapping_probe,
    make_problem,
    q_bound_check,
    random_cone_member,
    residual,
    solve_fixed_point,
)
from .kernels import (
    BoundaryParams,
    H4Report,
    Kernel,
    cone_params,
    green_eval,
    green_kernel,
    phi_of,
    verify_h4,
)
from .nonlinearity import (
    BoundsReport,
    Curve,
    CurveCheck,
    Nonlinearity,
    Piece,
    check_curve_inviable,
    check_curve_viable,
    classify_curve,
    f_eval,
    f_lower,
    f_upper,
    f_values,
    growth_bound_value,
)
from .quadrature import (
    Grid,
    ParamExtremum,
    Weight,
    inf_param_integral,
    integrate_weighted,
    refine,
    sup_param_integral,
    uniform_grid,
)
from .config import (
    ProblemConfig,
    build_problem,
    load_config,
    parse_config,
    serialize_config,
)
