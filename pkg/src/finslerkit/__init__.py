"""Finsler metrics near the boundary of convex domains."""

from .domains import (
    Ball,
    BoundaryFrame,
    Domain,
    Ellipsoid,
    HalfSpace,
    ImplicitSmooth,
    Intersection,
    Polytope,
    Slab,
    boundary_distance,
    boundary_frame,
    contains,
    domain_from_dict,
    dump_domain,
    line_boundary_distance,
    load_domain,
    ray_boundary_distance,
    signed_distance,
)
from .errors import (
    CollarError,
    ConvergenceError,
    DimensionError,
    GeometryError,
    GraphDisconnectedError,
    NonUniqueProjectionError,
    OutsideDomainError,
    UnsupportedDomainError,
)
from .harness import SUITES, ExperimentConfig, coverage_table, run_suite
from .intrinsic import (
    GraphConfig,
    PathGraph,
    Polyline,
    QuadratureSpec,
    equidistant_path,
    graph_distance,
    gromov_delta,
    normal_segment_length,
    path_length,
    relax_path,
)
from .metrics import (
    BeltramiKlein,
    BoundTemplate,
    BoundTemplateMetric,
    Funk,
    HalfSpaceMinimal,
    KobayashiHilbert,
    QuasiHyperbolic,
    beltrami_klein,
    classify_boundary_point,
    delta_k,
    funk,
    hilbert_distance_closed_form,
    kobayashi_hilbert,
    parse_metric,
    q_k,
)
from .quasi import QuasiDistanceParams, a_D, d_c, quasi_triangle_constant
from .reports import Check, VerificationReport
from .subspace import DeltaKOptions, SubspaceFrame, solve_delta_k

__version__ = "0.1.0"

__all__ = [
    "Ball",
    "BoundaryFrame",
    "Domain",
    "Ellipsoid",
    "HalfSpace",
    "ImplicitSmooth",
    "Intersection",
    "Polytope",
    "Slab",
    "boundary_distance",
    "boundary_frame",
    "contains",
    "domain_from_dict",
    "dump_domain",
    "line_boundary_distance",
    "load_domain",
    "ray_boundary_distance",
    "signed_distance",
    "CollarError",
    "ConvergenceError",
    "DimensionError",
    "GeometryError",
    "GraphDisconnectedError",
    "NonUniqueProjectionError",
    "OutsideDomainError",
    "UnsupportedDomainError",
    "GraphConfig",
    "PathGraph",
    "Polyline",
    "QuadratureSpec",
    "equidistant_path",
    "graph_distance",
    "gromov_delta",
    "normal_segment_length",
    "path_length",
    "relax_path",
    "BeltramiKlein",
    "BoundTemplate",
    "BoundTemplateMetric",
    "Funk",
    "HalfSpaceMinimal",
    "KobayashiHilbert",
    "QuasiHyperbolic",
    "beltrami_klein",
    "classify_boundary_point",
    "delta_k",
    "funk",
    "hilbert_distance_closed_form",
    "kobayashi_hilbert",
    "parse_metric",
    "q_k",
    "SUITES",
    "ExperimentConfig",
    "coverage_table",
    "run_suite",
    "QuasiDistanceParams",
    "a_D",
    "d_c",
    "quasi_triangle_constant",
    "Check",
    "VerificationReport",
    "DeltaKOptions",
    "SubspaceFrame",
    "solve_delta_k",
]
