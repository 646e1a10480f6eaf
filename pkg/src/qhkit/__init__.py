"""qhkit: quasihyperbolic lengths, short arcs, domain constants, map distortion."""

from .common import ConstantEstimate
from .conditions import (
    SolidityEstimate,
    cigar_constant,
    cone_constant,
    mu1_bound,
    mu3_constant,
    solidity_estimate,
    uniform_k_bound,
    uniformity_estimate,
)
from .domains import (
    ArcPolyline,
    Ball,
    CustomDomain,
    Domain,
    HalfSpace,
    PuncturedBall,
    SlitDisk,
    domain_from_spec,
    euclidean_shortest_arc,
    sample_interior,
)
from .errors import (
    ArcExitsDomainError,
    ConfigError,
    DegenerateDomainError,
    InvalidInputError,
    NotConnectedError,
    QhkitError,
    SamplingExhaustedError,
    UndefinedRatioError,
)
from .experiments import (
    EXPERIMENT_NAMES,
    ExperimentConfig,
    ExperimentReport,
    run_experiment,
    write_report,
)
from .maps import (
    Composition,
    Identity,
    Linear,
    MapConstants,
    MoebiusDiskAutomorphism,
    PowerRadial,
    Scaling,
    Translation,
    chain_image_bound,
    chain_points,
    cqh_estimate,
    dilatation_estimate,
    eta_envelope,
    lambda2_bound,
    map_arc,
    map_from_spec,
    solid_params_from_cqh,
    weak_qs_estimate,
)
from .paths import (
    PathGraph,
    ShortArcResult,
    build_path_graph,
    graph_k_eval,
    load_path_graph,
    qh_shortest_arc,
    save_path_graph,
    shorten_arc,
)
from .qh_metric import (
    CoarseLengthResult,
    QhLengthResult,
    coarse_qh_length,
    growth_lower_bound,
    halfspace_geodesic_points,
    halfspace_k_eval,
    halfspace_qh_distance,
    qh_polyline_length,
)

__version__ = "0.1.0"

__all__ = [
    "ArcExitsDomainError",
    "ArcPolyline",
    "Ball",
    "CoarseLengthResult",
    "Composition",
    "ConfigError",
    "ConstantEstimate",
    "CustomDomain",
    "DegenerateDomainError",
    "Domain",
    "EXPERIMENT_NAMES",
    "ExperimentConfig",
    "ExperimentReport",
    "HalfSpace",
    "Identity",
    "InvalidInputError",
    "Linear",
    "MapConstants",
    "MoebiusDiskAutomorphism",
    "NotConnectedError",
    "PathGraph",
    "PowerRadial",
    "PuncturedBall",
    "QhLengthResult",
    "QhkitError",
    "SamplingExhaustedError",
    "Scaling",
    "ShortArcResult",
    "SlitDisk",
    "SolidityEstimate",
    "Translation",
    "UndefinedRatioError",
    "build_path_graph",
    "chain_image_bound",
    "chain_points",
    "cigar_constant",
    "coarse_qh_length",
    "cone_constant",
    "cqh_estimate",
    "dilatation_estimate",
    "domain_from_spec",
    "eta_envelope",
    "euclidean_shortest_arc",
    "graph_k_eval",
    "growth_lower_bound",
    "halfspace_geodesic_points",
    "halfspace_k_eval",
    "halfspace_qh_distance",
    "lambda2_bound",
    "load_path_graph",
    "map_arc",
    "map_from_spec",
    "mu1_bound",
    "mu3_constant",
    "qh_polyline_length",
    "qh_shortest_arc",
    "run_experiment",
    "sample_interior",
    "save_path_graph",
    "shorten_arc",
    "solid_params_from_cqh",
    "solidity_estimate",
    "uniform_k_bound",
    "uniformity_estimate",
    "weak_qs_estimate",
    "write_report",
]
