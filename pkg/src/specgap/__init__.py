"""Spectral gaps of compact metric graphs with standard vertex conditions.

The package computes the lowest nonzero eigenvalue of the Laplacian on
compact metric graphs (continuity plus flux balance at vertices), with an
exact solver for pumpkin chains, a finite-element solver for arbitrary
graphs, the chain reduction that never decreases the gap, closed-form
diameter/vertex-count bounds, and the construction of near-optimal chain
families that approach the sharp bound.
"""

from .bounds import (
    BoundReport,
    bound_report,
    chain_upper,
    edge_count_upper,
    friedlander_lower,
    kkmm_combinatorial_upper,
    kkmm_diameter_upper,
    sharp_combinatorial_upper,
    sharp_diameter_upper,
)
from .chains import (
    Piece,
    PiecewiseLinear,
    PiecewiseTrig,
    PumpkinChain,
    Segment,
    SpectralResult,
    as_metric_graph,
    chain_from_json_obj,
    chain_to_json_obj,
    eigenfunction,
    eigenvalue,
    prufer_sweep,
    rayleigh_quotient,
    read_chain,
    secular_m2,
    test_function_psi1,
    test_function_psi2,
    weight_at,
    weighted_integral,
    write_chain,
)
from .errors import (
    ConvergenceError,
    InputError,
    ParseError,
    ReductionError,
    SpecgapError,
    ValidationError,
)
from .extremal import (
    ExtremalSpec,
    PhasePlan,
    build_chain,
    build_eigenfunction,
    build_spec,
    matching_residuals,
    multiplicities,
    phase_plan,
    splice_coefficients,
    theta_from_n,
    verify,
)
from .fem import DiscretizedForms, FemResult, discretize, lambda1_numeric
from .graphs import (
    Edge,
    GraphPoint,
    MetricGraph,
    combinatorial_diameter,
    cut_pendant,
    diameter,
    distance,
    graph_from_json_obj,
    graph_to_json_obj,
    identify_vertices,
    insert_points,
    read_graph,
    shorten_edge,
    vertex_point,
    write_graph,
)
from .reduction import (
    PathRecord,
    ReductionTrace,
    choose_endpoints,
    collapse_levels,
    edges_on_simple_paths,
    enumerate_paths,
    equalize_path_lengths,
    prune_to_union,
    reduce,
    synchronize_levels,
    yen_paths,
)

__version__ = "0.1.0"
