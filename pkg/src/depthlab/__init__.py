"""depthlab: half-space (Tukey) depth of points and flats for discrete
measures, deep-line search, and cone-structure verification suites."""

from .geometry import (
    Flat,
    HalfSpace,
    SimplicialCone,
    canonical_direction,
    cone_contains,
    halfspace_side,
    line,
    project_point,
    sample_directions,
)
from .measures import (
    DiscreteMeasure,
    MeasureSpec,
    cone_mass,
    generate_measure,
    halfspace_mass,
    load_measure,
    make_measure,
    measure_io,
    project_measure,
    save_measure,
)
from .depth import (
    DepthResult,
    LineSearchResult,
    certified_depth_floor,
    deep_line_search,
    depth_oracle,
    direction_profile,
    flat_depth,
    line_depth_thresholds,
    point_depth,
)
from .median import (
    MedianResult,
    NormalSet,
    WitnessSearchError,
    balanced_median,
    min_normal_set,
    recenter,
    tukey_median,
    witness_tuple,
)
from .cones import (
    BmesReport,
    ConeTuple,
    GeneratingTuple,
    MatchReport,
    MatchingError,
    OrderedFamily,
    bmes_report,
    build_ordered_family,
    cones_of,
    is_generating,
    match_tuples,
    tuple_weight,
)
from .central import (
    CentralConeApprox,
    StructuralTuple,
    central_cone,
    central_vector,
    containment_check,
    e_component,
    structural_map,
)

__version__ = "0.1.0"
