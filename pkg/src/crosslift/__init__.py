"""crosslift: shape reconstruction from arbitrarily oriented planar
cross-sections, with verified sampling conditions and topology checks.

The reconstruction rule is nearest-point membership: a point belongs to the
reconstructed object iff one of its nearest points on the cutting-plane
arrangement lies inside a cross-section.
"""

from .arrangement import (
    Arrangement,
    Cell,
    Face,
    NearestFaces,
    build_arrangement,
    cell_height,
    chebyshev_center,
    nearest_face,
)
from .conditions import (
    CellConditions,
    ConditionReport,
    check_boundary_cut,
    check_density,
    check_separation_sampled,
    check_transversality,
    contact_angles,
    evaluate_conditions,
)
from .geometry import (
    Box,
    GeneralPositionViolation,
    GeometryError,
    Hyperplane,
    INSIDE,
    Interval,
    ON_BOUNDARY,
    OUTSIDE,
    PolygonWithHoles,
    Tolerance,
    point_in_polygon,
    signed_distance,
)
from .harness import ScenarioReport, run_scenario, sweep
from .lifting import LiftResult, LiftedPolyline, lift_overlap_components, lift_point, lift_polyline
from .reconstruction import (
    IndicatorGrid,
    Mesh3D,
    Reconstruction2D,
    SectionSet,
    extract_mesh_3d,
    in_reconstruction,
    in_reconstruction_batch,
    reconstruct_2d,
    reconstruct_convex_mode,
    reconstruction_grid,
)
from .scene import Scene, SceneError
from .shapes import (
    Annulus2D,
    Ball,
    BentSweep,
    Capsule,
    Disk2D,
    MedialSample,
    Shape,
    SolidTorus,
    Tube,
)
from .topology import (
    ConnectivityPartition,
    TopologySummary,
    betti_2d,
    component_bijection,
    cubical_betti_2d,
    cubical_betti_3d,
)

__version__ = "0.1.0"
