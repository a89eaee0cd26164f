"""linecut: convex partitions of the plane enclosing two line families.

Exact-rational geometry kernel, enclosure measures, equitable two/three-cut
search, a recursive partition solver with machine-checkable certificates, and
adversarial instances showing the n^(1/r) dependence is tight.
"""

from .geometry import (
    DOWN,
    Direction,
    GeneralPositionReport,
    GeometryError,
    HalfPlane,
    Line,
    LineFamily,
    ParallelLines,
    Point,
    Ray,
    Region,
    Scalar,
    choose_reference_direction,
    incidence_set,
    intersect_lines,
    joint_family,
    perturb_intercepts,
    rat,
    validate_general_position,
)
from .enclosure import (
    BoundaryDegeneracy,
    DegenerateWedge,
    EnclosureGraph,
    EnclosureWitness,
    PosetDecomposition,
    PosetInvalid,
    Wedge,
    build_enclosure_graph,
    build_poset_decomposition,
    mu_exact,
    mu_halfplane,
    verify_witness,
    wedge_dilworth,
)

__version__ = "0.1.0"
