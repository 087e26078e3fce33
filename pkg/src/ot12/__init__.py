"""Tools for the 1-2 model on the hexagonal lattice.

Exact enumeration, block heat-bath sampling, homogeneous-cluster census,
configuration surgeries with probability bookkeeping, and compatible
3-partition analysis on finite tori and windows.
"""

__version__ = "0.1.0"

from .lattice import (  # noqa: F401
    WHITE,
    BLACK,
    KIND_A,
    KIND_B,
    KIND_C,
    TYPE_I,
    TYPE_II,
    TYPE_III,
    VertexId,
    EdgeId,
    Torus,
    Window,
    BoxSpec,
    CellRect,
    classify_box_vertices,
    corner_hexagons,
    outer_contour,
    neighbors,
)
from .configuration import (  # noqa: F401
    Configuration,
    Weights,
    local_code,
    weight_of,
    violations,
    log_weight,
    flip_edge,
)
from .exact import (  # noqa: F401
    Distribution,
    enumerate_valid,
    partition_function,
    gibbs_conditional,
)
from .sampler import ChainState, init_chain, heat_bath_sweep, metropolis_edge_flip, run  # noqa: F401
from .census import census, clusters_meeting, is_encounter_box, size_statistics  # noqa: F401
from .surgery import (  # noqa: F401
    SurgeryReport,
    rewire_box_interior,
    corner_repair,
    select_trident,
    build_encounter_box,
    probability_factor,
)
from .partitions import (  # noqa: F401
    Partition3,
    TilingSpec,
    is_compatible,
    max_compatible_family,
    partitions_from_encounter_boxes,
    keane_census,
)
