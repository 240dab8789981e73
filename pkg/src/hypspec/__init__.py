"""Spectra, partitions, and eigenvalue certificates for closed
hyperbolic surfaces glued from pairs of pants."""

from .errors import (
    ConvergenceError,
    HypspecError,
    InternalConsistencyError,
    InvalidGeometryError,
    InvalidInputError,
    MeshQualityError,
    ResourceLimitError,
    SpecValidationError,
)
from .hypgeom import (
    CuffLengths,
    TriangleAngles,
    TriangleSides,
    median_length,
    midline_length,
    pants_seams,
    right_hexagon_fan,
    side_from_sides_angle,
    triangle_angles,
    triangle_area,
    triangle_area_from_sides,
)
from .surface import (
    MAX_TRIANGLES,
    CellGraph,
    CuffCycle,
    Gluing,
    Mesh,
    Surface,
    SurfaceSpec,
    assemble,
    cell_graph,
    coarse_mesh,
    read_hypmesh,
    subdivide,
    systole_upper_bound,
    triangulate,
    write_hypmesh,
)
from .spectral import (
    SpectralPair,
    Spectrum,
    assemble_fem,
    lowest_eigs,
    minimax_upper_bound,
    rayleigh,
)
from .partition import (
    BoundedGraph,
    Certificate,
    CheegerEstimate,
    Partition,
    certify_lower_bound,
    choose_block_exponent,
    discrete_cheeger,
    partition_bounded,
)
from .family import (
    ChainBlock,
    SharpnessReport,
    build_block_ring,
    build_chain_block,
    disjoint_test_functions,
    staircase_function,
    verify_sharpness,
)

__version__ = "0.1.0"

__all__ = [
    "BoundedGraph",
    "Certificate",
    "CellGraph",
    "ChainBlock",
    "CheegerEstimate",
    "ConvergenceError",
    "CuffCycle",
    "CuffLengths",
    "Gluing",
    "HypspecError",
    "InternalConsistencyError",
    "InvalidGeometryError",
    "InvalidInputError",
    "MAX_TRIANGLES",
    "Mesh",
    "MeshQualityError",
    "Partition",
    "ResourceLimitError",
    "SharpnessReport",
    "SpecValidationError",
    "SpectralPair",
    "Spectrum",
    "Surface",
    "SurfaceSpec",
    "TriangleAngles",
    "TriangleSides",
    "assemble",
    "assemble_fem",
    "build_block_ring",
    "build_chain_block",
    "cell_graph",
    "certify_lower_bound",
    "choose_block_exponent",
    "coarse_mesh",
    "discrete_cheeger",
    "disjoint_test_functions",
    "lowest_eigs",
    "median_length",
    "midline_length",
    "minimax_upper_bound",
    "pants_seams",
    "partition_bounded",
    "rayleigh",
    "read_hypmesh",
    "right_hexagon_fan",
    "side_from_sides_angle",
    "staircase_function",
    "subdivide",
    "systole_upper_bound",
    "triangle_angles",
    "triangle_area",
    "triangle_area_from_sides",
    "triangulate",
    "verify_sharpness",
    "write_hypmesh",
]
