"""Discrete centro-affine lattices and the affine Sierpinski carpets, Menger
sponges and Sierpinski simplices they generate, in any dimension n >= 2."""

from .errors import (
    CompatibilityError,
    DegenerateFrameError,
    DimensionMismatchError,
    DomainError,
    LatticeError,
    ParseError,
)
from .exporter import ExportStyle, export_json, export_obj, export_svg, import_frame, load_json
from .generator import (
    CellGeometry,
    FractalMesh,
    PointLattice,
    assemble_mesh,
    assemble_mesh_cells_only,
    default_frame,
    generate_mesh,
    generate_points_matrix,
    generate_points_recurrence,
    verify_structure,
)
from .index_sets import (
    CellSet,
    FractalKind,
    Kind,
    count_closed_form,
    enumerate_cells,
    simplex_member,
    sponge_member,
    triangle_block_matrix,
)
from .lattice_core import (
    Frame,
    FrameMode,
    InvariantTable,
    TransitionMatrix,
    canonical_matrices,
    check_compatibility,
    check_hyperplane_criterion,
    check_self_similarity,
    compute_invariants_affine,
    compute_invariants_centroaffine,
    double_step,
    frame_transport,
    structure_step,
)
from .slicer import Slice, SlicePiece, SliceSeries, pair_labels, slice_series

__version__ = "0.1.0"

__all__ = [
    "CellGeometry",
    "CellSet",
    "CompatibilityError",
    "DegenerateFrameError",
    "DimensionMismatchError",
    "DomainError",
    "ExportStyle",
    "FractalKind",
    "FractalMesh",
    "Frame",
    "FrameMode",
    "InvariantTable",
    "Kind",
    "LatticeError",
    "ParseError",
    "PointLattice",
    "Slice",
    "SlicePiece",
    "SliceSeries",
    "TransitionMatrix",
    "assemble_mesh",
    "assemble_mesh_cells_only",
    "canonical_matrices",
    "check_compatibility",
    "check_hyperplane_criterion",
    "check_self_similarity",
    "compute_invariants_affine",
    "compute_invariants_centroaffine",
    "count_closed_form",
    "default_frame",
    "double_step",
    "enumerate_cells",
    "export_json",
    "export_obj",
    "export_svg",
    "frame_transport",
    "generate_mesh",
    "generate_points_matrix",
    "generate_points_recurrence",
    "import_frame",
    "load_json",
    "pair_labels",
    "simplex_member",
    "slice_series",
    "sponge_member",
    "structure_step",
    "triangle_block_matrix",
    "verify_structure",
]
