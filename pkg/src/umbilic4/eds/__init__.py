"""Structure-equation flows, Gauss-Codazzi residuals and Cartan characters"""

from .gauss_codazzi import (
    SO3_BOX,
    CoframePair,
    GaussCodazziResult,
    box_grid,
    flat_pair,
    gauss_codazzi_residual,
    residual_order,
    so3_pair,
)
from .integrate import (
    BoundaryEvent,
    MixedPartialReport,
    Trajectory,
    conserved_report,
    flow,
    integrator_order,
    mixed_partial_check,
    parse_path,
    unit_path,
)
from .systems import SYSTEMS, ConservedQuantity, FlowSystem, get_system, octa_exact
from .tableau import CharacterResult, TableauMatrix, cartan_characters, load_tableau, parse_tableau

__all__ = [
    "SO3_BOX",
    "SYSTEMS",
    "BoundaryEvent",
    "CharacterResult",
    "ConservedQuantity",
    "CoframePair",
    "FlowSystem",
    "GaussCodazziResult",
    "MixedPartialReport",
    "TableauMatrix",
    "Trajectory",
    "box_grid",
    "cartan_characters",
    "conserved_report",
    "flat_pair",
    "flow",
    "gauss_codazzi_residual",
    "get_system",
    "integrator_order",
    "load_tableau",
    "mixed_partial_check",
    "octa_exact",
    "parse_path",
    "parse_tableau",
    "residual_order",
    "so3_pair",
    "unit_path",
]
