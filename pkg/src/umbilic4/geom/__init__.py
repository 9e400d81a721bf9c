"""Explicit special Lagrangian families and their pointwise geometry"""

from .charts import FAMILIES, ImmersionChart, make_family, random_special_unitary
from .frames import (
    CubicExtract,
    FrameData,
    HLInvariants,
    SLResidual,
    adapted_frame,
    align,
    alignment,
    convergence_order,
    fundamental_cubic,
    hl_invariants,
    hyperkahler_check,
    sl_residual,
    symmetry_check,
    tangent_frame,
)

__all__ = [
    "FAMILIES",
    "CubicExtract",
    "FrameData",
    "HLInvariants",
    "ImmersionChart",
    "SLResidual",
    "adapted_frame",
    "align",
    "alignment",
    "convergence_order",
    "fundamental_cubic",
    "hl_invariants",
    "hyperkahler_check",
    "make_family",
    "random_special_unitary",
    "sl_residual",
    "symmetry_check",
    "tangent_frame",
]
