"""Cosserat rod finite elements with non-unit quaternion orientations."""

from .assembly import LoadSpec, RodModel, TipBody
from .constitutive import (
    CrossSectionMaterial,
    contact_force_and_moment,
    strain_energy_density,
)
from .kinematics import FieldEvaluation, ReferenceGeometry, evaluate_fields
from .mesh import MeshTopology, element_slices, gauss_legendre, lagrange_basis

__version__ = "0.1.0"

__all__ = [
    "CrossSectionMaterial",
    "FieldEvaluation",
    "LoadSpec",
    "MeshTopology",
    "ReferenceGeometry",
    "RodModel",
    "TipBody",
    "contact_force_and_moment",
    "element_slices",
    "evaluate_fields",
    "gauss_legendre",
    "lagrange_basis",
    "strain_energy_density",
    "__version__",
]
