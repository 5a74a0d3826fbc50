"""Exact verification of triangles and octahedra in the stable category of Z/p^m-modules."""

from .diagram import (
    EDiagram,
    PeriodicDiagram,
    bbd_extra_triangles,
    is_periodic_pretriangle,
    is_verdier_octahedron,
    is_weak_square,
    restrict,
    standardize_column,
    triangle_of,
)
from .errors import (
    ArithmeticOverflow,
    ContractError,
    EnumerationTooLarge,
    InternalConsistencyError,
    OctaError,
    StructureError,
)
from .isosearch import DiagramIso, find_periodic_isos, verify_diagram_iso
from .modcat import Context, EMorphism, FpObject
from .stable import StableMorphism, Triangle, cone, is_distinguished, is_stable_iso, shift_morphism

__version__ = "0.1.0"
