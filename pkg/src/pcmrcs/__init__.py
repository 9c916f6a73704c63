"""Elliptical-patch polarization converters and checkerboard RCS reduction.

Modules: ``geometry`` (cells and layouts), ``jones`` (reflection algebra
and analytic models), ``solver`` (periodic FDTD), ``scatter`` (aperture
far fields and RCS), ``optimize`` (bandwidth search) and ``cli``.
"""

__version__ = "0.1.0"

from .errors import PCMError
from .geometry import (
    ApertureLayout,
    Handedness,
    StackUp,
    TileKind,
    UnitCellGeometry,
    build_checkerboard,
    build_unit_cell,
    mirror_unit,
    paper_cell,
    paper_stack,
    rasterize,
)
from .jones import Jones2, ReflectionSpectrum, mirror_transform, pcr, rotate_basis

__all__ = [
    "ApertureLayout",
    "Handedness",
    "Jones2",
    "PCMError",
    "ReflectionSpectrum",
    "StackUp",
    "TileKind",
    "UnitCellGeometry",
    "__version__",
    "build_checkerboard",
    "build_unit_cell",
    "mirror_transform",
    "mirror_unit",
    "paper_cell",
    "paper_stack",
    "pcr",
    "rasterize",
    "rotate_basis",
]
