"""Unit-cell geometry, metal masks, and checkerboard aperture layouts.

Lengths are in millimetres throughout this module.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AxisError, FitError, RegionError, ResolutionError

RESOLUTION_RTOL = 1e-3


class Handedness(str, enum.Enum):
    UNIT = "UNIT"
    MIRROR = "MIRROR"

    @property
    def orientation(self) -> float:
        return 45.0 if self is Handedness.UNIT else -45.0

    def toggled(self) -> "Handedness":
        return Handedness.MIRROR if self is Handedness.UNIT else Handedness.UNIT


class TileKind(enum.IntEnum):
    ABSENT = 0
    UNIT = 1
    MIRROR = 2
    PEC = 3


@dataclass(frozen=True)
class Material:
    name: str
    eps_r: float
    tan_delta: float = 0.0

    def __post_init__(self):
        if not self.eps_r >= 1.0:
            raise ValueError(f"eps_r must be >= 1, got {self.eps_r}")
        if not self.tan_delta >= 0.0:
            raise ValueError(f"tan_delta must be >= 0, got {self.tan_delta}")


@dataclass(frozen=True)
class StackUp:
    substrate: Material
    h: float
    t_m: float = 0.0  # metadata only; metal is a zero-thickness sheet
    ground: bool = True

    def __post_init__(self):
        if not self.h > 0.0:
            raise ValueError(f"substrate thickness must be > 0, got {self.h}")
        if not self.t_m >= 0.0:
            raise ValueError(f"metal thickness must be >= 0, got {self.t_m}")

    def lossless(self) -> "StackUp":
        return replace(self, substrate=replace(self.substrate, tan_delta=0.0))


RT5880 = Material("RT-duroid 5880", 2.2, 0.0009)


def paper_stack() -> StackUp:
    return StackUp(RT5880, h=1.0, t_m=0.035, ground=True)


@dataclass(frozen=True)
class UnitCellGeometry:
    """One elliptical patch centred in a square cell over a grounded slab.

    ``major_axis``/``minor_axis`` are full lengths. ``orientation`` is the
    angle of the major axis from +x in degrees and is tied to ``handedness``.
    """

    period: float
    major_axis: float
    minor_axis: float
    stack: StackUp
    handedness: Handedness = Handedness.UNIT
    orientation: float = field(default=None)

    def __post_init__(self):
        if self.orientation is None:
            object.__setattr__(self, "orientation", self.handedness.orientation)
        _validate(self)

    @property
    def semi_axes(self) -> tuple[float, float]:
        return self.major_axis / 2.0, self.minor_axis / 2.0

    @property
    def half_extent(self) -> float:
        """Half-width of the axis-aligned bounding box of the 45-degree ellipse."""
        a, b = self.semi_axes
        return math.sqrt((a * a + b * b) / 2.0)

    @property
    def is_circular(self) -> bool:
        return self.major_axis == self.minor_axis

    def with_params(self, **kw) -> "UnitCellGeometry":
        kw.setdefault("orientation", None)
        return replace(self, **kw)


def _validate(cell: UnitCellGeometry) -> None:
    for name in ("period", "major_axis", "minor_axis"):
        v = getattr(cell, name)
        if not (v > 0.0 and math.isfinite(v)):
            raise ValueError(f"{name} must be a positive length, got {v}")
    if cell.minor_axis > cell.major_axis:
        raise AxisError(f"minor_axis {cell.minor_axis} exceeds major_axis {cell.major_axis}")
    if cell.orientation != cell.handedness.orientation:
        raise ValueError(
            f"orientation {cell.orientation} inconsistent with {cell.handedness.value}"
        )
    if cell.half_extent > cell.period / 2.0:
        raise FitError(
            f"ellipse {cell.major_axis}x{cell.minor_axis} mm has half-extent "
            f"{cell.half_extent:.4g} mm > half-period {cell.period / 2.0:.4g} mm"
        )


def build_unit_cell(period, major_axis, minor_axis, stack=None, handedness=Handedness.UNIT):
    if stack is None:
        stack = paper_stack()
    return UnitCellGeometry(
        period=float(period),
        major_axis=float(major_axis),
        minor_axis=float(minor_axis),
        stack=stack,
        handedness=Handedness(handedness),
    )


def paper_cell(handedness=Handedness.UNIT) -> UnitCellGeometry:
    """The published optimum: 4 mm cell, 3.8 x 1.3 mm ellipse, 1 mm RT5880."""
    return build_unit_cell(4.0, 3.8, 1.3, paper_stack(), handedness)


def mirror_unit(cell: UnitCellGeometry) -> UnitCellGeometry:
    return replace(cell, handedness=cell.handedness.toggled(), orientation=-cell.orientation)


@dataclass(frozen=True)
class PatchMask:
    resolution: float
    cells: np.ndarray  # [ix, iy], True = metal

    @property
    def metal_area(self) -> float:
        return float(self.cells.sum()) * self.resolution**2


def grid_count(period: float, resolution: float) -> int:
    if not resolution > 0.0:
        raise ResolutionError(f"resolution must be positive, got {resolution}")
    n = int(round(period / resolution))
    if n < 1 or abs(n * resolution - period) > RESOLUTION_RTOL * period:
        raise ResolutionError(f"resolution {resolution} mm does not divide period {period} mm")
    return n


def sample_coords(n: int, resolution: float) -> np.ndarray:
    """Cell-centred sample positions, symmetric about zero bit-for-bit."""
    return (np.arange(n) - (n - 1) / 2.0) * resolution


def rasterize(cell: UnitCellGeometry, resolution: float) -> PatchMask:
    n = grid_count(cell.period, resolution)
    c = sample_coords(n, resolution)
    x, y = np.meshgrid(c, c, indexing="ij")
    th = math.radians(cell.orientation)
    ct, st = math.cos(th), math.sin(th)
    u = x * ct + y * st
    v = -x * st + y * ct
    a, b = cell.semi_axes
    inside = (u / a) ** 2 + (v / b) ** 2 <= 1.0
    inside.setflags(write=False)
    return PatchMask(resolution=resolution, cells=inside)


@dataclass(frozen=True)
class ApertureLayout:
    tiles: np.ndarray  # [ix, iy] of TileKind values
    tile_pitch: float
    cells_per_tile: int
    cell: UnitCellGeometry | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.tiles.shape

    @property
    def extent(self) -> tuple[float, float]:
        return self.tiles.shape[0] * self.tile_pitch, self.tiles.shape[1] * self.tile_pitch

    def count(self, kind: TileKind) -> int:
        return int(np.count_nonzero(self.tiles == kind))

    def swapped(self) -> "ApertureLayout":
        """UNIT and MIRROR tiles exchanged; PEC/ABSENT untouched."""
        t = self.tiles.copy()
        t[self.tiles == TileKind.UNIT] = TileKind.MIRROR
        t[self.tiles == TileKind.MIRROR] = TileKind.UNIT
        t.setflags(write=False)
        return replace(self, tiles=t)


def make_layout(tiles, tile_pitch, cells_per_tile=1, cell=None) -> ApertureLayout:
    t = np.array(tiles, dtype=np.int8)
    if t.ndim != 2:
        raise ValueError("tiles must be a 2-D grid")
    t.setflags(write=False)
    return ApertureLayout(t, float(tile_pitch), int(cells_per_tile), cell)


def build_checkerboard(tiles_x, tiles_y, cells_per_tile, cell, antenna_region=None) -> ApertureLayout:
    """Alternate UNIT/MIRROR tiles, UNIT at (0, 0).

    ``antenna_region`` is ``(x0, y0, x1, y1)`` in mm measured from the
    aperture's lower-left corner; every tile overlapping it becomes PEC.
    """
    if min(tiles_x, tiles_y, cells_per_tile) < 1:
        raise ValueError("tiles_x, tiles_y and cells_per_tile must be >= 1")
    pitch = cells_per_tile * cell.period
    i, j = np.meshgrid(np.arange(tiles_x), np.arange(tiles_y), indexing="ij")
    tiles = np.where((i + j) % 2 == 0, TileKind.UNIT, TileKind.MIRROR).astype(np.int8)

    if antenna_region is not None:
        x0, y0, x1, y1 = map(float, antenna_region)
        w, h = tiles_x * pitch, tiles_y * pitch
        if not (x1 > x0 and y1 > y0):
            raise RegionError(f"empty antenna region {antenna_region}")
        if x0 < 0 or y0 < 0 or x1 > w or y1 > h:
            raise RegionError(f"antenna region {antenna_region} exceeds aperture {w} x {h} mm")
        hit = (i * pitch < x1) & ((i + 1) * pitch > x0) & (j * pitch < y1) & ((j + 1) * pitch > y0)
        tiles[hit] = TileKind.PEC

    return make_layout(tiles, pitch, cells_per_tile, cell)
