"""Movement-density heatmaps over the X/Z ground plane.

Positions are binned into a square-cell grid; counts are normalized by
the maximum cell and colorized on the HSV circle from blue (cold) to red
(hot). Zero-count cells stay fully transparent so "never visited" reads
differently from "rarely visited" when the raster overlays a scene.

Cells are half-open ([edge, edge + cell) on each axis); a sample exactly
on the grid's outermost max edge is kept in the last cell so the far
border is closed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image

from .errors import EmptyDataError
from .model import Category
from .replay import FilterSet, LoadedSet

DEFAULT_CELL_SIZE = 0.1
DEFAULT_CATEGORIES = (Category.PLAYER,)


@dataclass(frozen=True)
class GridSpec:
    """Placement of a 2D grid on the ground plane."""

    origin: tuple[float, float]  # (min x, min z)
    cell_size: float
    cols: int
    rows: int

    def __post_init__(self) -> None:
        if not self.cell_size > 0:
            raise ValueError("cell_size must be positive")
        if self.cols < 1 or self.rows < 1:
            raise ValueError("grid must have at least one cell")

    def cell_of(self, x: float, z: float) -> tuple[int, int] | None:
        """(col, row) containing the point, or None if outside the grid."""
        qx = (x - self.origin[0]) / self.cell_size
        qz = (z - self.origin[1]) / self.cell_size
        col = math.floor(qx)
        row = math.floor(qz)
        if col == self.cols and qx == float(self.cols):
            col -= 1  # closed far border
        if row == self.rows and qz == float(self.rows):
            row -= 1
        if 0 <= col < self.cols and 0 <= row < self.rows:
            return col, row
        return None

    def cell_center(self, col: int, row: int) -> tuple[float, float]:
        return (
            self.origin[0] + (col + 0.5) * self.cell_size,
            self.origin[1] + (row + 0.5) * self.cell_size,
        )


@dataclass(frozen=True)
class DensityGrid:
    """Row-major visit counts; row 0 is the min-z edge."""

    spec: GridSpec
    counts: tuple[tuple[int, ...], ...]

    @property
    def max_count(self) -> int:
        return max((max(row) for row in self.counts), default=0)

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)


def _contributing_positions(
    loaded: LoadedSet,
    filters: FilterSet | None,
    categories: Sequence[Category],
) -> list[tuple[float, float]]:
    filters = filters or FilterSet()
    wanted = set(categories)
    out: list[tuple[float, float]] = []
    for si, log in enumerate(loaded.sessions):
        if not filters.session_on(si):
            continue
        for d in log.objects:
            if d.category not in wanted or not filters.object_on(d.id, d.category):
                continue
            if d.category is Category.HAND:
                for h in log.hands.get(d.id, ()):
                    out.append((h.wrist.position[0], h.wrist.position[2]))
            else:
                for s in log.samples.get(d.id, ()):
                    out.append((s.pose.position[0], s.pose.position[2]))
    return out


def derive_spec(
    positions: Iterable[tuple[float, float]], cell_size: float = DEFAULT_CELL_SIZE
) -> GridSpec:
    """Axis-aligned bounding box of the positions padded by one cell."""
    xs, zs = zip(*positions)
    min_x, max_x = min(xs), max(xs)
    min_z, max_z = min(zs), max(zs)
    origin = (min_x - cell_size, min_z - cell_size)
    cols = math.floor((max_x - origin[0]) / cell_size) + 2
    rows = math.floor((max_z - origin[1]) / cell_size) + 2
    return GridSpec(origin=origin, cell_size=cell_size, cols=cols, rows=rows)


def accumulate_density(
    loaded: LoadedSet,
    filters: FilterSet | None = None,
    spec: GridSpec | None = None,
    cell_size: float = DEFAULT_CELL_SIZE,
    categories: Sequence[Category] = DEFAULT_CATEGORIES,
) -> DensityGrid:
    """Bin every filter-passing sample position into grid cells.

    With an explicit spec, samples outside the grid are dropped; a derived
    spec always covers every contributing sample.
    """
    positions = _contributing_positions(loaded, filters, categories)
    if not positions:
        raise EmptyDataError("no contributing samples for the heatmap")
    if spec is None:
        spec = derive_spec(positions, cell_size)
    counts = np.zeros((spec.rows, spec.cols), dtype=np.int64)
    for x, z in positions:
        cell = spec.cell_of(x, z)
        if cell is not None:
            counts[cell[1], cell[0]] += 1
    return DensityGrid(spec=spec, counts=tuple(tuple(int(c) for c in row) for row in counts))


def _hue_to_rgb(hue_deg: float) -> tuple[int, int, int]:
    # Saturation and value fixed at 1; exact at the sector boundaries the
    # contract pins (0 deg red, 120 deg green, 240 deg blue).
    h = hue_deg / 60.0
    sector = int(math.floor(h)) % 6
    f = h - math.floor(h)
    q, t = 1.0 - f, f
    rgb = {
        0: (1.0, t, 0.0),
        1: (q, 1.0, 0.0),
        2: (0.0, 1.0, t),
        3: (0.0, q, 1.0),
        4: (t, 0.0, 1.0),
        5: (1.0, 0.0, q),
    }[sector]
    return tuple(int(round(255 * c)) for c in rgb)  # type: ignore[return-value]


def density_color(count: int, max_count: int) -> tuple[int, int, int, int]:
    """RGBA for one cell: transparent at zero, blue to red by density."""
    if count <= 0 or max_count <= 0:
        return (0, 0, 0, 0)
    hue = 240.0 * (1.0 - count / max_count)
    r, g, b = _hue_to_rgb(hue)
    return (r, g, b, 255)


def colorize(grid: DensityGrid) -> Image.Image:
    """One RGBA pixel per cell; image row 0 is the min-z grid row."""
    img = Image.new("RGBA", (grid.spec.cols, grid.spec.rows))
    max_count = grid.max_count
    px = img.load()
    for row in range(grid.spec.rows):
        for col in range(grid.spec.cols):
            px[col, row] = density_color(grid.counts[row][col], max_count)
    return img


def sidecar_payload(grid: DensityGrid) -> dict:
    return {
        "origin": [grid.spec.origin[0], grid.spec.origin[1]],
        "cell_size": grid.spec.cell_size,
        "cols": grid.spec.cols,
        "rows": grid.spec.rows,
        "counts": [c for row in grid.counts for c in row],
    }


def export_heatmap(grid: DensityGrid, image: Image.Image, out_path: Path | str) -> list[Path]:
    """Write the PNG raster plus a JSON sidecar grid; returns both paths."""
    png_path = Path(out_path)
    sidecar_path = png_path.with_suffix(".json")
    image.save(png_path, format="PNG")
    sidecar_path.write_text(
        json.dumps(sidecar_payload(grid), separators=(",", ":")) + "\n", encoding="utf-8"
    )
    return [png_path, sidecar_path]


def load_sidecar(path: Path | str) -> DensityGrid:
    """Rebuild a DensityGrid from its exported JSON sidecar."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    spec = GridSpec(
        origin=(float(data["origin"][0]), float(data["origin"][1])),
        cell_size=float(data["cell_size"]),
        cols=int(data["cols"]),
        rows=int(data["rows"]),
    )
    flat = data["counts"]
    if len(flat) != spec.cols * spec.rows:
        raise ValueError("sidecar counts length does not match cols*rows")
    counts = tuple(
        tuple(int(c) for c in flat[r * spec.cols : (r + 1) * spec.cols])
        for r in range(spec.rows)
    )
    return DensityGrid(spec=spec, counts=counts)
