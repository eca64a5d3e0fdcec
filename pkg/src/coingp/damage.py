"""Missing-pixel sets and the separation discipline that keeps them learnable.

A damaged image is the original plus a set of coordinates whose intensities
are treated as unknown. Every missing pixel must keep its full ring of
neighbors intact, which means no two missing pixels may be adjacent under the
chosen topology and none may sit on the image border. The generator in this
module produces the odd-column pattern used throughout: every other interior
column loses a fixed number of pixels, with vertical gaps of at least two rows
so the pattern satisfies the separation rule under both topologies at once.

Missing sets travel alongside images as masks, either a PGM (255 marks a
missing pixel, 0 an available one) or a two-column CSV of 0-based
coordinates.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .imagery import GrayImage, PgmError, PixelCoord, load_pgm, save_pgm


class Topology(Enum):
    """Which ring of cells counts as the neighborhood of a pixel."""

    MOORE = "moore"
    VON_NEUMANN = "von-neumann"

    @property
    def frontier_size(self) -> int:
        """Number of neighbors around a center: 8 for Moore, 4 for Von Neumann."""
        return 8 if self is Topology.MOORE else 4

    @classmethod
    def parse(cls, text: str) -> "Topology":
        normalized = text.strip().lower().replace("_", "-")
        for member in cls:
            if member.value == normalized:
                return member
        raise ValueError(
            f"unknown topology {text!r} (expected 'moore' or 'von-neumann')"
        )


def chebyshev_distance(a: PixelCoord, b: PixelCoord) -> int:
    """Moore adjacency: neighbors are exactly the cells at distance 1."""
    return max(abs(a.row - b.row), abs(a.col - b.col))


def manhattan_distance(a: PixelCoord, b: PixelCoord) -> int:
    """Von Neumann adjacency: neighbors are exactly the cells at distance 1."""
    return abs(a.row - b.row) + abs(a.col - b.col)


@dataclass(frozen=True)
class MissingSet:
    """Distinct in-bounds pixel coordinates marked as unknown.

    Construction checks bounds and distinctness only. Border membership and
    pairwise separation are checked by ``validate_separation`` so that callers
    can inspect a bad set instead of merely failing to build it.
    """

    coords: tuple[PixelCoord, ...]
    image_width: int
    image_height: int

    def __post_init__(self):
        if self.image_width < 1 or self.image_height < 1:
            raise ValueError(
                f"image dimensions must be positive, got {self.image_width}x{self.image_height}"
            )
        canonical = tuple(PixelCoord(int(r), int(c)) for r, c in self.coords)
        for coord in canonical:
            if not (0 <= coord.row < self.image_height and 0 <= coord.col < self.image_width):
                raise ValueError(
                    f"coordinate {coord} outside {self.image_width}x{self.image_height} image"
                )
        if len(set(canonical)) != len(canonical):
            raise ValueError("missing set contains duplicate coordinates")
        object.__setattr__(self, "coords", canonical)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __contains__(self, coord) -> bool:
        return coord in set(self.coords)


@dataclass(frozen=True)
class SeparationReport:
    """Outcome of checking a missing set against the separation rule."""

    valid: bool
    border_violations: tuple[PixelCoord, ...]
    pair_violations: tuple[tuple[PixelCoord, PixelCoord], ...]


def _neighbor_offsets(topology: Topology) -> tuple[tuple[int, int], ...]:
    if topology is Topology.MOORE:
        return (
            (-1, -1), (-1, 0), (-1, 1),
            (0, -1), (0, 1),
            (1, -1), (1, 0), (1, 1),
        )
    return ((-1, 0), (0, -1), (0, 1), (1, 0))


def validate_separation(missing: MissingSet, topology: Topology) -> SeparationReport:
    """Check no missing pixel touches the border or another missing pixel.

    Adjacency means distance exactly 1 in the topology's metric (Chebyshev
    for Moore, Manhattan for Von Neumann). Runs in O(n) by probing each
    coordinate's neighbor cells against a set, instead of comparing all pairs.
    """
    h, w = missing.image_height, missing.image_width
    border = tuple(
        c for c in missing.coords
        if c.row in (0, h - 1) or c.col in (0, w - 1)
    )
    index = set(missing.coords)
    offsets = _neighbor_offsets(topology)
    pairs: list[tuple[PixelCoord, PixelCoord]] = []
    for coord in missing.coords:
        for dr, dc in offsets:
            other = PixelCoord(coord.row + dr, coord.col + dc)
            # report each unordered pair once
            if other in index and (coord.row, coord.col) < (other.row, other.col):
                pairs.append((coord, other))
    return SeparationReport(
        valid=not border and not pairs,
        border_violations=border,
        pair_violations=tuple(pairs),
    )


def max_removals_per_column(height: int) -> int:
    """Most pixels one interior column can lose with gaps of at least 2."""
    if height < 3:
        return 0
    return (height - 1) // 2


def generate_column_damage(
    width: int,
    height: int,
    per_column_removals: int,
    rng: np.random.Generator,
) -> MissingSet:
    """Knock out ``per_column_removals`` pixels from every other interior column.

    Columns 1, 3, 5, ... up to width - 2 are hit; even columns and both border
    columns stay intact, so horizontally no two missing pixels can ever touch.
    Within a column the rows are drawn uniformly from all interior subsets
    whose consecutive picks are at least 2 apart, which keeps vertical and
    diagonal contacts out as well. The result is valid under both topologies.
    """
    if width < 3 or height < 3:
        raise ValueError(
            f"image too small for damage: {width}x{height} (need at least 3x3)"
        )
    k = int(per_column_removals)
    if k < 1:
        raise ValueError(f"per-column removals must be >= 1, got {k}")
    limit = max_removals_per_column(height)
    if k > limit:
        raise ValueError(
            f"cannot remove {k} pixels per column from height {height}: "
            f"at most {limit} fit with the required spacing"
        )
    coords: list[PixelCoord] = []
    # Sampling k interior rows with pairwise gaps >= 2 is equivalent to
    # choosing k values without replacement from a shrunken range and fanning
    # them back out, which stays uniform over the valid subsets.
    n_interior = height - 2
    shrunken = n_interior - (k - 1)
    for col in range(1, width - 1, 2):
        base = np.sort(rng.choice(shrunken, size=k, replace=False))
        rows = base + np.arange(k) + 1
        coords.extend(PixelCoord(int(r), col) for r in rows)
    coords.sort(key=lambda c: (c.col, c.row))
    return MissingSet(tuple(coords), image_width=width, image_height=height)


@dataclass(frozen=True)
class DamagedImage:
    """An image plus the coordinates whose intensities are unknown.

    The original intensities are retained so reconstructions can be scored,
    but nothing downstream of damage application reads them at missing
    positions. Construction fails if any missing pixel sits on the border.
    """

    image: GrayImage
    missing: MissingSet

    def __post_init__(self):
        if (self.missing.image_width, self.missing.image_height) != (
            self.image.width,
            self.image.height,
        ):
            raise ValueError(
                "missing set dimensions "
                f"{self.missing.image_width}x{self.missing.image_height} do not match "
                f"image {self.image.width}x{self.image.height}"
            )
        h, w = self.image.height, self.image.width
        for coord in self.missing:
            if coord.row in (0, h - 1) or coord.col in (0, w - 1):
                raise ValueError(f"missing pixel {coord} lies on the image border")

    def availability_mask(self) -> np.ndarray:
        """Boolean (height, width) array, True where the pixel is available."""
        mask = np.ones((self.image.height, self.image.width), dtype=bool)
        for coord in self.missing:
            mask[coord.row, coord.col] = False
        return mask


def apply_damage(image: GrayImage, missing: MissingSet) -> DamagedImage:
    return DamagedImage(image=image, missing=missing)


def mask_to_pgm(missing: MissingSet) -> bytes:
    """Encode a missing set as a PGM: 255 marks missing, 0 available."""
    mask = np.zeros((missing.image_height, missing.image_width), dtype=np.uint8)
    for coord in missing:
        mask[coord.row, coord.col] = 255
    return save_pgm(GrayImage(mask))


def mask_from_pgm(data: bytes) -> MissingSet:
    """Decode a mask PGM. Any nonzero intensity marks a missing pixel."""
    img = load_pgm(data)
    rows, cols = np.nonzero(img.pixels)
    coords = tuple(
        PixelCoord(int(r), int(c))
        for r, c in sorted(zip(rows.tolist(), cols.tolist()), key=lambda rc: (rc[1], rc[0]))
    )
    return MissingSet(coords, image_width=img.width, image_height=img.height)


def mask_to_csv(missing: MissingSet) -> str:
    """Encode a missing set as CSV with a "row,col" header, 0-based."""
    lines = ["row,col"]
    lines.extend(f"{c.row},{c.col}" for c in missing)
    return "\n".join(lines) + "\n"


def mask_from_csv(text: str, image_width: int, image_height: int) -> MissingSet:
    """Decode a "row,col" CSV against known image dimensions."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].lower().replace(" ", "") != "row,col":
        raise ValueError('mask CSV must start with a "row,col" header')
    coords: list[PixelCoord] = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected two comma-separated fields, got {line!r}")
        try:
            coords.append(PixelCoord(int(parts[0]), int(parts[1])))
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer coordinate in {line!r}") from None
    return MissingSet(tuple(coords), image_width=image_width, image_height=image_height)


def read_mask(path: str | os.PathLike, image_width: int, image_height: int) -> MissingSet:
    """Load a mask file, sniffing PGM vs CSV from the content."""
    with open(path, "rb") as fh:
        data = fh.read()
    head = data.lstrip()[:2]
    if head in (b"P5", b"P2"):
        missing = mask_from_pgm(data)
        if (missing.image_width, missing.image_height) != (image_width, image_height):
            raise ValueError(
                f"mask dimensions {missing.image_width}x{missing.image_height} "
                f"do not match image {image_width}x{image_height}"
            )
        return missing
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError:
        raise PgmError(f"unrecognized mask format in {os.fspath(path)!r}") from None
    return mask_from_csv(text, image_width=image_width, image_height=image_height)


def write_mask(path: str | os.PathLike, missing: MissingSet) -> None:
    """Write a mask file, choosing PGM or CSV from the extension."""
    path_str = os.fspath(path)
    if path_str.lower().endswith(".csv"):
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(mask_to_csv(missing))
    else:
        with open(path, "wb") as fh:
            fh.write(mask_to_pgm(missing))
