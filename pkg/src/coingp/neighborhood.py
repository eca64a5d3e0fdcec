"""Sliding-window samples: frontier intensities in, center intensity out.

Training samples come from fully intact 3x3 windows in the damaged image;
test samples are the missing pixels themselves, whose frontiers are intact by
the separation rule. Either way a sample is the tuple of neighbor intensities
in a fixed scan order plus the center value (the prediction target).

The neighbor scan order is row-major over the window with the center skipped:

    Moore:        (-1,-1) (-1,0) (-1,+1) (0,-1) (0,+1) (+1,-1) (+1,0) (+1,+1)
    Von Neumann:  (-1,0) (0,-1) (0,+1) (+1,0)

Variable ``v<i>`` in a predictor tree always refers to position ``i`` of this
order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .damage import DamagedImage, Topology, _neighbor_offsets
from .imagery import GrayImage, PixelCoord

MOORE_OFFSETS: tuple[tuple[int, int], ...] = _neighbor_offsets(Topology.MOORE)
VON_NEUMANN_OFFSETS: tuple[tuple[int, int], ...] = _neighbor_offsets(Topology.VON_NEUMANN)


def frontier_offsets(topology: Topology) -> tuple[tuple[int, int], ...]:
    """Neighbor offsets in scan order for a topology."""
    return MOORE_OFFSETS if topology is Topology.MOORE else VON_NEUMANN_OFFSETS


class NeighborhoodSample(NamedTuple):
    """One window: frontier intensities, the center's intensity, its position."""

    inputs: tuple[float, ...]
    target: float
    center: PixelCoord


@dataclass(frozen=True)
class SampleSet:
    """A batch of windows sharing one topology.

    ``inputs`` is ``(n, frontier_size)`` float64, one row per window in the
    scan order above; ``targets`` is ``(n,)`` float64; ``centers`` lists the
    window centers in the same order. Rows are ordered row-major by center.
    """

    inputs: np.ndarray
    targets: np.ndarray
    centers: tuple[PixelCoord, ...]
    topology: Topology

    def __post_init__(self):
        k = self.topology.frontier_size
        inp = np.ascontiguousarray(np.asarray(self.inputs, dtype=np.float64))
        tgt = np.ascontiguousarray(np.asarray(self.targets, dtype=np.float64))
        if inp.ndim != 2 or inp.shape[1] != k:
            raise ValueError(
                f"inputs must be (n, {k}) for {self.topology.value}, got {inp.shape}"
            )
        if tgt.shape != (inp.shape[0],) or len(self.centers) != inp.shape[0]:
            raise ValueError("inputs, targets and centers disagree on sample count")
        object.__setattr__(self, "inputs", inp)
        object.__setattr__(self, "targets", tgt)
        object.__setattr__(self, "centers", tuple(self.centers))

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def __getitem__(self, i: int) -> NeighborhoodSample:
        return NeighborhoodSample(
            inputs=tuple(float(x) for x in self.inputs[i]),
            target=float(self.targets[i]),
            center=self.centers[i],
        )

    def to_csv(self) -> str:
        """Delimited dump: v0..v<k-1>, target, row, col."""
        k = self.topology.frontier_size
        header = ",".join([f"v{i}" for i in range(k)] + ["target", "row", "col"])
        lines = [header]
        for i in range(len(self)):
            fields = [format(float(x), ".17g") for x in self.inputs[i]]
            fields.append(format(float(self.targets[i]), ".17g"))
            fields.append(str(self.centers[i].row))
            fields.append(str(self.centers[i].col))
            lines.append(",".join(fields))
        return "\n".join(lines) + "\n"


class TrainingSet(SampleSet):
    """Windows whose center and full frontier are all available."""


class TestSet(SampleSet):
    """Windows centered on missing pixels; targets hold the true intensities."""


def extract_sample(
    damaged: DamagedImage,
    center: PixelCoord,
    topology: Topology,
) -> Optional[NeighborhoodSample]:
    """One window at ``center``, or None if it cannot supply a sample.

    Returns None when the center is on the border or any frontier cell is
    missing. Raises if the center is out of bounds. The center itself may be
    missing (that is the test-time case); its stored intensity becomes the
    target either way.
    """
    img = damaged.image
    if not img.in_bounds(center):
        raise ValueError(f"center {center} outside {img.width}x{img.height} image")
    if img.on_border(center):
        return None
    missing = set(damaged.missing.coords)
    values = []
    for dr, dc in frontier_offsets(topology):
        cell = PixelCoord(center.row + dr, center.col + dc)
        if cell in missing:
            return None
        values.append(float(img.get(cell.row, cell.col)))
    return NeighborhoodSample(
        inputs=tuple(values),
        target=float(img.get(center.row, center.col)),
        center=center,
    )


def _complete_frontier_mask(avail: np.ndarray, topology: Topology) -> np.ndarray:
    """(h-2, w-2) bool: interior centers whose whole frontier is available."""
    h, w = avail.shape
    mask = np.ones((h - 2, w - 2), dtype=bool)
    for dr, dc in frontier_offsets(topology):
        mask &= avail[1 + dr : h - 1 + dr, 1 + dc : w - 1 + dc]
    return mask


def _gather(
    damaged: DamagedImage,
    rows: np.ndarray,
    cols: np.ndarray,
    topology: Topology,
) -> tuple[np.ndarray, np.ndarray, tuple[PixelCoord, ...]]:
    px = damaged.image.pixels.astype(np.float64)
    offsets = frontier_offsets(topology)
    n = rows.shape[0]
    inputs = np.empty((n, len(offsets)), dtype=np.float64)
    for j, (dr, dc) in enumerate(offsets):
        inputs[:, j] = px[rows + dr, cols + dc]
    targets = px[rows, cols].copy()
    centers = tuple(PixelCoord(int(r), int(c)) for r, c in zip(rows.tolist(), cols.tolist()))
    return inputs, targets, centers


def build_training_set(damaged: DamagedImage, topology: Topology) -> TrainingSet:
    """All interior windows whose center and frontier are fully available.

    An image smaller than 3x3 has no interior and yields an empty set, as
    does one so damaged that no intact window remains.
    """
    h, w = damaged.image.height, damaged.image.width
    if h < 3 or w < 3:
        k = topology.frontier_size
        return TrainingSet(
            np.empty((0, k)), np.empty((0,)), (), topology
        )
    avail = damaged.availability_mask()
    ok = _complete_frontier_mask(avail, topology)
    ok &= avail[1 : h - 1, 1 : w - 1]
    rows, cols = np.nonzero(ok)
    inputs, targets, centers = _gather(damaged, rows + 1, cols + 1, topology)
    return TrainingSet(inputs, targets, centers, topology)


def build_test_set(damaged: DamagedImage, topology: Topology) -> TestSet:
    """One window per missing pixel, in row-major center order.

    Raises if any missing pixel's frontier is itself incomplete, which means
    the missing set violates the separation rule for this topology.
    """
    avail = damaged.availability_mask()
    h, w = avail.shape
    coords = sorted(damaged.missing.coords)
    if not coords:
        k = topology.frontier_size
        return TestSet(np.empty((0, k)), np.empty((0,)), (), topology)
    rows = np.asarray([c.row for c in coords], dtype=np.intp)
    cols = np.asarray([c.col for c in coords], dtype=np.intp)
    # DamagedImage construction already rejects border coords, so every
    # frontier index below is in bounds.
    for dr, dc in frontier_offsets(topology):
        bad = ~avail[rows + dr, cols + dc]
        if bad.any():
            i = int(np.argmax(bad))
            raise ValueError(
                f"missing pixel {coords[i]} has a missing frontier cell at offset "
                f"({dr:+d},{dc:+d}); the damage violates the separation rule"
            )
    inputs, targets, centers = _gather(damaged, rows, cols, topology)
    return TestSet(inputs, targets, centers, topology)
