"""Interpretable feature spaces: segmentations, references, and lifts.

Raw inputs live in R^D (flattened images or plain vectors); explanations live
on d segments. Binary masks swap whole segments against a reference; continuous
offsets are broadcast additively, one offset per segment.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidGrid, LengthMismatch


@dataclass(frozen=True)
class Segmentation:
    """Assignment of each raw index to one of d non-empty segments."""

    assignment: np.ndarray
    d: int
    shape: tuple[int, ...]

    def __post_init__(self) -> None:
        a = np.asarray(self.assignment, dtype=np.int64)
        object.__setattr__(self, "assignment", a)
        if a.ndim != 1:
            raise ValueError("assignment must be a flat vector of segment ids")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if a.size != int(np.prod(self.shape)):
            raise LengthMismatch(
                f"assignment length {a.size} does not match shape {self.shape}"
            )
        present = np.unique(a)
        if present[0] < 0 or present[-1] >= self.d or present.size != self.d:
            raise ValueError("every segment id in 0..d-1 must appear at least once")

    @property
    def size(self) -> int:
        return self.assignment.size

    def counts(self) -> np.ndarray:
        """Number of raw indices per segment."""
        return np.bincount(self.assignment, minlength=self.d)


@dataclass(frozen=True)
class Reference:
    """Per-raw-index values substituted for dropped segments."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if v.ndim != 1:
            raise ValueError("reference values must be a flat vector")
        if not np.all(np.isfinite(v)):
            raise ValueError("reference values must be finite")


def grid_segment(height: int, width: int, channels: int, rows: int, cols: int) -> Segmentation:
    """Partition an image into rows x cols rectangular cells.

    Remainder pixels join the last cell of each axis; all channels of a pixel
    share its segment. Raw indices follow row-major (height, width, channels)
    flattening.
    """
    if min(height, width, channels, rows, cols) < 1:
        raise InvalidGrid("all grid parameters must be positive")
    if rows > height or cols > width:
        raise InvalidGrid(
            f"grid {rows}x{cols} does not fit a {height}x{width} image"
        )
    cell_h = height // rows
    cell_w = width // cols
    row_cell = np.minimum(np.arange(height) // cell_h, rows - 1)
    col_cell = np.minimum(np.arange(width) // cell_w, cols - 1)
    per_pixel = row_cell[:, None] * cols + col_cell[None, :]
    assignment = np.repeat(per_pixel.reshape(-1), channels)
    return Segmentation(assignment, rows * cols, (height, width, channels))


def singleton_segments(dim: int) -> Segmentation:
    """One segment per raw feature (plain-vector default)."""
    return Segmentation(np.arange(dim), dim, (dim,))


def mean_reference(x: np.ndarray, seg: Segmentation) -> Reference:
    """Reference that replaces each segment by its mean over all its raw indices."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (seg.size,):
        raise LengthMismatch(f"x has length {x.size}, segmentation expects {seg.size}")
    sums = np.bincount(seg.assignment, weights=x, minlength=seg.d)
    means = sums / seg.counts()
    return Reference(means[seg.assignment])


def reconstruct_binary(
    x: np.ndarray, r: Reference, seg: Segmentation, zprime: np.ndarray
) -> np.ndarray:
    """Lift binary masks: keep x where the segment is on, reference where off.

    Accepts one mask (length d) or a batch (n x d); the output has matching
    leading shape over length-D rows.
    """
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(zprime, dtype=np.float64)
    if x.shape != (seg.size,) or r.values.shape != (seg.size,):
        raise LengthMismatch("x and reference must have the segmentation's raw length")
    if z.shape[-1] != seg.d:
        raise LengthMismatch(f"mask width {z.shape[-1]} != d={seg.d}")
    if not np.all((z == 0.0) | (z == 1.0)):
        raise ValueError("binary reconstruction requires a 0/1 mask")
    mask = z[..., seg.assignment]
    return np.where(mask == 1.0, x, r.values)


def reconstruct_continuous(
    x: np.ndarray, seg: Segmentation, zprime: np.ndarray
) -> np.ndarray:
    """Lift continuous offsets: add each segment's offset to all its raw indices."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(zprime, dtype=np.float64)
    if x.shape != (seg.size,):
        raise LengthMismatch(f"x has length {x.size}, segmentation expects {seg.size}")
    if z.shape[-1] != seg.d:
        raise LengthMismatch(f"offset width {z.shape[-1]} != d={seg.d}")
    return x + z[..., seg.assignment]


def feature_offsets(delta: np.ndarray, seg: Segmentation) -> np.ndarray:
    """Project raw-space deltas onto feature space: per-segment mean of delta.

    Left inverse of reconstruct_continuous in the sense that a broadcast offset
    projects back to itself.
    """
    delta = np.asarray(delta, dtype=np.float64)
    if delta.shape[-1] != seg.size:
        raise LengthMismatch(f"delta width {delta.shape[-1]} != D={seg.size}")
    counts = seg.counts().astype(np.float64)
    basis = np.zeros((seg.size, seg.d))
    basis[np.arange(seg.size), seg.assignment] = 1.0 / counts[seg.assignment]
    return delta @ basis


def segmentation_to_json(seg: Segmentation) -> dict:
    return {"assignment": seg.assignment.tolist(), "d": seg.d, "shape": list(seg.shape)}


def segmentation_from_json(obj: dict) -> Segmentation:
    return Segmentation(np.asarray(obj["assignment"]), int(obj["d"]), tuple(obj["shape"]))
