"""Binary mask rasters, run-length coding, and pixel-level comparisons.

A mask is a row-major boolean grid. The run-length form alternates
background/foreground run lengths starting with a background run (which may
be 0 when the first pixel is foreground); every run after the first must be
at least 1. That canonical form makes the encoding of any raster unique.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Iterable

import numpy as np

from .errors import DimensionMismatch, NonCanonical, ParseError, RunSumMismatch

__all__ = [
    "MaskRaster",
    "RleMask",
    "ConfusionCounts",
    "rle_encode",
    "rle_decode",
    "rle_area",
    "area",
    "iou",
    "confusion",
    "format_rle_text",
    "parse_rle_text",
    "rle_to_json",
    "rle_from_json",
]


@dataclass(eq=False)
class MaskRaster:
    """A binary image mask.

    pixels is a (height, width) boolean array, row-major. The array is made
    read-only on construction so instances can be shared across threads.
    """

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(np.asarray(self.pixels, dtype=bool))
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"mask dimensions must be >= 1, got {arr.shape}")
        arr.flags.writeable = False
        self.pixels = arr

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @classmethod
    def from_bits(cls, width: int, height: int, bits: Iterable[Any]) -> "MaskRaster":
        """Build from a flat row-major sequence of exactly width*height truth values."""
        flat = np.asarray(list(bits), dtype=bool)
        if flat.size != width * height:
            raise ValueError(
                f"expected {width * height} bits for {width}x{height}, got {flat.size}"
            )
        return cls(flat.reshape(height, width))

    @classmethod
    def zeros(cls, width: int, height: int) -> "MaskRaster":
        return cls(np.zeros((height, width), dtype=bool))

    @classmethod
    def ones(cls, width: int, height: int) -> "MaskRaster":
        return cls(np.ones((height, width), dtype=bool))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MaskRaster):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    def __repr__(self) -> str:
        return f"MaskRaster({self.width}x{self.height}, area={area(self)})"


@dataclass(frozen=True)
class RleMask:
    """Run-length encoded mask.

    Canonical instances satisfy: all runs >= 0, runs[0] may be 0, every later
    run >= 1, and sum(runs) == width * height. Construction does not validate
    so documents read from disk can be represented before being checked; call
    validate() (rle_decode does) to enforce the invariants.
    """

    width: int
    height: int
    runs: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "runs", tuple(int(r) for r in self.runs))
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    def validate(self) -> "RleMask":
        """Check canonical-form invariants, returning self for chaining."""
        if self.width < 1 or self.height < 1:
            raise DimensionMismatch(
                f"mask dimensions must be >= 1, got {self.width}x{self.height}"
            )
        if any(r < 0 for r in self.runs):
            raise NonCanonical(f"negative run length in {self.runs}")
        if any(r == 0 for r in self.runs[1:]):
            raise NonCanonical(
                "zero-length run after position 0; merge adjacent runs"
            )
        total = sum(self.runs)
        expected = self.width * self.height
        if total != expected:
            raise RunSumMismatch(
                f"runs sum to {total}, expected width*height = {expected} "
                f"for {self.width}x{self.height}"
            )
        return self


@dataclass(frozen=True)
class ConfusionCounts:
    """Pixel confusion counts for one binary prediction against ground truth."""

    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self) -> None:
        for name in ("tp", "tn", "fp", "fn"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        if not isinstance(other, ConfusionCounts):
            return NotImplemented
        return ConfusionCounts(
            tp=self.tp + other.tp,
            tn=self.tn + other.tn,
            fp=self.fp + other.fp,
            fn=self.fn + other.fn,
        )


def area(m: MaskRaster) -> int:
    """Number of foreground pixels."""
    return int(np.count_nonzero(m.pixels))


def rle_area(r: RleMask) -> int:
    """Foreground pixel count straight from the runs (odd positions)."""
    return int(sum(r.runs[1::2]))


def rle_encode(m: MaskRaster) -> RleMask:
    """Encode a raster into canonical alternating run lengths."""
    flat = m.pixels.ravel()
    # indices where the value changes, then run lengths between them
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0]:
        runs = [0] + runs
    return RleMask(width=m.width, height=m.height, runs=tuple(int(r) for r in runs))


def rle_decode(r: RleMask) -> MaskRaster:
    """Decode canonical runs back to a raster.

    Raises RunSumMismatch when the runs do not cover width*height and
    NonCanonical when a zero run appears after position 0.
    """
    r.validate()
    values = (np.arange(len(r.runs)) % 2).astype(bool)
    flat = np.repeat(values, np.asarray(r.runs, dtype=np.int64))
    return MaskRaster(flat.reshape(r.height, r.width))


def _check_same_shape(a: MaskRaster, b: MaskRaster) -> None:
    if a.shape != b.shape:
        raise DimensionMismatch(f"mask shapes differ: {a.shape} vs {b.shape}")


def iou(a: MaskRaster, b: MaskRaster) -> float:
    """Intersection over union. Two empty masks have IoU 1.0 by convention."""
    _check_same_shape(a, b)
    inter = int(np.count_nonzero(a.pixels & b.pixels))
    union = int(np.count_nonzero(a.pixels | b.pixels))
    if union == 0:
        return 1.0
    return inter / union


def confusion(pred: MaskRaster, gt: MaskRaster) -> ConfusionCounts:
    """Per-pixel confusion counts with pred as the prediction."""
    _check_same_shape(pred, gt)
    p = pred.pixels
    g = gt.pixels
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    tn = p.size - tp - fp - fn
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)


# --- interchange forms ---

_TEXT_RE = re.compile(r"^(\d+)x(\d+):(\d+(?:,\d+)*)$")


def format_rle_text(r: RleMask) -> str:
    """Render as "<width>x<height>:<run>,<run>,..."."""
    return f"{r.width}x{r.height}:" + ",".join(str(n) for n in r.runs)


def parse_rle_text(s: str) -> RleMask:
    """Parse the text form, validating canonical invariants."""
    m = _TEXT_RE.match(s.strip())
    if m is None:
        raise ParseError(f"not a run-length mask string: {s!r}")
    w, h = int(m.group(1)), int(m.group(2))
    runs = tuple(int(part) for part in m.group(3).split(","))
    return RleMask(width=w, height=h, runs=runs).validate()


def rle_to_json(r: RleMask) -> dict:
    """JSON object form: {"w": int, "h": int, "runs": [int, ...]}."""
    return {"w": r.width, "h": r.height, "runs": list(r.runs)}


def rle_from_json(obj: Any) -> RleMask:
    """Parse the JSON object form, validating canonical invariants."""
    if not isinstance(obj, dict):
        raise ParseError(f"mask must be an object, got {type(obj).__name__}")
    missing = {"w", "h", "runs"} - set(obj)
    if missing:
        raise ParseError(f"mask object missing fields: {sorted(missing)}")
    w, h, runs = obj["w"], obj["h"], obj["runs"]
    if not isinstance(w, int) or not isinstance(h, int) or isinstance(w, bool) or isinstance(h, bool):
        raise ParseError("mask w and h must be integers")
    if not isinstance(runs, (list, tuple)) or not all(
        isinstance(n, int) and not isinstance(n, bool) for n in runs
    ):
        raise ParseError("mask runs must be a list of integers")
    return RleMask(width=w, height=h, runs=tuple(runs)).validate()
