"""Image tensors, single-pixel perturbation units, and lossless PNG I/O.

Images are plain numpy arrays of shape (height, width, 3), dtype uint8,
row-major, channels in R, G, B order. Only 8-bit RGB PNGs are accepted on
disk; grayscale or alpha inputs are rejected rather than converted.
"""

from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError


class ImageFormatError(ValueError):
    """Raised when a file is not a decodable 8-bit RGB PNG."""


def validate_image(image) -> np.ndarray:
    """Check shape/dtype invariants and return the array unchanged."""
    if not isinstance(image, np.ndarray):
        raise ValueError(f"image must be a numpy array, got {type(image).__name__}")
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"image must have shape (H, W, 3), got {image.shape}")
    if image.dtype != np.uint8:
        raise ValueError(f"image dtype must be uint8, got {image.dtype}")
    if image.shape[0] < 1 or image.shape[1] < 1:
        raise ValueError(f"image must be at least 1x1, got {image.shape}")
    return image


@dataclass(frozen=True)
class PerturbationUnit:
    """One candidate perturbation: replace pixel (x, y) with color (r, g, b).

    ``x`` is the column index and ``y`` the row index, both 0-based.
    """

    x: int
    y: int
    r: int
    g: int
    b: int

    def __post_init__(self):
        for name in ("x", "y", "r", "g", "b"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)):
                raise ValueError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.x < 0 or self.y < 0:
            raise ValueError(f"coordinates must be non-negative, got ({self.x}, {self.y})")
        for name in ("r", "g", "b"):
            v = getattr(self, name)
            if not 0 <= v <= 255:
                raise ValueError(f"{name}={v} outside [0, 255]")

    @property
    def rgb(self) -> tuple:
        return (self.r, self.g, self.b)

    def check_bounds(self, image: np.ndarray) -> None:
        h, w = image.shape[0], image.shape[1]
        if self.x >= w or self.y >= h:
            raise ValueError(
                f"unit at ({self.x}, {self.y}) outside {w}x{h} image"
            )

    def is_noop(self, image: np.ndarray) -> bool:
        """True when the replacement color equals the current pixel."""
        px = image[self.y, self.x]
        return (int(px[0]), int(px[1]), int(px[2])) == self.rgb


def apply_unit(image: np.ndarray, unit: PerturbationUnit) -> np.ndarray:
    """Return a copy of ``image`` with the unit's pixel replaced."""
    unit.check_bounds(image)
    out = image.copy()
    out[unit.y, unit.x] = unit.rgb
    return out


def apply_units(image: np.ndarray, units) -> np.ndarray:
    """Apply several units to one copy, in order."""
    out = image.copy()
    for unit in units:
        unit.check_bounds(image)
        out[unit.y, unit.x] = unit.rgb
    return out


def load_png(path) -> np.ndarray:
    """Decode an 8-bit RGB PNG into an image array."""
    try:
        with Image.open(path) as im:
            if im.format != "PNG":
                raise ImageFormatError(f"{path}: expected PNG, got {im.format}")
            if im.mode != "RGB":
                raise ImageFormatError(
                    f"{path}: only 8-bit RGB PNGs are accepted (mode {im.mode}); "
                    "grayscale/alpha inputs are rejected, not converted"
                )
            arr = np.asarray(im, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"{path}: not a decodable image") from exc
    return validate_image(np.ascontiguousarray(arr))


def save_png(image: np.ndarray, path) -> None:
    """Encode losslessly; ``load_png(save_png(x)) == x`` bit-exactly."""
    validate_image(image)
    Image.fromarray(image, mode="RGB").save(path, format="PNG")
