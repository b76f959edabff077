"""Human-visual-system perceptual metrics for single-pixel perturbations.

Four effects are modeled and combined into one pixelwise loss:

* luminance masking — the just-noticeable-distortion threshold ``jnd_curve``,
  evaluated on the maximum luminance of a 3x3 window (``jnd_at``);
* logarithmic stimulus response — a cumulative perceptual-stimulus table
  (``build_ps_table``) that accumulates 1/JND over intensity levels, so a
  unit step near gray level 127 is felt far more than one in deep shadow;
* texture masking — the population standard deviation of the 3x3 window
  around the perturbed pixel (``texture_sd``), computed on the benign image;
* channel weighting — fixed R/G/B sensitivity weights (``ChannelWeights``).

``integ_loss`` combines the four per pixel; ``mul_factor_loss`` sums it over
all perturbed pixels of an image pair. ``lp_norms`` provides the classic
L0/L2/Linf baselines for comparison.

All functions are pure; the stimulus table is built once and shared.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .images import PerturbationUnit, validate_image

DEFAULT_SD_FLOOR = 1.0


def _check_intensity(value, name):
    if isinstance(value, float) and not value.is_integer():
        raise ValueError(f"{name} must be an integer intensity, got {value!r}")
    v = int(value)
    if not 0 <= v <= 255:
        raise ValueError(f"{name}={value!r} outside [0, 255]")
    return v


def _check_coords(image, x, y):
    h, w = image.shape[0], image.shape[1]
    if not (0 <= x < w and 0 <= y < h):
        raise ValueError(f"({x}, {y}) outside {w}x{h} image")


def _check_channel(channel):
    if channel not in (0, 1, 2):
        raise ValueError(f"channel must be 0, 1 or 2, got {channel!r}")


def jnd_curve(luminance) -> float:
    """Visibility threshold at a background luminance in [0, 255].

    Piecewise: ``17 * (1 - sqrt(L / 127)) + 3`` up to 127, then a shallow
    linear ramp ``(3 / 128) * (L - 127) + 3``. Both branches meet at the
    minimum threshold of 3 at L = 127.
    """
    lum = float(luminance)
    if not 0.0 <= lum <= 255.0 or not np.isfinite(lum):
        raise ValueError(f"luminance {luminance!r} outside [0, 255]")
    if lum <= 127.0:
        return 17.0 * (1.0 - np.sqrt(lum / 127.0)) + 3.0
    return (3.0 / 128.0) * (lum - 127.0) + 3.0


def jnd_at(image, x, y, channel) -> float:
    """JND threshold at a pixel: the curve applied to the 3x3 window max.

    Windows are edge-replicated at borders. Diagnostic helper; the stimulus
    table below evaluates the curve per intensity level instead.
    """
    validate_image(image)
    _check_coords(image, x, y)
    _check_channel(channel)
    return jnd_curve(kernels.window_max(image, int(y), int(x), int(channel)))


@dataclass(frozen=True)
class PsTable:
    """Cumulative perceptual stimulus per intensity level.

    ``cumulative[v]`` is the accumulated stimulus between intensity 0 and v:
    ``k * sum(1 / jnd_curve(i) for i in range(v))``, with ``k`` solved so the
    endpoints anchor exactly at 0 and 255. Strictly increasing.
    """

    k: float
    cumulative: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "cumulative", np.asarray(self.cumulative, dtype=np.float64))
        self.cumulative.setflags(write=False)


def build_ps_table() -> PsTable:
    """Solve the endpoint conditions and fill the 256-entry stimulus table.

    The additive constant is pinned to 0 by the zero-perturbation anchor;
    the gain ``k`` is 255 over the full sum of reciprocal thresholds, which
    makes the table hit 255 exactly at intensity 255.
    """
    inv = np.array([1.0 / jnd_curve(v) for v in range(255)])
    k = 255.0 / inv.sum()
    cumulative = np.zeros(256)
    cumulative[1:] = k * np.cumsum(inv)
    return PsTable(k=k, cumulative=cumulative)


DEFAULT_PS_TABLE = build_ps_table()


def ps_of_change(table: PsTable, original, perturbed) -> float:
    """Perceived stimulus of changing one channel value to another.

    Symmetric in its arguments and zero only for no change; for ordered
    values it is additive over intermediate stops.
    """
    a = _check_intensity(original, "original")
    b = _check_intensity(perturbed, "perturbed")
    return float(abs(table.cumulative[b] - table.cumulative[a]))


def texture_sd(image, x, y, channel) -> float:
    """Population standard deviation of the 3x3 window around (x, y).

    Divides by the full window size (9), with edge replication at borders.
    Always measured on the benign image: high local variance masks
    perturbations, so it appears in the loss denominator.
    """
    validate_image(image)
    _check_coords(image, x, y)
    _check_channel(channel)
    return float(kernels.window_sd(image, int(y), int(x), int(channel)))


@dataclass(frozen=True)
class ChannelWeights:
    """Relative R/G/B sensitivity of the eye; nonnegative, summing to 1."""

    red: float
    green: float
    blue: float

    def __post_init__(self):
        for name in ("red", "green", "blue"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} weight must be finite and >= 0, got {v!r}")
        total = self.red + self.green + self.blue
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1 (got {total!r})")

    def as_tuple(self) -> tuple:
        return (self.red, self.green, self.blue)


# Classic RGB-to-gray coefficients; green dominates, blue barely registers.
DEFAULT_CHANNEL_WEIGHTS = ChannelWeights(0.299, 0.587, 0.114)


@dataclass(frozen=True)
class PixelLossBreakdown:
    """Per-channel pieces of one pixel's perceptual loss.

    ``sd`` holds the raw window standard deviations; the ``terms`` already
    apply the configured floor, so ``total == terms.sum()`` even in flat
    regions where ``sd`` is 0.
    """

    ps: np.ndarray
    sd: np.ndarray
    terms: np.ndarray
    total: float
    sd_floor: float


def integ_loss(
    benign,
    unit: PerturbationUnit,
    weights: ChannelWeights = DEFAULT_CHANNEL_WEIGHTS,
    table: PsTable = None,
    sd_floor: float = DEFAULT_SD_FLOOR,
) -> PixelLossBreakdown:
    """Perceptual loss of applying one perturbation unit to a benign image.

    Per channel: stimulus of the value change, divided by the texture
    standard deviation (floored at ``sd_floor`` so perfectly flat regions
    stay finite while keeping their heavy penalty), weighted by the channel
    sensitivity. Zero exactly when the unit is a no-op.
    """
    validate_image(benign)
    unit.check_bounds(benign)
    if table is None:
        table = DEFAULT_PS_TABLE
    if not (np.isfinite(sd_floor) and sd_floor > 0):
        raise ValueError(f"sd_floor must be positive, got {sd_floor!r}")
    out = np.empty(9)
    wr, wg, wb = weights.as_tuple()
    total = kernels.integ_loss_terms(
        benign, unit.y, unit.x, unit.r, unit.g, unit.b,
        table.cumulative, wr, wg, wb, sd_floor, out,
    )
    return PixelLossBreakdown(
        ps=out[0:3].copy(),
        sd=out[3:6].copy(),
        terms=out[6:9].copy(),
        total=float(total),
        sd_floor=float(sd_floor),
    )


def mul_factor_loss(
    benign,
    adversarial,
    weights: ChannelWeights = DEFAULT_CHANNEL_WEIGHTS,
    table: PsTable = None,
    sd_floor: float = DEFAULT_SD_FLOOR,
) -> float:
    """Whole-image perceptual loss: per-pixel losses summed over the set of
    pixels where the two images differ in any channel."""
    validate_image(benign)
    validate_image(adversarial)
    if benign.shape != adversarial.shape:
        raise ValueError(
            f"shape mismatch: {benign.shape} vs {adversarial.shape}"
        )
    if table is None:
        table = DEFAULT_PS_TABLE
    if not (np.isfinite(sd_floor) and sd_floor > 0):
        raise ValueError(f"sd_floor must be positive, got {sd_floor!r}")
    wr, wg, wb = weights.as_tuple()
    return float(kernels.image_pair_loss(
        benign, adversarial, table.cumulative, wr, wg, wb, sd_floor,
    ))


class LpNorms(NamedTuple):
    l0: int
    l2: float
    linf: int


def lp_norms(benign, adversarial) -> LpNorms:
    """Classic perturbation magnitudes for an image pair.

    L0 counts perturbed pixels (any-channel difference, pixel level), L2 is
    the Euclidean norm of the channelwise difference vector, Linf the
    largest absolute channel difference.
    """
    validate_image(benign)
    validate_image(adversarial)
    if benign.shape != adversarial.shape:
        raise ValueError(
            f"shape mismatch: {benign.shape} vs {adversarial.shape}"
        )
    diff = adversarial.astype(np.int64) - benign.astype(np.int64)
    l0 = int(np.any(diff != 0, axis=2).sum())
    l2 = float(np.sqrt((diff.astype(np.float64) ** 2).sum()))
    linf = int(np.abs(diff).max()) if diff.size else 0
    return LpNorms(l0=l0, l2=l2, linf=linf)
