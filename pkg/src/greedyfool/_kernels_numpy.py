"""Pure-numpy implementations of the hot numeric kernels.

These are the fallback path used when numba is unavailable or disabled via
the GREEDYFOOL_NO_NUMBA environment variable. Each function here has a
loop-style twin in ``_kernels_numba`` with the same signature; the test
suite asserts both paths agree.

Pixel windows are 3x3 with edge replication, so border windows repeat the
clamped pixels with the correct multiplicity (a corner pixel appears four
times in its own window).
"""

import numpy as np

_LUM_R = 0.299
_LUM_G = 0.587
_LUM_B = 0.114


def _window(image, y, x, c):
    h, w = image.shape[0], image.shape[1]
    ys = np.clip(np.arange(y - 1, y + 2), 0, h - 1)
    xs = np.clip(np.arange(x - 1, x + 2), 0, w - 1)
    return image[np.ix_(ys, xs)][:, :, c].astype(np.float64)


def window_max(image, y, x, c):
    """Maximum intensity of the 3x3 edge-replicated window, one channel."""
    return float(_window(image, y, x, c).max())


def window_sd(image, y, x, c):
    """Population standard deviation (divide by 9) of the 3x3 window."""
    vals = _window(image, y, x, c)
    return float(np.sqrt(((vals - vals.mean()) ** 2).mean()))


def integ_loss_terms(image, y, x, r, g, b, cumulative, wr, wg, wb, sd_floor, out):
    """Per-pixel perceptual loss of replacing pixel (y, x) with (r, g, b).

    Fills ``out`` (length 9) with the per-channel stimulus values, window
    standard deviations and weighted terms; returns the total loss.
    """
    new_vals = (r, g, b)
    weights = (wr, wg, wb)
    total = 0.0
    for c in range(3):
        ps = abs(cumulative[new_vals[c]] - cumulative[int(image[y, x, c])])
        sd = window_sd(image, y, x, c)
        term = weights[c] * ps / max(sd, sd_floor)
        out[c] = ps
        out[3 + c] = sd
        out[6 + c] = term
        total += term
    return total


def image_pair_loss(benign, adversarial, cumulative, wr, wg, wb, sd_floor):
    """Sum of per-pixel losses over every pixel where the images differ."""
    diff = np.any(benign != adversarial, axis=2)
    scratch = np.empty(9)
    total = 0.0
    for y, x in np.argwhere(diff):
        px = adversarial[y, x]
        total += integ_loss_terms(
            benign, int(y), int(x), int(px[0]), int(px[1]), int(px[2]),
            cumulative, wr, wg, wb, sd_floor, scratch,
        )
    return float(total)


def toy_forward(image, weight_matrix):
    """Linear-softmax toy classifier forward pass.

    Block-averages the luminance of ``image`` onto an 8x8 grid scaled to
    [0, 1], applies ``weight_matrix`` (num_classes x 64) and returns the
    softmax probabilities.
    """
    h, w = image.shape[0], image.shape[1]
    lum = (
        image[:, :, 0] * _LUM_R
        + image[:, :, 1] * _LUM_G
        + image[:, :, 2] * _LUM_B
    )
    feats = lum.reshape(8, h // 8, 8, w // 8).mean(axis=(1, 3)).ravel() / 255.0
    logits = weight_matrix @ feats
    logits -= logits.max()
    e = np.exp(logits)
    return e / e.sum()
