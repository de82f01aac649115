"""Image quality metrics: MSE, PSNR, and SSIM on [0, 1] images.

Pixels are floats in [0, 1] (8-bit inputs divide by 255 before reaching this
module), so PSNR is 10 * log10(1 / MSE) with a configurable cap at MSE = 0.
SSIM comes in two flavors: a single global statistic over the whole image,
and the standard local form averaging an 11x11 Gaussian window (sigma 1.5).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PSNR_CAP_DB = 100.0

GLOBAL = "global"
GAUSSIAN_11X11 = "gaussian_11x11"

_WINDOW_SIZE = 11
_WINDOW_SIGMA = 1.5


@dataclass(frozen=True)
class Image:
    """An image as float64 pixels in [0, 1], shape (height, width, channels)."""

    width: int
    height: int
    channels: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.channels not in (1, 3):
            raise ValueError("channels must be 1 or 3")
        if self.width < 1 or self.height < 1:
            raise ValueError("empty image")
        expected = (self.height, self.width, self.channels)
        if self.pixels.shape != expected:
            raise ValueError(f"pixel shape {self.pixels.shape} != {expected}")
        if self.pixels.min() < 0.0 or self.pixels.max() > 1.0:
            raise ValueError("pixel values must lie in [0, 1]")
        self.pixels.setflags(write=False)

    @classmethod
    def from_array(cls, arr) -> "Image":
        a = np.asarray(arr, dtype=float)
        if a.ndim == 2:
            a = a[:, :, None]
        if a.ndim != 3:
            raise ValueError(f"expected a 2-d or 3-d array, got shape {a.shape}")
        h, w, c = a.shape
        return cls(width=w, height=h, channels=c, pixels=a.copy())

    def to_array(self) -> np.ndarray:
        return np.array(self.pixels)


@dataclass(frozen=True)
class SsimConfig:
    """SSIM stabilization constants and window mode.

    Defaults are the standard C1 = (0.01 L)^2, C2 = (0.03 L)^2 with dynamic
    range L = 1.
    """

    c1: float = 0.01**2
    c2: float = 0.03**2
    window: str = GAUSSIAN_11X11

    def __post_init__(self):
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValueError("c1 and c2 must be positive")
        if self.window not in (GLOBAL, GAUSSIAN_11X11):
            raise ValueError(f"unknown window mode {self.window!r}")


def _check_compatible(a: Image, b: Image) -> None:
    if (a.width, a.height, a.channels) != (b.width, b.height, b.channels):
        raise ValueError(
            f"image dimensions differ: {a.width}x{a.height}x{a.channels} vs "
            f"{b.width}x{b.height}x{b.channels}"
        )


def mse(a: Image, b: Image) -> float:
    """Mean squared pixel difference over all positions and channels."""
    _check_compatible(a, b)
    diff = a.pixels - b.pixels
    return float(np.mean(diff * diff))


def psnr(a: Image, b: Image, cap: float = PSNR_CAP_DB) -> float:
    """Peak signal-to-noise ratio in dB; identical images return the cap."""
    error = mse(a, b)
    if error == 0.0:
        return cap
    return 10.0 * math.log10(1.0 / error)


def ssim(a: Image, b: Image, cfg: SsimConfig = SsimConfig()) -> float:
    """Structural similarity, averaged over channels.

    ``global`` mode computes one statistic from whole-image moments, matching
    the closed form; ``gaussian_11x11`` averages the local SSIM map produced
    by an 11x11 Gaussian window and needs both sides of the image >= 11.
    """
    _check_compatible(a, b)
    per_channel = []
    for c in range(a.channels):
        xa = a.pixels[:, :, c]
        xb = b.pixels[:, :, c]
        if cfg.window == GLOBAL:
            per_channel.append(_ssim_global(xa, xb, cfg))
        else:
            per_channel.append(_ssim_gaussian(xa, xb, cfg))
    return float(np.mean(per_channel))


def _ssim_statistic(mu_a, mu_b, var_a, var_b, cov, cfg: SsimConfig):
    numerator = (2.0 * mu_a * mu_b + cfg.c1) * (2.0 * cov + cfg.c2)
    denominator = (mu_a**2 + mu_b**2 + cfg.c1) * (var_a + var_b + cfg.c2)
    return numerator / denominator


def _ssim_global(xa: np.ndarray, xb: np.ndarray, cfg: SsimConfig) -> float:
    mu_a = xa.mean()
    mu_b = xb.mean()
    var_a = (xa * xa).mean() - mu_a**2
    var_b = (xb * xb).mean() - mu_b**2
    cov = (xa * xb).mean() - mu_a * mu_b
    return float(_ssim_statistic(mu_a, mu_b, var_a, var_b, cov, cfg))


def gaussian_window(size: int = _WINDOW_SIZE, sigma: float = _WINDOW_SIGMA) -> np.ndarray:
    """Normalized 1-d Gaussian tap weights (the 2-d window is separable)."""
    offsets = np.arange(size) - (size - 1) / 2.0
    w = np.exp(-(offsets**2) / (2.0 * sigma**2))
    return w / w.sum()


def _filter_valid(img: np.ndarray, taps: np.ndarray) -> np.ndarray:
    # Separable 2-d correlation, valid region only; the window is symmetric
    # so convolution and correlation coincide.
    rows = np.apply_along_axis(np.convolve, 1, img, taps, mode="valid")
    return np.apply_along_axis(np.convolve, 0, rows, taps, mode="valid")


def _ssim_gaussian(xa: np.ndarray, xb: np.ndarray, cfg: SsimConfig) -> float:
    h, w = xa.shape
    if h < _WINDOW_SIZE or w < _WINDOW_SIZE:
        raise ValueError(
            f"image {w}x{h} too small for an {_WINDOW_SIZE}x{_WINDOW_SIZE} window"
        )
    taps = gaussian_window()
    mu_a = _filter_valid(xa, taps)
    mu_b = _filter_valid(xb, taps)
    var_a = _filter_valid(xa * xa, taps) - mu_a**2
    var_b = _filter_valid(xb * xb, taps) - mu_b**2
    cov = _filter_valid(xa * xb, taps) - mu_a * mu_b
    return float(np.mean(_ssim_statistic(mu_a, mu_b, var_a, var_b, cov, cfg)))
