"""Full-reference 2D metrics: PSNR, SSIM, MS-SSIM and pixel-domain VIF.

All windowed statistics are taken at fully interior positions only (no
padding), and all inputs are treated on the 0-255 sample scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from .kernels import filter_valid
from .videoio import as_array

__all__ = [
    "SsimParams",
    "MsSsimParams",
    "VifParams",
    "SsimResult",
    "gaussian_kernel",
    "gaussian_kernel_1d",
    "psnr",
    "ssim",
    "ssim_terms",
    "ms_ssim",
    "ms_ssim_terms",
    "vifp",
    "vifp_terms",
    "mse",
    "PEAK",
    "MS_SSIM_WEIGHTS",
]

PEAK = 255.0
MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
VIF_EPS = 1e-10


@dataclass(frozen=True)
class SsimParams:
    window_size: int = 11
    window_sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = PEAK

    def __post_init__(self):
        if self.window_size < 3 or self.window_size % 2 == 0:
            raise ValueError(f"window_size must be odd and >= 3, got {self.window_size}")
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("k1 and k2 must be positive")
        if self.window_sigma <= 0 or self.dynamic_range <= 0:
            raise ValueError("window_sigma and dynamic_range must be positive")

    @property
    def c1(self) -> float:
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.dynamic_range) ** 2


@dataclass(frozen=True)
class MsSsimParams:
    num_scales: int = 5
    exponents: Tuple[float, ...] = MS_SSIM_WEIGHTS
    ssim: SsimParams = SsimParams()

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(float(e) for e in self.exponents))
        if self.num_scales < 1:
            raise ValueError("num_scales must be >= 1")
        if len(self.exponents) != self.num_scales:
            raise ValueError(
                f"{len(self.exponents)} exponents given for {self.num_scales} scales"
            )
        if any(e <= 0 for e in self.exponents):
            raise ValueError("MS-SSIM exponents must be positive")

    @property
    def min_size(self) -> int:
        return self.ssim.window_size * 2 ** (self.num_scales - 1)


@dataclass(frozen=True)
class VifParams:
    """Pixel-domain VIF settings.

    ``window_sizes`` lists the Gaussian window per scale, finest first; when
    omitted, scale ``s`` (1-based) uses ``2**(num_scales - s + 1) + 1`` taps,
    i.e. 17, 9, 5, 3 for four scales. Each window has sigma ``size / 5``.
    """

    num_scales: int = 4
    noise_variance: float = 2.0
    window_sizes: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.num_scales < 1:
            raise ValueError("num_scales must be >= 1")
        if self.noise_variance <= 0:
            raise ValueError("noise_variance must be positive")
        if self.window_sizes is not None:
            ws = tuple(int(w) for w in self.window_sizes)
            if len(ws) != self.num_scales or any(w < 1 or w % 2 == 0 for w in ws):
                raise ValueError(f"window_sizes must be {self.num_scales} odd sizes, got {ws}")
            object.__setattr__(self, "window_sizes", ws)

    @property
    def windows(self) -> Tuple[int, ...]:
        if self.window_sizes is not None:
            return self.window_sizes
        return tuple(2 ** (self.num_scales - s + 1) + 1 for s in range(1, self.num_scales + 1))


class SsimResult(NamedTuple):
    mean: float
    map: Optional[np.ndarray] = None


def gaussian_kernel_1d(size: int, sigma: float) -> np.ndarray:
    if size < 1 or size % 2 == 0:
        raise ValueError(f"kernel size must be a positive odd integer, got {size}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    r = (size - 1) / 2
    x = np.arange(size) - r
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    """Normalized, symmetric ``size x size`` Gaussian (outer product of 1-D taps)."""
    g = gaussian_kernel_1d(size, sigma)
    return np.outer(g, g)


def _pair(ref, dist):
    a, b = as_array(ref), as_array(dist)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("metric inputs must be 2-D planes")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: reference {a.shape[::-1]} vs distorted {b.shape[::-1]} (WxH)")
    return a, b


def mse(ref, dist) -> float:
    a, b = _pair(ref, dist)
    d = a - b
    return float(np.mean(d * d))


def psnr(ref, dist, peak: float = PEAK) -> float:
    """PSNR in dB; ``inf`` when the planes are identical."""
    m = mse(ref, dist)
    if m == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / m)


# ---------------------------------------------------------------------------
# SSIM
# ---------------------------------------------------------------------------


def _local_stats(a, b, k):
    mu_a = filter_valid(a, k)
    mu_b = filter_valid(b, k)
    var_a = filter_valid(a * a, k) - mu_a * mu_a
    var_b = filter_valid(b * b, k) - mu_b * mu_b
    cov = filter_valid(a * b, k) - mu_a * mu_b
    return mu_a, mu_b, var_a, var_b, cov


def ssim_terms(ref, dist, params: SsimParams = SsimParams()):
    """Luminance and contrast-structure maps; SSIM map is their product."""
    a, b = _pair(ref, dist)
    n = params.window_size
    if min(a.shape) < n:
        raise ValueError(
            f"plane {a.shape[1]}x{a.shape[0]} is smaller than the {n}x{n} SSIM window"
        )
    k = gaussian_kernel_1d(n, params.window_sigma)
    mu_a, mu_b, var_a, var_b, cov = _local_stats(a, b, k)
    c1, c2 = params.c1, params.c2
    lum = (2.0 * mu_a * mu_b + c1) / (mu_a * mu_a + mu_b * mu_b + c1)
    cs = (2.0 * cov + c2) / (var_a + var_b + c2)
    return lum, cs


def ssim(ref, dist, params: SsimParams = SsimParams(), full: bool = False) -> SsimResult:
    """Mean Gaussian-windowed SSIM, optionally with the per-position map."""
    lum, cs = ssim_terms(ref, dist, params)
    smap = lum * cs
    return SsimResult(float(smap.mean()), smap if full else None)


# ---------------------------------------------------------------------------
# MS-SSIM
# ---------------------------------------------------------------------------


def downsample2(a: np.ndarray) -> np.ndarray:
    """2x2 block mean then decimation; an odd trailing row/column is dropped."""
    h, w = (a.shape[0] // 2) * 2, (a.shape[1] // 2) * 2
    a = a[:h, :w]
    return 0.25 * (a[0::2, 0::2] + a[1::2, 0::2] + a[0::2, 1::2] + a[1::2, 1::2])


def ms_ssim_terms(ref, dist, params: MsSsimParams = MsSsimParams()):
    """Per-scale mean contrast-structure terms and the coarsest-scale SSIM.

    Returns ``(cs, top)`` where ``cs`` has ``num_scales - 1`` entries (finest
    first) and ``top`` is the mean SSIM (luminance included) at the coarsest
    scale.
    """
    a, b = _pair(ref, dist)
    need = params.min_size
    if min(a.shape) < need:
        raise ValueError(
            f"MS-SSIM with {params.num_scales} scales and an {params.ssim.window_size}px "
            f"window needs both dimensions >= {need}, got {a.shape[1]}x{a.shape[0]}"
        )
    cs_means = []
    for s in range(params.num_scales):
        lum, cs = ssim_terms(a, b, params.ssim)
        if s == params.num_scales - 1:
            return cs_means, float((lum * cs).mean())
        cs_means.append(float(cs.mean()))
        a, b = downsample2(a), downsample2(b)
    raise AssertionError("unreachable")


def ms_ssim(ref, dist, params: MsSsimParams = MsSsimParams()) -> float:
    """Multi-scale SSIM. Negative per-scale terms are floored at 0."""
    cs, top = ms_ssim_terms(ref, dist, params)
    w = params.exponents
    out = max(top, 0.0) ** w[-1]
    for c, e in zip(cs, w[:-1]):
        out *= max(c, 0.0) ** e
    return float(out)


# ---------------------------------------------------------------------------
# VIF (pixel domain)
# ---------------------------------------------------------------------------


def _vif_fits(shape, windows) -> bool:
    h, w = shape
    for i, n in enumerate(windows):
        if i > 0:
            # prefilter with this scale's window, then decimate
            h, w = h - n + 1, w - n + 1
            if h < 1 or w < 1:
                return False
            h, w = (h + 1) // 2, (w + 1) // 2
        if h < n or w < n:
            return False
    return True


def vif_scale_plan(shape, params: VifParams = VifParams()) -> Tuple[int, ...]:
    """Window sizes actually used for a plane of ``shape`` (finest first).

    Small planes use the coarse end of the configured pyramid: the largest
    ``k`` such that the last ``k`` windows fit is kept.
    """
    windows = params.windows
    for k in range(len(windows), 0, -1):
        sub = windows[len(windows) - k :]
        if _vif_fits(shape, sub):
            return sub
    raise ValueError(
        f"plane {shape[1]}x{shape[0]} is smaller than the smallest VIF window "
        f"({windows[-1]}x{windows[-1]})"
    )


def _vif_scale_sums(a, b, n, sigma_nsq, stabilize):
    k = gaussian_kernel_1d(n, n / 5.0)
    mu_a, mu_b, var_a, var_b, cov = _local_stats(a, b, k)
    var_a = np.maximum(var_a, 0.0)
    var_b = np.maximum(var_b, 0.0)
    if stabilize:
        var_a = var_a + VIF_EPS
        var_b = var_b + VIF_EPS
        g = cov / var_a
        sv = var_b - g * cov
    else:
        flat_a = var_a < VIF_EPS
        g = np.where(flat_a, 0.0, cov / np.where(flat_a, 1.0, var_a))
        sv = np.where(flat_a, var_b, var_b - g * cov)
        var_a = np.where(flat_a, 0.0, var_a)
        flat_b = var_b < VIF_EPS
        g = np.where(flat_b, 0.0, g)
        sv = np.where(flat_b, 0.0, sv)
    neg = g < 0
    sv = np.where(neg, var_b, sv)
    g = np.where(neg, 0.0, g)
    sv = np.maximum(sv, 0.0)
    num = np.log2(1.0 + g * g * var_a / (sv + sigma_nsq)).sum()
    den = np.log2(1.0 + var_a / sigma_nsq).sum()
    return float(num), float(den)


def vifp_terms(ref, dist, params: VifParams = VifParams(), stabilize: bool = False):
    """Per-scale (distorted-information, reference-information) sums."""
    a, b = _pair(ref, dist)
    plan = vif_scale_plan(a.shape, params)
    # a common offset leaves every variance and covariance unchanged, and
    # centring makes a constant reference exactly zero
    offset = a.mean()
    a, b = a - offset, b - offset
    out = []
    for i, n in enumerate(plan):
        if i > 0:
            k = gaussian_kernel_1d(n, n / 5.0)
            a = filter_valid(a, k)[::2, ::2]
            b = filter_valid(b, k)[::2, ::2]
        out.append(_vif_scale_sums(a, b, n, params.noise_variance, stabilize))
    return out


def vifp(ref, dist, params: VifParams = VifParams()) -> float:
    """Multi-scale pixel-domain visual information fidelity of ``dist`` w.r.t. ``ref``.

    Equals 1 for identical inputs and is usually in [0, 1]; contrast
    enhancement can push it slightly above 1. A reference with no variance
    anywhere carries no information: the score is 1.0 if ``dist`` matches it
    exactly and otherwise is computed with ``1e-10`` added to every local
    variance.
    """
    terms = vifp_terms(ref, dist, params)
    den = sum(d for _, d in terms)
    if den > 0.0:
        return sum(n for n, _ in terms) / den
    a, b = _pair(ref, dist)
    if np.array_equal(a, b):
        return 1.0
    terms = vifp_terms(ref, dist, params, stabilize=True)
    return sum(n for n, _ in terms) / sum(d for _, d in terms)
