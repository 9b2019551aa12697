"""Cyclopean-view model: matched block pairs fused in the DCT domain.

Each luma block of the left view is paired with the right-view block found
by the disparity map, both are transformed with an orthonormal 2-D DCT,
averaged, and weighted by a contrast sensitivity curve. Quality is the mean
single-window SSIM between reference and distorted fused blocks after the
inverse transform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from scipy import fft

from .errors import ConfigError
from .kernels import block_ssim
from .metrics2d import SsimParams
from .videoio import StereoFrame, ViewingGeometry, as_array

__all__ = [
    "Block",
    "CsfModel",
    "CyclopeanBlock",
    "CyclopeanResult",
    "partition_blocks",
    "extract_block",
    "dct2",
    "idct2",
    "csf_curve",
    "coefficient_frequencies",
    "csf_weights",
    "round_half_toward_zero",
    "match_block",
    "fuse_cyclopean",
    "single_window_ssim",
    "cyclopean_detail",
    "cyclopean_quality",
]


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


@dataclass(frozen=True, eq=False)
class Block:
    origin: Tuple[int, int]  # (x, y) in the luma plane
    size: int
    samples: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class CsfModel:
    """Band-pass contrast sensitivity curve plus the viewing geometry.

    Sensitivity rises linearly from ``low_freq_attenuation`` at 0 cycles/degree
    to 1 at ``peak_frequency``, then decays as ``exp(-decay_rate * (f/peak - 1))``.
    ``low_freq_attenuation=1`` with ``decay_rate=0`` is flat.
    ``lowpass_keep=k`` additionally zeroes every coefficient outside the
    top-left ``k x k`` corner.
    """

    peak_frequency: float = 8.0
    low_freq_attenuation: float = 0.6
    decay_rate: float = 0.6
    geometry: ViewingGeometry = ViewingGeometry()
    lowpass_keep: Optional[int] = None

    def __post_init__(self):
        if not self.peak_frequency > 0:
            raise ConfigError(f"peak_frequency must be positive, got {self.peak_frequency}")
        if not self.low_freq_attenuation > 0:
            raise ConfigError(
                f"low_freq_attenuation must be positive, got {self.low_freq_attenuation}"
            )
        if not self.decay_rate >= 0:
            raise ConfigError(f"decay_rate must be >= 0, got {self.decay_rate}")
        if self.lowpass_keep is not None and self.lowpass_keep < 1:
            raise ConfigError(f"lowpass_keep must be >= 1, got {self.lowpass_keep}")


@dataclass(frozen=True, eq=False)
class CyclopeanBlock:
    coefficients: np.ndarray
    left_origin: Optional[Tuple[int, int]] = None
    right_origin: Optional[Tuple[int, int]] = None


class CyclopeanResult(NamedTuple):
    score: float
    block_scores: np.ndarray
    n_blocks: int
    ref_clamps: int
    dist_clamps: int


def partition_blocks(plane, block_size: int) -> List[Tuple[int, int]]:
    """Raster-order ``(x, y)`` origins of the non-overlapping tiling.

    Right and bottom remainders smaller than a block are dropped.
    """
    h, w = np.shape(as_array(plane))
    if block_size < 1:
        raise ValueError(f"block_size must be positive, got {block_size}")
    if w < block_size or h < block_size:
        raise ValueError(f"plane {w}x{h} is smaller than one {block_size}x{block_size} block")
    return [(x, y) for y in range(0, h - block_size + 1, block_size)
            for x in range(0, w - block_size + 1, block_size)]


def extract_block(plane, origin, block_size: int) -> Block:
    a = as_array(plane)
    x, y = origin
    h, w = a.shape
    if x < 0 or y < 0 or x + block_size > w or y + block_size > h:
        raise ValueError(f"block at {origin} of size {block_size} leaves the {w}x{h} plane")
    return Block((x, y), block_size, a[y : y + block_size, x : x + block_size].copy())


def _square_pow2(a, what):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2] or not _is_pow2(a.shape[-1]):
        raise ValueError(f"{what} must be square with a power-of-two side, got shape {a.shape}")
    return a


def dct2(block) -> np.ndarray:
    """Orthonormal type-II 2-D DCT over the last two axes."""
    samples = block.samples if isinstance(block, Block) else block
    return fft.dctn(_square_pow2(samples, "block"), type=2, norm="ortho", axes=(-2, -1))


def idct2(coefficients) -> np.ndarray:
    return fft.idctn(_square_pow2(coefficients, "coefficients"), type=2, norm="ortho", axes=(-2, -1))


def csf_curve(model: CsfModel, freq) -> np.ndarray:
    """Relative contrast sensitivity at ``freq`` cycles/degree (peak value 1)."""
    x = np.asarray(freq, dtype=np.float64) / model.peak_frequency
    b = model.low_freq_attenuation
    rise = b + (1.0 - b) * x
    fall = np.exp(-model.decay_rate * (x - 1.0))
    return np.where(x < 1.0, rise, fall)


def coefficient_frequencies(model: CsfModel, block_size: int) -> np.ndarray:
    """Radial spatial frequency (cycles/degree) of each DCT coefficient.

    Basis index ``u`` spans ``u / (2 * block_size)`` cycles per pixel.
    """
    u = np.arange(block_size)
    cpp = np.hypot(u[:, None], u[None, :]) / (2.0 * block_size)
    return cpp * model.geometry.pixels_per_degree


def csf_weights(model: CsfModel, block_size: int) -> np.ndarray:
    if not _is_pow2(block_size) or block_size < 1:
        raise ValueError(f"block size must be a power of two, got {block_size}")
    w = csf_curve(model, coefficient_frequencies(model, block_size))
    w = w / w.max()
    w[0, 0] = 1.0
    if model.lowpass_keep is not None:
        k = model.lowpass_keep
        w[k:, :] = 0.0
        w[:, k:] = 0.0
    if not np.all(np.isfinite(w)):
        raise ConfigError(f"CSF produced non-finite weights for {model}")
    return w


def round_half_toward_zero(x):
    """Nearest integer; exact halves go toward zero."""
    x = np.asarray(x, dtype=np.float64)
    r = np.sign(x) * np.ceil(np.abs(x) - 0.5)
    return r.astype(np.int64)


def match_block(left_origin, disparity_map, block_size: int, plane_width: int):
    """Right-view origin paired with the left-view block at ``left_origin``.

    Positive disparity points to smaller ``x`` in the right view. Returns
    ``(right_origin, clamped)``; ``clamped`` is True when the shifted block had
    to be pulled back inside the plane.
    """
    x, y = left_origin
    d = as_array(disparity_map)[y : y + block_size, x : x + block_size]
    shift = int(round_half_toward_zero(d.mean()))
    rx = x - shift
    cx = min(max(rx, 0), plane_width - block_size)
    return (cx, y), cx != rx


def fuse_cyclopean(block_left, block_right, csf: np.ndarray) -> CyclopeanBlock:
    """CSF-weighted mean of the two blocks' DCT coefficients."""
    bl = block_left.samples if isinstance(block_left, Block) else np.asarray(block_left, dtype=np.float64)
    br = block_right.samples if isinstance(block_right, Block) else np.asarray(block_right, dtype=np.float64)
    if bl.shape != br.shape:
        raise ValueError(f"block size mismatch: {bl.shape} vs {br.shape}")
    csf = np.asarray(csf, dtype=np.float64)
    if csf.shape != bl.shape:
        raise ValueError(f"CSF weights {csf.shape} do not match blocks {bl.shape}")
    coef = csf * (dct2(bl) + dct2(br)) / 2.0
    return CyclopeanBlock(
        coef,
        getattr(block_left, "origin", None),
        getattr(block_right, "origin", None),
    )


def single_window_ssim(x, y, params: SsimParams = SsimParams()) -> float:
    """SSIM with one uniform window covering the whole block."""
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    y = np.asarray(y, dtype=np.float64).reshape(1, -1)
    return float(block_ssim(x, y, params.c1, params.c2)[0])


def _block_grid(plane, block_size):
    h, w = plane.shape
    nby, nbx = h // block_size, w // block_size
    if nby == 0 or nbx == 0:
        raise ValueError(f"plane {w}x{h} is smaller than one {block_size}x{block_size} block")
    ys = np.repeat(np.arange(nby) * block_size, nbx)
    xs = np.tile(np.arange(nbx) * block_size, nby)
    return xs, ys


def _matched_right_x(disparity, xs, ys, block_size, width):
    d = as_array(disparity)
    nby, nbx = d.shape[0] // block_size, d.shape[1] // block_size
    means = d[: nby * block_size, : nbx * block_size].reshape(nby, block_size, nbx, block_size).mean(axis=(1, 3))
    rx = xs - round_half_toward_zero(means.ravel())
    cx = np.clip(rx, 0, width - block_size)
    return cx, int(np.count_nonzero(cx != rx))


def _gather(plane, xs, ys, block_size):
    off = np.arange(block_size)
    rows = ys[:, None, None] + off[None, :, None]
    cols = xs[:, None, None] + off[None, None, :]
    return plane[rows, cols]


def _fused_blocks(pair: StereoFrame, disparity, csf_w, block_size):
    left = as_array(pair.left.y)
    right = as_array(pair.right.y)
    if np.shape(as_array(disparity)) != left.shape:
        raise ValueError(
            f"disparity map {np.shape(as_array(disparity))[::-1]} is not co-sited with "
            f"the {left.shape[1]}x{left.shape[0]} left view"
        )
    xs, ys = _block_grid(left, block_size)
    rx, clamps = _matched_right_x(disparity, xs, ys, block_size, left.shape[1])
    bl = _gather(left, xs, ys, block_size)
    br = _gather(right, rx, ys, block_size)
    coef = csf_w * (dct2(bl) + dct2(br)) / 2.0
    return idct2(coef), clamps


def cyclopean_detail(ref: StereoFrame, dist: StereoFrame, ref_disparity, dist_disparity,
                     block_size: int = 8, csf: CsfModel = CsfModel(),
                     ssim_params: SsimParams = SsimParams(),
                     dist_uses_ref_disparity: bool = False) -> CyclopeanResult:
    """Per-block cyclopean SSIM scores and their mean.

    ``XC_i`` comes from the reference pair with ``ref_disparity``; ``XC'_i``
    from the distorted pair with ``dist_disparity`` (or ``ref_disparity`` when
    ``dist_uses_ref_disparity`` is set).
    """
    if (ref.width, ref.height) != (dist.width, dist.height):
        raise ValueError(
            f"reference pair is {ref.width}x{ref.height}, distorted pair is "
            f"{dist.width}x{dist.height}"
        )
    w = csf_weights(csf, block_size)
    xr, ref_clamps = _fused_blocks(ref, ref_disparity, w, block_size)
    dd = ref_disparity if dist_uses_ref_disparity else dist_disparity
    xd, dist_clamps = _fused_blocks(dist, dd, w, block_size)
    n = xr.shape[0]
    scores = block_ssim(xr.reshape(n, -1), xd.reshape(n, -1), ssim_params.c1, ssim_params.c2)
    score = math.fsum(scores.tolist()) / n
    return CyclopeanResult(score, scores, n, ref_clamps, dist_clamps)


def cyclopean_quality(ref: StereoFrame, dist: StereoFrame, ref_disparity, dist_disparity,
                      **kwargs) -> float:
    """Mean over blocks of SSIM(IDCT(XC_i), IDCT(XC'_i)); keyword options as in
    :func:`cyclopean_detail`."""
    return cyclopean_detail(ref, dist, ref_disparity, dist_disparity, **kwargs).score
