"""Disparity estimation and the depth terms of the HV3D index.

Depth codes and disparities are related linearly: code 0 stands for
``code_min_disparity`` pixels and code 255 for ``code_max_disparity``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .kernels import sad_block_disparity
from .metrics2d import VifParams, vifp
from .videoio import DepthMap, Plane, ViewingGeometry, as_array

__all__ = [
    "DisparityEstimatorParams",
    "REFERENCE_GEOMETRY",
    "estimate_disparity",
    "disparity_to_depth",
    "depth_to_disparity",
    "to_degree_domain",
    "depth_fidelity",
    "block_variance_map",
    "variance_weight_sum",
    "depth_quality_term",
]

log = logging.getLogger(__name__)

REFERENCE_GEOMETRY = ViewingGeometry()


@dataclass(frozen=True)
class DisparityEstimatorParams:
    block_size: int = 8
    search_range: int = 64
    cost: str = "sad"
    code_min_disparity: float = -64.0
    code_max_disparity: float = 64.0

    def __post_init__(self):
        if self.block_size < 1:
            raise ValueError(f"block_size must be positive, got {self.block_size}")
        if self.search_range < 1:
            raise ValueError(f"search_range must be >= 1, got {self.search_range}")
        if self.cost != "sad":
            raise ValueError(f"only the 'sad' matching cost is supported, got {self.cost!r}")
        if not self.code_max_disparity > self.code_min_disparity:
            raise ValueError("code_max_disparity must exceed code_min_disparity")


def estimate_disparity(left, right, params: DisparityEstimatorParams = DisparityEstimatorParams()) -> np.ndarray:
    """Per-pixel integer disparity of ``left`` against ``right``.

    Block-wise full search over ``[-search_range, +search_range]``, replicated
    to pixels; the right/bottom remainder repeats the nearest block.
    """
    a, b = as_array(left), as_array(right)
    if a.shape != b.shape:
        raise ValueError(f"left {a.shape[::-1]} and right {b.shape[::-1]} views differ in size")
    bs = params.block_size
    h, w = a.shape
    if h < bs or w < bs:
        raise ValueError(f"plane {w}x{h} is smaller than one {bs}x{bs} block")
    blocks = sad_block_disparity(a, b, bs, params.search_range)
    full = np.repeat(np.repeat(blocks, bs, axis=0), bs, axis=1)
    return np.pad(full, ((0, h - full.shape[0]), (0, w - full.shape[1])), mode="edge")


def disparity_to_depth(disparity, params: DisparityEstimatorParams = DisparityEstimatorParams(),
                       geometry: Optional[ViewingGeometry] = None) -> DepthMap:
    d = as_array(disparity)
    lo, hi = params.code_min_disparity, params.code_max_disparity
    codes = np.clip(np.rint(255.0 * (d - lo) / (hi - lo)), 0, 255).astype(np.uint8)
    return DepthMap(Plane(codes), geometry)


def depth_to_disparity(depth, params: DisparityEstimatorParams = DisparityEstimatorParams()) -> np.ndarray:
    codes = as_array(depth.plane if isinstance(depth, DepthMap) else depth)
    lo, hi = params.code_min_disparity, params.code_max_disparity
    return lo + codes / 255.0 * (hi - lo)


def to_degree_domain(depth: DepthMap, params: DisparityEstimatorParams = DisparityEstimatorParams(),
                     reference: ViewingGeometry = REFERENCE_GEOMETRY) -> np.ndarray:
    """Depth codes requantized after mapping to on-screen disparity in degrees.

    Codes become pixel disparities, pixels become degrees under the map's
    geometry, and degrees are requantized to 0-255 on the scale that the
    ``reference`` geometry would give. Under the reference geometry this is
    the identity on integer codes. Without geometry the codes pass through
    untouched.
    """
    codes = as_array(depth.plane)
    if depth.geometry is None:
        log.debug("depth map has no viewing geometry; skipping degree-domain mapping")
        return codes
    lo, hi = params.code_min_disparity, params.code_max_disparity
    px = lo + codes / 255.0 * (hi - lo)
    scale = depth.geometry.degrees_per_pixel / reference.degrees_per_pixel
    q = 255.0 * (px * scale - lo) / (hi - lo)
    return np.clip(np.rint(q), 0, 255)


def _as_depth(d) -> DepthMap:
    return d if isinstance(d, DepthMap) else DepthMap(Plane(as_array(d)))


def depth_fidelity(D, D_prime, beta: float = 1.0, vif_params: VifParams = VifParams(),
                   params: DisparityEstimatorParams = DisparityEstimatorParams(),
                   raw: bool = False):
    """``VIF(D, D')**beta`` on degree-domain depth, VIF clamped to [0, 1].

    With ``raw=True`` returns ``(factor, unclamped_vif)``.
    """
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    D, D_prime = _as_depth(D), _as_depth(D_prime)
    if (D.width, D.height) != (D_prime.width, D_prime.height):
        raise ValueError(
            f"depth maps differ in size: {D.width}x{D.height} vs {D_prime.width}x{D_prime.height}"
        )
    v = vifp(to_degree_domain(D, params), to_degree_domain(D_prime, params), vif_params)
    factor = min(max(v, 0.0), 1.0) ** beta
    return (factor, v) if raw else factor


def block_variance_map(D, block_size: int = 8) -> np.ndarray:
    """Population variance of each depth block, raster order."""
    a = as_array(D.plane if isinstance(D, DepthMap) else D)
    h, w = a.shape
    if h < block_size or w < block_size:
        raise ValueError(f"depth map {w}x{h} is smaller than one {block_size}x{block_size} block")
    nby, nbx = h // block_size, w // block_size
    blocks = a[: nby * block_size, : nbx * block_size].reshape(nby, block_size, nbx, block_size)
    blocks = blocks.transpose(0, 2, 1, 3).reshape(nby * nbx, block_size * block_size)
    return blocks.var(axis=1)


def variance_weight_sum(variances) -> float:
    """``sum(v) / (N * max(v))``; 1.0 when every variance is zero."""
    v = np.asarray(variances, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("variance list is empty")
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise ValueError("variances must be finite and non-negative")
    vmax = v.max()
    if vmax == 0.0:
        return 1.0
    return math.fsum(v.tolist()) / (v.size * vmax)


def depth_quality_term(D, D_prime, beta: float = 1.0, block_size: int = 8,
                       vif_params: VifParams = VifParams(),
                       params: DisparityEstimatorParams = DisparityEstimatorParams()) -> float:
    """Depth fidelity times the variance weight of the reference depth blocks."""
    fid = depth_fidelity(D, D_prime, beta, vif_params, params)
    return fid * variance_weight_sum(block_variance_map(_as_depth(D), block_size))
