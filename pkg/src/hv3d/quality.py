"""Assembly of the HV3D index from view, cyclopean and depth terms."""
from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence, Tuple

from .config import Hv3dConfig
from .cyclopean import cyclopean_detail
from .depth import (
    block_variance_map,
    depth_fidelity,
    depth_to_disparity,
    disparity_to_depth,
    estimate_disparity,
    variance_weight_sum,
)
from .metrics2d import VifParams, vifp
from .videoio import DepthMap, Frame, StereoFrame

__all__ = [
    "ComponentScores",
    "SequenceScores",
    "view_vifs",
    "view_quality",
    "hv3d_max",
    "hv3d_frame",
    "hv3d_sequence",
]


def _clamp01(v: float) -> float:
    return min(max(v, 0.0), 1.0)


@dataclass(frozen=True)
class ComponentScores:
    """Every intermediate of one frame's HV3D evaluation.

    ``q_right``/``q_left`` already include ``w1``/``w4``; ``q_cyclopean`` and
    ``q_depth`` are the factors that ``w2`` and ``w3`` multiply.
    """

    q_right: float
    q_left: float
    q_cyclopean: float
    q_depth: float
    hv3d_raw: float
    hv3d_max: float
    hv3d_normalized: float
    contributions: Tuple[float, float, float, float]
    depth_fidelity: float
    cyclopean_ssim: float
    variance_weight: float
    vif_right: Tuple[float, float, float]
    vif_left: Tuple[float, float, float]
    vif_depth: float
    depth_source: str
    dist_depth_source: str
    clamp_events: int

    def as_dict(self):
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class SequenceScores:
    frames: Tuple[ComponentScores, ...]
    pooled: float


def view_vifs(ref: Frame, dist: Frame, vif_params: VifParams = VifParams()):
    """Unclamped VIF of the Y, U and V planes."""
    if (ref.width, ref.height) != (dist.width, dist.height):
        raise ValueError(
            f"reference view is {ref.width}x{ref.height}, distorted view is {dist.width}x{dist.height}"
        )
    return tuple(vifp(r, d, vif_params) for r, d in zip(ref.planes(), dist.planes()))


def view_quality(ref: Frame, dist: Frame, w1: float, w4: float,
                 vif_params: VifParams = VifParams()) -> float:
    """``w1*VIF(Y) + w4*VIF(U) + w4*VIF(V)`` with each VIF clamped to [0, 1]."""
    vy, vu, vv = view_vifs(ref, dist, vif_params)
    return w1 * _clamp01(vy) + w4 * _clamp01(vu) + w4 * _clamp01(vv)


def hv3d_max(config: Hv3dConfig, variance_weight_sum_value: float) -> float:
    """Largest attainable raw HV3D for a frame with the given depth variance weight.

    ``config`` may be any object with ``w1`` .. ``w4`` attributes.
    """
    c = config
    return 2 * c.w1 + 4 * c.w4 + c.w2 + c.w3 * variance_weight_sum_value


def _reference_depth(ref: StereoFrame, config: Hv3dConfig):
    geom = config.csf.geometry
    if ref.depth is not None:
        D = ref.depth if ref.depth.geometry is not None else DepthMap(ref.depth.plane, geom)
        return D, depth_to_disparity(D, config.disparity), "provided"
    if not config.estimate_missing_depth:
        raise ValueError("reference pair has no depth map and depth estimation is disabled")
    disp = estimate_disparity(ref.left.y, ref.right.y, config.disparity)
    return disparity_to_depth(disp, config.disparity, geom), disp, "estimated"


def _distorted_depth(ref: StereoFrame, dist: StereoFrame, D, ref_disp, config: Hv3dConfig):
    geom = config.csf.geometry
    if dist.depth is not None:
        Dp = dist.depth if dist.depth.geometry is not None else DepthMap(dist.depth.plane, geom)
        return Dp, depth_to_disparity(Dp, config.disparity), "provided"
    if dist.same_views(ref):
        return D, ref_disp, "identity"
    disp = estimate_disparity(dist.left.y, dist.right.y, config.disparity)
    return disparity_to_depth(disp, config.disparity, geom), disp, "estimated"


def hv3d_frame(ref: StereoFrame, dist: StereoFrame, config: Hv3dConfig = Hv3dConfig()) -> ComponentScores:
    """Score one distorted stereo frame against its reference.

    The reference depth comes from ``ref.depth`` when present and is
    otherwise estimated from the reference views. The distorted depth comes
    from ``dist.depth`` when present; otherwise it is estimated from the
    distorted views, except that an exact copy of the reference views reuses
    the reference depth.
    """
    if (ref.width, ref.height) != (dist.width, dist.height):
        raise ValueError(
            f"reference pair is {ref.width}x{ref.height}, distorted pair is {dist.width}x{dist.height}"
        )
    c = config
    D, ref_disp, depth_source = _reference_depth(ref, c)
    Dp, dist_disp, dist_source = _distorted_depth(ref, dist, D, ref_disp, c)

    fid, vif_depth = depth_fidelity(D, Dp, c.beta, c.vif, c.disparity, raw=True)
    cyc = cyclopean_detail(
        ref, dist, ref_disp, dist_disp,
        block_size=c.block_size, csf=c.csf, ssim_params=c.ssim,
        dist_uses_ref_disparity=c.dist_disparity == "reference",
    )
    vws = variance_weight_sum(block_variance_map(D, c.block_size))

    vif_r = view_vifs(ref.right, dist.right, c.vif)
    vif_l = view_vifs(ref.left, dist.left, c.vif)
    q_right = c.w1 * _clamp01(vif_r[0]) + c.w4 * _clamp01(vif_r[1]) + c.w4 * _clamp01(vif_r[2])
    q_left = c.w1 * _clamp01(vif_l[0]) + c.w4 * _clamp01(vif_l[1]) + c.w4 * _clamp01(vif_l[2])
    q_cyc = fid * cyc.score
    q_depth = fid * vws

    contributions = (q_right, q_left, c.w2 * q_cyc, c.w3 * q_depth)
    raw = contributions[0] + contributions[1] + contributions[2] + contributions[3]
    top = hv3d_max(c, vws)
    return ComponentScores(
        q_right=q_right,
        q_left=q_left,
        q_cyclopean=q_cyc,
        q_depth=q_depth,
        hv3d_raw=raw,
        hv3d_max=top,
        hv3d_normalized=raw / top,
        contributions=contributions,
        depth_fidelity=fid,
        cyclopean_ssim=cyc.score,
        variance_weight=vws,
        vif_right=vif_r,
        vif_left=vif_l,
        vif_depth=vif_depth,
        depth_source=depth_source,
        dist_depth_source=dist_source,
        clamp_events=cyc.ref_clamps + cyc.dist_clamps,
    )


def hv3d_sequence(ref_seq: Sequence[StereoFrame], dist_seq: Sequence[StereoFrame],
                  config: Hv3dConfig = Hv3dConfig(), jobs: int = 1) -> SequenceScores:
    """Per-frame scores and their arithmetic mean (of normalized values)."""
    ref_seq, dist_seq = list(ref_seq), list(dist_seq)
    if len(ref_seq) != len(dist_seq):
        raise ValueError(f"frame count mismatch: {len(ref_seq)} reference vs {len(dist_seq)} distorted")
    if not ref_seq:
        raise ValueError("empty sequence")
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            frames = tuple(pool.map(lambda p: hv3d_frame(p[0], p[1], config), zip(ref_seq, dist_seq)))
    else:
        frames = tuple(hv3d_frame(r, d, config) for r, d in zip(ref_seq, dist_seq))
    pooled = math.fsum(f.hv3d_normalized for f in frames) / len(frames)
    return SequenceScores(frames, pooled)
