"""Full-reference quality metrics for stereoscopic video.

The HV3D index combines per-view VIF, a DCT-domain cyclopean-view SSIM and a
depth-fidelity term; PSNR, SSIM, MS-SSIM and VIFp are provided as baselines.
"""
from .config import Hv3dConfig, load_config, save_config
from .cyclopean import CsfModel, cyclopean_quality, csf_weights
from .depth import DisparityEstimatorParams, depth_fidelity, estimate_disparity
from .kernels import BACKEND
from .metrics2d import MsSsimParams, SsimParams, VifParams, ms_ssim, psnr, ssim, vifp
from .quality import ComponentScores, hv3d_frame, hv3d_max, hv3d_sequence, view_quality
from .videoio import (
    DepthMap,
    Frame,
    Plane,
    StereoFrame,
    ViewingGeometry,
    parse_manifest,
    parse_ratings,
    read_depth,
    read_yuv420,
    write_yuv420,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ComponentScores",
    "CsfModel",
    "DepthMap",
    "DisparityEstimatorParams",
    "Frame",
    "Hv3dConfig",
    "MsSsimParams",
    "Plane",
    "SsimParams",
    "StereoFrame",
    "VifParams",
    "ViewingGeometry",
    "csf_weights",
    "cyclopean_quality",
    "depth_fidelity",
    "estimate_disparity",
    "hv3d_frame",
    "hv3d_max",
    "hv3d_sequence",
    "load_config",
    "ms_ssim",
    "parse_manifest",
    "parse_ratings",
    "psnr",
    "read_depth",
    "read_yuv420",
    "save_config",
    "ssim",
    "view_quality",
    "vifp",
    "write_yuv420",
]
