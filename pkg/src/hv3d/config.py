"""HV3D configuration and its JSON file format."""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Dict, Mapping

from .cyclopean import CsfModel
from .depth import DisparityEstimatorParams
from .errors import ConfigError
from .metrics2d import MsSsimParams, SsimParams, VifParams
from .videoio import ViewingGeometry

__all__ = ["Hv3dConfig", "load_config", "save_config", "default_config_path"]

_POOLING = ("mean",)
_DIST_DISPARITY = ("distorted", "reference")


@dataclass(frozen=True)
class Hv3dConfig:
    """Weights and sub-model parameters of the HV3D index.

    The default weights are placeholders that favour the cyclopean term; they
    are not fitted values.
    """

    w1: float = 0.2
    w2: float = 0.4
    w3: float = 0.2
    w4: float = 0.05
    beta: float = 1.0
    block_size: int = 8
    csf: CsfModel = field(default_factory=CsfModel)
    ssim: SsimParams = field(default_factory=SsimParams)
    ms_ssim: MsSsimParams = field(default_factory=MsSsimParams)
    vif: VifParams = field(default_factory=VifParams)
    disparity: DisparityEstimatorParams = field(default_factory=DisparityEstimatorParams)
    dist_disparity: str = "distorted"
    estimate_missing_depth: bool = True
    temporal_pooling: str = "mean"

    def __post_init__(self):
        for name in ("w1", "w2", "w3", "w4"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not self.w1 + self.w2 > 0:
            raise ConfigError("w1 + w2 must be positive")
        if self.beta < 0:
            raise ConfigError(f"beta must be >= 0, got {self.beta}")
        bs = self.block_size
        if bs < 4 or bs & (bs - 1):
            raise ConfigError(f"block_size must be a power of two >= 4, got {bs}")
        if self.dist_disparity not in _DIST_DISPARITY:
            raise ConfigError(f"dist_disparity must be one of {_DIST_DISPARITY}")
        if self.temporal_pooling not in _POOLING:
            raise ConfigError(f"temporal_pooling must be one of {_POOLING}")

    def scaled(self, c: float) -> "Hv3dConfig":
        """Same config with every weight multiplied by ``c``."""
        return dataclasses.replace(self, w1=self.w1 * c, w2=self.w2 * c, w3=self.w3 * c, w4=self.w4 * c)

    def with_overrides(self, **kw) -> "Hv3dConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return dataclasses.replace(self, **kw) if kw else self

    def to_dict(self) -> Dict[str, Any]:
        d = dataclasses.asdict(self)
        d["ms_ssim"]["exponents"] = list(d["ms_ssim"]["exponents"])
        if d["vif"]["window_sizes"] is not None:
            d["vif"]["window_sizes"] = list(d["vif"]["window_sizes"])
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Hv3dConfig":
        d = dict(d)
        _strict(cls, d, "config")
        try:
            if "csf" in d:
                csf = dict(d["csf"])
                _strict(CsfModel, csf, "csf")
                if "geometry" in csf:
                    _strict(ViewingGeometry, csf["geometry"], "csf.geometry")
                    csf["geometry"] = ViewingGeometry(**csf["geometry"])
                d["csf"] = CsfModel(**csf)
            if "ssim" in d:
                _strict(SsimParams, d["ssim"], "ssim")
                d["ssim"] = SsimParams(**d["ssim"])
            if "ms_ssim" in d:
                ms = dict(d["ms_ssim"])
                _strict(MsSsimParams, ms, "ms_ssim")
                if "ssim" in ms:
                    ms["ssim"] = SsimParams(**ms["ssim"])
                if "exponents" in ms:
                    ms["exponents"] = tuple(ms["exponents"])
                d["ms_ssim"] = MsSsimParams(**ms)
            if "vif" in d:
                vif = dict(d["vif"])
                _strict(VifParams, vif, "vif")
                if vif.get("window_sizes") is not None:
                    vif["window_sizes"] = tuple(vif["window_sizes"])
                d["vif"] = VifParams(**vif)
            if "disparity" in d:
                _strict(DisparityEstimatorParams, d["disparity"], "disparity")
                d["disparity"] = DisparityEstimatorParams(**d["disparity"])
            return cls(**d)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def fingerprint(self) -> str:
        """Short stable hash of the canonical JSON form."""
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _strict(cls, d, where):
    if not isinstance(d, Mapping):
        raise ConfigError(f"{where}: expected an object")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(d) - known)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")


def default_config_path():
    return resources.files("hv3d") / "data" / "default_config.json"


def load_config(path=None) -> Hv3dConfig:
    """Read a JSON config; keys left out keep their defaults."""
    if path is None:
        text = default_config_path().read_text(encoding="utf-8")
        where = "default config"
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        where = str(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{where}: invalid JSON ({exc})") from exc
    return Hv3dConfig.from_dict(doc)


def save_config(config: Hv3dConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(config.to_json())
        fh.write("\n")
