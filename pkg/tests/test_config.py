import json

import pytest

from hv3d.config import Hv3dConfig, default_config_path, load_config, save_config
from hv3d.errors import ConfigError


def test_packaged_default_matches_dataclass():
    assert load_config() == Hv3dConfig()
    doc = json.loads(open(default_config_path(), encoding="utf-8").read())
    assert (doc["w1"], doc["w2"], doc["w3"], doc["w4"], doc["beta"]) == (0.2, 0.4, 0.2, 0.05, 1.0)


def test_round_trip(tmp_path):
    cfg = Hv3dConfig(w1=0.3, beta=2.0, block_size=16).with_overrides(w4=0.01)
    p = tmp_path / "c.json"
    save_config(cfg, p)
    assert load_config(p) == cfg
    assert load_config(p).fingerprint() == cfg.fingerprint()


def test_partial_file_uses_defaults(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"w2": 0.9, "csf": {"peak_frequency": 4.0}}))
    cfg = load_config(p)
    assert cfg.w2 == 0.9 and cfg.csf.peak_frequency == 4.0 and cfg.w1 == 0.2


@pytest.mark.parametrize("doc", [{"w5": 1}, {"csf": {"peak": 2}}, {"w1": -1}, {"block_size": 6},
                                 {"w1": 0, "w2": 0}, {"dist_disparity": "left"}])
def test_invalid_configs(tmp_path, doc):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(ConfigError):
        load_config(p)


def test_fingerprint_sensitive():
    assert Hv3dConfig().fingerprint() != Hv3dConfig(beta=1.1).fingerprint()
    assert Hv3dConfig().fingerprint() == Hv3dConfig().fingerprint()


def test_scaled():
    c = Hv3dConfig().scaled(2.0)
    assert (c.w1, c.w2, c.w3, c.w4) == (0.4, 0.8, 0.4, 0.1)
