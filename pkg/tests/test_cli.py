import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import write_dataset
from hv3d.cli import main
from hv3d.harness.batch import read_results
from hv3d.videoio import RatingsTable, write_ratings


def test_compute_identity(tmp_path, capsys):
    write_dataset(tmp_path, 1, ("QP25",), identity=True)
    args = ["compute", "hv3d", "--width", "32", "--height", "32",
            "--ref-left", str(tmp_path / "S01_L.yuv"), "--ref-right", str(tmp_path / "S01_R.yuv"),
            "--dist-left", str(tmp_path / "S01_QP25_L.yuv"), "--dist-right", str(tmp_path / "S01_QP25_R.yuv"),
            "--ref-depth", str(tmp_path / "S01_D.raw"), "--w2", "0.5", "--beta", "2"]
    assert main(args) == 0
    out = json.loads(capsys.readouterr().out)
    assert float(out["score"]) == pytest.approx(1.0, abs=1e-12)
    assert out["depth_source"] == "provided"


def test_compute_missing_file_exit_2(tmp_path, capsys):
    args = ["compute", "psnr", "--width", "32", "--height", "32", "--ref-left", "x", "--ref-right", "x",
            "--dist-left", "x", "--dist-right", "x"]
    assert main(args) == 2
    assert "x" in capsys.readouterr().err


def test_bad_invocation_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["batch"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["batch", "m.json", "-o", "r.csv", "--metrics", "vqm"])
    assert exc.value.code == 2


def test_batch_exit_codes(tmp_path):
    path = write_dataset(tmp_path, 2, ("QP25",))
    assert main(["batch", str(path), "-o", str(tmp_path / "r.csv"), "--metrics", "psnr,hv3d"]) == 0
    assert len(read_results(tmp_path / "r.csv")) == 4
    (tmp_path / "S02_QP25_R.yuv").write_bytes(b"")
    assert main(["batch", str(path), "-o", str(tmp_path / "r2.csv"), "--metrics", "psnr"]) == 1


def test_batch_bad_manifest_exit_2(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"entries": []}))
    assert main(["batch", str(p), "-o", str(tmp_path / "r.csv")]) == 2


def test_mos_and_correlate(tmp_path, capsys):
    path = write_dataset(tmp_path, 3, ("QP25", "QP30", "QP35"))
    assert main(["batch", str(path), "-o", str(tmp_path / "r.csv"), "--metrics", "psnr,hv3d"]) == 0
    items = [f"S{s:02d}:QP{q}" for s in (1, 2, 3) for q in (25, 30, 35)]
    r = np.random.default_rng(0)
    truth = np.array([9.0, 6.0, 3.0] * 3)
    scores = np.clip(truth[:, None] + r.integers(-1, 2, (9, 6)), 1, 10)
    write_ratings(RatingsTable(items, [f"o{i}" for i in range(6)], scores), tmp_path / "ratings.csv")
    assert main(["mos", str(tmp_path / "ratings.csv"), "-o", str(tmp_path / "mos.csv"),
                 "--screening-report", str(tmp_path / "screen.json")]) == 0
    doc = json.loads((tmp_path / "screen.json").read_text())
    assert len(doc["retained"]) + len(doc["rejected"]) == 6
    capsys.readouterr()
    rc = main(["correlate", str(tmp_path / "r.csv"), str(tmp_path / "mos.csv"), "-o", str(tmp_path / "rep"),
               "--dataset-id", "synthetic"])
    assert rc == 0
    assert (tmp_path / "rep" / "correlation_report.csv").exists()
    assert (tmp_path / "rep" / "hv3d.svg").exists()
    assert "HV3D" in (tmp_path / "rep" / "correlation_report.csv").read_text()
    assert "hv3d" in capsys.readouterr().out


def test_console_script_version():
    out = subprocess.run([sys.executable, "-m", "hv3d.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "hv3d" in out.stdout
