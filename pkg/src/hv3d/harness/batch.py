"""Run every metric over every manifest entry and write a results CSV."""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence

from ..config import Hv3dConfig
from ..metrics2d import ms_ssim, psnr, ssim, vifp
from ..quality import hv3d_sequence
from ..videoio import DatasetManifest, ManifestEntry, StereoFrame, read_depth, read_yuv420

__all__ = [
    "METRICS",
    "RESULT_COLUMNS",
    "BatchResult",
    "evaluate_entry",
    "run_batch",
    "read_results",
    "format_score",
]

log = logging.getLogger(__name__)

METRICS = ("psnr", "ssim", "ms_ssim", "vifp", "hv3d")
HV3D_COMPONENTS = ("q_right", "q_left", "q_cyclopean", "q_depth", "hv3d_raw", "hv3d_max")
RESULT_COLUMNS = (
    "sequence_id",
    "rate_point",
    "class_label",
    "metric",
    "status",
    "score",
    *HV3D_COMPONENTS,
    "depth_source",
    "error",
)


def format_score(x) -> str:
    if x is None or x == "":
        return ""
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _view_metric(fn: Callable, config: Hv3dConfig) -> Callable:
    if fn is ssim:
        return lambda a, b: ssim(a, b, config.ssim).mean
    if fn is ms_ssim:
        return lambda a, b: ms_ssim(a, b, config.ms_ssim)
    if fn is vifp:
        return lambda a, b: vifp(a, b, config.vif)
    return fn


_PLANE_METRICS = {"psnr": psnr, "ssim": ssim, "ms_ssim": ms_ssim, "vifp": vifp}


def _load_frames(entry: ManifestEntry, config: Hv3dConfig):
    w, h = entry.width, entry.height
    refs, dists = [], []
    for k in range(entry.frame_count):
        rl = read_yuv420(entry.ref_left_path, w, h, k)
        rr = read_yuv420(entry.ref_right_path, w, h, k)
        dl = read_yuv420(entry.dist_left_path, w, h, k)
        dr = read_yuv420(entry.dist_right_path, w, h, k)
        depth = None
        if entry.ref_depth_path:
            depth = read_depth(entry.ref_depth_path, w, h, k, geometry=config.csf.geometry)
        refs.append(StereoFrame(rl, rr, depth))
        dists.append(StereoFrame(dl, dr))
    return refs, dists


def _row(entry: ManifestEntry, metric: str, **kw) -> Dict[str, str]:
    row = {c: "" for c in RESULT_COLUMNS}
    row.update(sequence_id=entry.sequence_id, rate_point=entry.rate_point_label,
               class_label=entry.class_label, metric=metric, status="ok")
    row.update({k: v for k, v in kw.items()})
    return row


def evaluate_entry(entry: ManifestEntry, config: Hv3dConfig,
                   metrics: Sequence[str] = METRICS) -> List[Dict[str, str]]:
    """Result rows for one entry; failures become ``status=error`` rows."""
    try:
        refs, dists = _load_frames(entry, config)
    except Exception as exc:  # noqa: BLE001 - recorded, batch continues
        log.error("%s/%s: %s", entry.sequence_id, entry.rate_point_label, exc)
        return [_row(entry, "*", status="error", error=f"{type(exc).__name__}: {exc}")]
    rows = []
    for m in metrics:
        try:
            if m == "hv3d":
                seq = hv3d_sequence(refs, dists, config)
                comps = {
                    k: format_score(math.fsum(getattr(f, k) for f in seq.frames) / len(seq.frames))
                    for k in HV3D_COMPONENTS
                }
                rows.append(_row(entry, m, score=format_score(seq.pooled),
                                 depth_source=seq.frames[0].depth_source, **comps))
            else:
                fn = _view_metric(_PLANE_METRICS[m], config)
                vals = []
                for r, d in zip(refs, dists):
                    vals.append(fn(r.left.y, d.left.y))
                    vals.append(fn(r.right.y, d.right.y))
                score = math.inf if any(math.isinf(v) for v in vals) else math.fsum(vals) / len(vals)
                rows.append(_row(entry, m, score=format_score(score)))
        except Exception as exc:  # noqa: BLE001
            log.error("%s/%s %s: %s", entry.sequence_id, entry.rate_point_label, m, exc)
            rows.append(_row(entry, m, status="error", error=f"{type(exc).__name__}: {exc}"))
    return rows


@dataclass
class BatchResult:
    rows: List[Dict[str, str]] = field(default_factory=list)

    @property
    def errors(self) -> List[Dict[str, str]]:
        return [r for r in self.rows if r["status"] != "ok"]

    @property
    def ok(self) -> bool:
        return not self.errors


def run_batch(manifest: DatasetManifest, config: Hv3dConfig = Hv3dConfig(),
              metrics: Sequence[str] = METRICS, out_path=None, jobs: int = 1) -> BatchResult:
    """Evaluate ``metrics`` on every entry.

    Rows are written to ``out_path`` in manifest order as soon as an entry and
    all entries before it are done, so the file is identical for any
    ``jobs``.
    """
    unknown = [m for m in metrics if m not in METRICS]
    if unknown:
        raise ValueError(f"unknown metric(s) {', '.join(unknown)}; choose from {', '.join(METRICS)}")
    result = BatchResult()
    fh = writer = None
    if out_path is not None:
        fh = open(out_path, "w", newline="", encoding="utf-8")
        writer = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS, lineterminator="\n")
        writer.writeheader()
        fh.flush()

    def emit(rows):
        result.rows.extend(rows)
        if writer is not None:
            writer.writerows(rows)
            fh.flush()

    try:
        entries = list(manifest.entries)
        if jobs <= 1:
            for e in entries:
                emit(evaluate_entry(e, config, metrics))
        else:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(evaluate_entry, e, config, metrics) for e in entries]
                for fut in futures:
                    emit(fut.result())
    finally:
        if fh is not None:
            fh.close()
    return result


def read_results(path) -> List[Dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
