"""Correlation-with-MOS report: table, per-metric scatter plots with fitted curve."""
from __future__ import annotations

import csv
import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..errors import InsufficientDataError
from ..videoio import item_key
from .stats import LogisticFit, logistic_fit, pearson, spearman
from .subjective import MosRecord

__all__ = [
    "MetricCorrelation",
    "CorrelationReport",
    "correlation_report",
    "DISPLAY_NAMES",
    "MIN_POINTS",
]

log = logging.getLogger(__name__)

MIN_POINTS = 5
DISPLAY_NAMES = OrderedDict(
    [("psnr", "PSNR"), ("ssim", "SSIM"), ("vifp", "VIFp"), ("ms_ssim", "MS-SSIM"), ("hv3d", "HV3D")]
)
REPORT_COLUMNS = (
    "group", "metric", "scc", "pcc", "n_points",
    "fit_a", "fit_b", "fit_c", "fit_d", "fit_rmse", "fit_converged", "excluded", "note",
)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.10g}"
    return str(x)


@dataclass(frozen=True)
class MetricCorrelation:
    metric: str
    group: str
    scc: Optional[float]
    pcc: Optional[float]
    n_points: int
    fit: Optional[LogisticFit]
    excluded: Tuple[str, ...] = ()
    note: str = ""
    items: Tuple[str, ...] = field(default=(), repr=False)
    scores: Tuple[float, ...] = field(default=(), repr=False)
    mos: Tuple[float, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class CorrelationReport:
    rows: Tuple[MetricCorrelation, ...]
    dataset_id: str = ""
    config_fingerprint: str = ""

    def row(self, metric: str, group: str = "all") -> MetricCorrelation:
        for r in self.rows:
            if r.metric == metric and r.group == group:
                return r
        raise KeyError((metric, group))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# dataset: {self.dataset_id}\n")
            fh.write(f"# config: {self.config_fingerprint}\n")
            fh.write("# SCC: Spearman rank correlation of raw scores with MOS\n")
            fh.write("# PCC: Pearson correlation of logistic-fitted scores with MOS\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(REPORT_COLUMNS)
            for r in self.rows:
                f = r.fit
                w.writerow([
                    r.group, DISPLAY_NAMES.get(r.metric, r.metric), _fmt(r.scc), _fmt(r.pcc), r.n_points,
                    *(("",) * 4 if f is None else (_fmt(f.a), _fmt(f.b), _fmt(f.c), _fmt(f.d))),
                    "" if f is None else _fmt(f.rmse),
                    "" if f is None else _fmt(f.converged),
                    ";".join(r.excluded), r.note,
                ])


def _metric_order(names: Iterable[str]) -> List[str]:
    names = set(names)
    known = [m for m in DISPLAY_NAMES if m in names]
    return known + sorted(names - set(known))


def _correlate(metric, group, items, scores, mos, strict) -> MetricCorrelation:
    keep = [i for i, s in enumerate(scores) if math.isfinite(s)]
    excluded = tuple(items[i] for i in range(len(items)) if i not in set(keep))
    ki = tuple(items[i] for i in keep)
    ks = tuple(scores[i] for i in keep)
    km = tuple(mos[i] for i in keep)
    base = dict(metric=metric, group=group, n_points=len(keep), excluded=excluded,
                items=ki, scores=ks, mos=km)
    if len(keep) < MIN_POINTS:
        msg = f"{metric} ({group}): {len(keep)} usable points, need {MIN_POINTS}"
        if strict:
            raise InsufficientDataError(msg)
        log.warning(msg)
        return MetricCorrelation(scc=None, pcc=None, fit=None, note="insufficient points", **base)
    fit = logistic_fit(ks, km)
    note = []
    try:
        scc = spearman(ks, km)
    except ValueError as exc:
        if strict:
            raise
        scc, note = None, note + [f"scc: {exc}"]
    try:
        pcc = pearson(fit.predict(np.asarray(ks)), km)
    except ValueError as exc:
        if strict:
            raise ValueError(f"{metric} ({group}) PCC: {exc}") from exc
        pcc, note = None, note + [f"pcc: {exc}"]
    if fit.degenerate:
        note.append("degenerate fit")
    elif not fit.converged:
        note.append("fit did not converge")
    return MetricCorrelation(scc=scc, pcc=pcc, fit=fit, note="; ".join(note), **base)


def correlation_report(results: Sequence[Mapping[str, str]], mos: Sequence[MosRecord],
                       out_dir=None, group_by: Optional[str] = None, dataset_id: str = "",
                       config_fingerprint: str = "", strict: bool = True,
                       plots: bool = True) -> CorrelationReport:
    """Spearman and Pearson correlation of each metric with MOS.

    ``results`` are rows as produced by the batch runner; items are matched
    on ``sequence_id:rate_point``. Non-finite scores (PSNR of an exact copy)
    are excluded and listed. With ``out_dir`` the table goes to
    ``correlation_report.csv`` and, if ``plots``, each metric gets
    ``<metric>.svg`` and ``<metric>_points.csv``.
    """
    if group_by not in (None, "class"):
        raise ValueError(f"group_by must be None or 'class', got {group_by!r}")
    mos_by_item = {r.item: r.mos for r in mos}
    per_metric: Dict[str, list] = {}
    for row in results:
        if row.get("status", "ok") != "ok" or row.get("metric") in ("", "*"):
            continue
        key = item_key(row["sequence_id"], row["rate_point"])
        if key not in mos_by_item:
            continue
        per_metric.setdefault(row["metric"], []).append(
            (key, float(row["score"]), mos_by_item[key], row.get("class_label", ""))
        )
    if not per_metric:
        raise InsufficientDataError("no result rows match any MOS item")
    out = []
    for metric in _metric_order(per_metric):
        pts = sorted(per_metric[metric])
        groups = [("all", pts)]
        if group_by == "class":
            for cls in sorted({p[3] for p in pts}):
                groups.append((f"class={cls}", [p for p in pts if p[3] == cls]))
        for gname, gpts in groups:
            out.append(_correlate(metric, gname, [p[0] for p in gpts], [p[1] for p in gpts],
                                  [p[2] for p in gpts], strict))
    report = CorrelationReport(tuple(out), dataset_id, config_fingerprint)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        report.write_csv(out_dir / "correlation_report.csv")
        if plots:
            for r in report.rows:
                if r.group == "all" and r.fit is not None:
                    _write_points(r, out_dir / f"{r.metric}_points.csv")
                    _plot(r, out_dir / f"{r.metric}.svg")
    return report


def _write_points(r: MetricCorrelation, path) -> None:
    fitted = r.fit.predict(np.asarray(r.scores))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["item", "score", "mos", "fitted"])
        for it, s, m, f in zip(r.items, r.scores, r.mos, fitted):
            w.writerow([it, repr(float(s)), repr(float(m)), repr(float(f))])


def _plot(r: MetricCorrelation, path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "hv3d", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(4.0, 3.2))
        x = np.asarray(r.scores)
        ax.scatter(x, r.mos, s=14, color="#1f4e79", label="items")
        xs = np.linspace(x.min(), x.max(), 200)
        ax.plot(xs, r.fit.predict(xs), color="#c0392b", lw=1.5, label="logistic fit")
        name = DISPLAY_NAMES.get(r.metric, r.metric)
        ax.set_xlabel(name)
        ax.set_ylabel("MOS")
        scc = "n/a" if r.scc is None else f"{r.scc:.4f}"
        pcc = "n/a" if r.pcc is None else f"{r.pcc:.4f}"
        ax.set_title(f"{name}: SCC {scc}, PCC {pcc}", fontsize=9)
        ax.legend(fontsize=7, loc="lower right")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
