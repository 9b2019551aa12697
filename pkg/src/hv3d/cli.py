"""Command-line entry point: ``hv3d {compute,batch,mos,correlate}``.

Exit status is 0 on success, 1 when some entries or metrics failed, 2 for
an invalid invocation or unreadable inputs.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from . import __version__
from .config import load_config
from .errors import Hv3dError
from .harness.batch import METRICS, evaluate_entry, read_results, run_batch
from .harness.report import correlation_report
from .harness.subjective import compute_mos, read_mos, screen_outliers, write_mos
from .videoio import ManifestEntry, parse_manifest, parse_ratings

log = logging.getLogger("hv3d")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2


def _metric_list(text):
    names = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in names if m not in METRICS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown metric(s): {', '.join(bad)}")
    return names


def _add_config_args(p):
    p.add_argument("--config", help="JSON config file (defaults are used for missing keys)")
    for w in ("w1", "w2", "w3", "w4"):
        p.add_argument(f"--{w}", type=float, help=f"override weight {w}")
    p.add_argument("--beta", type=float, help="override the depth-fidelity exponent")
    p.add_argument("--block-size", type=int, dest="block_size", help="override the cyclopean block size")


def _config(args):
    cfg = load_config(args.config)
    return cfg.with_overrides(w1=args.w1, w2=args.w2, w3=args.w3, w4=args.w4,
                              beta=args.beta, block_size=args.block_size)


def build_parser():
    ap = argparse.ArgumentParser(prog="hv3d", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="score one distorted stereo pair")
    p.add_argument("metric", choices=METRICS)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--frames", type=int, default=1)
    p.add_argument("--ref-left", required=True)
    p.add_argument("--ref-right", required=True)
    p.add_argument("--dist-left", required=True)
    p.add_argument("--dist-right", required=True)
    p.add_argument("--ref-depth", help="reference depth map (8-bit raw or .yuv)")
    _add_config_args(p)

    p = sub.add_parser("batch", help="run metrics over a dataset manifest")
    p.add_argument("manifest")
    p.add_argument("-o", "--output", required=True, help="results CSV")
    p.add_argument("--metrics", type=_metric_list, default=list(METRICS),
                   help=f"comma-separated subset of {','.join(METRICS)}")
    p.add_argument("--jobs", type=int, default=1)
    _add_config_args(p)

    p = sub.add_parser("mos", help="screen subjects and compute MOS from a ratings CSV")
    p.add_argument("ratings")
    p.add_argument("-o", "--output", required=True, help="MOS CSV")
    p.add_argument("--screening-report", help="write the per-subject screening tallies as JSON")
    p.add_argument("--no-screen", action="store_true", help="keep every subject")

    p = sub.add_parser("correlate", help="correlate batch results with MOS")
    p.add_argument("results")
    p.add_argument("mos")
    p.add_argument("-o", "--output-dir", required=True)
    p.add_argument("--group-by", choices=["class"], default=None)
    p.add_argument("--dataset-id", default="")
    p.add_argument("--config", help="config whose fingerprint is recorded in the report")
    p.add_argument("--no-plots", action="store_true")
    return ap


def cmd_compute(args):
    cfg = _config(args)
    entry = ManifestEntry(
        sequence_id="cli", class_label="", ref_left_path=args.ref_left, ref_right_path=args.ref_right,
        dist_left_path=args.dist_left, dist_right_path=args.dist_right, width=args.width,
        height=args.height, frame_count=args.frames, rate_point_label="", ref_depth_path=args.ref_depth,
    )
    (row,) = evaluate_entry(entry, cfg, [args.metric])
    if row["status"] != "ok":
        print(row["error"], file=sys.stderr)
        return EXIT_USAGE if row["metric"] == "*" else EXIT_PARTIAL
    out = {"metric": args.metric, "score": row["score"]}
    for k in ("q_right", "q_left", "q_cyclopean", "q_depth", "hv3d_raw", "hv3d_max", "depth_source"):
        if row[k]:
            out[k] = row[k]
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_batch(args):
    cfg = _config(args)
    res = run_batch(parse_manifest(args.manifest), cfg, args.metrics, args.output, jobs=args.jobs)
    n_err = len(res.errors)
    log.info("wrote %d rows to %s (%d errors)", len(res.rows), args.output, n_err)
    return EXIT_OK if n_err == 0 else EXIT_PARTIAL


def cmd_mos(args):
    table = parse_ratings(args.ratings)
    if args.no_screen:
        retained, rejected, tallies = table.subjects, {}, ()
    else:
        scr = screen_outliers(table)
        retained, rejected, tallies = scr.retained, scr.rejected, scr.tallies
    for s, why in rejected.items():
        log.warning("rejected subject %s: %s", s, why)
    write_mos(compute_mos(table, retained), args.output)
    if args.screening_report:
        doc = {
            "retained": list(retained),
            "rejected": rejected,
            "tallies": [dataclasses.asdict(t) for t in tallies],
        }
        with open(args.screening_report, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def cmd_correlate(args):
    fingerprint = load_config(args.config).fingerprint() if args.config else ""
    rows = read_results(args.results)
    report = correlation_report(rows, read_mos(args.mos), args.output_dir, group_by=args.group_by,
                                dataset_id=args.dataset_id, config_fingerprint=fingerprint,
                                strict=False, plots=not args.no_plots)
    incomplete = [r for r in report.rows if r.scc is None or r.pcc is None]
    for r in report.rows:
        scc = "n/a" if r.scc is None else f"{r.scc:.4f}"
        pcc = "n/a" if r.pcc is None else f"{r.pcc:.4f}"
        print(f"{r.group:>12}  {r.metric:<8} SCC {scc:>7}  PCC {pcc:>7}  n={r.n_points}")
    return EXIT_PARTIAL if incomplete else EXIT_OK


COMMANDS = {"compute": cmd_compute, "batch": cmd_batch, "mos": cmd_mos, "correlate": cmd_correlate}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (Hv3dError, ValueError, OSError) as exc:
        print(f"hv3d {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
