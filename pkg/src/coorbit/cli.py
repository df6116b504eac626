"""Command-line entry point: ``coorbit {gallery,analyze,verify,converge,report}``.

Exit codes: 0 when every check passes, 1 when at least one check fails,
2 for usage, configuration or input errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig
from .errors import CoorbitError
from .frames import DualPair, frame_bounds
from .gallery import FrameSpec, WeightSpec, localization_profile, materialize, truncation_family
from .gram import cross_gram
from .report import ExperimentReport, perturb_dual, run_verification
from .serialize import digest, frame_from_doc, frame_to_doc, read_json, write_json
from .topology import TestSet, onb_counterexample, trace_convergence

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(CoorbitError):
    pass


def _sizes(text):
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--sizes expects comma-separated integers, got {text!r}")
    if not sizes:
        raise argparse.ArgumentTypeError("--sizes is empty")
    return sizes


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--tol", type=float, help="override the residual tolerance")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--perturb", type=float, help="corrupt the first dual vector by this amount")
    common.add_argument("--sizes", type=_sizes, help="comma-separated truncation sizes")
    common.add_argument("--spec", action="append", default=[], metavar="JSON",
                        help="inline frame spec, e.g. '{\"kind\": \"onb\", \"d\": 4}' (repeatable)")
    common.add_argument("--frame", action="append", default=[], type=Path, metavar="PATH",
                        help="frame document to load (repeatable)")
    common.add_argument("--weight", action="append", default=[], metavar="JSON",
                        help="inline weight spec (repeatable)")
    common.add_argument("--jobs", type=int, default=1, help="parallel workers for verify")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="coorbit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gallery", parents=[common], help="materialize frames to disk")
    sub.add_parser("analyze", parents=[common], help="frame bounds, norms, localization, truncation studies")
    sub.add_parser("verify", parents=[common], help="run verification suites")
    p = sub.add_parser("converge", parents=[common], help="export convergence traces as CSV")
    p.add_argument("--onb", type=int, metavar="N", help="run the orthonormal-basis counterexample in C^N")
    p.add_argument("--K", type=int, help="number of seminorm columns for --onb")
    p = sub.add_parser("report", parents=[common], help="summarize a saved report")
    p.add_argument("report_path", type=Path)
    return parser


def load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    try:
        for text in args.spec:
            cfg.frames.append(FrameSpec.from_dict(json.loads(text)))
        if args.weight:
            cfg.weights = [WeightSpec.from_dict(json.loads(t)) for t in args.weight]
    except json.JSONDecodeError as exc:
        raise ConfigError(f"inline spec is not valid JSON: {exc}") from None
    cfg.frames.extend(args.frame)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.tol is not None:
        cfg.tolerances["residual"] = args.tol
    if args.out is not None:
        cfg.out = args.out
    if args.perturb is not None:
        cfg.perturb = args.perturb
    if args.sizes is not None:
        cfg.sizes = args.sizes
    cfg.validate()
    return cfg


def load_frames(cfg: RunConfig):
    """Materialize or read every configured frame, in config order."""
    frames = []
    for entry in cfg.frames:
        if isinstance(entry, Path):
            if not entry.is_file():
                raise UsageError(f"frame file not found: {entry}")
            frames.append((None, frame_from_doc(read_json(entry))))
        else:
            frames.append((entry, materialize(entry)))
    if not frames:
        raise UsageError("no frames given (use --config, --spec or --frame)")
    return frames


def cmd_gallery(args, cfg) -> int:
    frames = load_frames(cfg)
    out = cfg.out / "frames"
    for i, (spec, frame) in enumerate(frames):
        doc = frame_to_doc(frame, spec.to_dict() if spec else None)
        kind = spec.kind if spec else "frame"
        path = write_json(out / f"{i:03d}_{kind}.json", doc)
        print(f"{path}\td={frame.d}\tM={frame.M}\tsha256={digest(doc['entries'])}")
    return EXIT_OK


def cmd_analyze(args, cfg) -> int:
    frames = load_frames(cfg)
    results = []
    for spec, frame in frames:
        A, B = frame_bounds(frame)
        pair = DualPair.canonical(frame)
        prof = localization_profile(pair)
        entry = {
            "frame": frame.label,
            "d": frame.d,
            "M": frame.M,
            "frame_bounds": [A, B],
            "opnorms": {},
            "localization": {"exp_rate": prof.exp_rate, "poly_rate": prof.poly_rate,
                             "localized": prof.localized,
                             "band_max": [float(b) for b in prof.band_max[:16]]},
        }
        for ws in cfg.weights:
            w = ws.materialize(frame.M)
            entry["opnorms"][w.label] = cross_gram(pair, w).opnorm
        if cfg.sizes and spec is not None:
            entry["truncation"] = truncation_study(spec, cfg.sizes, cfg.weights)
        results.append(entry)
    doc = {"schema_version": 1, "type": "analysis", "frames": _finite(results)}
    path = write_json(cfg.out / "analysis.json", doc)
    for entry in results:
        print(f"{entry['frame']}: bounds=({entry['frame_bounds'][0]:.6g}, {entry['frame_bounds'][1]:.6g}) "
              + " ".join(f"||G||[{k}]={v:.12g}" for k, v in entry["opnorms"].items()))
        for wlabel, study in entry.get("truncation", {}).items():
            print(f"  truncation {wlabel}: sizes={study['sizes']} gaps={study['gaps']}")
    print(f"wrote {path}")
    return EXIT_OK


def truncation_study(spec, sizes, weights) -> dict:
    pairs = truncation_family(spec, sizes)
    study = {}
    for ws in weights:
        norms = [cross_gram(p, ws.materialize(p.M)).opnorm for p in pairs]
        gaps = [abs(b - a) for a, b in zip(norms, norms[1:])]
        study[ws.materialize(1).label] = {"sizes": list(sizes), "opnorms": norms, "gaps": gaps}
    return study


def _finite(obj):
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def cmd_verify(args, cfg) -> int:
    frames = load_frames(cfg)
    pairs = []
    for _, frame in frames:
        pair = DualPair.canonical(frame)
        if cfg.perturb:
            pair = perturb_dual(pair, cfg.perturb)
        pairs.append(pair)
    config_doc = {
        "frames": [f.to_dict() if isinstance(f, FrameSpec) else str(f) for f in cfg.frames],
        "weights": [w.to_dict() for w in cfg.weights],
        "tolerances": cfg.tolerances,
        "suites": list(cfg.suites),
        "samples": cfg.samples,
        "probes": cfg.probes,
        "perturb": cfg.perturb,
    }
    report = run_verification(pairs, cfg.weights, seed=cfg.seed, suites=cfg.suites,
                              tolerances=cfg.tolerances, samples=cfg.samples, probes=cfg.probes,
                              jobs=args.jobs, config=config_doc)
    path = write_json(cfg.out / "report.json", report.to_doc())
    for line in report.summary_lines():
        print(line)
    n_fail = len(report.failures)
    print(f"{len(report.records) - n_fail}/{len(report.records)} checks passed; wrote {path}")
    return EXIT_OK if report.passed else EXIT_FAIL


def write_csv(path, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "k", "seminorm", "coorbit_norm"])
        for n, k, s, c in rows:
            writer.writerow([n, k, repr(s), repr(c)])
    return path


def cmd_converge(args, cfg) -> int:
    conv = dict(cfg.converge)
    if args.onb is not None:
        conv = {"mode": "counterexample", "N": args.onb, **({"K": args.K} if args.K else {})}
    mode = conv.get("mode")
    if mode == "counterexample":
        N = int(conv.get("N", 8))
        w = WeightSpec.from_dict(conv.get("weight", {"kind": "constant"}))
        weight = w.materialize(N)
        rep = onb_counterexample(N, conv.get("K"), weight)
        path = write_csv(cfg.out / "converge.csv", rep.rows())
        ok = rep.pointwise_null and rep.norm_not_null
        print(f"onb counterexample N={N}: pointwise_null={rep.pointwise_null} "
              f"norms={'constant 1' if np.all(rep.norms == 1.0) else 'weighted'}; wrote {path}")
        return EXIT_OK if ok else EXIT_FAIL
    if mode == "sequence":
        spec = FrameSpec.from_dict(conv.get("frame", {"kind": "mercedes"}))
        pair = DualPair.canonical(materialize(spec))
        w = WeightSpec.from_dict(conv.get("weight", {"kind": "constant"})).materialize(pair.M)
        tests_cfg = conv.get("tests", "dual")
        if tests_cfg == "dual":
            tests = TestSet.dual_frame(pair.dual)
        else:
            if not tests_cfg:
                raise UsageError("test set is empty")
            tests = TestSet.from_combinations(pair.dual, np.asarray(tests_cfg, dtype=float))
        rng = np.random.default_rng(cfg.seed)
        f = rng.standard_normal(pair.d) + 1j * rng.standard_normal(pair.d)
        g = rng.standard_normal(pair.d) + 1j * rng.standard_normal(pair.d)
        steps = int(conv.get("steps", 20))
        seq = [f + g / n for n in range(1, steps + 1)]
        trace = trace_convergence(seq, f, tests, pair, w)
        path = write_csv(cfg.out / "converge.csv", trace.rows())
        print(f"sequence f + g/n, {steps} steps: dominated={trace.dominated}; wrote {path}")
        return EXIT_OK if trace.dominated else EXIT_FAIL
    raise UsageError("converge needs --onb N or a config 'converge' section with mode "
                     "'counterexample' or 'sequence'")


def cmd_report(args, cfg) -> int:
    if not args.report_path.is_file():
        raise UsageError(f"report not found: {args.report_path}")
    report = ExperimentReport.from_doc(read_json(args.report_path))
    for line in report.summary_lines():
        print(line)
    by_check = {}
    for r in report.records:
        ok, total = by_check.get(r.check, (0, 0))
        by_check[r.check] = (ok + r.passed, total + 1)
    for check, (ok, total) in by_check.items():
        print(f"{check:<24} {ok}/{total}")
    return EXIT_OK if report.passed else EXIT_FAIL


COMMANDS = {
    "gallery": cmd_gallery,
    "analyze": cmd_analyze,
    "verify": cmd_verify,
    "converge": cmd_converge,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](args, cfg)
    except (CoorbitError, json.JSONDecodeError, OSError) as exc:
        print(f"coorbit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
