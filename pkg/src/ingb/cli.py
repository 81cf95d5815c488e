"""Command-line entry point.

Exit codes: 0 success, 1 I/O or parse failure, 2 invalid flags or contract
violations.
"""
import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time

import numpy as np

from .baselines import Pipeline, ResampleConfig, run_pipeline
from .dataset import (NoiseSpec, format_csv, inject_label_noise, load_csv,
                      scale_minmax, stratified_folds)
from .errors import ContractError, DataFormatError
from .evaluation import BENCH_COLUMNS, BENCH_PIPELINES, BENCH_RATES, bench, cross_validate
from .generators import GENERATORS, generate
from .granular import SplitConfig, dump_balls
from .informed import SynthesisConfig


def _write_atomic(path, text):
    path = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), prefix=".ingb-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        _write_atomic(path, text)


def _dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _resample_config(args):
    return ResampleConfig(
        split=SplitConfig(T=args.T, p=args.p, seed=args.seed),
        synthesis=SynthesisConfig(sigma_scale=args.sigma_scale, seed=args.seed,
                                  sparsity_exponent=args.sparsity_exponent,
                                  seed_threshold=args.seed_threshold),
        seed=args.seed,
    )


def _load(args):
    d, feature_names, label_name = load_csv(args.input, args.label_column)
    return d, feature_names, label_name


def _classifiers(text):
    names = tuple(t.strip() for t in text.split(",") if t.strip())
    for n in names:
        if n not in ("knn", "lr"):
            raise ContractError(f"unknown classifier {n!r}")
    return names


def cmd_resample(args):
    t0 = time.perf_counter()
    pipeline = Pipeline.parse(args.pipeline)
    cfg = _resample_config(args)
    d, feature_names, label_name = _load(args)
    if args.no_scale:
        work, table = d, None
    else:
        work, table = scale_minmax(d)
    log = []
    out = run_pipeline(work, pipeline, cfg, log)

    # real rows go out verbatim; only synthetic rows are mapped back
    X = np.array(out.features)
    real = ~out.synthetic
    X[real] = d.features[out.row_ids[real]]
    if table is not None:
        X[~real] = table.inverse(out.features[~real])
    out = out.with_features(X)
    _emit(args.output, format_csv(out, feature_names, label_name))

    stages = []
    for info in log:
        entry = {k: v for k, v in info.items() if k != "report"}
        if "report" in info:
            rep = info["report"]
            entry.update(rep.to_dict(list(d.class_names)))
            entry["seeds_chosen"] = sum(len(p.quotas) for p in rep.plans)
            if args.dump_balls:
                _write_atomic(args.dump_balls, dump_balls(rep.balls, d.class_names))
        stages.append(entry)
    counts = out.class_counts()
    summary = {
        "class_counts": {d.class_names[c]: int(counts[c]) for c in range(d.k)},
        "input_rows": d.m,
        "output_rows": out.m,
        "pipeline": pipeline.name,
        "runtime_s": round(time.perf_counter() - t0, 4),
        "seed": args.seed,
        "stages": stages,
        "synthetic_rows": int(out.synthetic.sum()),
    }
    target = sys.stderr if args.output in (None, "-") else sys.stdout
    target.write(_dumps(summary))
    return 0


def cmd_noise(args):
    spec = NoiseSpec(args.noise_rate, args.seed)
    d, feature_names, label_name = _load(args)
    noisy, flipped = inject_label_noise(d, spec)
    _emit(args.output, format_csv(noisy, feature_names, label_name, synthetic_column=False))
    sidecar = args.flips or (None if args.output in (None, "-") else args.output + ".flips.json")
    if sidecar:
        _write_atomic(sidecar, _dumps({"flipped": flipped, "rate": args.noise_rate,
                                       "seed": args.seed}))
    return 0


def _report_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["fold", "classifier", "metric", "value"])
    for fold in report["per_fold"]:
        for clf, metrics in fold["classifiers"].items():
            for m, v in metrics.items():
                w.writerow([fold["fold"], clf, m, repr(v)])
    for clf, metrics in report["summary"].items():
        for m, s in metrics.items():
            w.writerow(["mean", clf, m, repr(s["mean"])])
            w.writerow(["std", clf, m, repr(s["std"])])
    return buf.getvalue()


def cmd_evaluate(args):
    pipeline = Pipeline.parse(args.pipeline)
    classifiers = _classifiers(args.classifiers)
    cfg = _resample_config(args)
    d, _, _ = _load(args)
    if args.noise_rate:
        d, _ = inject_label_noise(d, NoiseSpec(args.noise_rate, args.seed))
    folds = stratified_folds(d, args.folds, args.seed)
    report = cross_validate(d, pipeline, folds, classifiers, args.seed, cfg, args.jobs)
    report["noise_rate"] = args.noise_rate
    report["source"] = d.provenance
    text = _dumps(report) if args.format == "json" else _report_csv(report)
    _emit(args.output, text)
    return 0


def cmd_bench(args):
    rates = [float(r) for r in args.noise_rates.split(",")]
    for r in rates:
        NoiseSpec(r)
    pipelines = [Pipeline.parse(p).name for p in args.pipelines.split(",")]
    classifiers = _classifiers(args.classifiers)
    cfg = _resample_config(args)
    if args.input:
        d, _, _ = _load(args)
    elif args.gen:
        d = generate(args.gen, args.m, args.seed)
    else:
        raise ContractError("bench needs --in or --gen")
    rows = bench(d, rates, pipelines, classifiers, args.folds, args.seed, cfg, args.jobs)
    if args.format == "json":
        text = _dumps([dict(zip(BENCH_COLUMNS, r)) for r in rows])
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(BENCH_COLUMNS)
        for rate, pl, clf, metric, mean, std in rows:
            w.writerow([repr(rate), pl, clf, metric, repr(mean), repr(std)])
        text = buf.getvalue()
    _emit(args.output, text)
    return 0


def cmd_gen(args):
    d = generate(args.name, args.m, args.seed)
    _emit(args.output, format_csv(d, label_name="label", synthetic_column=False))
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="ingb", description="Granular-ball oversampling toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, with_input=True, required_input=True):
        if with_input:
            p.add_argument("--in", dest="input", required=required_input,
                           help="input CSV (header row, label column last by default)")
            p.add_argument("--label-column", default=None)
        p.add_argument("--out", dest="output", default=None, help="output path (default stdout)")
        p.add_argument("--seed", type=int, default=42)

    def resampling(p):
        p.add_argument("--T", type=float, default=1.0, help="state lower bound")
        p.add_argument("--p", type=float, default=2.0, help="Minkowski order")
        p.add_argument("--sigma-scale", type=float, default=1.0)
        p.add_argument("--sparsity-exponent", choices=["n", "1"], default="n")
        p.add_argument("--seed-threshold", choices=["ge-mean", "le-mean"], default="ge-mean")

    p = sub.add_parser("resample", help="balance a CSV with a resampling pipeline")
    common(p)
    resampling(p)
    p.add_argument("--pipeline", default="ingb")
    p.add_argument("--no-scale", action="store_true", help="skip min-max scaling")
    p.add_argument("--dump-balls", default=None, help="write granular balls as JSON lines")
    p.set_defaults(func=cmd_resample)

    p = sub.add_parser("noise", help="flip a fraction of labels per class")
    common(p)
    p.add_argument("--noise-rate", type=float, required=True)
    p.add_argument("--flips", default=None, help="flip-index sidecar JSON path")
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("evaluate", help="stratified cross-validation of one pipeline")
    common(p)
    resampling(p)
    p.add_argument("--pipeline", default="ingb")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--noise-rate", type=float, default=0.0)
    p.add_argument("--classifiers", default="knn,lr")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="noise-rate x pipeline sweep, long-format output")
    common(p, required_input=False)
    resampling(p)
    p.add_argument("--gen", choices=sorted(GENERATORS), default=None,
                   help="use a bundled generator instead of --in")
    p.add_argument("--m", type=int, default=1100)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--noise-rates", default=",".join(str(r) for r in BENCH_RATES))
    p.add_argument("--pipelines", default=",".join(BENCH_PIPELINES))
    p.add_argument("--classifiers", default="knn,lr")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=["json", "csv"], default="csv")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="write a seeded synthetic benchmark dataset")
    p.add_argument("name")
    p.add_argument("--m", type=int, default=1100)
    common(p, with_input=False)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ContractError, AssertionError) as exc:
        print(f"ingb: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, DataFormatError) as exc:
        print(f"ingb: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
