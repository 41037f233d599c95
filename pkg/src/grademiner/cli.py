"""Command line entry point: ``grademiner run|cluster|tree|advise|report``."""
import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigError, GrademinerError, InputError
from .dtree import export_tree
from .records import format_gpa, load_csv
from .report import (
    PipelineConfig,
    advise_rows,
    build_report,
    distribution_csv,
    run_cluster,
    run_pipeline,
    run_tree,
    scatter_series,
    summarize_clusters,
    with_overrides,
    write_outputs,
)


def _common(p, needs_out=False):
    p.add_argument("--input", help="student CSV (roll,gpa,ct,attendance,assignment,lab_per,quiz)")
    p.add_argument("--config", help="pipeline config JSON; flags override its values")
    p.add_argument("--k", type=int, help="number of clusters (default 3)")
    p.add_argument("--seed", type=int, help="k-means seed (default 0)")
    p.add_argument("--max-iters", type=int, dest="max_iters")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--alpha", type=float, help="weight of the previous GPA in the new grade (default 0.5)")
    p.add_argument("--out", required=needs_out, help="output directory")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="grademiner",
        description="Band students by GPA, cluster them with k-means, grow an ID3 tree "
                    "over assessment attributes and print effort recommendations.",
    )
    parser.add_argument("--version", action="version", version=f"grademiner {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("run", help="full pipeline; writes every report file to --out")
    _common(p, needs_out=True)

    p = sub.add_parser("cluster", help="k-means on the configured features; prints JSON")
    _common(p)

    p = sub.add_parser("tree", help="induce the decision tree; prints or writes tree.json")
    _common(p)

    p = sub.add_parser("advise", help="letter grade, new grade and effort step per student (CSV)")
    _common(p)
    p.add_argument("--text", action="store_true", help="include the recommendation text column")

    p = sub.add_parser("report", help="distribution tables and graph series")
    _common(p)
    return parser


def load_config(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    try:
        cfg = with_overrides(
            cfg,
            input_path=args.input,
            output_dir=args.out,
            alpha=args.alpha,
            k=args.k,
            seed=args.seed,
            max_iters=args.max_iters,
            epsilon=args.epsilon,
        )
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    if not cfg.input_path:
        raise ConfigError("no input given (use --input or input_path in the config)")
    return cfg


def _load(cfg):
    try:
        return load_csv(cfg.input_path)
    except OSError as exc:
        raise InputError(f"{cfg.input_path}: {exc.strerror}") from None


def _emit(text, out_dir, name):
    if out_dir:
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        (path / name).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_run(cfg):
    if cfg.output_dir is None:
        raise ConfigError("run needs --out")
    try:
        report = run_pipeline(cfg)
    except OSError as exc:
        raise InputError(str(exc)) from None
    b = {r.label: r.count for r in report.distribution_bands.rows}
    print(f"{len(report.per_student)} students: " + ", ".join(f"{k} {v}" for k, v in b.items())
          + f"; outputs in {cfg.output_dir}")


def cmd_cluster(cfg):
    ds = _load(cfg)
    model = run_cluster(ds, cfg)
    summary = summarize_clusters(model, cfg.cluster_features)
    summary["assignment"] = {str(r.roll): int(c) for r, c in zip(ds.records, model.assignment)}
    _emit(json.dumps(summary, indent=2) + "\n", cfg.output_dir, "clusters.json")


def cmd_tree(cfg):
    ds = _load(cfg)
    _, tree = run_tree(ds, cfg)
    _emit(export_tree(tree) + "\n", cfg.output_dir, "tree.json")


def cmd_advise(cfg, with_text):
    ds = _load(cfg)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["roll", "gpa", "internal_score", "new_grade", "letter", "step_id"]
    if with_text:
        header.append("effort")
    w.writerow(header)
    for r, internal, ng, _, letter, rec in advise_rows(ds, cfg):
        row = [r.roll, format_gpa(r.gpa), f"{internal:.4f}", f"{ng:.4f}", letter, rec.step_id]
        if with_text:
            row.append(rec.text)
        w.writerow(row)
    _emit(buf.getvalue(), cfg.output_dir, "advice.csv")


def cmd_report(cfg):
    ds = _load(cfg)
    report = build_report(ds, cfg)
    if cfg.output_dir:
        write_outputs(report, cfg.output_dir)
        print(f"report written to {cfg.output_dir}")
        return
    sys.stdout.write("histogram\n" + distribution_csv(report.distribution_five_class))
    sys.stdout.write("\nbands\n" + distribution_csv(report.distribution_bands))
    sys.stdout.write("\nscatter (attendance,gpa)\n")
    for att, gpa in scatter_series(ds):
        sys.stdout.write(f"{att},{format_gpa(gpa)}\n")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "run":
            cmd_run(cfg)
        elif args.command == "cluster":
            cmd_cluster(cfg)
        elif args.command == "tree":
            cmd_tree(cfg)
        elif args.command == "advise":
            cmd_advise(cfg, args.text)
        elif args.command == "report":
            cmd_report(cfg)
    except GrademinerError as exc:
        print(f"grademiner: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
