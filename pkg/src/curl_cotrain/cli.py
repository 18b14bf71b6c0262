"""Command line entry point.

    curl-bench run --config PATH [--out DIR] [--threads N]
    curl-bench describe --manifest PATH
    curl-bench gen-synthetic --spec PATH --out DIR [--binary]

Exit codes: 0 success, 1 config error, 2 data error, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .core_types import class_coverage
from .data_io import DataError, SyntheticSpec, generate_synthetic, load_dataset, save_run_report, write_dataset, write_map_csv
from .experiment import MAP_TABLE_COLUMNS, ConfigError, load_config, map_table_rows, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3

log = logging.getLogger("curl_cotrain")


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = run_experiment(cfg, threads=args.threads)
    save_run_report(report, out / "report.json")
    write_map_csv(map_table_rows(report), out / "map_table.csv", MAP_TABLE_COLUMNS)
    final = cfg.cotrain.rounds
    print(f"{'labels/class':>12}  {'variant':<14} {'MAP':>7}")
    for b in report["baseline"]:
        print(f"{b['labels_per_class']:>12}  {b['variant']:<14} {100 * b['map']:7.2f}")
    for row in report["rounds"]:
        if row["round"] == final:
            print(f"{row['labels_per_class']:>12}  {row['variant']:<14} {100 * row['map']:7.2f}")
    print(f"report written to {out / 'report.json'}")
    return EXIT_OK


def describe(d, name="dataset") -> str:
    lines = [f"{name}: N={d.n_samples}, S={d.n_features}"]
    for fname, dim in zip(d.feature_names, d.dims):
        lines.append(f"  feature {fname}: dim={dim}")
    if d.n_classes is None:
        lines.append("  K: unknown (no labels)")
    else:
        cov = class_coverage(d)
        n_lab = sum(cov.values())
        lines.append(f"  K={d.n_classes}, labeled {n_lab}/{d.n_samples}")
        names = list(d.label_names) or [str(k) for k in cov]
        for k, n in cov.items():
            lines.append(f"    class {k} ({names[k - 1]}): {n}")
    return "\n".join(lines)


def cmd_describe(args) -> int:
    d = load_dataset(args.manifest)
    print(describe(d, Path(args.manifest).name))
    return EXIT_OK


def cmd_gen_synthetic(args) -> int:
    try:
        raw = json.loads(Path(args.spec).read_text(encoding="utf-8"))
        spec = SyntheticSpec.from_dict(raw)
    except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
        raise ConfigError(f"{args.spec}: {exc}") from None
    mpath = write_dataset(generate_synthetic(spec), args.out, name=args.name, binary=args.binary)
    print(f"wrote {mpath}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="curl-bench", description="CURL co-training benchmark runner")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default="results")
    r.add_argument("--threads", type=int, default=1, help="worker processes over (seed, setting) cells")
    r.set_defaults(func=cmd_run)

    d = sub.add_parser("describe", help="summarise a dataset manifest")
    d.add_argument("--manifest", required=True)
    d.set_defaults(func=cmd_describe)

    g = sub.add_parser("gen-synthetic", help="write a synthetic multi-view dataset")
    g.add_argument("--spec", required=True, help="JSON file with SyntheticSpec fields")
    g.add_argument("--out", required=True)
    g.add_argument("--name", default="synthetic")
    g.add_argument("--binary", action="store_true", help="binary feature files instead of CSV")
    g.set_defaults(func=cmd_gen_synthetic)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # dataset-dependent preconditions (split sizes, r*n vs N) surface as ValueError
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
