"""Command line interface: ``czekan diagram | cluster | eval | synth``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .ingest import Dataset, IngestError, load_csv
from .metrics import format_table, path_length, score_report, u_m_factor
from .pipeline import RunConfig, build_diagram, czekanowski_cluster
from .render import render_ascii, render_svg
from .seriation import METHODS
from .synth import blobs_csv

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

logger = logging.getLogger("czekan")

SCHEMA_VERSION = 1
CLASS_NAMES = {"2": "Benign", "4": "Malignant"}

# CLI flag -> RunConfig field
_FLAG_FIELDS = {
    "method": "method",
    "n_classes": "n_classes",
    "probs": "probs",
    "breaks": "breaks",
    "mode": "mode",
    "fractions": "fractions",
    "k": "k",
    "fuzziness": "fuzziness",
    "fcm_max_iter": "fcm_max_iter",
    "fcm_tol": "fcm_tol",
    "fcm_init": "fcm_init",
    "sig_level": "sig_level",
    "n_perm": "n_perm",
    "min_size": "min_size",
    "alpha": "alpha",
    "max_cp": "max_cp",
    "spin_max_iter": "spin_max_iter",
    "seed": "seed",
}


class CliError(Exception):
    pass


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from exc


def _add_data_args(p: argparse.ArgumentParser):
    p.add_argument("csv", help="input CSV file with a header row")
    p.add_argument("--label-column", help="column holding true class labels (excluded from features)")
    p.add_argument("--id-column", help="column holding row identifiers (excluded from features)")
    p.add_argument("--missing-policy", choices=("drop_row", "error"), default="drop_row")


def _add_config_args(p: argparse.ArgumentParser, clustering: bool):
    g = p.add_argument_group("run configuration (defaults reproduce the WBC study)")
    g.add_argument("--config", help="key = value file (TOML) with run settings; flags override it")
    g.add_argument("--method", choices=METHODS)
    g.add_argument("--n-classes", type=int)
    g.add_argument("--mode", choices=("symmetric", "asymmetric"))
    g.add_argument("--probs", type=_floats, help="quantile levels for the class breaks, e.g. 0.2,0.4,0.6,0.8")
    g.add_argument("--breaks", choices=("quantile", "equal_width"))
    g.add_argument("--fractions", type=_floats, help="asymmetric mode group fractions")
    g.add_argument("--no-scale", dest="scale", action="store_false", default=None,
                   help="skip z-score scaling")
    g.add_argument("--seed", type=int)
    g.add_argument("--spin-max-iter", type=int)
    g.add_argument("--dump-distances", help="write the distance matrix to this CSV")
    if clustering:
        g.add_argument("--k", type=int)
        g.add_argument("--fuzziness", type=float)
        g.add_argument("--fcm-max-iter", type=int)
        g.add_argument("--fcm-tol", type=float)
        g.add_argument("--fcm-init", choices=("spread", "random"))
        g.add_argument("--sig-level", type=float)
        g.add_argument("--n-perm", type=int)
        g.add_argument("--min-size", type=int)
        g.add_argument("--alpha", type=float)
        g.add_argument("--max-cp", type=int)
        g.add_argument("--threads", type=int, default=None,
                       help="worker threads for permutation tests (default: all cores)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="czekan", description=__doc__)
    parser.add_argument("--version", action="version", version=f"czekan {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diagram", help="draw a Czekanowski diagram")
    _add_data_args(p)
    _add_config_args(p, clustering=False)
    p.add_argument("--out", required=True, help="SVG output path")
    p.add_argument("--ascii", action="store_true", help="also print a text rendering")
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("cluster", help="find contiguous clusters in the diagram")
    _add_data_args(p)
    _add_config_args(p, clustering=True)
    p.add_argument("--out-dir", default="czekan_out", help="directory for results.json and friends")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("eval", help="score a results.json against true labels")
    p.add_argument("results", help="results.json written by 'cluster'")
    p.add_argument("truth", help="CSV with the true labels")
    p.add_argument("--label-column", required=True)
    p.add_argument("--id-column")
    p.add_argument("--missing-policy", choices=("drop_row", "error"), default="drop_row")
    p.add_argument("--json-out", help="also write the report as JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate Gaussian blobs with labels")
    p.add_argument("--n-per-cluster", type=int, default=50)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--separation", type=float, default=20.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV output path")
    p.set_defaults(func=cmd_synth)
    return parser


def load_config_file(path) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise CliError(f"bad config file {path}: {exc}") from exc
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise CliError(f"unknown keys in {path}: {', '.join(sorted(unknown))}")
    return data


def resolve_config(args) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    settings = {}
    if getattr(args, "config", None):
        settings.update(load_config_file(args.config))
    for flag, name in _FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            settings[name] = value
    if getattr(args, "scale", None) is not None:
        settings["scale"] = args.scale
    return RunConfig.from_dict(settings)


def _load(args) -> Dataset:
    if not Path(args.csv).is_file():
        raise CliError(f"input file not found: {args.csv}")
    return load_csv(args.csv, label_column=args.label_column, id_column=args.id_column,
                    missing_policy=args.missing_policy)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _audit_line(cfg: RunConfig) -> str:
    return json.dumps({"czekan": __version__, "config": cfg.to_dict()}, sort_keys=True)


def cmd_diagram(args) -> int:
    cfg = resolve_config(args)
    ds = _load(args)
    czek, W, ser, _ = build_diagram(ds, cfg)
    if args.dump_distances:
        W.to_csv(args.dump_distances, ds.row_ids)
    svg = render_svg(czek, None, row_labels=[ds.row_ids[i] for i in ser.order])
    svg = svg.replace("<svg ", f"<!-- {_audit_line(cfg)} -->\n<svg ", 1)
    Path(args.out).write_text(svg, encoding="utf-8")
    if args.ascii:
        sys.stdout.write(render_ascii(czek))
    print(f"wrote {args.out} ({ds.n} observations, method {cfg.method})")
    return 0


def results_document(ds: Dataset, run, source: str) -> dict:
    cfg = run.config
    order = run.seriation.order
    doc = {
        "schema_version": SCHEMA_VERSION,
        "czekan_version": __version__,
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "input": {"path": source, "n": ds.n, "n_dropped": ds.n_dropped,
                  "features": list(ds.feature_names), "row_ids": list(ds.row_ids)},
        "seriation": {"method": cfg.method, "order": (order + 1).tolist(),
                      "order_row_ids": [ds.row_ids[i] for i in order], "info": run.seriation.info},
        "czekanowski_matrix": {"mode": run.czek.mode, "n_classes": run.czek.n_classes,
                               "breaks": np.asarray(run.czek.breaks).tolist(), "meta": run.czek.meta},
        "fcm": {"iterations": run.membership.n_iter, "converged": run.membership.converged,
                "objective": run.membership.objective},
        "changepoints": run.changepoints.to_dict(),
        "clusters": run.clusters.to_dict(),
        "u_m": u_m_factor(run.distances, order),
        "path_length": path_length(run.distances, order),
    }
    if ds.labels is not None:
        report = score_report(run.clusters.labels_original_order, ds.labels)
        doc["scores"] = report
        doc["accuracy"] = report["accuracy"]
        doc["kappa"] = report["kappa"]
    return doc


def write_membership_csv(path, ds: Dataset, run) -> None:
    order = run.seriation.order
    u = run.membership.values
    with open(path, "w", newline="") as fh:
        fh.write(f"# {_audit_line(run.config)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["position", "row_id", "input_row", "cluster"] + [f"m{j + 1}" for j in range(u.shape[0])])
        for pos, row in enumerate(order):
            w.writerow([pos + 1, ds.row_ids[row], int(row) + 1, int(run.clusters.labels[pos])]
                       + [repr(float(v)) for v in u[:, pos]])


def cmd_cluster(args) -> int:
    cfg = resolve_config(args)
    ds = _load(args)
    threads = args.threads or os.cpu_count() or 1
    run = czekanowski_cluster(ds, cfg, threads=threads)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = results_document(ds, run, args.csv)
    (out / "results.json").write_text(_dumps(doc), encoding="utf-8")
    (out / "changepoints.json").write_text(
        _dumps({"config": cfg.to_dict(), "seed": cfg.seed, **run.changepoints.to_dict()}), encoding="utf-8")
    write_membership_csv(out / "membership.csv", ds, run)
    svg = render_svg(run.czek, run.clusters, row_labels=[ds.row_ids[i] for i in run.seriation.order])
    svg = svg.replace("<svg ", f"<!-- {_audit_line(cfg)} -->\n<svg ", 1)
    (out / "diagram.svg").write_text(svg, encoding="utf-8")
    if args.dump_distances:
        run.distances.to_csv(args.dump_distances, ds.row_ids)

    lines = [f"# {_audit_line(cfg)}",
             f"method {cfg.method}: {run.clusters.k_found} of {cfg.k} clusters, intervals {run.clusters.intervals}",
             f"change points {run.changepoints.locations} p-values {run.changepoints.p_values}",
             f"path length {doc['path_length']:.4f}  U_m {doc['u_m']:.2f}"]
    if "scores" in doc:
        scores = dict(doc["scores"], path_length=doc["path_length"], u_m=doc["u_m"])
        lines.append(format_table({cfg.method: scores}, CLASS_NAMES))
    report = "\n".join(lines) + "\n"
    (out / "report.txt").write_text(report, encoding="utf-8")
    sys.stdout.write(report)
    return 0


def cmd_eval(args) -> int:
    try:
        doc = json.loads(Path(args.results).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read results {args.results}: {exc}") from exc
    if not Path(args.truth).is_file():
        raise CliError(f"truth file not found: {args.truth}")
    truth = load_csv(args.truth, label_column=args.label_column, id_column=args.id_column,
                     missing_policy=args.missing_policy)
    pred = doc["clusters"]["labels_original_order"]
    if len(pred) != truth.n:
        raise CliError(f"results have {len(pred)} rows but {args.truth} has {truth.n}")
    if args.id_column and list(truth.row_ids) != doc["input"]["row_ids"]:
        raise CliError("row ids in the truth file do not match the results")
    report = score_report(pred, truth.labels)
    report["u_m"] = doc.get("u_m")
    report["path_length"] = doc.get("path_length")
    method = doc.get("config", {}).get("method", "result")
    sys.stdout.write(format_table({method: report}, CLASS_NAMES) + "\n")
    if args.json_out:
        Path(args.json_out).write_text(_dumps(report), encoding="utf-8")
    return 0


def cmd_synth(args) -> int:
    text = blobs_csv(args.n_per_cluster, args.k, args.dim, args.separation, args.seed)
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"wrote {args.out} ({args.k} x {args.n_per_cluster} rows, seed {args.seed})")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, IngestError, ValueError, OSError) as exc:
        print(f"czekan: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
