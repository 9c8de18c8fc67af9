"""Batch entry point: the full pipeline without the UI.

Subcommands mirror the workbench stages: ``inspect`` (dataset + panorama
JSON), ``layout`` (attribute projection JSON), ``fit`` (train + ROC/AUC
report), ``panorama`` (build + save the learning file), ``query``
(profile or states file), ``batch`` (score a CSV), ``serve`` (HTTP API).
All outputs are machine readable; nothing is written outside the paths
given on the command line.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings

import numpy as np

from .correlation import GLOBAL, build_panorama as build_correlation_panorama
from .dataset import column_stats, decompose_target, load_table
from .errors import UcregError
from .evaluation import confusion, roc_curve, split
from .logit import FitConfig, probability_matrix
from .panorama import ChartSpec, build_panorama, load as load_panorama, save as save_panorama
from .panorama import _build_chart
from .query import QuerySession, batch_query, query, similar_cases, streamgraph, submit_state
from .radviz import layout_attributes, layout_items, layout_to_json_dict, place_anchors


def _read_dataset(args):
    with open(args.data, "rb") as fh:
        return load_table(
            fh.read(),
            delimiter=args.delimiter,
            header=not args.no_header,
            missing_tokens=tuple(args.missing.split(",")),
        )


def _emit(doc, out_path):
    text = json.dumps(doc, indent=2)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _fit_config(args) -> FitConfig:
    return FitConfig(max_iter=args.max_iter, tol=args.tol, l2=args.l2)


def _add_data_options(p):
    p.add_argument("--data", required=True, help="input CSV/TSV path")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", action="store_true")
    p.add_argument("--missing", default=",NA,null",
                   help="comma-separated missing tokens")


def _add_fit_options(p):
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--l2", type=float, default=1e-6)
    p.add_argument("--threads", type=int, default=1,
                   help="cap for parallelizable stages")


def cmd_inspect(args) -> int:
    ds = _read_dataset(args)
    doc = {
        "n_rows": ds.n_rows,
        "n_attrs": ds.n_attrs,
        "attributes": ds.attr_names,
        "categorical": ds.categorical_names,
        "stats": {},
    }
    for name in ds.attr_names:
        try:
            doc["stats"][name] = column_stats(ds, name)
        except UcregError:
            doc["stats"][name] = None
    if args.target:
        dec = decompose_target(ds, args.target)
        doc["target"] = {
            "name": args.target,
            "labels": list(dec.labels),
            "counts": [int(c) for c in dec.counts],
            "dropped_rows": dec.n_dropped,
        }
        p = build_correlation_panorama(ds, dec)
        doc["panorama"] = p.to_json_dict()
    _emit(doc, args.out)
    return 0


def cmd_layout(args) -> int:
    ds = _read_dataset(args)
    dec = decompose_target(ds, args.target)
    p = build_correlation_panorama(
        ds, dec, excluded=set(a for a in args.exclude.split(",") if a)
    )
    ring = place_anchors(p.labels)
    focus = args.focus if args.focus else GLOBAL
    points = layout_attributes(p, ring, focus=focus, distortion=args.distortion, ds=ds)
    _emit(layout_to_json_dict(ring, points), args.out)
    return 0


def cmd_fit(args) -> int:
    ds = _read_dataset(args)
    labels = tuple(args.labels.split(","))
    attrs = tuple(args.attrs.split(","))
    title = args.title or f"{args.target}: {','.join(labels)}"
    spec = ChartSpec(title, args.target, labels, attrs)

    if args.split is not None:
        train_rows, eval_rows = split(ds, args.split, args.seed)
    else:
        train_rows = eval_rows = np.arange(ds.n_rows)
    chart = _build_chart(ds, spec, _fit_config(args), rows=train_rows)
    mm = chart.model

    dec_full = decompose_target(ds, args.target)
    dec_eval = (
        dec_full.label_vs_rest(labels[0])
        if len(labels) == 1
        else dec_full.restricted(labels)
    )
    keep = np.isin(dec_eval.row_indices, eval_rows)
    dec_eval = dec_eval.select_rows(np.where(keep)[0])

    pm = probability_matrix(mm, ds, rows=dec_eval.row_indices)
    pos_by_row = {int(r): i for i, r in enumerate(dec_eval.row_indices)}
    rocs = []
    for j, sub in enumerate(mm.submodels):
        truth = np.array(
            [dec_eval.presence[pos_by_row[int(r)], j] for r in pm.row_indices]
        )
        curve = roc_curve(pm.matrix[:, j], truth)
        rocs.append(
            {
                "label": mm.labels[j],
                **curve.to_json_dict(
                    model_meta={
                        "equation": sub.equation(mm.labels[j]),
                        "p_value": sub.diagnostics.p_value,
                    }
                ),
            }
        )
    doc = {
        "title": title,
        "model": mm.to_json_dict(),
        "rocs": rocs,
        "confusion": confusion(mm, ds, dec_eval).to_json_dict(),
        "evaluated_on": "test" if args.split is not None else "train",
        "split": None
        if args.split is None
        else {"ratio": args.split, "seed": args.seed, "test_rows": len(eval_rows)},
    }
    _emit(doc, args.out)
    return 0


def cmd_panorama(args) -> int:
    ds = _read_dataset(args)
    with open(args.spec, "r", encoding="utf-8") as fh:
        spec_docs = json.load(fh)
    specs = [ChartSpec.from_json_dict(d) for d in spec_docs]
    pf = build_panorama(ds, specs, cfg=_fit_config(args))
    raw = save_panorama(pf)
    with open(args.out, "wb") as fh:
        fh.write(raw)
    print(f"wrote {args.out} ({len(pf.charts)} charts)")
    return 0


def _load_panorama_file(path: str):
    with open(path, "rb") as fh:
        return load_panorama(fh.read())


def cmd_query(args) -> int:
    pf = _load_panorama_file(args.panorama)
    ds = None
    if args.data:
        ds = _read_dataset(args)

    if args.states:
        with open(args.states, "r", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            states = [
                {k: float(v) for k, v in row.items() if v not in ("", None)}
                for row in reader
            ]
        session = QuerySession(panorama=pf, dataset=ds)
        profile = dict(pf.default_profile)
        for st in states:  # states are incremental edits of the profile
            profile.update(st)
            submit_state(session, dict(profile))
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["state", "chart", "label", "probability"])
        for chart in pf.charts:
            g = streamgraph(session, chart.spec.title)
            for si in g["states"]:
                for label, series in zip(g["labels"], g["series"]):
                    writer.writerow([si, chart.spec.title, label, repr(series[si])])
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(buf.getvalue())
        else:
            sys.stdout.write(buf.getvalue())
        return 0

    with open(args.profile, "r", encoding="utf-8") as fh:
        profile = {k: float(v) for k, v in json.load(fh).items()}
    merged = dict(pf.default_profile)
    merged.update(profile)
    results = query(pf, merged)
    doc = {
        "profile": merged,
        "results": [
            {
                "title": c.spec.title,
                "labels": list(c.model.labels),
                "probabilities": [float(v) for v in results[c.spec.title]],
            }
            for c in pf.charts
        ],
    }
    if ds is not None:
        doc["similar_cases"] = {
            c.spec.title: [
                {"row_id": r, "similarity": s}
                for r, s in similar_cases(ds, merged, c, args.top_n)
            ]
            for c in pf.charts
        }
    _emit(doc, args.out)
    return 0


def cmd_batch(args) -> int:
    pf = _load_panorama_file(args.panorama)
    table = _read_dataset(args)
    result = batch_query(pf, table, color_attr=args.color)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["row_id"]
    for c in result.charts:
        header += [f"{c.title}:{label}" for label in c.labels]
    writer.writerow(header)
    common = None
    for c in result.charts:
        ids = set(int(i) for i in c.probabilities.row_indices)
        common = ids if common is None else (common & ids)
    for rid in sorted(common or set()):
        row = [rid]
        for c in result.charts:
            i = c.probabilities.row_indices.tolist().index(rid)
            row += [repr(float(v)) for v in c.probabilities.matrix[i]]
        writer.writerow(row)
    if args.out_csv:
        with open(args.out_csv, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())

    layouts = {c.title: c.layout_json_dict() for c in result.charts}
    if args.out_layout:
        with open(args.out_layout, "w", encoding="utf-8") as fh:
            json.dump(layouts, fh, indent=2)
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(addr=args.addr, max_upload=args.max_upload)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ucreg",
        description="regression workbench: panoramas, logistic models, queries",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inspect", help="dataset summary + correlation panorama")
    _add_data_options(p)
    p.add_argument("--target", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("layout", help="attribute projection JSON")
    _add_data_options(p)
    p.add_argument("--target", required=True)
    p.add_argument("--focus", default=None, help="label, attribute, or empty for global")
    p.add_argument("--distortion", type=float, default=1.0)
    p.add_argument("--exclude", default="")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("fit", help="train one model and report ROC/AUC")
    _add_data_options(p)
    _add_fit_options(p)
    p.add_argument("--target", required=True)
    p.add_argument("--labels", required=True, help="comma-separated label(s)")
    p.add_argument("--attrs", required=True, help="comma-separated attributes")
    p.add_argument("--title", default=None)
    p.add_argument("--split", type=float, default=None, help="test fraction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("panorama", help="build charts and save the learning file")
    _add_data_options(p)
    _add_fit_options(p)
    p.add_argument("--spec", required=True, help="JSON list of chart specs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output .ucreg.json path")
    p.set_defaults(func=cmd_panorama)

    p = sub.add_parser("query", help="query a saved panorama")
    p.add_argument("--panorama", required=True)
    p.add_argument("--profile", default=None, help="JSON {attribute: value}")
    p.add_argument("--states", default=None, help="CSV, one profile state per row")
    p.add_argument("--data", default=None, help="original dataset for similar cases")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", action="store_true")
    p.add_argument("--missing", default=",NA,null")
    p.add_argument("--top-n", type=int, default=10)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("batch", help="score a table and emit the item layout")
    _add_data_options(p)
    p.add_argument("--panorama", required=True)
    p.add_argument("--color", default=None, help="column to color the layout by")
    p.add_argument("--out-csv", default=None)
    p.add_argument("--out-layout", default=None)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("serve", help="start the HTTP JSON service")
    p.add_argument("--addr", default=None, help="host:port (or UCREG_ADDR)")
    p.add_argument("--max-upload", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "query" and not (args.profile or args.states):
        parser.error("query needs --profile or --states")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except UcregError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
