"""Command-line interface.

Every command that is given ``--out DIR`` writes its outputs there together
with ``manifest.json`` (command, resolved settings, seed, input digests,
version).  Outputs depend only on the manifest, so reruns are byte-identical.

Exit codes: 0 success, 1 a verification check failed, 2 usage error,
3 bad input data, 4 numerical or feasibility failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .dataio import (
    DatasetConfig, atomic_write, attach_scores, fmt, load_benefits, load_dataset,
    load_predictions, load_scores, packaged_config, predictions_csv, split, split_indices,
)
from .benefit import PredictionSet, apply_scheme, parse_scheme
from .errors import ConfigError, DataError, IneqFairError, NumericalError
from .inequality import (
    coefficient_of_variation, decompose, generalized_entropy, gini, mean_log_deviation, theil,
)
from .partition import from_attributes, parse_groups, restrict

log = logging.getLogger("ineqfair")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3, 4


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return None if math.isnan(x) else float(fmt(x))
    return x


def _dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def _group_label(key) -> str:
    if isinstance(key, tuple):
        return "_".join(str(k) for k in key)
    return str(key)


class Run:
    """Collects outputs and writes them, plus the manifest, only after success."""

    def __init__(self, args, inputs=(), config=None):
        self.args = args
        self.out = Path(args.out) if args.out else None
        self.inputs = [p for p in inputs if p]
        self.config = config
        self.files = {}

    def add(self, name, text):
        self.files[name] = text

    def manifest(self) -> dict:
        settings = {k: v for k, v in sorted(vars(self.args).items()) if k not in ("func", "out")}
        return {
            "command": self.args.command,
            "settings": settings,
            "config": self.config,
            "seed": self.args.seed,
            "inputs": {str(p): _sha256(p) for p in self.inputs},
            "version": __version__,
        }

    def commit(self):
        if self.out is None:
            return
        self.out.mkdir(parents=True, exist_ok=True)
        for name, text in self.files.items():
            atomic_write(self.out / name, text)
        atomic_write(self.out / "manifest.json", _dump_json(self.manifest()))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

_INDICES = {
    "ge": lambda b, a: generalized_entropy(b, a),
    "theil": lambda b, a: theil(b),
    "mld": lambda b, a: mean_log_deviation(b),
    "cv": lambda b, a: coefficient_of_variation(b),
    "gini": lambda b, a: gini(b),
}


def cmd_index(args) -> int:
    b = load_benefits(args.input)
    names = list(_INDICES) if args.index == "all" else [args.index]
    values = {name: _INDICES[name](b, args.alpha) for name in names}
    for name, v in values.items():
        label = f"ge({fmt(args.alpha)})" if name == "ge" else name
        print(f"{label}\t{fmt(v)}" if len(values) > 1 else fmt(v))
    run = Run(args, [args.input])
    run.add("index.json", _dump_json({"alpha": args.alpha, "n": b.n, "values": values}))
    run.commit()
    return EXIT_OK


def _load_preds(args) -> PredictionSet:
    preds = load_predictions(args.pred)
    if getattr(args, "scores", None):
        preds = attach_scores(preds, load_scores(args.scores))
    return preds


def cmd_audit(args) -> int:
    preds = _load_preds(args)
    scheme = parse_scheme(args.notion)
    b = apply_scheme(preds, scheme)
    attrs = parse_groups(args.groups)
    part = restrict(from_attributes(preds, attrs), b.ids)
    d = decompose(b, part, args.alpha)
    total = d.between + d.within
    report = {
        "alpha": args.alpha,
        "notion": scheme.name,
        "groups": attrs,
        "n": b.n,
        "overall": d.overall,
        "between": d.between,
        "within": d.within,
        "between_share": d.between / total if total > 0 else None,
        "per_group": {
            _group_label(t.key): {"size": t.size, "mean": t.mean, "within": t.within}
            for t in d.group_terms
        },
    }
    print(f"overall\t{fmt(d.overall)}\nbetween\t{fmt(d.between)}\nwithin\t{fmt(d.within)}")
    run = Run(args, [args.pred, getattr(args, "scores", None)])
    run.add("audit.json", _dump_json(report))
    run.commit()
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .analysis import parse_tau_grid, threshold_sweep
    from .model import oracle_scores

    preds = _load_preds(args)
    y = preds.y_true
    taus = parse_tau_grid(args.taus)
    if args.oracle:
        scores = oracle_scores(y)
        neg = round(float(np.mean(y == 0)), 12)
        if not any(abs(t - neg) < 1e-12 for t in taus):
            taus = sorted(taus + [neg])
    else:
        scores = preds.scores
    attrs = parse_groups(args.groups) if args.groups else []
    part = from_attributes(preds, attrs) if attrs else None
    rows = threshold_sweep(scores, y, part, args.alpha, taus, parse_scheme(args.notion),
                           tie_seed=args.seed, ids=preds.ids, workers=args.workers)
    keys = list(part.groups) if part is not None else []
    header = ["tau", "accuracy", "overall", "between", "within"] + [f"within_{_group_label(k)}" for k in keys]
    table = []
    for r in rows:
        table.append([r.tau, r.accuracy, r.overall, r.between, r.within]
                     + [r.group_within.get(k, math.nan) for k in keys])
    run = Run(args, [args.pred, getattr(args, "scores", None)])
    run.add("sweep.csv", _csv_text(header, table))
    run.add("sweep.json", _dump_json([
        {"tau": r.tau, "accuracy": r.accuracy, "overall": r.overall, "between": r.between,
         "within": r.within, "defined": r.defined, "note": r.note,
         "group_within": {_group_label(k): v for k, v in r.group_within.items()},
         "group_mean": {_group_label(k): v for k, v in r.group_mean.items()}}
        for r in rows
    ]))
    run.commit()
    if run.out is None:
        sys.stdout.write(run.files["sweep.csv"])
    return EXIT_OK


def cmd_shares(args) -> int:
    from .analysis import share_by_attribute_sets

    preds = _load_preds(args)
    sets = [parse_groups(s) for s in args.sets.split(";") if s.strip()]
    if not sets:
        sets = [[a] for a in preds.attribute_names]
    rows = share_by_attribute_sets(preds, sets, args.alpha, parse_scheme(args.notion))
    text = _csv_text(["attributes", "n_groups", "between_share"],
                     [[",".join(r.attributes), r.n_groups, r.between_share] for r in rows])
    run = Run(args, [args.pred, getattr(args, "scores", None)])
    run.add("shares.csv", text)
    run.add("shares.json", _dump_json([
        {"attributes": list(r.attributes), "n_groups": r.n_groups,
         "between_share": r.between_share, "defined": r.defined} for r in rows
    ]))
    run.commit()
    if run.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def _dataset_config(args) -> tuple[DatasetConfig, str]:
    path = args.config
    if path in ("adult", "compas"):
        path = str(packaged_config(path))
    cfg = DatasetConfig.from_json(path)
    cfg = replace(cfg, seed=args.seed, path=args.data or cfg.path)
    return cfg, path


def cmd_train(args) -> int:
    from .model import predict, score, train_logistic

    cfg, cfg_path = _dataset_config(args)
    ds = load_dataset(cfg)
    train, test = split(ds, cfg, args.repeat)
    m = train_logistic(train, l2=args.l2)
    s = np.clip(score(m, test.features), 0.0, 1.0)
    attrs = {name: [str(v) for v in col] for name, col in test.sensitive.items()}
    preds = PredictionSet.from_arrays(test.labels, predict(m, test.features), s,
                                      ids=[str(i) for i in test.ids], attrs=attrs)
    acc = float(np.mean(predict(m, test.features) == test.labels))
    print(f"test accuracy\t{fmt(acc)}")
    run = Run(args, [cfg_path, cfg.path], config=cfg.to_dict())
    run.add("model.json", _dump_json({
        **m.to_dict(), "feature_names": list(ds.feature_names), "test_accuracy": acc,
        "n_train": len(train), "n_test": len(test),
    }))
    run.add("predictions.csv", predictions_csv(preds))
    run.commit()
    return EXIT_OK


def cmd_constrain(args) -> int:
    from .analysis import constrained_unfairness_track
    from .fairtrain import ConstraintSpec, Hyperparams, parse_factor_grid

    factors = parse_factor_grid(args.factors)
    if args.synthetic:
        from .synthetic import planted_disparity

        ds = planted_disparity(seed=args.seed)
        tr, te = split_indices(len(ds), 0.7, args.seed, 0)
        train, test = ds.subset(tr), ds.subset(te)
        cfg, inputs = {"synthetic": "planted_disparity"}, []
    else:
        if not args.config:
            raise ConfigError("constrain needs --config or --synthetic")
        dcfg, cfg_path = _dataset_config(args)
        train, test = split(load_dataset(dcfg), dcfg, args.repeat)
        cfg, inputs = dcfg.to_dict(), [cfg_path, dcfg.path]
    spec = ConstraintSpec(args.attribute, args.reference, factors)
    rows = constrained_unfairness_track(train, spec, args.alpha, parse_scheme(args.notion), test,
                                        Hyperparams(l2=args.l2))
    keys = [str(args.reference), f"non-{args.reference}"]
    header = ["factor", "loss", "cov", "between", "overall"] + [f"within_{k}" for k in keys]
    table = [[r.factor, r.loss, r.cov, r.between, r.overall] + [r.group_within.get(k, math.nan) for k in keys]
             for r in rows]
    run = Run(args, inputs, config=cfg)
    run.add("constraint.csv", _csv_text(header, table))
    run.add("constraint.json", _dump_json([
        {"factor": r.factor, "loss": r.loss, "cov": r.cov, "accuracy": r.accuracy,
         "overall": r.overall, "between": r.between, "within": r.within, "group_within": r.group_within}
        for r in rows
    ]))
    run.commit()
    if run.out is None:
        sys.stdout.write(run.files["constraint.csv"])
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_all

    results = run_all(args.seed)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    run = Run(args)
    run.add("verify.json", _dump_json([{"name": r.name, "passed": r.passed, "detail": r.detail}
                                       for r in results]))
    run.commit()
    return EXIT_CHECK_FAILED if failed else EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, default=2.0, help="generalized entropy parameter (default 2)")
    common.add_argument("--seed", type=int, default=0, help="base seed for splits and tie-breaks (default 0)")
    common.add_argument("--out", help="directory for output files and manifest.json")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="ineqfair", description="Inequality-index audits of classifier outputs.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("index", parents=[common], help="inequality index of an id,benefit file")
    s.add_argument("--input", required=True)
    s.add_argument("--index", choices=[*_INDICES, "all"], default="ge")
    s.set_defaults(func=cmd_index)

    def pred_args(s, groups_required):
        s.add_argument("--pred", required=True, help="prediction CSV: id,y_true,y_pred,score,<attrs>")
        s.add_argument("--scores", help="external id,score file joined by id")
        s.add_argument("--notion", default="individual",
                       help="benefit scheme name or name:tp,tn,fp,fn with x for excluded")
        s.add_argument("--groups", required=groups_required, help="comma-separated grouping attributes")

    s = sub.add_parser("audit", parents=[common], help="decompose unfairness of a prediction file")
    pred_args(s, True)
    s.set_defaults(func=cmd_audit)

    s = sub.add_parser("sweep", parents=[common], help="unfairness across ranked-threshold classifiers")
    pred_args(s, False)
    s.add_argument("--taus", default="0:1:0.01", help="start:stop:step, inclusive (default 0:1:0.01)")
    s.add_argument("--oracle", action="store_true",
                   help="rank by the true labels and add the negative-class fraction to the grid")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("shares", parents=[common], help="between-group share for several groupings")
    s.add_argument("--pred", required=True)
    s.add_argument("--scores")
    s.add_argument("--notion", default="individual")
    s.add_argument("--sets", default="", help='groupings separated by ";", e.g. "race;gender;race,gender"')
    s.set_defaults(func=cmd_shares)

    def data_args(s, required):
        s.add_argument("--config", required=required, help="dataset config JSON, or 'adult' / 'compas'")
        s.add_argument("--data", help="override the CSV path named in the config")
        s.add_argument("--repeat", type=int, default=0, help="which train/test split (default 0)")
        s.add_argument("--l2", type=float, default=1e-4)

    s = sub.add_parser("train", parents=[common], help="fit logistic regression and score the test split")
    data_args(s, True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("constrain", parents=[common], help="unfairness along the covariance-constraint path")
    data_args(s, False)
    s.add_argument("--synthetic", action="store_true", help="use the planted-disparity fixture")
    s.add_argument("--attribute", default="race")
    s.add_argument("--reference", default="White")
    s.add_argument("--factors", default="1.0:0.0:0.05")
    s.add_argument("--notion", default="individual")
    s.set_defaults(func=cmd_constrain)

    s = sub.add_parser("verify", parents=[common], help="run the theoretical checks")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NumericalError as e:
        print(f"ineqfair {args.command}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DataError, IneqFairError) as e:
        print(f"ineqfair {args.command}: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
