"""Reading and writing prediction files, benefit files and tabular datasets."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .benefit import PredictionRecord, PredictionSet
from .errors import ConfigError, ParseError
from .inequality import BenefitVector

log = logging.getLogger(__name__)

PREDICTION_COLUMNS = ("id", "y_true", "y_pred", "score")


def fmt(x) -> str:
    """Serialise a number with 12 significant digits."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    out = format(x, ".12g")
    return "0" if out == "-0" else out


def _binary(text, row, col):
    if text not in ("0", "1"):
        raise ParseError(f"expected 0 or 1, got {text!r}", row, col)
    return int(text)


def _read_rows(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.reader(fh))
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from None


def load_predictions(path) -> PredictionSet:
    """Parse ``id,y_true,y_pred,score,<attr>...``.

    Either ``y_pred`` or ``score`` may be blank in a row, not both.  Row numbers
    in errors count the header as row 1.
    """
    rows = _read_rows(path)
    if not rows:
        raise ParseError("file is empty; expected a header", 1)
    header = [h.strip() for h in rows[0]]
    if tuple(header[:4]) != PREDICTION_COLUMNS:
        raise ParseError(f"header must start with {','.join(PREDICTION_COLUMNS)}", 1)
    attrs = header[4:]
    if len(set(header)) != len(header):
        raise ParseError("duplicate column names in header", 1)
    records = []
    seen = set()
    for k, raw in enumerate(rows[1:], start=2):
        if not raw or all(not c.strip() for c in raw):
            continue
        if len(raw) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(raw)}", k)
        cells = [c.strip() for c in raw]
        rid = cells[0]
        if not rid:
            raise ParseError("missing id", k, "id")
        if rid in seen:
            raise ParseError(f"duplicate id {rid!r}", k, "id")
        seen.add(rid)
        y_true = _binary(cells[1], k, "y_true")
        y_pred = _binary(cells[2], k, "y_pred") if cells[2] else None
        score = None
        if cells[3]:
            try:
                score = float(cells[3])
            except ValueError:
                raise ParseError(f"score {cells[3]!r} is not a number", k, "score") from None
            if not 0.0 <= score <= 1.0:
                raise ParseError(f"score {score!r} outside [0, 1]", k, "score")
        if y_pred is None and score is None:
            raise ParseError("row has neither y_pred nor score", k, "y_pred")
        records.append(PredictionRecord(rid, y_true, y_pred, score, dict(zip(attrs, cells[4:]))))
    if not records:
        raise ParseError("no data rows", 2)
    return PredictionSet(tuple(records), tuple(attrs))


def predictions_csv(preds: PredictionSet) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(PREDICTION_COLUMNS) + list(preds.attribute_names))
    for r in preds.records:
        w.writerow([r.id, r.y_true, fmt(r.y_pred), fmt(r.score)]
                   + [r.attrs[a] for a in preds.attribute_names])
    return buf.getvalue()


def atomic_write(path, text: str) -> None:
    """Write via a temporary sibling and rename, so readers never see partial output."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_predictions(preds: PredictionSet, path) -> None:
    atomic_write(path, predictions_csv(preds))


def load_benefits(path) -> BenefitVector:
    """Parse an ``id,benefit`` file."""
    rows = _read_rows(path)
    if not rows or [h.strip() for h in rows[0][:2]] != ["id", "benefit"]:
        raise ParseError("header must be id,benefit", 1)
    ids, vals = [], []
    for k, raw in enumerate(rows[1:], start=2):
        if not raw or all(not c.strip() for c in raw):
            continue
        if len(raw) < 2:
            raise ParseError("expected id and benefit", k)
        try:
            v = float(raw[1])
        except ValueError:
            raise ParseError(f"benefit {raw[1]!r} is not a number", k, "benefit") from None
        if not math.isfinite(v) or v < 0:
            raise ParseError(f"benefit must be a finite non-negative number, got {raw[1].strip()!r}", k, "benefit")
        ids.append(raw[0].strip())
        vals.append(v)
    if not vals:
        raise ParseError("no data rows", 2)
    if len(set(ids)) != len(ids):
        raise ParseError("duplicate ids", None, "id")
    return BenefitVector(np.array(vals), tuple(ids))


def load_scores(path) -> dict:
    """Parse an external ``id,score`` file into a dict."""
    rows = _read_rows(path)
    if not rows or [h.strip() for h in rows[0][:2]] != ["id", "score"]:
        raise ParseError("header must be id,score", 1)
    out = {}
    for k, raw in enumerate(rows[1:], start=2):
        if not raw or all(not c.strip() for c in raw):
            continue
        rid = raw[0].strip()
        try:
            s = float(raw[1])
        except (ValueError, IndexError):
            raise ParseError("score is not a number", k, "score") from None
        if not 0.0 <= s <= 1.0:
            raise ParseError(f"score {s!r} outside [0, 1]", k, "score")
        if rid in out:
            raise ParseError(f"duplicate id {rid!r}", k, "id")
        out[rid] = s
    return out


def attach_scores(preds: PredictionSet, scores: dict) -> PredictionSet:
    missing = [r.id for r in preds.records if r.id not in scores]
    if missing:
        raise ParseError(f"no score for id {missing[0]!r} ({len(missing)} missing)")
    recs = tuple(replace(r, score=scores[r.id]) for r in preds.records)
    return PredictionSet(recs, preds.attribute_names)


# ---------------------------------------------------------------------------
# tabular datasets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DatasetConfig:
    path: str
    label: str
    positive_label: str
    sensitive: tuple = ()
    categorical: tuple = ()
    numeric: tuple = ()
    filters: dict = field(default_factory=dict)
    split_fraction: float = 0.7
    repeats: int = 10
    seed: int = 0
    id_column: str | None = None
    na_values: tuple = ("?",)
    sensitive_as_features: bool = False

    def __post_init__(self):
        for name in ("sensitive", "categorical", "numeric", "na_values"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "positive_label", str(self.positive_label))
        if self.label in self.categorical or self.label in self.numeric:
            raise ConfigError(f"label column {self.label!r} is also listed as a feature")
        if not 0.0 < float(self.split_fraction) < 1.0:
            raise ConfigError("split_fraction must lie strictly between 0 and 1")
        if int(self.repeats) < 1:
            raise ConfigError("repeats must be at least 1")
        for col, rule in self.filters.items():
            if not isinstance(rule, dict) or not set(rule) <= {"min_share", "keep"}:
                raise ConfigError(f"filter for {col!r} must be an object with min_share and/or keep")

    @classmethod
    def from_dict(cls, d: dict, base_dir=None) -> "DatasetConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for req in ("path", "label", "positive_label"):
            if req not in d:
                raise ConfigError(f"config is missing {req!r}")
        d = dict(d)
        if base_dir is not None and not os.path.isabs(d["path"]):
            d["path"] = str(Path(base_dir) / d["path"])
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "DatasetConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                d = json.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path} is not valid JSON: {e}") from None
        return cls.from_dict(d, Path(path).parent)

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


@dataclass(frozen=True)
class EncodedDataset:
    features: np.ndarray
    labels: np.ndarray
    sensitive: dict
    ids: tuple
    feature_names: tuple = ()
    numeric_idx: tuple = ()

    def __post_init__(self):
        n = self.labels.shape[0]
        if self.features.shape[0] != n or len(self.ids) != n:
            raise ConfigError("feature, label and id row counts disagree")
        for name, col in self.sensitive.items():
            if len(col) != n:
                raise ConfigError(f"sensitive column {name!r} has the wrong length")

    def __len__(self):
        return self.labels.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, idx) -> "EncodedDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return EncodedDataset(
            self.features[idx],
            self.labels[idx],
            {k: np.asarray(v)[idx] for k, v in self.sensitive.items()},
            tuple(self.ids[i] for i in idx),
            self.feature_names,
            self.numeric_idx,
        )

    def with_features(self, features) -> "EncodedDataset":
        return replace(self, features=np.asarray(features, dtype=np.float64))


def _apply_filters(df, filters):
    for col, rule in filters.items():
        if col not in df.columns:
            raise ConfigError(f"filter refers to unknown column {col!r}")
        if "keep" in rule:
            keep = {str(v) for v in rule["keep"]}
            df = df[df[col].astype(str).isin(keep)]
        if "min_share" in rule:
            share = df[col].astype(str).value_counts(normalize=True)
            retained = set(share[share >= float(rule["min_share"])].index)
            dropped = sorted(set(share.index) - retained)
            if dropped:
                log.info("filter %s: dropping categories %s", col, dropped)
            df = df[df[col].astype(str).isin(retained)]
    return df


def load_dataset(cfg: DatasetConfig) -> EncodedDataset:
    """Read, filter and one-hot encode a CSV dataset.

    Numeric columns are left on their original scale here; :func:`split`
    standardises them with training-portion statistics.
    """
    import pandas as pd

    try:
        df = pd.read_csv(cfg.path, dtype=str, na_values=list(cfg.na_values),
                         skipinitialspace=True, keep_default_na=True)
    except OSError as e:
        raise ConfigError(f"cannot read dataset {cfg.path}: {e}") from None
    df.columns = [c.strip() for c in df.columns]
    used = [cfg.label, *cfg.sensitive, *cfg.categorical, *cfg.numeric]
    if cfg.id_column:
        used.append(cfg.id_column)
    missing = [c for c in dict.fromkeys(used) if c not in df.columns]
    if missing:
        raise ConfigError(f"unknown column(s): {', '.join(missing)}")
    df = df[list(dict.fromkeys(used))]
    for c in df.columns:
        df[c] = df[c].str.strip()
    before = len(df)
    df = df.dropna()
    if len(df) < before:
        log.info("dropped %d rows with missing values", before - len(df))
    df = _apply_filters(df, cfg.filters)
    if df.empty:
        raise ConfigError("no rows left after filtering")
    df = df.reset_index(drop=True)

    cat_cols = list(cfg.categorical)
    if cfg.sensitive_as_features:
        cat_cols += [c for c in cfg.sensitive if c not in cat_cols and c not in cfg.numeric]
    blocks, names, numeric_idx = [], [], []
    for col in cfg.numeric:
        try:
            vals = df[col].astype(float).to_numpy()
        except ValueError:
            raise ConfigError(f"numeric column {col!r} holds non-numeric values") from None
        numeric_idx.append(len(names))
        blocks.append(vals[:, None])
        names.append(col)
    for col in cat_cols:
        cats = sorted(df[col].unique())
        for cat in cats[1:]:
            blocks.append((df[col] == cat).to_numpy(dtype=np.float64)[:, None])
            names.append(f"{col}={cat}")
    n = len(df)
    features = np.hstack(blocks) if blocks else np.zeros((n, 0))
    labels = (df[cfg.label] == cfg.positive_label).to_numpy(dtype=np.int64)
    ids = tuple(df[cfg.id_column]) if cfg.id_column else tuple(str(i) for i in range(n))
    sensitive = {c: df[c].to_numpy(dtype=object) for c in cfg.sensitive}
    log.info("loaded %d records, %d encoded features", n, features.shape[1])
    return EncodedDataset(features, labels, sensitive, ids, tuple(names), tuple(numeric_idx))


def split_indices(n: int, fraction: float, seed: int, repeat_index: int):
    """Deterministic ``(train_idx, test_idx)``; train size is ``floor(n * fraction)``."""
    rng = np.random.default_rng([int(seed), int(repeat_index)])
    perm = rng.permutation(n)
    n_train = int(math.floor(n * fraction + 1e-9))
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def standardize(train: EncodedDataset, *others: EncodedDataset):
    """Scale numeric columns to mean 0 / sd 1 using ``train`` statistics only."""
    idx = list(train.numeric_idx)
    if not idx:
        return (train, *others)
    mean = train.features[:, idx].mean(axis=0)
    sd = train.features[:, idx].std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    out = []
    for ds in (train, *others):
        x = ds.features.copy()
        x[:, idx] = (x[:, idx] - mean) / sd
        out.append(ds.with_features(x))
    return tuple(out)


def split(ds: EncodedDataset, cfg: DatasetConfig, repeat_index: int, fraction=None, standardize_numeric=True):
    """Train/test split number ``repeat_index`` of ``cfg.repeats``.

    Call again on the training part (with ``standardize_numeric=False`` on the
    outer call) for a nested train/validation split.
    """
    if not 0 <= repeat_index < cfg.repeats:
        raise ConfigError(f"repeat_index {repeat_index} outside 0..{cfg.repeats - 1}")
    frac = cfg.split_fraction if fraction is None else fraction
    tr, te = split_indices(len(ds), frac, cfg.seed, repeat_index)
    train, test = ds.subset(tr), ds.subset(te)
    if standardize_numeric:
        train, test = standardize(train, test)
    return train, test


def packaged_config(name: str) -> Path:
    """Path of a sample config shipped with the package (``adult`` or ``compas``)."""
    from importlib.resources import files

    return Path(str(files("ineqfair") / "configs" / f"{name}.json"))
