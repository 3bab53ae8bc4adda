"""Small fixtures: the ten-person example, the two-group FPR scenario, and
synthetic datasets for constrained training."""
from __future__ import annotations

import numpy as np

from .benefit import PredictionSet
from .dataio import EncodedDataset

FIG1_IDS = tuple(f"i{k}" for k in range(1, 11))
FIG1_GROUPS = ("g1", "g1", "g2", "g2", "g2", "g2", "g3", "g3", "g3", "g3")
FIG1_Y = (1, 0, 0, 1, 0, 0, 1, 0, 1, 1)
FIG1_PRED = {
    "C1": (1, 0, 0, 0, 1, 1, 1, 0, 1, 0),
    "C2": (0, 1, 1, 0, 0, 0, 0, 1, 1, 1),
}


def figure1_predictions(classifier="C1") -> PredictionSet:
    """Ten individuals in three groups with true labels and one classifier's labels."""
    return PredictionSet.from_arrays(
        FIG1_Y, FIG1_PRED[classifier], ids=FIG1_IDS, attrs={"group": list(FIG1_GROUPS)}
    )


def fpr_scenario(fpr_a, fpr_b, n_negative=100, share_a=0.7, n_positive=20) -> PredictionSet:
    """Two groups holding ``share_a`` / ``1 - share_a`` of the negatives, with given FPRs.

    Positives (all correctly accepted) are added to both groups; the
    equal-FPR benefit scheme ignores them.
    """
    n_a = int(round(n_negative * share_a))
    n_b = n_negative - n_a
    fp_a, fp_b = int(round(fpr_a * n_a)), int(round(fpr_b * n_b))
    y, yhat, grp = [], [], []
    for g, n_g, fp in (("A", n_a, fp_a), ("B", n_b, fp_b)):
        y += [0] * n_g
        yhat += [1] * fp + [0] * (n_g - fp)
        grp += [g] * n_g
    half = n_positive // 2
    for g, k in (("A", half), ("B", n_positive - half)):
        y += [1] * k
        yhat += [1] * k
        grp += [g] * k
    ids = [f"p{k:04d}" for k in range(len(y))]
    return PredictionSet.from_arrays(y, yhat, ids=ids, attrs={"group": grp})


def planted_disparity(n=4000, seed=0, bias=1.5, proxy_noise=0.5) -> EncodedDataset:
    """Two groups whose positives look worse on the main feature.

    ``merit`` drives the label for everyone, but the recorded score
    understates it by ``bias`` for the non-reference group, so an
    unconstrained classifier rejects more of that group's positives.
    A noisy group proxy is available as a second feature.
    """
    rng = np.random.default_rng(seed)
    z = rng.random(n) < 0.5
    merit = rng.normal(size=n)
    y = (merit + 0.5 * rng.normal(size=n) > 0).astype(np.int64)
    recorded = merit - bias * z + 0.3 * rng.normal(size=n)
    proxy = z + proxy_noise * rng.normal(size=n)
    x = np.column_stack([recorded, proxy])
    x = (x - x.mean(axis=0)) / x.std(axis=0)
    race = np.where(z, "Other", "White").astype(object)
    ids = tuple(f"s{k:05d}" for k in range(n))
    return EncodedDataset(x, y, {"race": race}, ids, ("recorded", "proxy"), ())


def all_fair(n=1000, seed=0) -> EncodedDataset:
    """Every row appears once per group with identical features and label."""
    rng = np.random.default_rng(seed)
    half = n // 2
    x = rng.normal(size=(half, 2))
    y = (x[:, 0] + 0.7 * rng.normal(size=half) > 0).astype(np.int64)
    xs = np.vstack([x, x])
    ys = np.concatenate([y, y])
    race = np.array(["White"] * half + ["Other"] * half, dtype=object)
    ids = tuple(f"f{k:05d}" for k in range(2 * half))
    return EncodedDataset(xs, ys, {"race": race}, ids, ("x0", "x1"), ())
