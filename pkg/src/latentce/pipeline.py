"""Glue between corpus, DAE artifacts, probes, and metrics.

Holds the labeling conventions: the binary positive class is grades {2, 3},
grade-1 samples are excluded from probe training, and calibration uses the
ordinal grades of the calibrate split.
"""

from __future__ import annotations

import numpy as np

from . import dae, metrics, probes
from .corpus import GRADE_MAX, SyntheticSample, by_split
from .errors import DegenerateDataError


def latents_by_id(records) -> dict[int, np.ndarray]:
    return {sid: z for sid, z in records}


def probe_training_set(samples: list[SyntheticSample], zmap: dict[int, np.ndarray]):
    """(X, y) for binary probe training from the train-probe split.

    Uses only samples that carry a binary label, and drops grade-1 samples
    (borderline positives are too noisy to anchor the hyperplane).
    """
    xs, ys = [], []
    for s in by_split(samples, "train-probe"):
        if s.binary_label is None or s.ordinal_grade == 1:
            continue
        xs.append(zmap[s.id])
        ys.append(s.binary_label)
    if not xs:
        raise DegenerateDataError("no labeled probe training samples")
    return np.stack(xs), np.asarray(ys)


def fit_probe(samples, zmap, kind: str = "svm", seed: int = 0) -> probes.Hyperplane:
    x, y = probe_training_set(samples, zmap)
    if kind == "svm":
        return probes.fit_svm(x, y, seed=seed)
    if kind == "logistic":
        return probes.fit_logistic(x, y)
    raise ValueError(f"unknown probe kind {kind!r}")


def calibration_data(samples, zmap, plane: probes.Hyperplane, grades_for_fit):
    """(distances, grades) from the calibrate split, restricted to grades_for_fit."""
    ds, gs = [], []
    for s in by_split(samples, "calibrate"):
        if s.ordinal_grade not in grades_for_fit:
            continue
        ds.append(probes.signed_distance(zmap[s.id], plane))
        gs.append(float(s.ordinal_grade))
    return np.asarray(ds), np.asarray(gs)


def fit_calibration_for(samples, zmap, plane, mode: str = probes.MEANS_OF_EXTREMES,
                        degree: int = 1) -> probes.Calibration:
    if mode == probes.MEANS_OF_EXTREMES:
        grades_for_fit = (0, GRADE_MAX)
    else:
        grades_for_fit = (0, 2, 3)
    d, g = calibration_data(samples, zmap, plane, grades_for_fit)
    return probes.fit_calibration(d, g, mode=mode, degree=degree)


def embed_split(model: dae.DaeModel, samples, split: str) -> dict[int, np.ndarray]:
    return latents_by_id(dae.embed_corpus(model, samples, split))


def evaluate(model: dae.DaeModel, samples, plane, cal, recon_count: int = 16) -> metrics.EvalReport:
    """Held-out evaluation on the test split: detection, grading, reconstruction."""
    test = by_split(samples, "test")
    zmap = embed_split(model, samples, "test")
    dists = np.array([probes.signed_distance(zmap[s.id], plane) for s in test])
    binary = np.array([1 if s.ordinal_grade >= 2 else 0 for s in test])
    true_grades = np.array([s.ordinal_grade for s in test])

    auc = metrics.roc_auc(dists, binary)
    pred_binary = (dists > 0).astype(int)
    f1_binary = metrics.f1(pred_binary, binary, "binary")

    pred_grades = np.array([probes.predict_grade(zmap[s.id], plane, cal)[1] for s in test])
    f1_macro = metrics.f1(pred_grades, true_grades, "macro", classes=range(GRADE_MAX + 1))
    grade_mae = metrics.mae(pred_grades, true_grades)
    confusion = metrics.confusion_matrix(pred_grades, true_grades, GRADE_MAX + 1)

    extras = {}
    if recon_count > 0:
        subset = test[:recon_count]
        images = np.stack([s.image for s in subset])
        z, x_T = dae.encode(model, images)
        recon = dae.decode(model, z, x_T)
        extras["psnr_mean"] = float(np.mean([metrics.psnr(a.image, b)
                                             for a, b in zip(subset, recon)]))
        extras["ssim_mean"] = float(np.mean([metrics.ssim(a.image, b)
                                             for a, b in zip(subset, recon)]))
    train_z = embed_split(model, samples, "train-probe")
    a = np.stack(list(train_z.values()))
    b = np.stack([zmap[s.id] for s in test])
    if min(a.shape[0], b.shape[0]) > a.shape[1]:
        extras["latent_frechet"] = metrics.latent_frechet(a, b)
    extras["note"] = (
        "psnr/ssim and latent_frechet are desk-scale substitutes for LPIPS/FID; "
        "values are not comparable to published numbers"
    )
    return metrics.EvalReport(
        task="synthetic-grading",
        n_samples=len(test),
        auc=auc,
        f1_binary=f1_binary,
        f1_macro=f1_macro,
        mae=grade_mae,
        confusion=confusion.tolist(),
        extras=extras,
    )
