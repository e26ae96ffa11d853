"""Evaluation metrics: ROC-AUC, F1, MAE, PSNR/SSIM, latent Frechet distance, PCA.

PSNR/SSIM stand in for perceptual reconstruction metrics, and the Frechet
distance is computed on semantic latents rather than pretrained features;
reports must label these as substitutes, not comparable to published numbers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import uniform_filter

from .errors import NumericError, ShapeError, UndefinedMetricError

PSNR_IDENTICAL = 99.0


@dataclass
class EvalReport:
    task: str
    n_samples: int
    auc: float | None = None
    f1_binary: float | None = None
    f1_macro: float | None = None
    mae: float | None = None
    confusion: list | None = None
    extras: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "task": self.task,
            "n_samples": self.n_samples,
            "auc": self.auc,
            "f1_binary": self.f1_binary,
            "f1_macro": self.f1_macro,
            "mae": self.mae,
            "confusion": self.confusion,
        }
        payload.update(self.extras)
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_table(self) -> str:
        rows = [("task", self.task), ("n_samples", self.n_samples)]
        for name in ("auc", "f1_binary", "f1_macro", "mae"):
            value = getattr(self, name)
            if value is not None:
                rows.append((name, f"{value:.4f}"))
        for key in sorted(self.extras):
            value = self.extras[key]
            rows.append((key, f"{value:.4f}" if isinstance(value, float) else value))
        width = max(len(str(k)) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def roc_auc(scores, labels) -> float:
    """Mann-Whitney AUC: P(random positive outranks random negative), ties 0.5."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ShapeError("scores and labels must have equal length")
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    if pos.size == 0 or neg.size == 0:
        raise UndefinedMetricError("ROC-AUC needs both classes present")
    # Rank-sum form with midranks for ties.
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.size, dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    rank_sum = ranks[labels == 1].sum()
    u = rank_sum - pos.size * (pos.size + 1) / 2.0
    return float(u / (pos.size * neg.size))


def f1(predictions, labels, averaging: str = "binary", classes=None) -> float:
    """F1 of the positive class, or unweighted macro mean over classes.

    Macro mode averages over `classes` when given (a class with no support
    contributes 0), otherwise over the union of observed classes.
    """
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.size == 0:
        raise UndefinedMetricError("F1 of empty input is undefined")
    if predictions.shape != labels.shape:
        raise ShapeError("predictions and labels must have equal length")

    def _binary_f1(pred_pos, true_pos_mask):
        tp = np.sum(pred_pos & true_pos_mask)
        fp = np.sum(pred_pos & ~true_pos_mask)
        fn = np.sum(~pred_pos & true_pos_mask)
        denom = 2 * tp + fp + fn
        return 0.0 if denom == 0 else 2.0 * tp / denom

    if averaging == "binary":
        return float(_binary_f1(predictions == 1, labels == 1))
    if averaging == "macro":
        if classes is None:
            classes = np.union1d(np.unique(predictions), np.unique(labels))
        scores = [_binary_f1(predictions == c, labels == c) for c in classes]
        return float(np.mean(scores))
    raise ValueError(f"unknown averaging {averaging!r}")


def mae(predicted, true) -> float:
    predicted = np.asarray(predicted, dtype=np.float64)
    true = np.asarray(true, dtype=np.float64)
    if predicted.size == 0:
        raise UndefinedMetricError("MAE of empty input is undefined")
    if predicted.shape != true.shape:
        raise ShapeError("predicted and true must have equal length")
    return float(np.mean(np.abs(predicted - true)))


def confusion_matrix(predicted, true, n_classes: int) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    for p, t in zip(np.asarray(predicted, dtype=int), np.asarray(true, dtype=int)):
        cm[t, p] += 1
    return cm


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for images in [0, 1]; 99.0 when identical."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_IDENTICAL
    return float(min(PSNR_IDENTICAL, -10.0 * np.log10(mse)))


def ssim(a: np.ndarray, b: np.ndarray, window: int = 8) -> float:
    """Structural similarity with uniform windows, k1=0.01, k2=0.03, L=1."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")
    c1, c2 = 0.01**2, 0.03**2
    mu_a = uniform_filter(a, window)
    mu_b = uniform_filter(b, window)
    var_a = uniform_filter(a * a, window) - mu_a**2
    var_b = uniform_filter(b * b, window) - mu_b**2
    cov = uniform_filter(a * b, window) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def _psd_sqrt(m: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    vals, vecs = np.linalg.eigh(m)
    if np.min(vals) < -tol:
        raise NumericError(f"matrix not PSD: min eigenvalue {np.min(vals):.3e}")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def gaussian_summary(latents: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    latents = np.asarray(latents, dtype=np.float64)
    mu = latents.mean(axis=0)
    sigma = np.cov(latents, rowvar=False)
    return mu, sigma


def latent_frechet(a: np.ndarray, b: np.ndarray) -> float:
    """Frechet distance between Gaussian fits of two latent sets.

    ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}), with the matrix
    square root taken via the symmetric form S_a^{1/2} S_b S_a^{1/2}.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ShapeError("latent sets must be 2-D with matching dimensionality")
    d = a.shape[1]
    if a.shape[0] <= d or b.shape[0] <= d:
        raise UndefinedMetricError(f"need more than {d} samples per set")
    mu_a, sig_a = gaussian_summary(a)
    mu_b, sig_b = gaussian_summary(b)
    root_a = _psd_sqrt(sig_a)
    inner = root_a @ sig_b @ root_a
    inner = 0.5 * (inner + inner.T)
    vals = np.linalg.eigvalsh(inner)
    if np.min(vals) < -1e-8 * max(1.0, np.max(np.abs(vals))):
        raise NumericError(
            f"cross-covariance eigenvalues went negative (min {np.min(vals):.3e}); "
            f"cond(S_a)={np.linalg.cond(sig_a):.3e}, cond(S_b)={np.linalg.cond(sig_b):.3e}"
        )
    trace_sqrt = np.sum(np.sqrt(np.clip(vals, 0.0, None)))
    diff = mu_a - mu_b
    return float(diff @ diff + np.trace(sig_a) + np.trace(sig_b) - 2.0 * trace_sqrt)


def pca_project(latents: np.ndarray, k: int = 2):
    """Project onto the top-k principal axes.

    Returns (coords, explained_variance_ratio, warning_or_None). Sign
    convention: the largest-magnitude loading of each axis is positive.
    """
    latents = np.asarray(latents, dtype=np.float64)
    n = latents.shape[0]
    if n < k + 1:
        raise UndefinedMetricError(f"PCA with k={k} needs at least {k + 1} samples")
    centered = latents - latents.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    vals = np.clip(vals[order], 0.0, None)
    vecs = vecs[:, order]
    warning = None
    rank = int(np.sum(vals > 1e-12 * max(vals[0], 1e-300)))
    if rank < k:
        warning = f"data rank {rank} is below k={k}"
    axes = vecs[:, :k].copy()
    for j in range(k):
        pivot = np.argmax(np.abs(axes[:, j]))
        if axes[pivot, j] < 0:
            axes[:, j] = -axes[:, j]
    coords = centered @ axes
    total = float(np.sum(vals))
    ratio = vals[:k] / total if total > 0 else np.zeros(k)
    return coords, ratio, warning
