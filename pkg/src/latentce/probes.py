"""Linear probes on semantic latents: hyperplanes, signed distance, calibration.

The grading pipeline is: fit a binary hyperplane on labeled latents, measure
each latent's signed distance to it, calibrate distance to a continuous
grade, then round to the ordinal scale. The calibration is invertible, which
is what makes grade-targeted latent edits possible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CalibrationRejectedError,
    DegenerateDataError,
    DomainError,
    OutOfRangeError,
    ShapeError,
)

GRADE_MAX = 3

MEANS_OF_EXTREMES = "means-of-extremes"
LEAST_SQUARES = "least-squares"
POLYNOMIAL = "polynomial"
CALIBRATION_MODES = (MEANS_OF_EXTREMES, LEAST_SQUARES, POLYNOMIAL)


@dataclass
class Hyperplane:
    n: np.ndarray
    b: float

    def __post_init__(self):
        self.n = np.asarray(self.n, dtype=np.float64)
        self.b = float(self.b)
        if np.linalg.norm(self.n) == 0.0:
            raise DomainError("hyperplane normal must be non-zero")

    def unit_normal(self) -> np.ndarray:
        return self.n / np.linalg.norm(self.n)


def signed_distance(w: np.ndarray, plane: Hyperplane):
    """(n.w + b) / ||n||; w may be a single vector or a (k, D) batch."""
    w = np.asarray(w, dtype=np.float64)
    if w.shape[-1] != plane.n.shape[0]:
        raise ShapeError(f"latent dim {w.shape[-1]} != hyperplane dim {plane.n.shape[0]}")
    d = (w @ plane.n + plane.b) / np.linalg.norm(plane.n)
    return float(d) if w.ndim == 1 else d


def _check_two_classes(labels: np.ndarray) -> np.ndarray:
    classes = np.unique(labels)
    if not np.array_equal(classes, [0, 1]):
        raise DegenerateDataError(f"need both classes 0 and 1, got {classes.tolist()}")
    return np.where(labels == 1, 1.0, -1.0)


def fit_svm(
    latents: np.ndarray,
    labels: np.ndarray,
    lam: float = 1e-3,
    epochs: int = 200,
    seed: int = 0,
) -> Hyperplane:
    """Linear SVM by full-batch subgradient descent on the regularized hinge loss.

    Objective: lam * ||n||^2 / 2 + mean(max(0, 1 - y (n.w + b))), y in {-1, +1};
    step size 1/(lam * (epoch + 1)); zero initialization, so the fit is fully
    deterministic and `seed` has no effect on the result.
    """
    x = np.asarray(latents, dtype=np.float64)
    y = _check_two_classes(np.asarray(labels))
    n = np.zeros(x.shape[1])
    b = 0.0
    for epoch in range(epochs):
        margins = y * (x @ n + b)
        violating = margins < 1.0
        grad_n = lam * n - (y[violating, None] * x[violating]).sum(axis=0) / len(y)
        grad_b = -y[violating].sum() / len(y)
        step = 1.0 / (lam * (epoch + 1))
        n -= step * grad_n
        b -= step * grad_b
    if np.linalg.norm(n) == 0.0:
        raise DegenerateDataError("SVM converged to a zero normal")
    return Hyperplane(n, b)


def fit_logistic(
    latents: np.ndarray,
    labels: np.ndarray,
    lam: float = 1e-4,
    epochs: int = 500,
    lr: float = 1.0,
) -> Hyperplane:
    """L2-regularized logistic regression by full-batch gradient descent.

    The step size adapts to the data scale (Lipschitz bound of the logistic
    loss) so the fixed-epoch budget converges on unstandardized latents.
    """
    x = np.asarray(latents, dtype=np.float64)
    y01 = np.asarray(labels, dtype=np.float64)
    _check_two_classes(np.asarray(labels))
    k, d = x.shape
    xb = np.hstack([x, np.ones((k, 1))])
    # Hessian bound: ||X||^2 / (4k) + lam.
    lipschitz = float(np.linalg.norm(xb, 2) ** 2) / (4.0 * k) + lam
    step = lr / lipschitz
    theta = np.zeros(d + 1)
    reg = np.ones(d + 1)
    reg[-1] = 0.0  # bias unregularized
    for _ in range(epochs):
        p = 1.0 / (1.0 + np.exp(-(xb @ theta)))
        grad = xb.T @ (p - y01) / k + lam * reg * theta
        theta -= step * grad
    if np.linalg.norm(theta[:-1]) == 0.0:
        raise DegenerateDataError("logistic fit converged to a zero normal")
    return Hyperplane(theta[:-1], theta[-1])


def logistic_gradient_norm(plane: Hyperplane, latents, labels, lam: float = 1e-4) -> float:
    """Norm of the logistic objective gradient at the fitted plane (diagnostic)."""
    x = np.asarray(latents, dtype=np.float64)
    y01 = np.asarray(labels, dtype=np.float64)
    k = x.shape[0]
    xb = np.hstack([x, np.ones((k, 1))])
    theta = np.append(plane.n, plane.b)
    reg = np.ones(theta.size)
    reg[-1] = 0.0
    p = 1.0 / (1.0 + np.exp(-(xb @ theta)))
    grad = xb.T @ (p - y01) / k + lam * reg * theta
    return float(np.linalg.norm(grad))


@dataclass
class Calibration:
    mode: str
    degree: int
    coeffs: np.ndarray  # c_0..c_degree, score(d) = sum c_k d^k
    gmax: float = float(GRADE_MAX)
    d_range: tuple = (0.0, 0.0)  # distance range observed at fit time
    grades_used: list = field(default_factory=list)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if self.mode not in CALIBRATION_MODES:
            raise DomainError(f"unknown calibration mode {self.mode!r}")
        if self.mode in (MEANS_OF_EXTREMES, LEAST_SQUARES):
            if self.degree != 1 or self.coeffs[1] == 0.0:
                raise CalibrationRejectedError("linear calibration needs degree 1, c_1 != 0")

    def score(self, d):
        d = np.asarray(d, dtype=np.float64)
        out = np.polyval(self.coeffs[::-1], d)
        return float(out) if out.ndim == 0 else out


def fit_calibration(distances, grades, mode: str = MEANS_OF_EXTREMES, degree: int = 1,
                    gmax: float = float(GRADE_MAX)) -> Calibration:
    """Fit a monotone map from signed distance to continuous grade."""
    d = np.asarray(distances, dtype=np.float64)
    g = np.asarray(grades, dtype=np.float64)
    if d.shape != g.shape or d.ndim != 1:
        raise ShapeError("distances and grades must be equal-length 1-D arrays")
    grades_used = sorted(set(np.round(g, 9).tolist()))
    d_range = (float(d.min()), float(d.max()))

    if mode == MEANS_OF_EXTREMES:
        lo, hi = g.min(), g.max()
        if not (np.any(g == 0.0) and np.any(g == gmax)):
            raise DegenerateDataError("means-of-extremes needs grade 0 and grade G_max samples")
        d0 = float(d[g == 0.0].mean())
        dmax = float(d[g == gmax].mean())
        if dmax == d0:
            raise DegenerateDataError("extreme-grade mean distances coincide")
        c1 = gmax / (dmax - d0)
        c0 = -c1 * d0
        return Calibration(mode, 1, [c0, c1], gmax, d_range, [0.0, float(gmax)])

    if mode not in (LEAST_SQUARES, POLYNOMIAL):
        raise DomainError(f"unknown calibration mode {mode!r}")
    deg = 1 if mode == LEAST_SQUARES else int(degree)
    if deg < 1:
        raise DomainError("polynomial degree must be >= 1")
    if len(set(np.round(g, 9).tolist())) < deg + 1:
        raise DegenerateDataError(f"degree-{deg} fit needs at least {deg + 1} distinct grades")
    vander = np.vander(d, deg + 1, increasing=True)
    coeffs, *_ = np.linalg.lstsq(vander, g, rcond=None)
    cal = Calibration(mode, deg, coeffs, gmax, d_range, grades_used)
    _check_monotone(cal)
    return cal


def _check_monotone(cal: Calibration) -> None:
    lo, hi = cal.d_range
    if hi <= lo:
        raise CalibrationRejectedError("degenerate fitted distance range")
    grid = np.linspace(lo, hi, 1000)
    values = cal.score(grid)
    diffs = np.diff(values)
    if not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise CalibrationRejectedError(
            "fitted polynomial is not strictly monotone over the observed distance range"
        )


def predict_grade(w: np.ndarray, plane: Hyperplane, cal: Calibration) -> tuple[float, int]:
    """Continuous score plus ordinal grade (round half away from zero, clamped)."""
    score = cal.score(signed_distance(w, plane))
    clamped = min(max(score, 0.0), cal.gmax)
    grade = int(np.floor(clamped + 0.5)) if clamped >= 0 else -int(np.floor(-clamped + 0.5))
    return float(score), grade


def invert_calibration(cal: Calibration, target: float) -> float:
    """The unique distance d with score(d) == target."""
    if cal.degree == 1:
        return float((target - cal.coeffs[0]) / cal.coeffs[1])
    lo, hi = cal.d_range
    s_lo, s_hi = cal.score(lo), cal.score(hi)
    low, high = (s_lo, s_hi) if s_lo < s_hi else (s_hi, s_lo)
    if not (low <= target <= high):
        raise OutOfRangeError(
            f"target {target} outside calibrated score range [{low:.6g}, {high:.6g}]"
        )
    increasing = s_lo < s_hi
    a, b = lo, hi
    while b - a > 1e-10:
        mid = 0.5 * (a + b)
        if (cal.score(mid) < target) == increasing:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def save_probe(path, plane: Hyperplane, cal: Calibration | None = None) -> None:
    """Probe artifact JSON; reals carry 17 significant digits for exact round-trips."""
    payload = {
        "n": [format(v, ".17g") for v in plane.n],
        "b": format(plane.b, ".17g"),
        "cal": None
        if cal is None
        else {
            "mode": cal.mode,
            "degree": cal.degree,
            "coeffs": [format(v, ".17g") for v in cal.coeffs],
            "gmax": cal.gmax,
            "d_range": [format(v, ".17g") for v in cal.d_range],
            "grades_used": cal.grades_used,
        },
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)


def load_probe(path) -> tuple[Hyperplane, Calibration | None]:
    with open(path, encoding="utf-8") as f:
        payload = json.load(f)
    plane = Hyperplane(np.array([float(v) for v in payload["n"]]), float(payload["b"]))
    c = payload.get("cal")
    if c is None:
        return plane, None
    cal = Calibration(
        mode=c["mode"],
        degree=int(c["degree"]),
        coeffs=np.array([float(v) for v in c["coeffs"]]),
        gmax=float(c["gmax"]),
        d_range=tuple(float(v) for v in c["d_range"]),
        grades_used=list(c.get("grades_used", [])),
    )
    return plane, cal
