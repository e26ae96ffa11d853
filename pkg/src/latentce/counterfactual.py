"""Latent-space counterfactuals: reflection, grade-targeted shifts, sweeps,
and the full image-to-image generation pipeline.

Every edit moves the latent along the hyperplane's unit normal; the decoded
counterfactual reuses the ORIGINAL stochastic latent, so only the
semantically steered content changes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import dae
from .errors import ConfigError, DomainError
from .probes import Calibration, Hyperplane, invert_calibration, predict_grade, signed_distance

MODE_REFLECT = "reflect"
MODE_TARGET = "target-grade"
MODE_SWEEP = "sweep"
MODES = (MODE_REFLECT, MODE_TARGET, MODE_SWEEP)


@dataclass
class CounterfactualRequest:
    mode: str
    sample_id: int | None = None
    image: np.ndarray | None = None
    target_grade: float | None = None
    sweep_grades: list | None = None
    allow_extrapolation: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"unknown counterfactual mode {self.mode!r}")
        if self.sample_id is None and self.image is None:
            raise DomainError("request needs a sample id or a raw image")
        if self.mode == MODE_TARGET and self.target_grade is None:
            raise DomainError("target-grade mode requires target_grade")
        if self.mode == MODE_SWEEP and (not self.sweep_grades or len(self.sweep_grades) < 2):
            raise DomainError("sweep mode requires at least 2 grades")


@dataclass
class CounterfactualResult:
    original_latent: np.ndarray
    edited_latents: list
    requested_grades: list
    images: list  # decoded per edited latent, [0,1] float arrays
    reconstruction: np.ndarray | None
    original_distance: float
    edited_distances: list
    original_score: float
    edited_scores: list

    def to_json(self) -> str:
        """Scores and distances only; frames are written separately as PGM files."""
        return json.dumps(
            {
                "requested_grades": self.requested_grades,
                "original_distance": self.original_distance,
                "original_score": self.original_score,
                "edited_distances": self.edited_distances,
                "edited_scores": self.edited_scores,
                "n_frames": len(self.images),
            },
            sort_keys=True,
        )


def reflect(w: np.ndarray, plane: Hyperplane) -> np.ndarray:
    """Householder reflection across the decision boundary."""
    w = np.asarray(w, dtype=np.float64)
    return w - 2.0 * signed_distance(w, plane) * plane.unit_normal()


def shift_to_grade(w: np.ndarray, plane: Hyperplane, cal: Calibration, target: float) -> np.ndarray:
    """Move w along the unit normal so its calibrated score equals target."""
    w = np.asarray(w, dtype=np.float64)
    delta = invert_calibration(cal, target) - signed_distance(w, plane)
    return w + delta * plane.unit_normal()


def sweep(w: np.ndarray, plane: Hyperplane, cal: Calibration, grades) -> list[np.ndarray]:
    return [shift_to_grade(w, plane, cal, float(g)) for g in grades]


def sweep_uncalibrated(w: np.ndarray, plane: Hyperplane, offsets) -> list[np.ndarray]:
    """Raw distance offsets along the normal, no calibration involved."""
    w = np.asarray(w, dtype=np.float64)
    unit = plane.unit_normal()
    return [w + float(o) * unit for o in offsets]


def _clamp_grade(grade: float, gmax: float, allow_extrapolation: bool) -> float:
    if allow_extrapolation:
        return float(grade)
    return float(min(max(grade, 0.0), gmax))


def generate_ce(
    model: dae.DaeModel,
    plane: Hyperplane,
    cal: Calibration,
    request: CounterfactualRequest,
    image: np.ndarray | None = None,
    include_reconstruction: bool = True,
) -> CounterfactualResult:
    """Encode the source, edit its latent, decode each edit with the original x_T."""
    if model is None or plane is None or cal is None:
        raise ConfigError("generate_ce needs a trained model, probe, and calibration")
    source = request.image if request.image is not None else image
    if source is None:
        raise ConfigError("no source image resolved for the request")

    w, x_T = dae.encode(model, source)
    w64 = w.astype(np.float64)

    if request.mode == MODE_REFLECT:
        edited = [reflect(w64, plane)]
        grades = [predict_grade(edited[0], plane, cal)[0]]
    elif request.mode == MODE_TARGET:
        g = _clamp_grade(request.target_grade, cal.gmax, request.allow_extrapolation)
        edited = [shift_to_grade(w64, plane, cal, g)]
        grades = [g]
    else:
        grades = [
            _clamp_grade(g, cal.gmax, request.allow_extrapolation) for g in request.sweep_grades
        ]
        edited = sweep(w64, plane, cal, grades)

    # Decode all frames in one batch against the SAME stochastic latent.
    z_batch = np.stack([e.astype(np.float32) for e in edited])
    x_T_batch = x_T[None].repeat(len(edited), 1, 1, 1)
    images = list(dae.decode(model, z_batch, x_T_batch))
    reconstruction = dae.decode(model, w, x_T) if include_reconstruction else None

    original_score = predict_grade(w64, plane, cal)[0]
    return CounterfactualResult(
        original_latent=w64,
        edited_latents=edited,
        requested_grades=[float(g) for g in grades],
        images=images,
        reconstruction=reconstruction,
        original_distance=signed_distance(w64, plane),
        edited_distances=[signed_distance(e, plane) for e in edited],
        original_score=original_score,
        edited_scores=[predict_grade(e, plane, cal)[0] for e in edited],
    )
