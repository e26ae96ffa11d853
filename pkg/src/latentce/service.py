"""HTTP service exposing encode, grading, counterfactual, and projection.

One model per process, loaded once and treated as immutable. Long-running
generation requests pass through a bounded FIFO worker gate (default 2
concurrent jobs). Every non-2xx response body is a single ApiError object:
{"code", "message", "detail"}.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import corpus, counterfactual, dae, metrics, pipeline, probes
from .errors import DomainError, LatentCeError, OutOfRangeError

GMAX = float(corpus.GRADE_MAX)


def _api_error(status: int, code: str, message: str, detail: str = "") -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "detail": detail},
    )


@dataclass
class ServiceContext:
    samples: list = field(default_factory=list)
    model: dae.DaeModel | None = None
    plane: probes.Hyperplane | None = None
    cal: probes.Calibration | None = None
    max_workers: int = 2
    _gate: threading.Semaphore = None
    _projection_cache: dict = field(default_factory=dict)

    def __post_init__(self):
        self._gate = threading.Semaphore(self.max_workers)
        self.by_id = {s.id: s for s in self.samples}

    @classmethod
    def load(cls, manifest: Path, checkpoint: Path, probe: Path, max_workers: int = 2):
        samples = corpus.load_corpus(manifest)
        model = dae.load_checkpoint(checkpoint)
        plane, cal = probes.load_probe(probe)
        return cls(samples=samples, model=model, plane=plane, cal=cal,
                   max_workers=max_workers)

    @property
    def ready(self) -> bool:
        return self.model is not None and self.plane is not None and self.cal is not None


class EncodeBody(BaseModel):
    id: int | None = None
    image: list[float] | None = None
    dims: list[int] | None = None


class CounterfactualBody(BaseModel):
    id: int | None = None
    image: list[float] | None = None
    dims: list[int] | None = None
    mode: str
    target_grade: float | None = None
    sweep_grades: list[float] | None = None
    allow_extrapolation: bool = False


def _flat(image: np.ndarray) -> dict:
    return {"image": [float(v) for v in image.ravel()], "dims": list(image.shape)}


def create_app(ctx: ServiceContext) -> FastAPI:
    app = FastAPI(title="latentce")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        return _api_error(400, "bad_request", "malformed request body", str(exc.errors()))

    @app.exception_handler(LatentCeError)
    async def _domain_handler(request: Request, exc: LatentCeError):
        return _api_error(400, "bad_request", str(exc))

    @app.exception_handler(Exception)
    async def _internal_handler(request: Request, exc: Exception):
        return _api_error(500, "internal", "internal error", str(exc))

    def _resolve_image(body) -> np.ndarray | JSONResponse:
        if body.id is not None:
            sample = ctx.by_id.get(body.id)
            if sample is None:
                return _api_error(404, "not_found", f"unknown sample id {body.id}")
            return sample.image
        if body.image is None:
            return _api_error(400, "bad_request", "request needs an id or an image")
        dims = body.dims or [corpus.IMAGE_SIZE, corpus.IMAGE_SIZE]
        arr = np.asarray(body.image, dtype=np.float64)
        if arr.size != dims[0] * dims[1]:
            return _api_error(400, "bad_request",
                              f"image length {arr.size} does not match dims {dims}")
        return arr.reshape(dims)

    @app.get("/api/health")
    def health():
        return {"status": "ok", "model_loaded": ctx.ready}

    @app.get("/api/samples")
    def samples(split: str = "test"):
        if split not in corpus.SPLITS:
            return _api_error(400, "bad_request", f"unknown split {split!r}")
        return [
            {"id": s.id, "grade": s.ordinal_grade, "g": s.severity}
            for s in ctx.samples
            if s.split == split
        ]

    @app.get("/api/sample/{sample_id}")
    def sample(sample_id: int):
        s = ctx.by_id.get(sample_id)
        if s is None:
            return _api_error(404, "not_found", f"unknown sample id {sample_id}")
        return {"id": s.id, "grade": s.ordinal_grade, "g": s.severity, **_flat(s.image)}

    @app.post("/api/encode")
    def encode(body: EncodeBody):
        if not ctx.ready:
            return _api_error(503, "not_ready", "model/probe not loaded")
        image = _resolve_image(body)
        if isinstance(image, JSONResponse):
            return image
        with ctx._gate:
            z, _ = dae.encode(ctx.model, image)
        score, grade = probes.predict_grade(z.astype(np.float64), ctx.plane, ctx.cal)
        return {
            "z_sem": [float(v) for v in z],
            "distance": probes.signed_distance(z.astype(np.float64), ctx.plane),
            "score": score,
            "grade": grade,
        }

    @app.post("/api/counterfactual")
    def counterfactual_endpoint(body: CounterfactualBody):
        if not ctx.ready:
            return _api_error(503, "not_ready", "model/probe not loaded")
        image = _resolve_image(body)
        if isinstance(image, JSONResponse):
            return image
        try:
            request = counterfactual.CounterfactualRequest(
                mode=body.mode,
                sample_id=body.id,
                image=np.asarray(image),
                target_grade=body.target_grade,
                sweep_grades=body.sweep_grades,
                allow_extrapolation=body.allow_extrapolation,
            )
        except DomainError as exc:
            return _api_error(400, "bad_request", str(exc))
        with ctx._gate:
            try:
                result = counterfactual.generate_ce(ctx.model, ctx.plane, ctx.cal, request)
            except (DomainError, OutOfRangeError) as exc:
                return _api_error(400, "bad_request", str(exc))
        return {
            "requested_grades": result.requested_grades,
            "original_distance": result.original_distance,
            "original_score": result.original_score,
            "edited_distances": result.edited_distances,
            "edited_scores": result.edited_scores,
            "original_latent": [float(v) for v in result.original_latent],
            "edited_latents": [[float(v) for v in w] for w in result.edited_latents],
            "frames": [_flat(img) for img in result.images],
            "reconstruction": _flat(result.reconstruction),
        }

    @app.get("/api/calibration")
    def calibration(points: int = 64):
        if not ctx.ready:
            return _api_error(503, "not_ready", "model/probe not loaded")
        lo, hi = ctx.cal.d_range
        if hi <= lo:
            lo, hi = lo - 1.0, hi + 1.0
        grid = np.linspace(lo, hi, points)
        return {
            "mode": ctx.cal.mode,
            "degree": ctx.cal.degree,
            "gmax": ctx.cal.gmax,
            "curve": [{"d": float(d), "score": float(ctx.cal.score(d))} for d in grid],
        }

    @app.get("/api/projection")
    def projection(split: str = "test"):
        if not ctx.ready:
            return _api_error(503, "not_ready", "model not loaded")
        if split not in corpus.SPLITS:
            return _api_error(400, "bad_request", f"unknown split {split!r}")
        if split not in ctx._projection_cache:
            subset = corpus.by_split(ctx.samples, split)
            zmap = pipeline.embed_split(ctx.model, ctx.samples, split)
            coords, ratio, warning = metrics.pca_project(
                np.stack([zmap[s.id] for s in subset])
            )
            ctx._projection_cache[split] = {
                "split": split,
                "ids": [s.id for s in subset],
                "grades": [s.ordinal_grade for s in subset],
                "coords": coords.tolist(),
                "explained_variance_ratio": ratio.tolist(),
                "warning": warning,
            }
        return ctx._projection_cache[split]

    return app
