"""Diffusion autoencoder pipeline: joint training, encode/decode, artifacts.

encode() produces the pair (z_sem, x_T): the semantic latent from the
encoder plus the stochastic latent from a 250-step DDIM inversion
conditioned on that z_sem. decode() reverses with 100 steps.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from . import diffusion, nets
from .corpus import SyntheticSample, by_split
from .errors import ConfigError, FormatError, ShapeError, TrainingError

ENCODE_STEPS = 250
DECODE_STEPS = 100
LATENT_MAGIC = b"ZSEM"


@dataclass
class TrainConfig:
    total_steps: int = 20_000
    batch_size: int = 64
    lr: float = 1e-4
    seed: int = 42
    T: int = 1000
    latent_dim: int = nets.LATENT_DIM
    trace_every: int = 100
    checkpoint_every: int = 0  # 0 = only at the end
    checkpoint_path: str | None = None

    def __post_init__(self):
        if self.total_steps < 1:
            raise TrainingError(f"total_steps must be >= 1, got {self.total_steps}")
        if self.batch_size < 1:
            raise TrainingError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass
class DaeModel:
    encoder: nets.SemanticEncoder
    denoiser: nets.Denoiser
    schedule: diffusion.NoiseSchedule
    latent_dim: int
    encode_steps: int = ENCODE_STEPS
    decode_steps: int = DECODE_STEPS

    def model_fn(self):
        denoiser = self.denoiser

        def fn(x, t, z):
            with torch.no_grad():
                return denoiser(x, torch.tensor(int(t)), z)

        return fn


def to_model_range(images: np.ndarray) -> torch.Tensor:
    """[0,1] pixels -> [-1,1] float32 batch tensor (B, 1, H, W)."""
    arr = np.asarray(images, dtype=np.float32)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise ShapeError(f"expected (H, W) or (B, H, W), got {arr.shape}")
    return torch.from_numpy(arr * 2.0 - 1.0)[:, None]


def from_model_range(x: torch.Tensor) -> np.ndarray:
    """[-1,1] model tensor -> clamped [0,1] images (B, H, W)."""
    arr = x.detach().numpy()[:, 0]
    return np.clip((arr + 1.0) / 2.0, 0.0, 1.0)


def train(samples: list[SyntheticSample], config: TrainConfig) -> tuple[DaeModel, list]:
    """Joint encoder+denoiser training on the noise-prediction MSE objective.

    Fully reproducible from config.seed; the loss trace records
    (step, loss) every config.trace_every steps.
    """
    train_split = by_split(samples, "train-dae")
    if not train_split:
        raise TrainingError("train-dae split is empty")
    images = to_model_range(np.stack([s.image for s in train_split]))

    encoder, denoiser = nets.init_models(config.latent_dim, seed=config.seed)
    schedule = diffusion.make_schedule(config.T)
    params = {**nets.parameter_dict(encoder, "encoder"),
              **nets.parameter_dict(denoiser, "denoiser")}
    state = nets.AdamState(params)
    gen = torch.Generator().manual_seed(config.seed)

    model = DaeModel(encoder, denoiser, schedule, config.latent_dim)
    trace = []
    n = images.shape[0]
    for step in range(config.total_steps):
        idx = torch.randint(0, n, (config.batch_size,), generator=gen)
        t = torch.randint(1, config.T + 1, (config.batch_size,), generator=gen)
        eps = torch.randn(config.batch_size, 1, nets.IMAGE_SIZE, nets.IMAGE_SIZE, generator=gen)
        x0 = images[idx]
        z = encoder(x0)
        x_t = diffusion.q_sample(x0, t.numpy(), eps, schedule)
        loss = torch.mean((denoiser(x_t, t, z) - eps) ** 2)
        if not torch.isfinite(loss):
            raise TrainingError(f"non-finite loss at step {step}", step=step)
        for p in params.values():
            if p.grad is not None:
                p.grad = None
        loss.backward()
        grads = {k: p.grad if p.grad is not None else torch.zeros_like(p)
                 for k, p in params.items()}
        nets.adam_step(params, grads, state, config.lr)
        if step % config.trace_every == 0 or step == config.total_steps - 1:
            trace.append((step, float(loss.item())))
        if (config.checkpoint_every and config.checkpoint_path
                and step and step % config.checkpoint_every == 0):
            save_checkpoint(model, config.checkpoint_path)
    return model, trace


def encode(model: DaeModel, image: np.ndarray) -> tuple[np.ndarray, torch.Tensor]:
    """Image in [0,1] -> (z_sem, x_T). Accepts (H, W) or a (B, H, W) batch."""
    single = np.asarray(image).ndim == 2
    x0 = to_model_range(image)
    with torch.no_grad():
        z = model.encoder(x0)
    grid = diffusion.make_grid(model.encode_steps, model.schedule.T)
    x_T = diffusion.ddim_encode(model.model_fn(), z, x0, grid, model.schedule)
    z_out = z.numpy().astype(np.float32)
    return (z_out[0], x_T[0]) if single else (z_out, x_T)


def decode(model: DaeModel, z_sem: np.ndarray, x_T: torch.Tensor) -> np.ndarray:
    """(z_sem, x_T) -> image in [0,1], clamped only at this boundary."""
    z = torch.as_tensor(np.asarray(z_sem, dtype=np.float32))
    single = z.ndim == 1
    if single:
        z = z[None]
        x_T = x_T[None] if x_T.ndim == 3 else x_T
    if z.shape[1] != model.latent_dim:
        raise ShapeError(f"z_sem dim {z.shape[1]} != model dim {model.latent_dim}")
    if x_T.shape[-2:] != (nets.IMAGE_SIZE, nets.IMAGE_SIZE):
        raise ShapeError(f"x_T spatial shape {tuple(x_T.shape)} unexpected")
    grid = diffusion.make_grid(model.decode_steps, model.schedule.T)
    x = diffusion.ddim_decode(model.model_fn(), z, x_T, grid, model.schedule)
    out = from_model_range(x)
    return out[0] if single else out


def embed_corpus(model: DaeModel, samples: list[SyntheticSample], split: str,
                 cache_path: str | Path | None = None) -> list[tuple[int, np.ndarray]]:
    """Semantic latents for every sample of a split; optionally cached to disk."""
    subset = by_split(samples, split)
    with torch.no_grad():
        z = model.encoder(to_model_range(np.stack([s.image for s in subset])))
    records = [(s.id, z[i].numpy().astype(np.float32)) for i, s in enumerate(subset)]
    if cache_path is not None:
        save_latents(cache_path, records)
    return records


def save_latents(path, records: list[tuple[int, np.ndarray]]) -> None:
    dim = records[0][1].size if records else 0
    with open(path, "wb") as f:
        f.write(LATENT_MAGIC)
        f.write(struct.pack("<II", len(records), dim))
        for sid, z in records:
            f.write(struct.pack("<I", sid))
            f.write(np.ascontiguousarray(z, dtype="<f4").tobytes())


def load_latents(path) -> list[tuple[int, np.ndarray]]:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < 12 or blob[:4] != LATENT_MAGIC:
        raise FormatError(f"bad latent cache magic in {path}")
    count, dim = struct.unpack_from("<II", blob, 4)
    expected = 12 + count * (4 + 4 * dim)
    if len(blob) != expected:
        raise FormatError(f"latent cache {path} has {len(blob)} bytes, expected {expected}")
    records = []
    offset = 12
    for _ in range(count):
        (sid,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        z = np.frombuffer(blob, dtype="<f4", count=dim, offset=offset).copy()
        offset += 4 * dim
        records.append((int(sid), z))
    return records


def save_checkpoint(model: DaeModel, path) -> None:
    records = {}
    for prefix, module in (("encoder", model.encoder), ("denoiser", model.denoiser)):
        for name, p in module.named_parameters():
            records[f"{prefix}.{name}"] = p.detach().numpy()
    records["schedule.betas"] = model.schedule.betas
    nets.save_records(path, records)


def load_checkpoint(path) -> DaeModel:
    records = nets.load_records(path)
    if "schedule.betas" not in records:
        raise FormatError(f"checkpoint {path} lacks a schedule record")
    schedule = diffusion.NoiseSchedule.from_betas(records.pop("schedule.betas"))
    latent_dim = records["encoder.head.weight"].shape[0]
    encoder = nets.SemanticEncoder(latent_dim)
    denoiser = nets.Denoiser(latent_dim)
    for prefix, module in (("encoder", encoder), ("denoiser", denoiser)):
        state = {}
        for name, _ in module.named_parameters():
            key = f"{prefix}.{name}"
            if key not in records:
                raise FormatError(f"checkpoint {path} lacks parameter {key!r}")
            state[name] = torch.from_numpy(records[key])
        module.load_state_dict(state, strict=True)
    for module in (encoder, denoiser):
        for p in module.parameters():
            p.requires_grad_(True)
    return DaeModel(encoder, denoiser, schedule, latent_dim)


def require_model(model: DaeModel | None) -> DaeModel:
    if model is None:
        raise ConfigError("model checkpoint not loaded")
    return model
