"""Networks and optimizer: semantic encoder, FiLM-conditioned U-Net denoiser,
a manual Adam step, and the binary checkpoint format.

All parameters are float32 torch tensors on CPU. Gradients come from torch
autograd; the test suite verifies every layer against 64-bit central finite
differences, which is the independent oracle for this module.
"""

from __future__ import annotations

import math
import struct

import numpy as np
import torch
from torch import nn

from .errors import FormatError, OptimizerError, ShapeError

IMAGE_SIZE = 32
LATENT_DIM = 32
TIME_EMBED_DIM = 64
COND_DIM = 128

CHECKPOINT_MAGIC = b"DAEC"
CHECKPOINT_VERSION = 1


def time_embedding(t: torch.Tensor, dim: int = TIME_EMBED_DIM) -> torch.Tensor:
    """Sinusoidal embedding of integer timesteps; pure function of t."""
    half = dim // 2
    freqs = torch.exp(
        -math.log(10000.0) * torch.arange(half, dtype=torch.float64) / (half - 1)
    )
    args = t.to(torch.float64)[:, None] * freqs[None, :]
    emb = torch.cat([torch.sin(args), torch.cos(args)], dim=-1)
    return emb.to(torch.float32)


class ConditioningNet(nn.Module):
    """Builds the 128-d conditioning vector: time MLP (64) + z projection (64)."""

    def __init__(self, latent_dim: int = LATENT_DIM):
        super().__init__()
        self.time_mlp = nn.Sequential(
            nn.Linear(TIME_EMBED_DIM, TIME_EMBED_DIM),
            nn.ReLU(),
            nn.Linear(TIME_EMBED_DIM, TIME_EMBED_DIM),
        )
        self.z_proj = nn.Linear(latent_dim, COND_DIM - TIME_EMBED_DIM)

    def forward(self, t: torch.Tensor, z: torch.Tensor) -> torch.Tensor:
        emb = time_embedding(t).to(self.z_proj.weight.dtype)
        return torch.cat([self.time_mlp(emb), self.z_proj(z)], dim=-1)


class Film(nn.Module):
    """Per-channel scale/shift from the conditioning vector.

    Initialized to the identity: scale 1, shift 0.
    """

    def __init__(self, channels: int, cond_dim: int = COND_DIM):
        super().__init__()
        self.proj = nn.Linear(cond_dim, 2 * channels)
        nn.init.zeros_(self.proj.weight)
        with torch.no_grad():
            self.proj.bias[:channels] = 1.0
            self.proj.bias[channels:] = 0.0

    def forward(self, h: torch.Tensor, cond: torch.Tensor) -> torch.Tensor:
        scale, shift = self.proj(cond).chunk(2, dim=-1)
        return h * scale[:, :, None, None] + shift[:, :, None, None]


class Denoiser(nn.Module):
    """Two-level U-Net with FiLM conditioning on (t, z_sem).

    in conv 1->32, down 32->64 stride 2, bottleneck 64->64, up block
    64->32 (conv at the low resolution, then nearest upsample; cheaper than
    conv after upsampling and equivalent in information path), additive skip
    from the input level, out 32->1.
    """

    def __init__(self, latent_dim: int = LATENT_DIM):
        super().__init__()
        self.cond = ConditioningNet(latent_dim)
        self.conv_in = nn.Conv2d(1, 32, 3, padding=1)
        self.conv_down = nn.Conv2d(32, 64, 3, stride=2, padding=1)
        self.conv_mid = nn.Conv2d(64, 64, 3, padding=1)
        self.conv_up = nn.Conv2d(64, 32, 3, padding=1)
        self.conv_out = nn.Conv2d(32, 1, 3, padding=1)
        self.film_in = Film(32)
        self.film_down = Film(64)
        self.film_mid = Film(64)
        self.film_up = Film(32)
        self.act = nn.ReLU()

    def forward(self, x: torch.Tensor, t: torch.Tensor, z: torch.Tensor) -> torch.Tensor:
        if x.ndim != 4 or x.shape[1] != 1:
            raise ShapeError(f"expected (B, 1, H, W) input, got {tuple(x.shape)}")
        if z.ndim != 2 or z.shape[0] != x.shape[0]:
            raise ShapeError(f"conditioning batch mismatch: {tuple(z.shape)} vs {tuple(x.shape)}")
        if t.ndim == 0:
            t = t.expand(x.shape[0])
        cond = self.cond(t, z)
        h1 = self.act(self.film_in(self.conv_in(x), cond))
        h2 = self.act(self.film_down(self.conv_down(h1), cond))
        h3 = self.act(self.film_mid(self.conv_mid(h2), cond))
        u = nn.functional.interpolate(self.conv_up(h3), scale_factor=2, mode="nearest")
        h4 = self.act(self.film_up(u, cond))
        return self.conv_out(h4 + h1)


class SemanticEncoder(nn.Module):
    """Three stride-2 convs (1->16->32->64) then a linear head to D."""

    def __init__(self, latent_dim: int = LATENT_DIM):
        super().__init__()
        self.conv1 = nn.Conv2d(1, 16, 3, stride=2, padding=1)
        self.conv2 = nn.Conv2d(16, 32, 3, stride=2, padding=1)
        self.conv3 = nn.Conv2d(32, 64, 3, stride=2, padding=1)
        self.head = nn.Linear(64 * 4 * 4, latent_dim)
        self.act = nn.ReLU()
        self.latent_dim = latent_dim

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.ndim != 4 or x.shape[1:] != (1, IMAGE_SIZE, IMAGE_SIZE):
            raise ShapeError(f"expected (B, 1, {IMAGE_SIZE}, {IMAGE_SIZE}), got {tuple(x.shape)}")
        h = self.act(self.conv1(x))
        h = self.act(self.conv2(h))
        h = self.act(self.conv3(h))
        return self.head(h.flatten(1))


def denoiser_forward(model: Denoiser, x_t: torch.Tensor, t: int, z: torch.Tensor) -> torch.Tensor:
    """Single-image convenience wrapper around the batched module."""
    with torch.no_grad():
        out = model(x_t[None], torch.tensor([int(t)]), z[None])
    return out[0]


def encoder_forward(model: SemanticEncoder, x0: torch.Tensor) -> torch.Tensor:
    with torch.no_grad():
        return model(x0[None])[0]


def init_models(latent_dim: int = LATENT_DIM, seed: int = 0) -> tuple[SemanticEncoder, Denoiser]:
    """Seeded construction: Kaiming-uniform convs/linears, identity FiLM."""
    torch.manual_seed(seed)
    encoder = SemanticEncoder(latent_dim)
    denoiser = Denoiser(latent_dim)
    return encoder, denoiser


class AdamState:
    def __init__(self, params: dict[str, torch.Tensor]):
        self.step = 0
        self.m = {k: torch.zeros_like(v) for k, v in params.items()}
        self.v = {k: torch.zeros_like(v) for k, v in params.items()}


def adam_step(
    params: dict[str, torch.Tensor],
    grads: dict[str, torch.Tensor],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """In-place Adam update with bias correction."""
    state.step += 1
    t = state.step
    with torch.no_grad():
        for name, p in params.items():
            g = grads[name]
            if not torch.isfinite(g).all():
                raise OptimizerError(f"non-finite gradient for {name!r}", param_name=name)
            m = state.m[name]
            v = state.v[name]
            m.mul_(beta1).add_(g, alpha=1 - beta1)
            v.mul_(beta2).addcmul_(g, g, value=1 - beta2)
            m_hat = m / (1 - beta1**t)
            v_hat = v / (1 - beta2**t)
            p.add_(-lr * m_hat / (v_hat.sqrt() + eps))


def parameter_dict(module: nn.Module, prefix: str) -> dict[str, torch.Tensor]:
    return {f"{prefix}.{name}": p for name, p in module.named_parameters()}


def parameter_count(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())


def save_records(path, records: dict[str, np.ndarray]) -> None:
    """Write the 'DAEC' checkpoint container: named float32 arrays, no padding."""
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<II", CHECKPOINT_VERSION, len(records)))
        for name, arr in records.items():
            arr = np.ascontiguousarray(arr, dtype="<f4")
            encoded = name.encode("utf-8")
            f.write(struct.pack("<H", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<B", arr.ndim))
            f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            f.write(arr.tobytes())


def load_records(path) -> dict[str, np.ndarray]:
    with open(path, "rb") as f:
        blob = f.read()
    view = memoryview(blob)
    if len(view) < 12 or bytes(view[:4]) != CHECKPOINT_MAGIC:
        raise FormatError(f"bad checkpoint magic in {path}")
    version, count = struct.unpack_from("<II", view, 4)
    if version != CHECKPOINT_VERSION:
        raise FormatError(
            f"checkpoint version {version} not supported (reader version {CHECKPOINT_VERSION})"
        )
    offset = 12
    records = {}
    try:
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", view, offset)
            offset += 2
            name = bytes(view[offset : offset + name_len]).decode("utf-8")
            offset += name_len
            (rank,) = struct.unpack_from("<B", view, offset)
            offset += 1
            dims = struct.unpack_from(f"<{rank}I", view, offset)
            offset += 4 * rank
            size = int(np.prod(dims, dtype=np.int64)) if rank else 1
            arr = np.frombuffer(view, dtype="<f4", count=size, offset=offset)
            if arr.size != size:
                raise FormatError(f"truncated record {name!r} in {path}")
            offset += 4 * size
            records[name] = arr.reshape(dims).copy()
    except (struct.error, ValueError) as exc:
        raise FormatError(f"truncated checkpoint {path}: {exc}") from exc
    if offset != len(view):
        raise FormatError(f"trailing bytes in checkpoint {path}")
    return records
