"""Noise schedule, forward noising, and deterministic DDIM decode/encode.

The decode loop runs the standard eta=0 DDIM recurrence down a descending
step grid; the encode loop runs the same recurrence with time reversed,
which deterministically maps an image to its noise representation x_T.
x0-estimates are never clamped inside the loop, so the zero-denoiser closed
forms (pure telescoping products) hold exactly and serve as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .errors import DomainError, ShapeError


@dataclass
class NoiseSchedule:
    T: int
    betas: np.ndarray  # float32, length T
    alpha_bars: np.ndarray  # float64, length T+1, alpha_bars[0] == 1

    @classmethod
    def from_betas(cls, betas: np.ndarray) -> "NoiseSchedule":
        betas = np.asarray(betas, dtype=np.float32)
        if betas.ndim != 1 or betas.size < 1:
            raise DomainError("betas must be a non-empty 1-D array")
        if np.any(betas <= 0) or np.any(betas >= 1):
            raise DomainError("betas must lie strictly in (0, 1)")
        alphas = 1.0 - betas.astype(np.float64)
        alpha_bars = np.concatenate([[1.0], np.cumprod(alphas)])
        return cls(T=betas.size, betas=betas, alpha_bars=alpha_bars)

    def alpha_bar(self, t: int) -> float:
        return float(self.alpha_bars[t])


def make_schedule(T: int, beta_start: float = 1e-4, beta_end: float = 0.02) -> NoiseSchedule:
    """Linear beta schedule, endpoints inclusive; alpha_bars accumulated in 64-bit."""
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    if not (0.0 < beta_start <= beta_end < 1.0):
        raise DomainError(f"need 0 < beta_start <= beta_end < 1, got {beta_start}, {beta_end}")
    if T == 1:
        betas = np.array([beta_start], dtype=np.float32)
    else:
        betas = np.linspace(beta_start, beta_end, T, dtype=np.float64).astype(np.float32)
    return NoiseSchedule.from_betas(betas)


def make_grid(num_steps: int, T: int) -> list[int]:
    """Evenly spaced ascending timesteps 0 = tau_0 < ... < tau_S = T.

    Rounded to integers and deduplicated, so the effective step count can be
    smaller than requested when num_steps approaches T.
    """
    if num_steps < 1:
        raise DomainError(f"need at least one step, got {num_steps}")
    if num_steps > T:
        num_steps = T
    raw = np.round(np.linspace(0, T, num_steps + 1)).astype(int)
    grid = sorted(set(raw.tolist()))
    return grid


def q_sample(x0: torch.Tensor, t, eps: torch.Tensor, sched: NoiseSchedule) -> torch.Tensor:
    """x_t = sqrt(abar_t) x_0 + sqrt(1 - abar_t) eps; t may be per-item."""
    if eps.shape != x0.shape:
        raise ShapeError(f"noise shape {tuple(eps.shape)} != image shape {tuple(x0.shape)}")
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.int64))
    if np.any(t_arr < 1) or np.any(t_arr > sched.T):
        raise DomainError(f"t must be in [1, {sched.T}]")
    abar = sched.alpha_bars[t_arr]
    shape = [t_arr.size] + [1] * (x0.ndim - 1) if x0.ndim > 1 and t_arr.size > 1 else [1] * x0.ndim
    sqrt_ab = torch.as_tensor(np.sqrt(abar), dtype=x0.dtype).reshape(shape)
    sqrt_1m = torch.as_tensor(np.sqrt(1.0 - abar), dtype=x0.dtype).reshape(shape)
    return sqrt_ab * x0 + sqrt_1m * eps


def _ddim_transfer(x, eps_hat, abar_src: float, abar_dst: float):
    """One eta=0 DDIM move from noise level abar_src to abar_dst."""
    x0_hat = (x - np.sqrt(1.0 - abar_src) * eps_hat) / np.sqrt(abar_src)
    return np.sqrt(abar_dst) * x0_hat + np.sqrt(1.0 - abar_dst) * eps_hat


def ddim_decode(model_fn, z: torch.Tensor, x_T: torch.Tensor, grid: list[int],
                sched: NoiseSchedule) -> torch.Tensor:
    """Run the denoising recurrence from t = T down to 0.

    model_fn(x, t, z) -> predicted noise, batched. Output is NOT clamped;
    display normalization happens at the pipeline boundary.
    """
    if not grid or grid[0] != 0 or grid[-1] != sched.T:
        raise DomainError("grid must run from 0 to T inclusive")
    x = x_T
    steps = list(reversed(grid))
    for t_cur, t_prev in zip(steps[:-1], steps[1:]):
        eps_hat = model_fn(x, t_cur, z)
        x = _ddim_transfer(x, eps_hat, sched.alpha_bar(t_cur), sched.alpha_bar(t_prev))
    return x


def ddim_encode(model_fn, z: torch.Tensor, x0: torch.Tensor, grid: list[int],
                sched: NoiseSchedule) -> torch.Tensor:
    """Run the recurrence with time reversed, mapping an image to x_T.

    The noise estimate for the 0 -> tau_1 move is evaluated at t = 1, the
    smallest timestep the denoiser is trained on.
    """
    if not grid or grid[0] != 0 or grid[-1] != sched.T:
        raise DomainError("grid must run from 0 to T inclusive")
    x = x0
    for t_cur, t_next in zip(grid[:-1], grid[1:]):
        eps_hat = model_fn(x, max(t_cur, 1), z)
        x = _ddim_transfer(x, eps_hat, sched.alpha_bar(t_cur), sched.alpha_bar(t_next))
    return x
