"""Synthetic graded corpus: deterministic rendering, manifest I/O, validation.

Each sample is a 32x32 grayscale image of a bright block on a noisy
background. The block height shrinks linearly with the continuous severity
g in [0, 1]; the ordinal grade is the quartile of g. Binary labels are
withheld for borderline train-probe samples to simulate label scarcity.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorruptCorpusError, DomainError

IMAGE_SIZE = 32
GRADE_MAX = 3
SPLITS = ("train-dae", "train-probe", "calibrate", "test")
BORDERLINE_BAND = (0.4, 0.6)
MANIFEST_VERSION = 1

BLOCK_INTENSITY = 0.8
BLOCK_WIDTH = 16
HEIGHT_AT_G0 = 20
HEIGHT_AT_G1 = 8


@dataclass
class SyntheticSample:
    id: int
    image: np.ndarray  # (32, 32) float in [0, 1]
    severity: float
    ordinal_grade: int
    binary_label: int | None
    split: str
    path: str = ""


@dataclass
class CorpusManifest:
    version: int
    global_seed: int
    # rows of (id, g, grade, binary_label_or_None, split, path)
    samples: list = field(default_factory=list)


def grade_of(g: float) -> int:
    """Ordinal grade: quartile of g, capped at 3."""
    return min(GRADE_MAX, int(np.floor(4.0 * g)))


def binary_label_of(grade: int) -> int:
    """Positive class covers the two most severe grades."""
    return 1 if grade >= 2 else 0


def sample_seed(global_seed: int, sample_id: int) -> int:
    """Per-sample render seed, stable across runs and platforms."""
    ss = np.random.SeedSequence([int(global_seed), int(sample_id)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _box_blur3(img: np.ndarray) -> np.ndarray:
    padded = np.pad(img, 1, mode="edge")
    out = np.zeros_like(img)
    for dy in (0, 1, 2):
        for dx in (0, 1, 2):
            out += padded[dy : dy + img.shape[0], dx : dx + img.shape[1]]
    return out / 9.0


def render_sample(seed: int, g: float) -> np.ndarray:
    """Render the 32x32 image for severity g with a seeded generator.

    Draw order (background, width jitter, vertical jitter) is fixed so that
    a fixed seed yields identical jitters for every g.
    """
    if not (0.0 <= g <= 1.0):
        raise DomainError(f"severity g must be in [0, 1], got {g}")
    rng = np.random.default_rng(seed)
    img = np.clip(rng.normal(0.1, 0.05, size=(IMAGE_SIZE, IMAGE_SIZE)), 0.0, 1.0)
    width_jitter = int(rng.integers(-2, 3))
    v_jitter = int(rng.integers(-3, 4))

    height = int(round(HEIGHT_AT_G0 - (HEIGHT_AT_G0 - HEIGHT_AT_G1) * g))
    width = BLOCK_WIDTH + width_jitter
    top = IMAGE_SIZE // 2 - height // 2 + v_jitter
    left = IMAGE_SIZE // 2 - width // 2
    img[top : top + height, left : left + width] = BLOCK_INTENSITY
    return _box_blur3(img)


def measure_block_height(image: np.ndarray, threshold: float = 0.45) -> float:
    """Mean count of above-threshold pixels over the central columns.

    Used as the geometric readout of severity in decoded images; the blurred
    background never crosses the threshold.
    """
    center = IMAGE_SIZE // 2
    cols = image[:, center - 3 : center + 3]
    return float(np.mean(np.sum(cols > threshold, axis=0)))


def write_pgm(path: str | Path, image: np.ndarray) -> None:
    data = np.clip(np.round(image * 255.0), 0, 255).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(data.tobytes())


def read_pgm(path: str | Path) -> np.ndarray:
    with open(path, "rb") as f:
        blob = f.read()
    parts = blob.split(b"\n", 3)
    if len(parts) < 4 or parts[0] != b"P5":
        raise CorruptCorpusError(f"not a binary PGM file: {path}")
    w, h = (int(v) for v in parts[1].split())
    maxval = int(parts[2])
    pixels = np.frombuffer(parts[3], dtype=np.uint8, count=w * h)
    if pixels.size != w * h:
        raise CorruptCorpusError(f"truncated PGM file: {path}")
    return pixels.reshape(h, w).astype(np.float64) / float(maxval)


def _split_counts(n: int, fractions) -> list[int]:
    # Largest-remainder apportionment; exact when fractions divide n evenly.
    raw = [f * n for f in fractions]
    counts = [int(np.floor(r)) for r in raw]
    remainder = n - sum(counts)
    order = sorted(range(len(fractions)), key=lambda i: raw[i] - counts[i], reverse=True)
    for i in order[:remainder]:
        counts[i] += 1
    return counts


def generate_corpus(
    n: int,
    global_seed: int,
    fractions=(0.6, 0.2, 0.1, 0.1),
    out_dir: str | Path = "data",
) -> Path:
    """Generate n samples plus a CSV manifest under out_dir; returns manifest path."""
    if n < 100:
        raise DomainError(f"corpus size must be >= 100, got {n}")
    if len(fractions) != len(SPLITS) or any(f <= 0 for f in fractions):
        raise DomainError("need one positive fraction per split")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise DomainError("split fractions must sum to 1")

    out_dir = Path(out_dir)
    img_dir = out_dir / "images"
    img_dir.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(global_seed)
    # Round severities to the manifest precision so stored g is exact.
    severities = np.round(rng.uniform(0.0, 1.0, size=n), 6)
    counts = _split_counts(n, fractions)
    split_of = []
    for split, c in zip(SPLITS, counts):
        split_of.extend([split] * c)

    rows = []
    for i in range(n):
        g = float(severities[i])
        grade = grade_of(g)
        split = split_of[i]
        label: int | None = binary_label_of(grade)
        if split == "train-probe" and BORDERLINE_BAND[0] < g < BORDERLINE_BAND[1]:
            label = None
        rel_path = f"images/{i:05d}.pgm"
        write_pgm(out_dir / rel_path, render_sample(sample_seed(global_seed, i), g))
        rows.append((i, g, grade, label, split, rel_path))

    manifest_path = out_dir / "manifest.csv"
    with open(manifest_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["id", "g", "grade", "binary_label", "split", "path"])
        for i, g, grade, label, split, rel_path in rows:
            writer.writerow([i, f"{g:.6f}", grade, "" if label is None else label, split, rel_path])
    with open(out_dir / "manifest.meta.json", "w", encoding="utf-8") as f:
        json.dump({"version": MANIFEST_VERSION, "global_seed": int(global_seed), "n": n}, f)
    return manifest_path


def load_corpus(manifest_path: str | Path) -> list[SyntheticSample]:
    """Load and revalidate every sample; raises CorruptCorpusError on violations."""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise CorruptCorpusError(f"manifest not found: {manifest_path}")
    base = manifest_path.parent
    samples = []
    with open(manifest_path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["id", "g", "grade", "binary_label", "split", "path"]:
            raise CorruptCorpusError(f"bad manifest header: {header}")
        for row in reader:
            if len(row) != 6:
                raise CorruptCorpusError(f"malformed manifest row: {row}")
            sid = int(row[0])
            g = float(row[1])
            grade = int(row[2])
            label = None if row[3] == "" else int(row[3])
            split, rel_path = row[4], row[5]
            if not (0.0 <= g <= 1.0):
                raise CorruptCorpusError(f"severity out of range: {g}", sample_id=sid)
            if grade != grade_of(g):
                raise CorruptCorpusError(
                    f"grade {grade} inconsistent with severity {g}", sample_id=sid
                )
            if label is not None and label != binary_label_of(grade):
                raise CorruptCorpusError(
                    f"binary label {label} inconsistent with grade {grade}", sample_id=sid
                )
            if split not in SPLITS:
                raise CorruptCorpusError(f"unknown split {split!r}", sample_id=sid)
            img_path = base / rel_path
            if not img_path.exists():
                raise CorruptCorpusError(f"missing image file {rel_path}", sample_id=sid)
            image = read_pgm(img_path)
            if image.shape != (IMAGE_SIZE, IMAGE_SIZE):
                raise CorruptCorpusError(f"bad image shape {image.shape}", sample_id=sid)
            samples.append(SyntheticSample(sid, image, g, grade, label, split, rel_path))
    ids = [s.id for s in samples]
    if ids != list(range(len(samples))):
        raise CorruptCorpusError("sample ids are not unique and contiguous from 0")
    return samples


def by_split(samples: list[SyntheticSample], split: str) -> list[SyntheticSample]:
    if split not in SPLITS:
        raise DomainError(f"unknown split {split!r}")
    return [s for s in samples if s.split == split]


def load_meta(manifest_path: str | Path) -> dict:
    meta_path = Path(manifest_path).parent / "manifest.meta.json"
    if meta_path.exists():
        with open(meta_path, encoding="utf-8") as f:
            return json.load(f)
    return {"version": MANIFEST_VERSION, "global_seed": None}
