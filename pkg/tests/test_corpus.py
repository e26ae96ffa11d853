import hashlib

import numpy as np
import pytest

from latentce import corpus
from latentce.errors import CorruptCorpusError, DomainError


def test_block_height_formula_endpoints():
    # g=0 -> height 20, g=1 -> height 8, read back from the rendered pixels
    img0 = corpus.render_sample(3, 0.0)
    img1 = corpus.render_sample(3, 1.0)
    assert corpus.measure_block_height(img0) == 20.0
    assert corpus.measure_block_height(img1) == 8.0


def test_render_deterministic():
    a = corpus.render_sample(7, 0.5)
    b = corpus.render_sample(7, 0.5)
    assert np.array_equal(a, b)


def test_render_rejects_out_of_range_severity():
    with pytest.raises(DomainError):
        corpus.render_sample(0, 1.5)
    with pytest.raises(DomainError):
        corpus.render_sample(0, -0.1)


def test_render_values_in_unit_interval():
    img = corpus.render_sample(11, 0.3)
    assert img.shape == (32, 32)
    assert img.min() >= 0.0 and img.max() <= 1.0


def test_block_height_monotone_in_severity():
    for seed in (0, 7, 123):
        heights = [
            corpus.measure_block_height(corpus.render_sample(seed, g / 10))
            for g in range(11)
        ]
        assert all(a > b for a, b in zip(heights, heights[1:])), heights


@pytest.mark.parametrize(
    "g,grade",
    [(0.0, 0), (0.249999, 0), (0.25, 1), (0.49, 1), (0.5, 2), (0.749, 2), (0.75, 3), (1.0, 3)],
)
def test_grade_boundaries(g, grade):
    assert corpus.grade_of(g) == grade


def _checksum(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_generate_corpus_split_sizes_and_grade_balance(tmp_path):
    manifest = corpus.generate_corpus(1000, 42, (0.6, 0.2, 0.1, 0.1), tmp_path / "d")
    samples = corpus.load_corpus(manifest)
    sizes = [len(corpus.by_split(samples, s)) for s in corpus.SPLITS]
    assert sizes == [600, 200, 100, 100]
    grade0 = sum(1 for s in samples if s.ordinal_grade == 0)
    assert abs(grade0 / 1000 - 0.25) < 0.05  # uniform severity, quartile boundaries


def test_generate_corpus_deterministic_checksums(tmp_path):
    m1 = corpus.generate_corpus(120, 7, out_dir=tmp_path / "a")
    m2 = corpus.generate_corpus(120, 7, out_dir=tmp_path / "b")
    assert _checksum(m1) == _checksum(m2)
    for i in (0, 57, 119):
        assert _checksum(tmp_path / "a" / "images" / f"{i:05d}.pgm") == _checksum(
            tmp_path / "b" / "images" / f"{i:05d}.pgm"
        )


def test_generate_corpus_validates_arguments(tmp_path):
    with pytest.raises(DomainError):
        corpus.generate_corpus(50, 1, out_dir=tmp_path)
    with pytest.raises(DomainError):
        corpus.generate_corpus(200, 1, (0.5, 0.5, 0.2, 0.1), tmp_path)


def test_borderline_band_unlabeled_only_in_probe_split(tmp_path):
    samples = corpus.load_corpus(corpus.generate_corpus(400, 3, out_dir=tmp_path / "d"))
    for s in samples:
        if s.binary_label is None:
            assert s.split == "train-probe"
            assert 0.4 < s.severity < 0.6
        else:
            assert s.binary_label == (1 if s.ordinal_grade >= 2 else 0)
    dropped = [s for s in samples if s.binary_label is None]
    assert dropped, "expected some unlabeled borderline samples at n=400"


def test_load_round_trips_fields(tmp_path):
    manifest = corpus.generate_corpus(150, 9, out_dir=tmp_path / "d")
    first = corpus.load_corpus(manifest)
    second = corpus.load_corpus(manifest)
    for a, b in zip(first, second):
        assert (a.id, a.severity, a.ordinal_grade, a.binary_label, a.split) == (
            b.id,
            b.severity,
            b.ordinal_grade,
            b.binary_label,
            b.split,
        )
        assert np.array_equal(a.image, b.image)


def test_load_detects_missing_image(tmp_path):
    manifest = corpus.generate_corpus(100, 5, out_dir=tmp_path / "d")
    (tmp_path / "d" / "images" / "00003.pgm").unlink()
    with pytest.raises(CorruptCorpusError) as err:
        corpus.load_corpus(manifest)
    assert err.value.sample_id == 3


def test_load_detects_grade_tampering(tmp_path):
    manifest = corpus.generate_corpus(100, 5, out_dir=tmp_path / "d")
    lines = manifest.read_text().splitlines()
    parts = lines[1].split(",")
    parts[2] = str((int(parts[2]) + 1) % 4)  # inconsistent grade
    lines[1] = ",".join(parts)
    manifest.write_text("\n".join(lines) + "\n")
    with pytest.raises(CorruptCorpusError):
        corpus.load_corpus(manifest)


def test_pgm_round_trip(tmp_path):
    img = corpus.render_sample(1, 0.2)
    path = tmp_path / "x.pgm"
    corpus.write_pgm(path, img)
    loaded = corpus.read_pgm(path)
    assert loaded.shape == img.shape
    assert np.max(np.abs(loaded - img)) <= 0.5 / 255 + 1e-12
