import numpy as np
import pytest

from latentce import counterfactual as cf
from latentce import probes
from latentce.errors import DomainError


def make_plane(dim=6, seed=0):
    rng = np.random.default_rng(seed)
    return probes.Hyperplane(rng.normal(size=dim), float(rng.normal()))


def make_cal():
    return probes.fit_calibration(
        np.array([-2.0, 4.0]), np.array([0.0, 3.0]), probes.MEANS_OF_EXTREMES
    )


class TestReflect:
    def test_distance_negated(self):
        plane = make_plane()
        rng = np.random.default_rng(1)
        for _ in range(100):
            w = rng.normal(size=6)
            w_ce = cf.reflect(w, plane)
            assert probes.signed_distance(w_ce, plane) == pytest.approx(
                -probes.signed_distance(w, plane), abs=1e-9
            )

    def test_involution(self):
        plane = make_plane(seed=2)
        rng = np.random.default_rng(3)
        for _ in range(50):
            w = rng.normal(size=6)
            assert np.allclose(cf.reflect(cf.reflect(w, plane), plane), w, atol=1e-9)

    def test_mirror_across_x_axis(self):
        plane = probes.Hyperplane(np.array([0.0, 1.0]), 0.0)
        assert np.allclose(cf.reflect(np.array([3.0, 2.0]), plane), [3.0, -2.0])

    def test_flips_decision_sign(self):
        plane = make_plane(seed=4)
        rng = np.random.default_rng(5)
        for _ in range(100):
            w = rng.normal(size=6)
            before = np.sign(w @ plane.n + plane.b)
            after = np.sign(cf.reflect(w, plane) @ plane.n + plane.b)
            assert after == -before


class TestShiftToGrade:
    def test_zero_shift_when_already_on_target(self):
        plane = make_plane()
        cal = make_cal()
        rng = np.random.default_rng(6)
        w = rng.normal(size=6)
        current_score, _ = probes.predict_grade(w, plane, cal)
        w2 = cf.shift_to_grade(w, plane, cal, current_score)
        assert np.allclose(w2, w, atol=1e-9)

    def test_hits_target_score(self):
        plane = make_plane(seed=7)
        cal = make_cal()
        rng = np.random.default_rng(8)
        for _ in range(100):
            w = rng.normal(size=6) * 3
            target = float(rng.uniform(0, 3))
            w2 = cf.shift_to_grade(w, plane, cal, target)
            score, _ = probes.predict_grade(w2, plane, cal)
            assert score == pytest.approx(target, abs=1e-6)

    def test_shifts_compose(self):
        plane = make_plane(seed=9)
        cal = make_cal()
        w = np.random.default_rng(10).normal(size=6)
        via_zero = cf.shift_to_grade(cf.shift_to_grade(w, plane, cal, 0.0), plane, cal, 3.0)
        direct = cf.shift_to_grade(w, plane, cal, 3.0)
        assert np.allclose(via_zero, direct, atol=1e-9)


class TestSweep:
    def test_scores_match_requested_grades(self):
        plane = make_plane(seed=11)
        cal = make_cal()
        w = np.random.default_rng(12).normal(size=6)
        edits = cf.sweep(w, plane, cal, [0, 1, 2, 3])
        scores = [probes.predict_grade(e, plane, cal)[0] for e in edits]
        assert np.allclose(scores, [0, 1, 2, 3], atol=1e-9)

    def test_consecutive_edits_collinear_with_normal(self):
        plane = make_plane(seed=13)
        cal = make_cal()
        w = np.random.default_rng(14).normal(size=6)
        edits = cf.sweep(w, plane, cal, [0, 1.5, 3])
        unit = plane.unit_normal()
        for a, b in zip(edits[:-1], edits[1:]):
            step = b - a
            cosine = abs(step @ unit) / np.linalg.norm(step)
            assert cosine >= 1 - 1e-9

    def test_edits_stay_on_normal_line(self):
        plane = make_plane(seed=15)
        cal = make_cal()
        w = np.random.default_rng(16).normal(size=6)
        unit = plane.unit_normal()
        for e in cf.sweep(w, plane, cal, [0, 1, 2, 3]):
            offset = e - w
            residual = offset - (offset @ unit) * unit
            assert np.linalg.norm(residual) <= 1e-9 * max(np.linalg.norm(w), 1.0)

    def test_uncalibrated_offsets(self):
        plane = make_plane(seed=17)
        w = np.random.default_rng(18).normal(size=6)
        sigma = 1.3
        frames = cf.sweep_uncalibrated(w, plane, [-2 * sigma, 0.0, 2 * sigma])
        assert len(frames) == 3
        assert np.allclose(frames[1], w)  # middle frame is the reconstruction
        d0 = probes.signed_distance(w, plane)
        assert probes.signed_distance(frames[0], plane) == pytest.approx(d0 - 2 * sigma)
        assert probes.signed_distance(frames[2], plane) == pytest.approx(d0 + 2 * sigma)


class TestRequestValidation:
    def test_unknown_mode(self):
        with pytest.raises(DomainError):
            cf.CounterfactualRequest(mode="nonsense", sample_id=1)

    def test_target_mode_needs_grade(self):
        with pytest.raises(DomainError):
            cf.CounterfactualRequest(mode=cf.MODE_TARGET, sample_id=1)

    def test_sweep_needs_two_grades(self):
        with pytest.raises(DomainError):
            cf.CounterfactualRequest(mode=cf.MODE_SWEEP, sample_id=1, sweep_grades=[1.0])

    def test_needs_source(self):
        with pytest.raises(DomainError):
            cf.CounterfactualRequest(mode=cf.MODE_REFLECT)
