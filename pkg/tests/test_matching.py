"""Feature-matching baseline tests."""

import numpy as np
import pytest

from covision.errors import InvalidInputError
from covision.geometry import Box, BoxScene, CameraView, Intrinsics, Pose
from covision.matching import (
    GrayImage,
    detect,
    match_pair,
    predict_graph,
    render_shaded,
)
from covision.scenegen import Scenario

SCENE = BoxScene(
    room=Box([0.0, 0.0, 0.0], [10.0, 3.0, 8.0]),
    obstacles=(Box([4.0, 0.0001, 3.0], [5.0, 1.4, 4.0]),),
)
INTR = Intrinsics.from_fov(128, 128, 90.0)


def cam(x, z, yaw, vid=0):
    return CameraView(vid, INTR, Pose.looking([x, 1.5, z], yaw))


def constant_image(value=0.5, size=64):
    return GrayImage(size, size, np.full(size * size, value, dtype=np.float32))


def scenario_with_images(views, images):
    n = len(views)
    return Scenario(
        scene_id="t",
        seed=0,
        resolution=0.05,
        tau=0.0,
        views=views,
        depths=[],
        weights=[],
        gt_adjacency=np.zeros((n, n), dtype=bool),
        masks={},
        coverage=1.0,
        images=images,
    )


class TestRenderShaded:
    def test_zero_amplitude_is_piecewise_constant_per_face(self):
        img = render_shaded(SCENE, cam(5.0, 1.0, 0.3), texture_amplitude=0.0)
        # 6 room faces + 6 obstacle faces bound the distinct intensity count.
        assert len(np.unique(img.values)) <= 12

    def test_deterministic(self):
        a = render_shaded(SCENE, cam(5.0, 1.0, 0.3))
        b = render_shaded(SCENE, cam(5.0, 1.0, 0.3))
        np.testing.assert_array_equal(a.values, b.values)

    def test_intensities_clamped(self):
        img = render_shaded(SCENE, cam(5.0, 1.0, -0.4))
        assert np.all(img.values >= 0.0) and np.all(img.values <= 1.0)

    def test_quantized_to_8_bit_levels(self):
        img = render_shaded(SCENE, cam(5.0, 1.0, 0.0))
        restored = GrayImage.from_bytes(img.width, img.height, img.to_bytes())
        np.testing.assert_array_equal(img.values, restored.values)


class TestDetect:
    def test_constant_image_has_no_keypoints(self):
        assert detect(constant_image()) == []

    def test_single_corner_found_within_2px(self):
        values = np.full((64, 64), 0.9, dtype=np.float32)
        values[30:, 30:] = 0.1  # one high-contrast L-corner at (30, 30)
        kps = detect(GrayImage(64, 64, values.ravel()))
        assert kps, "corner must be detected"
        best = min(kps, key=lambda k: (k.u - 30) ** 2 + (k.v - 30) ** 2)
        assert abs(best.u - 30) <= 2 and abs(best.v - 30) <= 2

    def test_deterministic(self):
        img = render_shaded(SCENE, cam(5.0, 1.0, 0.2))
        assert detect(img) == detect(img)

    def test_max_kp_cap(self):
        img = render_shaded(SCENE, cam(5.0, 1.0, 0.2))
        assert len(detect(img, max_kp=10)) == 10

    def test_rejects_zero_max_kp(self):
        with pytest.raises(InvalidInputError):
            detect(constant_image(), max_kp=0)


class TestMatchPair:
    def test_identical_images_score_high(self):
        img = render_shaded(SCENE, cam(5.0, 1.0, 0.0))
        assert len(detect(img)) >= 8
        assert match_pair(img, img) >= 0.9

    def test_constant_image_scores_zero(self):
        img = render_shaded(SCENE, cam(5.0, 1.0, 0.0))
        assert match_pair(img, constant_image()) == 0.0

    def test_symmetry(self):
        a = render_shaded(SCENE, cam(5.0, 1.0, 0.0))
        b = render_shaded(SCENE, cam(5.5, 1.2, 0.1))
        assert match_pair(a, b) == match_pair(b, a)

    def test_deterministic_per_seed(self):
        a = render_shaded(SCENE, cam(5.0, 1.0, 0.0))
        b = render_shaded(SCENE, cam(5.5, 1.2, 0.1))
        assert match_pair(a, b, seed=5) == match_pair(a, b, seed=5)

    def test_overlapping_beats_disjoint(self):
        a = render_shaded(SCENE, cam(5.0, 1.0, 0.0))
        near = render_shaded(SCENE, cam(5.4, 1.1, 0.05))
        far = render_shaded(SCENE, cam(5.0, 7.0, np.pi))
        assert match_pair(a, near) > match_pair(a, far)


class TestPredictGraph:
    def test_single_view_scenario(self):
        img = render_shaded(SCENE, cam(5.0, 1.0, 0.0))
        s = scenario_with_images([cam(5.0, 1.0, 0.0, vid=0)], [img])
        g = predict_graph(s)
        assert g.weights.shape == (1, 1)
        assert g.weights[0, 0] == 0.0

    def test_identical_views_all_high(self):
        img = render_shaded(SCENE, cam(5.0, 1.0, 0.0))
        views = [cam(5.0, 1.0, 0.0, vid=i) for i in range(3)]
        g = predict_graph(scenario_with_images(views, [img, img, img]))
        off = g.weights[np.triu_indices(3, 1)]
        assert np.all(off >= 0.9)

    def test_output_satisfies_graph_invariants(self):
        imgs = [
            render_shaded(SCENE, cam(5.0, 1.0, 0.0)),
            render_shaded(SCENE, cam(6.0, 1.4, 0.4)),
            render_shaded(SCENE, cam(2.0, 6.0, np.pi)),
        ]
        views = [cam(5.0, 1.0, 0.0, vid=i) for i in range(3)]
        g = predict_graph(scenario_with_images(views, imgs))  # CovisGraph validates
        assert np.all(g.weights >= 0) and np.all(g.weights <= 1)
        assert np.array_equal(g.weights, g.weights.T)

    def test_jobs_do_not_change_result(self):
        imgs = [
            render_shaded(SCENE, cam(5.0, 1.0, 0.0)),
            render_shaded(SCENE, cam(5.5, 1.2, 0.2)),
            render_shaded(SCENE, cam(4.5, 2.0, -0.2)),
        ]
        views = [cam(5.0, 1.0, 0.0, vid=i) for i in range(3)]
        s = scenario_with_images(views, imgs)
        np.testing.assert_array_equal(predict_graph(s, jobs=1).weights, predict_graph(s, jobs=3).weights)

    def test_missing_images_rejected(self):
        s = scenario_with_images([cam(5.0, 1.0, 0.0)], None)
        with pytest.raises(InvalidInputError):
            predict_graph(s)
