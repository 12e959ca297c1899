import math

import numpy as np
import pytest

import bage


def test_epochs():
    assert bage.epoch_of_year(1960) == 0
    assert bage.epoch_of_year(2023) == 5
    assert bage.EPOCH_NAMES[0] == "1960s"
    with pytest.raises(bage.BageError):
        bage.epoch_of_year(1959)


def test_grid_counts():
    assert bage.grid_stride(16) == 8
    assert len(bage.sample_grid(64, 64)) == 78
    assert all(x + s <= 64 and y + s <= 64 for x, y, s in bage.sample_grid(64, 64))


def test_sift_contrast_and_normalize():
    rng = np.random.default_rng(3)
    gray = rng.random((24, 24))
    raw = bage.sift_descriptor(gray)
    assert raw.shape == (128,)
    assert bage.contrast_score(raw) == pytest.approx(np.linalg.norm(raw))
    unit = bage.normalize_descriptor(raw)
    assert np.linalg.norm(unit) == pytest.approx(1.0)
    clipped = np.minimum(raw / np.linalg.norm(raw), 0.2)
    np.testing.assert_allclose(unit, clipped / np.linalg.norm(clipped), rtol=1e-12)


def test_featurize_dimension():
    patch = np.zeros((20, 20, 3), dtype=np.uint8)
    assert bage.featurize(patch).shape == (bage.FEATURE_DIM,)


def test_top_count_and_selection():
    assert bage.top_count(50, 21) == 11
    assert bage.top_count(3, 1) == 1
    assert bage.select_top_contrast([0.1, 0.9, 0.5, 0.9], 50) == [1, 3]


def test_kmeans_separated_blobs():
    rng = np.random.default_rng(0)
    points = np.vstack([rng.normal(c, 0.01, size=(20, 2)) for c in (0.0, 5.0, 10.0)])
    r = bage.kmeans(points, 3, seed=1)
    labels = np.asarray(r["assignments"])
    for block in range(3):
        assert len(set(labels[block * 20:(block + 1) * 20])) == 1
    costs = r["cost_per_iteration"]
    assert all(b <= a + 1e-12 for a, b in zip(costs, costs[1:]))


def test_softmax_matches_numpy():
    z = np.array([1.0, -2.0, 0.5, 3.0])
    e = np.exp(z - z.max())
    np.testing.assert_allclose(bage.softmax(z), e / e.sum(), rtol=1e-12)


def test_fusion():
    dists = np.array([[0, 0.9, 0.1, 0, 0, 0]] * 3 + [[0.8, 0.2, 0, 0, 0, 0]] * 2)
    p = bage.majority_vote(dists, t_u=0.25)
    assert p["epoch"] == 1
    assert p["n_patches_used"] == 5
    assert not p["low_confidence"]
    assert bage.is_ambiguous([0.5, 0.45, 0.05, 0, 0, 0], 0.25)

    flat = np.full((4, 6), 1 / 6)
    fallback = bage.majority_vote(flat, t_u=0.25)
    assert fallback["low_confidence"]
    assert fallback["n_patches_used"] == 0
    assert bage.mean_likelihood(dists)["epoch"] == 1


def test_metrics():
    truths = [0, 0, 1, 2, 2, 2]
    preds = [0, 1, 1, 2, 2, 0]
    assert bage.accuracy(preds, truths) == pytest.approx(4 / 6)
    assert bage.zero_rule_baseline(truths) == pytest.approx(0.5)
    cm = bage.confusion_matrix(preds, truths)
    assert cm.shape == (6, 6)
    assert cm.sum() == 6
    assert np.trace(cm) == 4


def test_synth_and_png_round_trip(tmp_path):
    corpus = bage.synth_corpus(n_per_class=1, image_size=32, seed=5)
    assert len(corpus["images"]) == 6
    img = corpus["images"][0]
    assert img.shape == (32, 32, 3)
    assert corpus["masks"][0].max() < 13
    path = tmp_path / "a.png"
    bage.save_png(img, path)
    np.testing.assert_array_equal(bage.load_image(path), img)
    gray = bage.to_grayscale(img)
    expected = (0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2]) / 255.0
    np.testing.assert_allclose(gray, expected, atol=1e-12)


def test_io_errors(tmp_path):
    with pytest.raises(bage.BageError):
        bage.load_image(tmp_path / "missing.png")
    with pytest.raises(bage.BageError):
        bage.load_model(tmp_path / "missing.epsc")
    assert math.isfinite(bage.softmax([1000.0, 0.0])[0])
