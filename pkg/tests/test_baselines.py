"""Baseline classifier tests: autoencoder fitting/scoring and exact k-NN."""
import numpy as np
import pytest

from peoc_bench.baselines import (AE_MAGIC, AEConfig, AEModel, KnnClassifier,
                                  ae_fit, ae_score, ae_scores, knn_fit,
                                  knn_score, knn_scores)
from peoc_bench.errors import EmptyTrainSet, ShapeMismatch, TooFewPoints


def binary_set(rng, n, dim=288, density=0.05):
    return (rng.random((n, dim)) < density).astype(np.float64)


class TestAutoencoderFit:
    def test_zero_epochs_returns_seeded_init(self):
        rng = np.random.default_rng(0)
        x = binary_set(rng, 20)
        cfg = AEConfig(epochs=0, seed=7)
        model = ae_fit(x, cfg)
        from peoc_bench.baselines import _init_ae
        init = _init_ae(288, cfg)
        assert all(np.array_equal(a, b)
                   for a, b in zip(model.as_list(), init.as_list()))

    def test_training_reduces_epoch_mean_loss(self):
        rng = np.random.default_rng(1)
        x = binary_set(rng, 256)
        model = ae_fit(x, AEConfig(epochs=50, seed=3))
        assert len(model.loss_history) == 50
        assert model.loss_history[-1] <= model.loss_history[0]

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        x = binary_set(rng, 64)
        cfg = AEConfig(epochs=3, seed=11)
        a, b = ae_fit(x, cfg), ae_fit(x, cfg)
        assert all(np.array_equal(u, v) for u, v in zip(a.as_list(), b.as_list()))

    def test_empty_rejected(self):
        with pytest.raises(EmptyTrainSet):
            ae_fit(np.empty((0, 288)), AEConfig())


class TestAutoencoderScore:
    def test_zero_weight_model_scores_mean_square(self):
        cfg = AEConfig()
        model = ae_fit(binary_set(np.random.default_rng(3), 4), AEConfig(epochs=0))
        zero = AEModel(weights=[np.zeros_like(w) for w in model.weights],
                       biases=[np.zeros_like(b) for b in model.biases], config=cfg)
        obs = binary_set(np.random.default_rng(4), 1)[0]
        assert abs(ae_score(zero, obs) - np.mean(obs ** 2)) < 1e-15

    def test_perfect_reconstruction_scores_zero(self):
        # identity-passing chain on nonnegative inputs: every layer relays
        # its input unchanged, so the reconstruction equals the observation
        cfg = AEConfig(hidden=3, bottleneck=3)
        eye = np.eye(3)
        model = AEModel(weights=[eye.copy() for _ in range(4)],
                        biases=[np.zeros(3) for _ in range(4)], config=cfg)
        obs = np.array([0.5, 0.0, 2.0])
        assert ae_score(model, obs) == 0.0

    def test_scores_nonnegative(self):
        model = ae_fit(binary_set(np.random.default_rng(5), 32), AEConfig(epochs=1))
        scores = ae_scores(model, binary_set(np.random.default_rng(6), 10))
        assert np.all(scores >= 0.0)

    def test_shape_mismatch(self):
        model = ae_fit(binary_set(np.random.default_rng(7), 8), AEConfig(epochs=0))
        with pytest.raises(ShapeMismatch):
            ae_score(model, np.zeros(17))

    def test_batch_matches_scalar(self):
        model = ae_fit(binary_set(np.random.default_rng(8), 16), AEConfig(epochs=1))
        x = binary_set(np.random.default_rng(9), 6)
        batch = ae_scores(model, x)
        for i in range(6):
            assert abs(batch[i] - ae_score(model, x[i])) < 1e-12

    def test_container_round_trip(self, tmp_path):
        model = ae_fit(binary_set(np.random.default_rng(10), 16), AEConfig(epochs=1))
        path = tmp_path / "ae.bin"
        model.save(path)
        assert path.read_bytes()[:4] == AE_MAGIC
        again = AEModel.load(path)
        x = binary_set(np.random.default_rng(11), 4)
        assert np.allclose(ae_scores(model, x), ae_scores(again, x), atol=0)


class TestKnn:
    def test_boundary_sizes(self):
        x = binary_set(np.random.default_rng(12), 5)
        assert knn_fit(x, k=5).size == 5
        with pytest.raises(TooFewPoints):
            knn_fit(x[:4], k=5)

    def test_duplicates_retained(self):
        x = np.vstack([np.ones((3, 4)), np.zeros((2, 4))])
        index = knn_fit(x, k=2)
        assert index.size == 5

    def test_stored_point_scores_zero(self):
        x = binary_set(np.random.default_rng(13), 10)
        index = knn_fit(x, k=1)
        assert knn_score(index, x[3]) == 0.0

    def test_hamming_25_gives_five(self):
        base = np.zeros(288)
        query = base.copy()
        query[:25] = 1.0
        index = knn_fit(base[None, :], k=1)
        assert knn_score(index, query) == 5.0

    def test_matches_full_sort_oracle(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            train = rng.normal(size=(30, 12))
            queries = rng.normal(size=(8, 12))
            k = int(rng.integers(1, 6))
            index = knn_fit(train, k=k)
            got = knn_scores(index, queries)
            for i, q in enumerate(queries):
                dists = np.sort(np.sqrt(((train - q) ** 2).sum(axis=1)))
                assert abs(got[i] - dists[k - 1]) < 1e-9

    def test_permutation_invariant(self):
        rng = np.random.default_rng(15)
        train = rng.normal(size=(25, 6))
        queries = rng.normal(size=(5, 6))
        a = knn_scores(knn_fit(train, k=3), queries)
        b = knn_scores(knn_fit(train[::-1].copy(), k=3), queries)
        assert np.allclose(a, b, atol=1e-12)

    def test_blocked_scoring_consistent(self):
        rng = np.random.default_rng(16)
        train = rng.normal(size=(40, 7))
        queries = rng.normal(size=(23, 7))
        index = knn_fit(train, k=4)
        assert np.array_equal(knn_scores(index, queries, block=5),
                              knn_scores(index, queries, block=1000))

    def test_classifier_wrapper(self):
        x = binary_set(np.random.default_rng(17), 12)
        clf = KnnClassifier(index=knn_fit(x, k=2))
        assert clf.name == "kNN"
        assert np.array_equal(clf.scores(x[:3]), knn_scores(clf.index, x[:3]))
