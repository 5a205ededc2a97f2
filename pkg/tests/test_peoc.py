"""Entropy-classifier tests: score definition, range, separation check."""
import numpy as np
import pytest

from peoc_bench import net
from peoc_bench.errors import EmptyInput
from peoc_bench.evaluation import roc_curve
from peoc_bench.net import PolicyParams, init_policy_params
from peoc_bench.peoc import (TAG_AFTER_LAST_UPDATE, TAG_AFTER_UPDATE_1,
                             EntropyClassifier, PolicySnapshot, peoc_score,
                             peoc_scores, separation_check)

LN4 = np.log(4.0)


def snapshot_of(params, tag=TAG_AFTER_UPDATE_1, update_index=1):
    return PolicySnapshot(params=params, tag=tag, train_seed=0,
                          update_index=update_index)


def zeroed(params):
    return PolicyParams.from_list([np.zeros_like(a) for a in params.as_list()])


class TestScore:
    def test_uniform_policy_scores_ln4(self):
        snap = snapshot_of(zeroed(init_policy_params(0)))
        obs = np.random.default_rng(0).random(288)
        assert abs(peoc_score(snap, obs) - LN4) < 1e-12

    def test_near_deterministic_policy_scores_near_zero(self):
        params = zeroed(init_policy_params(0))
        params.b_pi[0] = 1000.0  # logits (1000, 0, 0, 0) for every observation
        snap = snapshot_of(params)
        assert peoc_score(snap, np.zeros(288)) < 1e-12

    def test_equals_composition(self):
        params = init_policy_params(4)
        snap = snapshot_of(params)
        rng = np.random.default_rng(1)
        for _ in range(10):
            obs = rng.random(288)
            logits, _ = net.forward(params, obs)
            want = net.entropy(net.softmax(logits))
            assert abs(peoc_score(snap, obs) - want) < 1e-12

    def test_batch_matches_scalar(self):
        snap = snapshot_of(init_policy_params(5))
        x = np.random.default_rng(2).random((8, 288))
        batch = peoc_scores(snap, x)
        for i in range(8):
            assert abs(batch[i] - peoc_score(snap, x[i])) < 1e-12

    def test_range(self):
        snap = snapshot_of(init_policy_params(6))
        scores = peoc_scores(snap, np.random.default_rng(3).random((100, 288)))
        assert np.all(scores >= 0.0) and np.all(scores <= LN4 + 1e-12)

    def test_classifier_wrapper(self):
        snap = snapshot_of(init_policy_params(7))
        clf = EntropyClassifier(snapshot=snap, name="PEOC-1")
        x = np.random.default_rng(4).random((5, 288))
        assert np.array_equal(clf.scores(x), peoc_scores(snap, x))


class TestSnapshot:
    def test_tag_consistency_enforced(self):
        params = init_policy_params(0)
        with pytest.raises(ValueError):
            PolicySnapshot(params=params, tag=TAG_AFTER_UPDATE_1,
                           train_seed=0, update_index=5)
        with pytest.raises(ValueError):
            PolicySnapshot(params=params, tag="whenever", train_seed=0, update_index=1)

    def test_save_load_round_trip(self, tmp_path):
        snap = snapshot_of(init_policy_params(9), tag=TAG_AFTER_LAST_UPDATE,
                           update_index=150)
        path = tmp_path / "snap.bin"
        snap.save(path)
        again = PolicySnapshot.load(path, tag=TAG_AFTER_LAST_UPDATE,
                                    train_seed=0, update_index=150)
        x = np.random.default_rng(5).random((4, 288))
        assert np.array_equal(peoc_scores(snap, x), peoc_scores(again, x))


class TestSeparation:
    def test_separable_case(self):
        res = separation_check([0.1, 0.2], [0.5, 0.9])
        assert res.perfectly_separable
        assert abs(res.margin - 0.3) < 1e-15

    def test_boundary_tie_not_separable(self):
        res = separation_check([0.4], [0.4])
        assert not res.perfectly_separable
        assert res.margin == 0.0

    def test_overlap_negative_margin(self):
        res = separation_check([0.6], [0.5])
        assert not res.perfectly_separable
        assert res.margin < 0.0

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            separation_check([], [0.5])
        with pytest.raises(EmptyInput):
            separation_check([0.5], [])

    def test_separable_implies_unit_auc(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            ind = rng.random(10) * 0.4
            ood = 0.5 + rng.random(10) * 0.5
            assert separation_check(ind, ood).perfectly_separable
            scores = np.concatenate([ind, ood])
            labels = np.concatenate([np.zeros(10, int), np.ones(10, int)])
            assert roc_curve(scores, labels).auc == 1.0
