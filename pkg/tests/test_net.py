"""Network math tests: forward pass, softmax/entropy closed forms, Adam
update recurrence, finite-difference gradients, and the binary container."""
import numpy as np
import pytest

from peoc_bench import net
from peoc_bench.errors import ParseError, ShapeMismatch
from peoc_bench.net import (PolicyParams, adam_step, entropy,
                            entropy_batch, forward, forward_batch,
                            init_adam, init_policy_params, log_softmax,
                            softmax)

LN4 = np.log(4.0)


def zero_params(obs_dim=288, hidden=64, n_actions=4):
    p = init_policy_params(0, obs_dim, hidden, n_actions)
    return PolicyParams.from_list([np.zeros_like(a) for a in p.as_list()])


class TestForward:
    def test_zero_params_zero_outputs(self):
        p = zero_params()
        obs = np.random.default_rng(0).random(288)
        logits, value = forward(p, obs)
        assert np.array_equal(logits, np.zeros(4))
        assert value == 0.0

    def test_deterministic(self):
        p = init_policy_params(3)
        obs = np.random.default_rng(1).random(288)
        logits1, value1 = forward(p, obs)
        logits2, value2 = forward(p, obs)
        assert np.array_equal(logits1, logits2) and value1 == value2

    def test_shape_mismatch(self):
        p = init_policy_params(3)
        with pytest.raises(ShapeMismatch):
            forward(p, np.zeros(287))

    def test_batch_matches_single(self):
        p = init_policy_params(5)
        x = np.random.default_rng(2).random((7, 288))
        logits_b, values_b = forward_batch(p, x)
        for i in range(7):
            logits, value = forward(p, x[i])
            assert np.allclose(logits_b[i], logits, atol=1e-12)
            assert np.isclose(values_b[i], value, atol=1e-12)

    def test_value_head_gradient_matches_finite_differences(self):
        # scalar output: d value / d params vs central differences, h=1e-5
        p = init_policy_params(7, obs_dim=10, hidden=6, n_actions=4)
        x = np.random.default_rng(3).normal(size=(1, 10))
        _, _, cache = net.forward_with_cache(p, x)
        grads = net.backward_from_heads(p, cache, np.zeros((1, 4)), np.ones(1))

        flat = p.flat()
        gflat = grads.flat()
        h = 1e-5
        num = np.empty_like(flat)
        for i in range(flat.size):
            hi, lo = flat.copy(), flat.copy()
            hi[i] += h
            lo[i] -= h
            num[i] = (net.forward_batch(p.from_flat(hi), x)[1][0]
                      - net.forward_batch(p.from_flat(lo), x)[1][0]) / (2 * h)
        mask = np.abs(gflat) > 1e-6
        rel = np.abs(num[mask] - gflat[mask]) / np.abs(gflat[mask])
        assert rel.max() < 1e-5


class TestSoftmax:
    def test_uniform(self):
        assert np.allclose(softmax(np.zeros(4)), 0.25, atol=1e-15)

    def test_huge_logit_no_overflow(self):
        p = softmax(np.array([1000.0, 0.0, 0.0, 0.0]))
        assert np.all(np.isfinite(p))
        assert np.allclose(p, [1.0, 0.0, 0.0, 0.0], atol=1e-300)

    def test_shift_invariance(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            x = rng.normal(size=4) * 10
            c = rng.normal() * 100
            assert np.allclose(softmax(x), softmax(x + c), atol=1e-12)

    def test_log_softmax_consistent(self):
        x = np.random.default_rng(5).normal(size=(3, 4))
        assert np.allclose(np.exp(log_softmax(x)), softmax(x), atol=1e-12)


class TestEntropy:
    def test_uniform_is_ln4(self):
        assert abs(entropy(np.full(4, 0.25)) - LN4) < 1e-12

    def test_one_hot_is_zero(self):
        assert entropy(np.array([1.0, 0.0, 0.0, 0.0])) == 0.0

    def test_two_point_is_ln2(self):
        assert abs(entropy(np.array([0.5, 0.5, 0.0, 0.0])) - np.log(2.0)) < 1e-12

    def test_shift_invariance_through_softmax(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            x = rng.normal(size=4) * 5
            assert abs(entropy(softmax(x)) - entropy(softmax(x + 3.7))) < 1e-12

    def test_batch_matches_scalar(self):
        probs = softmax(np.random.default_rng(7).normal(size=(6, 4)))
        batch = entropy_batch(probs)
        for i in range(6):
            assert abs(batch[i] - entropy(probs[i])) < 1e-12

    def test_bounds(self):
        probs = softmax(np.random.default_rng(8).normal(size=(100, 4)) * 3)
        h = entropy_batch(probs)
        assert np.all(h >= 0.0) and np.all(h <= LN4 + 1e-12)


class TestInit:
    def test_pure_function_of_seed(self):
        a = init_policy_params(123)
        b = init_policy_params(123)
        assert all(np.array_equal(x, y) for x, y in zip(a.as_list(), b.as_list()))

    def test_different_seeds_differ(self):
        a = init_policy_params(1)
        b = init_policy_params(2)
        assert not np.array_equal(a.w1, b.w1)

    def test_scaled_uniform_bounds_and_zero_biases(self):
        p = init_policy_params(9)
        assert np.abs(p.w1).max() <= np.sqrt(2.0 / 288)
        assert np.abs(p.w2).max() <= np.sqrt(2.0 / 64)
        for b in (p.b1, p.b2, p.b_pi, p.b_v):
            assert np.array_equal(b, np.zeros_like(b))


class TestAdam:
    def test_zero_gradient_keeps_params(self):
        params = [np.array([1.0, -2.0]), np.array([[3.0]])]
        state = init_adam(params)
        new, state2 = adam_step(params, [np.zeros(2), np.zeros((1, 1))], state)
        assert all(np.array_equal(a, b) for a, b in zip(params, new))
        assert state2.step == 1

    def test_first_step_magnitude(self):
        # single scalar, g=1, t=1: bias-corrected update is lr / (1 + eps)
        state = init_adam([np.array([0.0])])
        new, _ = adam_step([np.array([0.0])], [np.array([1.0])], state)
        expected = state.lr / (1.0 + state.eps)
        assert abs(-new[0][0] - expected) < 1e-18

    def test_deterministic(self):
        params = [np.random.default_rng(10).normal(size=5)]
        grads = [np.random.default_rng(11).normal(size=5)]
        s = init_adam(params)
        r1 = adam_step(params, grads, s)
        r2 = adam_step(params, grads, s)
        assert np.array_equal(r1[0][0], r2[0][0])
        assert r1[1].step == r2[1].step

    def test_shape_mismatch(self):
        state = init_adam([np.zeros(3)])
        with pytest.raises(ShapeMismatch):
            adam_step([np.zeros(3)], [np.zeros(4)], state)


class TestSnapshotIO:
    def test_round_trip(self, tmp_path):
        p = init_policy_params(42)
        path = tmp_path / "snap.bin"
        net.save_policy_params(path, p)
        q = net.load_policy_params(path)
        assert all(np.array_equal(a, b) for a, b in zip(p.as_list(), q.as_list()))

    def test_header_layout(self, tmp_path):
        p = init_policy_params(1, obs_dim=4, hidden=3, n_actions=4)
        path = tmp_path / "small.bin"
        net.save_params(path, p.as_list())
        blob = path.read_bytes()
        assert blob[:4] == b"PEOC"
        assert len(blob) == 16 + 8 * p.n_params

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"XXXX" + bytes(12))
        with pytest.raises(ParseError):
            net.load_policy_params(path)

    def test_wrong_count_rejected(self, tmp_path):
        p = init_policy_params(1, obs_dim=4, hidden=3, n_actions=4)
        path = tmp_path / "small.bin"
        net.save_params(path, p.as_list())
        with pytest.raises(ParseError):
            net.load_policy_params(path)  # default layout expects 288-dim net

    def test_truncated_rejected(self, tmp_path):
        p = init_policy_params(2)
        path = tmp_path / "trunc.bin"
        net.save_policy_params(path, p)
        blob = path.read_bytes()
        path.write_bytes(blob[:len(blob) // 2])
        with pytest.raises(ParseError):
            net.load_policy_params(path)
