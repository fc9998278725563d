import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from capsys import loops as lp
from capsys import paper_examples as pe
from capsys.loops import FourierLoop, TimeLoop


def random_loop(rng, N, n=2):
    k = np.abs(lp.mode_indices(N))[:, None]
    return FourierLoop(rng.standard_normal((2 * N, 2 * n)) / k)


def direct_samples(x, t):
    """Real-arithmetic evaluation of sum_k R(2 pi k t) xhat(k) and its derivative."""
    n = x.dim // 2
    pos = np.zeros((len(t), x.dim))
    vel = np.zeros((len(t), x.dim))
    for k, v in zip(x.ks, x.coeffs):
        phi = 2 * np.pi * k * t[:, None]
        c, s = np.cos(phi), np.sin(phi)
        a, b = v[:n], v[n:]
        pos[:, :n] += a * c - b * s
        pos[:, n:] += a * s + b * c
        vel[:, :n] += 2 * np.pi * k * (-a * s - b * c)
        vel[:, n:] += 2 * np.pi * k * (a * c - b * s)
    return pos, vel


def quadrature_action(x, M):
    n = x.dim // 2
    pos, vel = direct_samples(x, np.arange(M) / M)
    # <xdot, J0 x> with J0 (x, y) = (-y, x)
    return 0.5 * np.mean(np.sum(-vel[:, :n] * pos[:, n:] + vel[:, n:] * pos[:, :n], axis=1))


class TestAction:
    def test_unit_circle(self):
        x = FourierLoop.from_modes(4, 3, {1: [1, 0, 0, 0]})
        assert lp.action(x) == pytest.approx(np.pi, rel=1e-15)

    def test_reversed_circle(self):
        x = FourierLoop.from_modes(4, 3, {-1: [0, 0.6, 0, 0.8]})
        assert lp.action(x) == pytest.approx(-np.pi, rel=1e-15)

    def test_two_modes(self):
        x = FourierLoop.from_modes(4, 3, {1: [1, 0, 0, 0], 2: [0, 0.3, 0, 0.4]})
        assert lp.action(x) == pytest.approx(1.5 * np.pi, rel=1e-15)
        assert quadrature_action(x, 512) == pytest.approx(1.5 * np.pi, rel=1e-10)

    def test_closed_form_against_quadrature(self, rng):
        for _ in range(100):
            N = int(rng.integers(1, 17))
            x = random_loop(rng, N)
            a = lp.action(x)
            assert abs(a - quadrature_action(x, 8 * N)) <= 1e-10 * (1 + abs(a))

    def test_time_loop_action(self, rng):
        x = random_loop(rng, 6)
        assert lp.to_time(x, 64).action() == pytest.approx(lp.action(x), rel=1e-12)

    def test_truncation_partial_sums(self, rng):
        x = random_loop(rng, 10)
        for N in (1, 4, 9):
            y = lp.truncate(x, N)
            keep = np.abs(x.ks) <= N
            expected = np.pi * np.sum(x.ks[keep] * np.sum(x.coeffs[keep] ** 2, axis=1))
            assert lp.action(y) == pytest.approx(expected, rel=1e-14)
        with pytest.raises(ValueError):
            lp.truncate(x, 11)


class TestPhaseShift:
    def test_zero_is_identity(self, rng):
        x = random_loop(rng, 5)
        np.testing.assert_allclose(lp.phase_shift(x, 0.0).coeffs, x.coeffs, rtol=0, atol=0)

    def test_half_period(self):
        x = FourierLoop.from_modes(4, 2, {1: [0.3, -1, 2, 0.5]})
        np.testing.assert_allclose(lp.phase_shift(x, 0.5).coeffs, -x.coeffs, atol=1e-15)

    def test_is_time_shift(self, rng):
        x = random_loop(rng, 4)
        th = 0.3
        t = rng.uniform(0, 1, 20)
        np.testing.assert_allclose(direct_samples(lp.phase_shift(x, th), t)[0],
                                   direct_samples(x, t - th)[0], atol=1e-12)

    @given(theta=st.floats(0, 1, exclude_max=True), seed=st.integers(0, 2**32 - 1))
    def test_invariants(self, theta, seed):
        x = random_loop(np.random.default_rng(seed), 6)
        y = lp.phase_shift(x, theta)
        assert abs(lp.action(y) - lp.action(x)) <= 1e-13 * (1 + abs(lp.action(x)))
        assert np.linalg.norm(y.coeffs) == pytest.approx(np.linalg.norm(x.coeffs), rel=1e-14)


class TestCenter:
    def test_constant_loop(self):
        c = TimeLoop(np.tile([1.0, 2, 3, 4], (10, 1)))
        np.testing.assert_array_equal(lp.center(c).samples, 0.0)

    def test_idempotent_and_linear(self, rng):
        a, b = TimeLoop(rng.standard_normal((30, 4))), TimeLoop(rng.standard_normal((30, 4)))
        ca = lp.center(a)
        np.testing.assert_allclose(lp.center(ca).samples, ca.samples, atol=1e-15)
        lin = lp.center(TimeLoop(2 * a.samples - b.samples)).samples
        np.testing.assert_allclose(lin, 2 * ca.samples - lp.center(b).samples, atol=1e-14)

    def test_gamma_mean(self):
        g = lp.center(pe.bxb1_gamma())
        np.testing.assert_allclose(g.samples.mean(axis=0), 0.0, atol=1e-14)


class TestTransforms:
    def test_single_mode_samples(self):
        x = FourierLoop.from_modes(4, 1, {1: [1, 0, 0, 0]})
        s = lp.to_time(x, 8).samples
        ang = 2 * np.pi * np.arange(8) / 8
        np.testing.assert_allclose(s, np.column_stack([np.cos(ang), 0 * ang, np.sin(ang), 0 * ang]),
                                   atol=1e-15)

    def test_synthesis_matches_direct_evaluation(self, rng):
        x = random_loop(rng, 7)
        T = lp.to_time(x, 56)
        pos, vel = direct_samples(x, T.times)
        np.testing.assert_allclose(T.samples, pos, atol=1e-12)
        np.testing.assert_allclose(T.derivative, vel, atol=1e-10)

    def test_round_trip(self, rng):
        x = random_loop(rng, 16)
        y = lp.from_time(lp.to_time(x, 64), 16)
        assert np.abs(y.coeffs - x.coeffs).max() < 1e-10

    def test_grid_too_small(self, rng):
        with pytest.raises(ValueError):
            lp.to_time(random_loop(rng, 8), 31)

    def test_gamma_reconstruction(self):
        g = pe.bxb1_gamma(10_000)
        x = lp.from_time(g, 32)
        err = np.abs(lp.to_time(x, 10_000).samples - (g.samples - g.samples.mean(axis=0))).max()
        assert err <= 0.05


class TestNormalize:
    def test_circle(self):
        x = FourierLoop.from_modes(4, 2, {1: [0, 1, 0, 0]})
        y = lp.normalize_action(x)
        np.testing.assert_allclose(y.coeffs, x.coeffs / np.sqrt(np.pi), rtol=1e-15)
        assert lp.action(y) == pytest.approx(1.0, rel=1e-12)

    def test_idempotent(self, rng):
        x = FourierLoop.from_modes(4, 3, {1: [1, 0, 0, 0]}) + 0.1 * random_loop(rng, 3)
        y = lp.normalize_action(x)
        np.testing.assert_allclose(lp.normalize_action(y).coeffs, y.coeffs, rtol=1e-12)

    def test_negative_action(self):
        with pytest.raises(ValueError):
            lp.normalize_action(FourierLoop.from_modes(4, 1, {-1: [1, 0, 0, 0]}))


class TestSerialisation:
    def test_json_round_trip(self, rng):
        x = random_loop(rng, 3)
        np.testing.assert_array_equal(FourierLoop.from_json(x.to_json()).coeffs, x.coeffs)

    def test_csv_round_trip(self, rng, tmp_path):
        g = TimeLoop(rng.standard_normal((17, 4)))
        g.write_csv(tmp_path / "g.csv")
        assert (tmp_path / "g.csv").read_text().splitlines()[0] == "t,x1,y1,x2,y2"
        np.testing.assert_array_equal(TimeLoop.read_csv(tmp_path / "g.csv").samples, g.samples)

    def test_zero_mode_rejected(self):
        with pytest.raises(ValueError):
            FourierLoop.from_modes(4, 2, {0: [1, 0, 0, 0]})

    def test_nonfinite_samples_rejected(self):
        with pytest.raises(ValueError):
            TimeLoop(np.array([[0.0, 1, 2, np.nan]] * 3))
