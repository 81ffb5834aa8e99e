import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from perspectron.model import (
    beta_sign,
    empirical_zero_one,
    homogenize_example,
    homogenize_halfspace,
    leaky_relu,
    leaky_relu_coeff,
    linear_link,
    link_from_name,
    project_to_ball,
    ramp_clip,
    scaled_tanh,
    shifted_ramp,
    sign_conv,
)
from perspectron.synth import Sample

finite = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e6, max_value=1e6)
# convexity of the surrogate needs slope(left) = lam <= 1 - lam = slope(right),
# i.e. lam <= 1/2; noise rates never exceed 1/2 either
lam_st = st.floats(min_value=0.0, max_value=0.5)


def test_sign_conv():
    assert sign_conv(0.0) == 1
    assert sign_conv(3.2) == 1
    assert sign_conv(-0.5) == -1
    assert sign_conv(-0.0) == 1  # ties, including negative zero, go to +1


def test_leaky_relu_values():
    assert leaky_relu(0.25, 2.0) == pytest.approx(1.5)
    assert leaky_relu(0.25, -2.0) == pytest.approx(-0.5)
    assert leaky_relu(0.5, -4.0) == pytest.approx(-2.0)
    assert leaky_relu(0.3, 0.0) == 0.0


@given(lam_st, finite)
def test_leaky_relu_piecewise(lam, t):
    expect = (1 - lam) * t if t >= 0 else lam * t
    assert leaky_relu(lam, t) == expect


@given(lam_st, finite, finite, finite)
def test_leaky_relu_convex_midpoint(lam, a, b, t):
    # midpoint convexity on the segment [a, b]
    mid = leaky_relu(lam, (a + b) / 2)
    assert mid <= (leaky_relu(lam, a) + leaky_relu(lam, b)) / 2 + 1e-9 * (
        1 + abs(a) + abs(b)
    )


def test_leaky_relu_coeff_values():
    e1 = np.array([1.0, 0.0])
    assert leaky_relu_coeff(0.0, e1, e1, 1) == 0.0
    assert leaky_relu_coeff(0.25, e1, e1, -1) == pytest.approx(0.75)
    assert leaky_relu_coeff(0.25, e1, e1, 1) == pytest.approx(-0.25)


def test_subgradient_inequality_random_triples(rng):
    # c * x from the coefficient is a valid subgradient of l_lam(-y w.x) in w:
    # l(v) >= l(w) + c x . (v - w)
    for _ in range(1000):
        d = rng.integers(1, 6)
        w, v, x = rng.normal(size=(3, d))
        y = 1 if rng.random() < 0.5 else -1
        lam = rng.random() * 0.5
        c = leaky_relu_coeff(lam, w, x, y)
        lhs = leaky_relu(lam, -y * float(v @ x))
        rhs = leaky_relu(lam, -y * float(w @ x)) + c * float(x @ (v - w))
        assert lhs >= rhs - 1e-12


def test_empirical_zero_one():
    e1 = np.array([1.0, 0.0])
    sample = Sample(X=np.array([[1.0, 0.0], [-1.0, 0.0]]), y=np.array([1.0, 1.0]))
    assert empirical_zero_one(e1, sample) == 0.5
    clean = Sample(X=np.array([[0.5, 0.1], [-0.5, 0.3]]), y=np.array([1.0, -1.0]))
    assert empirical_zero_one(e1, clean) == 0.0
    assert empirical_zero_one(-e1, clean) == 1.0
    with pytest.raises(ValueError):
        empirical_zero_one(e1, Sample(X=np.empty((0, 2)), y=np.empty(0)))


def test_project_to_ball():
    np.testing.assert_allclose(project_to_ball([0.3, 0.4]), [0.3, 0.4])
    np.testing.assert_allclose(project_to_ball([3.0, 4.0]), [0.6, 0.8])
    np.testing.assert_allclose(project_to_ball(np.zeros(4)), np.zeros(4))


@given(st.lists(finite, min_size=1, max_size=8))
def test_project_idempotent_and_contractive(entries):
    w = np.array(entries)
    p = project_to_ball(w)
    assert np.linalg.norm(p) <= 1 + 1e-12
    np.testing.assert_allclose(project_to_ball(p), p, atol=1e-15)
    assert np.linalg.norm(p) <= np.linalg.norm(w) + 1e-12


def test_homogenize_example():
    np.testing.assert_allclose(
        homogenize_example(np.zeros(3)), [0, 0, 0, 1 / np.sqrt(2)]
    )
    np.testing.assert_allclose(
        homogenize_example([1.0, 0.0]), [1 / np.sqrt(2), 0, 1 / np.sqrt(2)]
    )


def test_homogenize_halfspace():
    np.testing.assert_allclose(homogenize_halfspace([1.0, 0.0], 0.0), [1, 0, 0])
    np.testing.assert_allclose(
        homogenize_halfspace([1.0, 0.0], 1.0), np.array([1, 0, 1]) / np.sqrt(2)
    )
    with pytest.raises(ValueError):
        homogenize_halfspace([0.0, 0.0], 0.0)


def test_homogenize_preserves_labels_and_margin(rng):
    for _ in range(200):
        d = rng.integers(1, 6)
        w = rng.normal(size=d)
        w /= max(1.0, np.linalg.norm(w))
        b = rng.uniform(-1, 1)
        x = rng.normal(size=d)
        x /= max(1.0, np.linalg.norm(x))
        wp = homogenize_halfspace(w, b)
        xp = homogenize_example(x)
        assert sign_conv(float(w @ x + b)) == sign_conv(float(wp @ xp))
        # expanded margin is |w.x + b| / (sqrt(2) sqrt(1 + b^2)) >= margin / 2
        assert abs(wp @ xp) >= abs(w @ x + b) / 2 - 1e-12
        assert np.linalg.norm(xp) <= 1 + 1e-12


def test_homogenize_margin_identity():
    # a point hit exactly at margin gamma keeps >= gamma/2 after expansion
    gamma, b = 0.3, 0.8
    w = np.array([1.0, 0.0])
    x = np.array([gamma - b, 0.0])  # w.x + b = gamma
    wp, xp = homogenize_halfspace(w, b), homogenize_example(x)
    assert abs(wp @ xp) == pytest.approx(gamma / (np.sqrt(2) * np.sqrt(1 + b * b)))
    assert abs(wp @ xp) >= gamma / 2 - 1e-12


class TestLinkFunctions:
    def test_beta_sign(self):
        lk = beta_sign(0.2)
        assert lk(0.7) == pytest.approx(0.6)
        assert lk(-0.7) == pytest.approx(-0.6)
        assert lk(0.0) == pytest.approx(0.6)  # sign(0) = +1
        assert lk.tau_hat == 0.0

    def test_linear(self):
        lk = linear_link()
        assert lk(0.37) == 0.37
        assert lk.tau_hat == 0.0

    def test_ramp_clip(self):
        lk = ramp_clip(4.0)
        assert lk(0.1) == pytest.approx(0.4)
        assert lk(0.5) == 1.0
        assert lk.tau_hat == 0.0

    def test_scaled_tanh(self):
        lk = scaled_tanh(2.0)
        assert lk(0.5) == pytest.approx(np.tanh(1.0))
        assert lk.tau_hat == pytest.approx(0.0, abs=1e-15)

    def test_shifted_ramp_asymmetry(self):
        lk = shifted_ramp(1.0, 0.1)
        # sigma(t) + sigma(-t) = 2 * shift wherever neither side clips
        assert lk.tau_hat == pytest.approx(0.2)

    def test_monotone_guard(self):
        with pytest.raises(ValueError):
            shifted_ramp(-1.0, 0.0)

    def test_range_and_monotone_on_grid(self):
        for lk in (beta_sign(0.1), linear_link(), ramp_clip(3.0), scaled_tanh(5.0),
                   shifted_ramp(2.0, -0.3)):
            grid = np.linspace(-1, 1, 1000)
            vals = lk(grid)
            assert np.all(np.diff(vals) >= -1e-12)
            assert np.all(np.abs(vals) <= 1 + 1e-12)

    def test_link_from_name(self):
        assert link_from_name("beta_sign", (0.3,)).kind == "beta_sign"
        with pytest.raises(ValueError):
            link_from_name("sigmoid")
