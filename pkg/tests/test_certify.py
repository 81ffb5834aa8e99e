import numpy as np
import pytest

from perspectron.certify import (
    cert_glm_bounded,
    cert_glm_unbounded,
    cert_halfspace_bounded,
    cert_halfspace_bounded_mismatched,
    cert_halfspace_unbounded,
    eq4_identity_check,
    push_away,
    push_away_batch,
    push_away_property_check,
)
from perspectron.model import linear_link
from perspectron.synth import (
    Constant,
    FiniteAtoms,
    GlmInstance,
    MassartInstance,
    PerAtom,
    Sample,
    sample_massart,
)

E1 = np.array([1.0, 0.0])


def two_atom_clean(gamma=0.5):
    s = np.sqrt(1 - gamma**2)
    return MassartInstance(
        w_star=E1,
        gamma=gamma,
        marginal=FiniteAtoms(
            atoms=np.array([[gamma, s], [gamma, -s]]), probs=np.array([0.5, 0.5])
        ),
        noise=Constant(0.0),
    )


def one_atom_glm():
    return GlmInstance(
        w_star=E1,
        gamma=0.5,
        marginal=FiniteAtoms(atoms=np.array([[0.5, 0.0]]), probs=np.array([1.0])),
        link=linear_link(),
        noise_fraction=0.0,
    )


class TestHalfspaceCertificates:
    def test_bounded_worked_example(self):
        inst = two_atom_clean()
        rep = cert_halfspace_bounded(-E1, beta=1.0, gamma=0.5, source=inst)
        np.testing.assert_allclose(rep.g, [-1.0, 0.0], atol=1e-15)
        assert rep.separation == pytest.approx(2.0)
        assert rep.n_samples == "exact"
        assert rep.norm_bound == pytest.approx(4.0)

    def test_bounded_vanishes_at_truth(self):
        inst = two_atom_clean()
        rep = cert_halfspace_bounded(E1, beta=1.0, gamma=0.5, source=inst)
        np.testing.assert_allclose(rep.g, 0.0, atol=1e-15)
        assert rep.separation == pytest.approx(0.0)

    def test_unbounded_worked_example(self):
        inst = two_atom_clean()
        rep = cert_halfspace_unbounded(-E1, eta=0.0, source=inst)
        np.testing.assert_allclose(rep.g, [-1.0, 0.0], atol=1e-15)
        assert rep.separation == pytest.approx(2.0)

    def test_unbounded_rejects_zero_divisor(self):
        inst = MassartInstance(
            w_star=E1,
            gamma=0.5,
            marginal=FiniteAtoms(atoms=np.array([[0.5, 0.0]]), probs=np.array([1.0])),
            noise=Constant(0.0),
        )
        with pytest.raises(ValueError, match="point 0"):
            cert_halfspace_unbounded(np.array([0.0, 1.0]), eta=0.0, source=inst)

    def test_unbounded_affine_in_eta(self):
        # the coefficient is affine in eta, so g(1/2) = (g(0) + g(1)) / 2
        inst = two_atom_clean()
        w = np.array([0.3, -0.7])
        g0 = cert_halfspace_unbounded(w, eta=0.0, source=inst).g
        g1 = cert_halfspace_unbounded(w, eta=1.0, source=inst).g
        gh = cert_halfspace_unbounded(w, eta=0.5, source=inst).g
        np.testing.assert_allclose(gh, (g0 + g1) / 2, atol=1e-15)

    def test_mismatched_equals_bounded_at_true_beta(self):
        inst = two_atom_clean()
        w = np.array([-0.6, 0.2])
        a = cert_halfspace_bounded(w, beta=0.8, gamma=0.5, source=inst)
        b = cert_halfspace_bounded_mismatched(w, beta_tilde=0.8, gamma=0.5, source=inst)
        np.testing.assert_array_equal(a.g, b.g)
        assert b.kind == "BoundedHalfspaceMismatched"
        assert a.kind == "BoundedHalfspace"

    def test_exact_matches_empirical(self, rng):
        inst = MassartInstance(
            w_star=E1,
            gamma=0.4,
            marginal=FiniteAtoms(
                atoms=np.array([[0.4, 0.6], [0.5, -0.5], [-0.9, 0.1]]),
                probs=np.array([0.3, 0.3, 0.4]),
            ),
            noise=PerAtom(rates_per_atom=np.array([0.1, 0.3, 0.0])),
        )
        n = 2 * 10**5
        sample = sample_massart(inst, n, seed=13)
        for _ in range(5):
            w = rng.normal(size=2)
            exact = cert_halfspace_bounded(w, beta=0.6, gamma=0.4, source=inst)
            emp = cert_halfspace_bounded(
                w, beta=0.6, gamma=0.4, source=sample, w_star=inst.w_star
            )
            assert emp.n_samples == n
            np.testing.assert_allclose(emp.g, exact.g, atol=0.05)
            assert abs(emp.separation - exact.separation) < 0.1

    def test_empirical_norm_bound_assertion_names_sample(self):
        bad = Sample(X=np.array([[3.0, 0.0]]), y=np.array([-1.0]))
        with pytest.raises(AssertionError, match="sample 0"):
            cert_halfspace_bounded(np.array([0.0, 1.0]), beta=0.6, gamma=0.3, source=bad)

    def test_bounded_requires_positive_gamma(self):
        with pytest.raises(ValueError):
            cert_halfspace_bounded(E1, beta=1.0, gamma=0.0, source=two_atom_clean())


class TestGlmCertificates:
    def test_unbounded_single_atom(self):
        rep = cert_glm_unbounded(-E1, linear_link(), one_atom_glm())
        np.testing.assert_allclose(rep.g, [-1.5, 0.0], atol=1e-15)
        assert rep.separation == pytest.approx(3.0)

    def test_bounded_single_atom(self):
        rep = cert_glm_bounded(-E1, linear_link(), gamma=0.5, alpha=0.5, source=one_atom_glm())
        np.testing.assert_allclose(rep.g, [-1.0, 0.0], atol=1e-15)
        assert rep.separation == pytest.approx(2.0)
        assert rep.norm_bound == pytest.approx(8.0)

    def test_bounded_vanishes_at_truth(self):
        # at full noise fraction E[y | x] = sigma(w*.x), so at w = w* the
        # coefficient has mean zero at every atom
        inst = GlmInstance(
            w_star=E1,
            gamma=0.5,
            marginal=FiniteAtoms(atoms=np.array([[0.5, 0.0]]), probs=np.array([1.0])),
            link=linear_link(),
            noise_fraction=1.0,
        )
        rep = cert_glm_bounded(E1, linear_link(), gamma=0.5, alpha=0.5, source=inst)
        np.testing.assert_allclose(rep.g, 0.0, atol=1e-15)

    def test_unbounded_rejects_zero_divisor(self):
        with pytest.raises(ValueError, match="point 0"):
            cert_glm_unbounded(np.array([0.0, 1.0]), linear_link(), one_atom_glm())

    def test_bounded_validates_alpha(self):
        with pytest.raises(ValueError):
            cert_glm_bounded(E1, linear_link(), gamma=0.5, alpha=0.0, source=one_atom_glm())
        with pytest.raises(ValueError):
            cert_glm_bounded(E1, linear_link(), gamma=0.5, alpha=1.5, source=one_atom_glm())


class TestPushAway:
    def test_moves_point_inside_dead_zone(self):
        out = push_away(np.array([1.0, 0.0]), 0.3, np.array([0.05, 0.9]))
        np.testing.assert_allclose(out, np.array([0.15, 0.9]) / np.sqrt(0.8325))
        np.testing.assert_allclose(out, [0.16439899, 0.98639396], atol=1e-8)
        assert np.linalg.norm(out) == pytest.approx(1.0)

    def test_identity_outside_dead_zone(self):
        x = np.array([0.5, 0.5])
        out = push_away(np.array([1.0, 0.0]), 0.3, x)
        np.testing.assert_array_equal(out, x)
        assert out is not x  # a copy, not an alias

    def test_boundary_counts_as_outside(self):
        # |w.x| = 0.1 = gamma/3 exactly: no move (threshold is >=)
        x = np.array([0.05, 0.9])
        out = push_away(np.array([2.0, 0.0]), 0.3, x)
        np.testing.assert_array_equal(out, x)

    def test_shift_uses_unit_direction(self):
        # the shift magnitude is gamma/3 along w/||w||, independent of ||w||
        # (the dead-zone test |w.x| < gamma/3 itself is scale sensitive)
        x = np.array([0.01, 0.9])
        a = push_away(np.array([1.0, 0.0]), 0.3, x)
        b = push_away(np.array([2.0, 0.0]), 0.3, x)
        np.testing.assert_allclose(a, b)
        np.testing.assert_allclose(a, np.array([0.11, 0.9]) / np.hypot(0.11, 0.9))

    def test_zero_w_rejected(self):
        with pytest.raises(ValueError):
            push_away(np.zeros(2), 0.3, E1)
        with pytest.raises(ValueError):
            push_away_batch(np.zeros((1, 2)), 0.3, np.atleast_2d(E1))

    def test_batch_matches_scalar(self, rng):
        n, d = 500, 6
        W = rng.normal(size=(n, d))
        X = rng.normal(size=(n, d))
        X /= np.maximum(1.0, np.linalg.norm(X, axis=1, keepdims=True))
        gammas = rng.uniform(0.05, 0.9, size=n)
        out = push_away_batch(W, gammas, X)
        for i in range(n):
            np.testing.assert_allclose(out[i], push_away(W[i], gammas[i], X[i]), atol=1e-15)

    def test_output_stays_in_unit_ball(self, rng):
        for _ in range(200):
            d = rng.integers(2, 8)
            w = rng.normal(size=d)
            x = rng.normal(size=d)
            x /= max(1.0, np.linalg.norm(x))
            out = push_away(w, rng.uniform(0.05, 1.0), x)
            assert np.linalg.norm(out) <= 1 + 1e-12

    def test_property_check_random_triples(self, rng):
        # the (gamma/6)||w|| margin guarantee needs ||w|| <= 2: in the
        # identity branch |w.x| >= gamma/3 only dominates (gamma/6)||w||
        # up to that norm, with ||w|| = 2 the extremal case
        for _ in range(500):
            d = rng.integers(2, 6)
            w = rng.normal(size=d)
            w *= rng.uniform(0.05, 2.0) / np.linalg.norm(w)
            x = rng.normal(size=d)
            x /= np.linalg.norm(x)
            gamma = rng.uniform(0.05, 0.9)
            rep = push_away_property_check(w, gamma, x)
            assert rep["margin_vs_w_ok"], rep
            assert rep["sign_vs_w_ok"], rep

    def test_property_check_with_reference_vector(self, rng):
        for _ in range(500):
            d = rng.integers(2, 6)
            gamma = rng.uniform(0.05, 0.5)
            v = rng.normal(size=d)
            v /= np.linalg.norm(v)
            # x on the sphere with |v.x| >= gamma (rejection)
            while True:
                x = rng.normal(size=d)
                x /= np.linalg.norm(x)
                if abs(v @ x) >= gamma:
                    break
            w = rng.normal(size=d)
            rep = push_away_property_check(w, gamma, x, v=v)
            assert rep["margin_vs_v_ok"], rep
            assert rep["sign_vs_v_ok"], rep

    def test_property_check_validates_v(self):
        w, x = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        with pytest.raises(ValueError, match="v.x"):
            push_away_property_check(w, 0.5, x, v=np.array([1.0, 0.0]))
        with pytest.raises(ValueError, match="unit ball"):
            push_away_property_check(w, 0.5, x, v=np.array([0.0, 2.0]))


class TestTwoOutcomeIdentity:
    def test_hand_values(self):
        lhs, rhs, diff = eq4_identity_check(E1, np.array([0.8, 0.3]), 0.3, 0.1)
        assert rhs == pytest.approx(0.16)
        assert diff < 1e-15

    def test_vanishes_when_flip_equals_lam(self):
        lhs, rhs, diff = eq4_identity_check(E1, np.array([0.7, 0.0]), 0.25, 0.25)
        assert lhs == pytest.approx(0.0)
        assert rhs == 0.0

    def test_zero_margin(self):
        lhs, rhs, diff = eq4_identity_check(E1, np.array([0.0, 0.9]), 0.3, 0.1)
        assert lhs == 0.0 and rhs == 0.0

    def test_identity_on_random_triples(self, rng):
        for _ in range(1000):
            d = rng.integers(1, 6)
            w, x = rng.normal(size=(2, d))
            p = rng.random()
            lam = rng.random() * 0.5
            _, _, diff = eq4_identity_check(w, x, p, lam)
            assert diff < 1e-12

    def test_rejects_bad_flip_prob(self):
        with pytest.raises(ValueError):
            eq4_identity_check(E1, E1, 1.5, 0.1)
