"""Separating-hyperplane certificate estimators and exact evaluators, the
two-outcome Leaky-ReLU identity checker, and the push-away operator with
its property suite.

Each certificate is the (empirical or exact) expectation of a per-sample
vector whose inner product with w - w* is bounded below whenever w is
sufficiently sub-optimal; the exact mode enumerates atoms times both label
outcomes, so the bounds are falsifiable with zero statistical slack.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .model import LinkFunction, leaky_relu, sign_conv, sign_pm
from .synth import GlmInstance, MassartInstance, Sample

_ZERO_DIVISOR_TOL = 1e-12


@dataclass
class CertificateReport:
    g: np.ndarray
    kind: str
    n_samples: Union[int, str]  # sample count or "exact"
    separation: Optional[float] = None  # g . (w - w*), when w* is known
    norm_bound: Optional[float] = None  # a-priori per-sample norm bound


def _enumeration_terms(inst):
    """(atoms, probs, clean_signs, rates) for exact-mode enumeration."""
    atoms = inst.marginal.atoms
    probs = inst.marginal.probs
    clean = sign_pm(atoms @ inst.w_star)
    rates = inst.atom_rates()
    return atoms, probs, clean, rates


def _exact_expectation(inst, w, coeff_fn, denom_fn):
    """E[coeff(w.x, y) * x / denom(|w.x|)] over atoms x both labels y."""
    atoms, probs, clean, rates = _enumeration_terms(inst)
    dots = atoms @ w
    denom = denom_fn(np.abs(dots))
    g = np.zeros(atoms.shape[1])
    for y_clean, weight in ((1.0, 1.0 - rates), (-1.0, rates)):
        # y_clean = +1 means label equals the clean sign.
        y = clean * y_clean
        g += ((probs * weight) * coeff_fn(dots, y) / denom) @ atoms
    return g


def _empirical_expectation(sample: Sample, w, coeff_fn, denom_fn, norm_bound=None):
    dots = sample.X @ w
    denom = denom_fn(np.abs(dots))
    contrib = (coeff_fn(dots, sample.y) / denom)[:, None] * sample.X
    if norm_bound is not None:
        norms = np.linalg.norm(contrib, axis=1)
        bad = np.nonzero(norms > norm_bound + 1e-9)[0]
        if len(bad):
            raise AssertionError(
                f"sample {bad[0]} contribution norm {norms[bad[0]]:.6g} exceeds {norm_bound:.6g}"
            )
    return contrib.mean(axis=0), len(sample)


def _guard_divisor(dots, what):
    small = np.nonzero(np.abs(dots) < _ZERO_DIVISOR_TOL)[0]
    if len(small):
        raise ValueError(
            f"{what}: point {small[0]} has w.x = {dots[small[0]]:.3e}; "
            "the unbounded certificate requires |w.x| bounded away from zero"
        )


def _finish(w, g, kind, n, w_star, norm_bound=None):
    sep = None if w_star is None else float(np.dot(g, np.asarray(w) - w_star))
    return CertificateReport(g=g, kind=kind, n_samples=n, separation=sep, norm_bound=norm_bound)


def cert_halfspace_unbounded(w, eta, source, w_star=None) -> CertificateReport:
    """E[grad leaky_relu_eta(-y w.x) / |w.x|] with the inverse-margin
    reweighting; valid for any marginal but unbounded in norm."""
    w = np.asarray(w, dtype=float)

    def coeff(dots, y):
        return 0.5 * ((1.0 - 2.0 * eta) * sign_pm(dots) - y)

    if isinstance(source, MassartInstance):
        dots = source.marginal.atoms @ w
        _guard_divisor(dots, "cert_halfspace_unbounded")
        g = _exact_expectation(source, w, coeff, lambda a: a)
        return _finish(w, g, "UnboundedHalfspace", "exact", source.w_star)
    _guard_divisor(source.X @ w, "cert_halfspace_unbounded")
    g, n = _empirical_expectation(source, w, coeff, lambda a: a)
    return _finish(w, g, "UnboundedHalfspace", n, w_star)


def cert_halfspace_bounded(w, beta, gamma, source, w_star=None) -> CertificateReport:
    """E[(beta*sign(w.x) - y) x / (|w.x| + gamma)]; per-sample norm <= 2/gamma."""
    if gamma <= 0:
        raise ValueError("cert_halfspace_bounded: gamma must be positive")
    w = np.asarray(w, dtype=float)

    def coeff(dots, y):
        return beta * sign_pm(dots) - y

    bound = 2.0 / gamma
    if isinstance(source, MassartInstance):
        g = _exact_expectation(source, w, coeff, lambda a: a + gamma)
        return _finish(w, g, "BoundedHalfspace", "exact", source.w_star, bound)
    g, n = _empirical_expectation(source, w, coeff, lambda a: a + gamma, norm_bound=bound)
    return _finish(w, g, "BoundedHalfspace", n, w_star, bound)


def cert_halfspace_bounded_mismatched(w, beta_tilde, gamma, source, w_star=None):
    """Same estimator with a surrogate beta; the separation bound holds for
    any beta_tilde in (1 - 2*eta - eps, 1 - 2*eta]."""
    rep = cert_halfspace_bounded(w, beta_tilde, gamma, source, w_star=w_star)
    rep.kind = "BoundedHalfspaceMismatched"
    return rep


def cert_glm_unbounded(w, link: LinkFunction, source, w_star=None) -> CertificateReport:
    """E[(sigma(w.x) - y) x / |w.x|]."""
    w = np.asarray(w, dtype=float)

    def coeff(dots, y):
        return link(dots) - y

    if isinstance(source, GlmInstance):
        dots = source.marginal.atoms @ w
        _guard_divisor(dots, "cert_glm_unbounded")
        g = _exact_expectation(source, w, coeff, lambda a: a)
        return _finish(w, g, "UnboundedGlm", "exact", source.w_star)
    _guard_divisor(source.X @ w, "cert_glm_unbounded")
    g, n = _empirical_expectation(source, w, coeff, lambda a: a)
    return _finish(w, g, "UnboundedGlm", n, w_star)


def cert_glm_bounded(w, link: LinkFunction, gamma, alpha, source, w_star=None):
    """E[(sigma(w.x) - y) x / (|w.x| + alpha*gamma)]; per-sample norm
    <= 2 / (alpha*gamma). Separation >= eps for alpha = eps / (2 - eps)."""
    if gamma <= 0 or not 0.0 < alpha <= 1.0:
        raise ValueError("cert_glm_bounded: need gamma > 0 and alpha in (0, 1]")
    w = np.asarray(w, dtype=float)
    ag = alpha * gamma

    def coeff(dots, y):
        return link(dots) - y

    bound = 2.0 / ag
    if isinstance(source, GlmInstance):
        g = _exact_expectation(source, w, coeff, lambda a: a + ag)
        return _finish(w, g, "BoundedGlm", "exact", source.w_star, bound)
    g, n = _empirical_expectation(source, w, coeff, lambda a: a + ag, norm_bound=bound)
    return _finish(w, g, "BoundedGlm", n, w_star, bound)


# ---------------------------------------------------------------------------
# Push-away operator


def push_away(w, gamma, x) -> np.ndarray:
    """Identity when |w.x| >= gamma/3; otherwise shifts x by (gamma/3) in
    the direction sign(w.x) * w_hat and renormalizes to the sphere."""
    w = np.asarray(w, dtype=float)
    x = np.asarray(x, dtype=float)
    wn = np.linalg.norm(w)
    if wn == 0.0:
        raise ValueError("push_away: w must be nonzero")
    dot = float(np.dot(w, x))
    if abs(dot) >= gamma / 3.0:
        return x.copy()
    shifted = x + (gamma / 3.0) * sign_conv(dot) * (w / wn)
    return shifted / np.linalg.norm(shifted)


def push_away_batch(W, gammas, X) -> np.ndarray:
    """Vectorized push_away over rows of W, X and entries of gammas."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    X = np.atleast_2d(np.asarray(X, dtype=float))
    gammas = np.broadcast_to(np.asarray(gammas, dtype=float), (len(X),))
    wn = np.linalg.norm(W, axis=1)
    if np.any(wn == 0.0):
        raise ValueError("push_away_batch: w must be nonzero")
    dots = np.einsum("ij,ij->i", W, X)
    move = np.abs(dots) < gammas / 3.0
    out = X.copy()
    if np.any(move):
        shift = (gammas[move] / 3.0 * sign_pm(dots[move]))[:, None] * (
            W[move] / wn[move][:, None]
        )
        shifted = X[move] + shift
        out[move] = shifted / np.linalg.norm(shifted, axis=1, keepdims=True)
    return out


def push_away_property_check(w, gamma, x, v=None) -> dict:
    """Evaluate both push-away guarantees on a concrete triple: the enforced
    margin |w.T(x)| >= (gamma/6)||w|| with sign preservation against w, and
    (when v with |v.x| >= gamma is supplied) sign preservation against v
    with |v.T(x)| >= gamma/3. Returns pass flags with margins."""
    w = np.asarray(w, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.linalg.norm(w) == 0.0:
        raise ValueError("push_away_property_check: w must be nonzero")
    t = push_away(w, gamma, x)
    wn = np.linalg.norm(w)
    wt = float(np.dot(w, t))
    report = {
        "margin_vs_w": abs(wt) - (gamma / 6.0) * wn,
        "margin_vs_w_ok": abs(wt) >= (gamma / 6.0) * wn - 1e-12,
        "sign_vs_w_ok": sign_conv(wt) == sign_conv(float(np.dot(w, x))),
    }
    if v is not None:
        v = np.asarray(v, dtype=float)
        vx = float(np.dot(v, x))
        if abs(vx) < gamma - 1e-12:
            raise ValueError("push_away_property_check: v requires |v.x| >= gamma")
        if np.linalg.norm(v) > 1.0 + 1e-12 or np.linalg.norm(x) > 1.0 + 1e-12:
            raise ValueError("push_away_property_check: v, x must lie in the unit ball")
        vt = float(np.dot(v, t))
        report["margin_vs_v"] = abs(vt) - gamma / 3.0
        report["margin_vs_v_ok"] = abs(vt) >= gamma / 3.0 - 1e-12
        report["sign_vs_v_ok"] = sign_conv(vt) == sign_conv(vx)
    return report


def eq4_identity_check(w, x, flip_prob, lam):
    """Two-outcome Leaky-ReLU identity: E_y[l_lam(-y w.x)] equals
    (flip_prob - lam) * |w.x|. Returns (lhs, rhs, |lhs - rhs|)."""
    if not 0.0 <= flip_prob <= 1.0:
        raise ValueError("eq4_identity_check: flip_prob must lie in [0, 1]")
    m = float(np.dot(np.asarray(w, dtype=float), np.asarray(x, dtype=float)))
    s = sign_conv(m)
    lhs = (1.0 - flip_prob) * leaky_relu(lam, -s * m) + flip_prob * leaky_relu(lam, s * m)
    rhs = (flip_prob - lam) * abs(m)
    return lhs, rhs, abs(lhs - rhs)
