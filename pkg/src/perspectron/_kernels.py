"""Jitted inner loops. The stochastic iterations are strictly sequential,
so the hot path is compiled with numba; dot products use an explicit loop
to keep float operation order identical between the halfspace and GLM
kernels (the trajectory-equality reduction relies on this)."""

import numpy as np
from numba import njit


@njit(cache=True)
def _dot(w, x):
    acc = 0.0
    for j in range(w.shape[0]):
        acc += w[j] * x[j]
    return acc


@njit(cache=True, inline="always")
def _link_eval(code, p0, p1, t):
    if code == 0:  # beta_sign: p0 = 1 - 2*eta
        return p0 if t >= 0.0 else -p0
    if code == 1:  # linear
        return t
    if code == 2:  # ramp_clip: p0 = slope
        return min(1.0, max(-1.0, p0 * t))
    if code == 3:  # scaled_tanh: p0 = scale
        return np.tanh(p0 * t)
    # shifted_ramp: p0 = slope, p1 = shift
    return min(1.0, max(-1.0, p0 * t + p1))


@njit(cache=True)
def halfspace_iterates(X, Y, beta, gamma, lam, project):
    """Run T update steps from the zero vector; returns the T iterates
    w^1..w^T (w^1 = 0; the post-final-step vector is not pooled)."""
    T, d = X.shape
    W = np.empty((T, d))
    w = np.zeros(d)
    for t in range(T):
        for j in range(d):
            W[t, j] = w[j]
        dot = _dot(w, X[t])
        s = 1.0 if dot >= 0.0 else -1.0
        c = lam * (beta * s - Y[t]) / (abs(dot) + gamma)
        for j in range(d):
            w[j] -= c * X[t, j]
        if project:
            nrm = np.sqrt(_dot(w, w))
            if nrm > 1.0:
                for j in range(d):
                    w[j] /= nrm
    return W


@njit(cache=True)
def glm_iterates(X, Y, code, p0, p1, alpha_gamma, lam, project):
    """GLM variant: coefficient sigma(w.x) - y, denominator |w.x| + alpha*gamma."""
    T, d = X.shape
    W = np.empty((T, d))
    w = np.zeros(d)
    for t in range(T):
        for j in range(d):
            W[t, j] = w[j]
        dot = _dot(w, X[t])
        c = lam * (_link_eval(code, p0, p1, dot) - Y[t]) / (abs(dot) + alpha_gamma)
        for j in range(d):
            w[j] -= c * X[t, j]
        if project:
            nrm = np.sqrt(_dot(w, w))
            if nrm > 1.0:
                for j in range(d):
                    w[j] /= nrm
    return W


@njit(cache=True)
def perceptron_train(X, Y, passes):
    """Classical additive perceptron; returns the final weight vector."""
    n, d = X.shape
    w = np.zeros(d)
    for _ in range(passes):
        for i in range(n):
            dot = _dot(w, X[i])
            pred = 1.0 if dot >= 0.0 else -1.0
            if pred != Y[i]:
                for j in range(d):
                    w[j] += Y[i] * X[i, j]
    return w
