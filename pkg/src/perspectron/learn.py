"""Learners: the Perspectron and GLMPerspectron stochastic iterations,
restart blocks, streamed hypothesis selection, theory-prescribed parameter
derivation, the unknown-noise-rate grid wrapper and a naive perceptron
baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .model import Hypothesis, LinkFunction, sign_conv, sign_pm
from .synth import Sample

# Chunk size for scoring iterates against the validation set; keeps memory
# bounded while staying in BLAS-friendly blocks.
_SCORE_CHUNK = 65536


@dataclass(frozen=True)
class TrainConfig:
    epsilon: float
    delta: float
    gamma: float
    T1: int
    T2: int
    lam: float
    N: int
    eta: Optional[float] = None  # absent => unknown-eta grid mode
    alpha: Optional[float] = None  # GLM only
    link: Optional[LinkFunction] = None  # GLM only
    project_each_step: bool = False

    def __post_init__(self):
        if not (self.T1 >= self.N >= 1):
            raise ValueError("TrainConfig: need T1 >= N >= 1")
        if self.T2 < 1:
            raise ValueError("TrainConfig: need T2 >= 1")
        if self.lam <= 0:
            raise ValueError("TrainConfig: need lambda > 0")
        if not 0.0 < self.delta < 0.5:
            raise ValueError("TrainConfig: delta must lie in (0, 1/2)")
        if self.alpha is not None and not 0.0 < self.alpha <= 1.0:
            raise ValueError("TrainConfig: alpha must lie in (0, 1]")

    @property
    def steps_per_restart(self) -> int:
        return math.ceil(self.T1 / self.N)


@dataclass
class TrainResult:
    w_hat: Hypothesis
    validation_error: float
    pool_size: int
    samples_consumed: int
    per_restart_best: list = field(default_factory=list)


def default_params(epsilon: float, gamma: float, delta: float, mode: str = "halfspace"):
    """Theory-prescribed (T1, T2, lambda, N, alpha).

    halfspace: T = ceil(16 / (eps^2 gamma^2)), lambda = gamma / (2 sqrt(T)).
    glm:       T = ceil(32 / (eps^4 gamma^2)),
               lambda = gamma*eps / ((2 - eps) sqrt(2 T)), alpha = eps / (2 - eps).
    Both: N = ceil(log2(2 / delta)), T1 = N*T, T2 = ceil((8 / eps^2) ln(4 T1 / delta)).
    """
    if not 0.0 < epsilon <= 1.0 or not 0.0 < gamma <= 1.0:
        raise ValueError("default_params: epsilon, gamma must lie in (0, 1]")
    if not 0.0 < delta < 0.5:
        raise ValueError("default_params: delta must lie in (0, 1/2)")
    N = math.ceil(math.log2(2.0 / delta))
    alpha = None
    if mode == "halfspace":
        T = math.ceil(16.0 / (epsilon**2 * gamma**2))
        lam = gamma / (2.0 * math.sqrt(T))
    elif mode == "glm":
        T = math.ceil(32.0 / (epsilon**4 * gamma**2))
        alpha = epsilon / (2.0 - epsilon)
        lam = gamma * epsilon / ((2.0 - epsilon) * math.sqrt(2.0 * T))
    else:
        raise ValueError(f"default_params: unknown mode {mode!r}")
    T1 = N * T
    T2 = math.ceil((8.0 / epsilon**2) * math.log(4.0 * T1 / delta))
    return T1, T2, lam, N, alpha


def config_from_theory(
    epsilon,
    gamma,
    delta,
    eta=None,
    link: Optional[LinkFunction] = None,
    mode: str = "halfspace",
    T1=None,
    T2=None,
    lam=None,
    project_each_step=False,
) -> TrainConfig:
    """TrainConfig with theory defaults, individually overridable."""
    dT1, dT2, dlam, N, alpha = default_params(epsilon, gamma, delta, mode=mode)
    return TrainConfig(
        epsilon=epsilon,
        delta=delta,
        gamma=gamma,
        T1=T1 if T1 is not None else dT1,
        T2=T2 if T2 is not None else dT2,
        lam=lam if lam is not None else dlam,
        N=N,
        eta=eta,
        alpha=alpha,
        link=link,
        project_each_step=project_each_step,
    )


# ---------------------------------------------------------------------------
# Single steps (reference implementations of the update rules)


def perspectron_step(w, x, y, beta, gamma, lam):
    """w - lam * (beta*sign(w.x) - y) * x / (|w.x| + gamma); no projection."""
    if gamma <= 0:
        raise ValueError("perspectron_step: gamma must be positive")
    w = np.asarray(w, dtype=float)
    x = np.asarray(x, dtype=float)
    dot = float(np.dot(w, x))
    c = lam * (beta * sign_conv(dot) - y) / (abs(dot) + gamma)
    return w - c * x


def glm_step(w, x, y, link: LinkFunction, alpha_gamma, lam):
    """w - lam * (sigma(w.x) - y) * x / (|w.x| + alpha*gamma)."""
    if alpha_gamma <= 0:
        raise ValueError("glm_step: alpha_gamma must be positive")
    w = np.asarray(w, dtype=float)
    x = np.asarray(x, dtype=float)
    dot = float(np.dot(w, x))
    c = lam * (link(dot) - y) / (abs(dot) + alpha_gamma)
    return w - c * x


def run_restart(stream, T: int, step):
    """Generator over the iterates w^1..w^T of one restart: starts at the
    zero vector and applies `step(w, x, y)` once per example. The iterate
    *before* each update is yielded; the post-final-step vector is not.
    """
    it = iter(stream)
    w = None
    for t in range(T):
        try:
            ex = next(it)
        except StopIteration:
            raise ValueError(f"run_restart: stream exhausted after {t} of {T} examples")
        if w is None:
            w = np.zeros(len(ex.x))
        yield w.copy()
        w = step(w, ex.x, ex.y)


def select_hypothesis(candidates, validation) -> Hypothesis:
    """Candidate with minimum empirical zero-one error on the validation
    set; ties broken by earliest generation order."""
    if hasattr(validation, "X"):
        vX, vy = validation.X, validation.y
    else:
        vX = np.array([ex.x for ex in validation], dtype=float)
        vy = np.array([ex.y for ex in validation], dtype=float)
    if len(vy) == 0:
        raise ValueError("select_hypothesis: empty validation set")
    best_w, best_err = None, None
    for cand in candidates:
        w = cand.w if isinstance(cand, Hypothesis) else np.asarray(cand, dtype=float)
        err = int(np.count_nonzero(sign_pm(vX @ w) != vy))
        if best_err is None or err < best_err:
            best_w, best_err = w.copy(), err
    if best_w is None:
        raise ValueError("select_hypothesis: empty candidate pool")
    return Hypothesis(best_w)


# ---------------------------------------------------------------------------
# Streamed selection against a deduplicated validation set


def _dedup_validation(vX, vy):
    rows = np.column_stack([vX, vy])
    uniq, counts = np.unique(rows, axis=0, return_counts=True)
    return (
        np.ascontiguousarray(uniq[:, :-1]),
        uniq[:, -1],
        counts.astype(float),
    )


def _score_block(W, vX, vy, counts):
    """Weighted validation mistakes for each iterate row of W."""
    errs = np.empty(len(W))
    for lo in range(0, len(W), _SCORE_CHUNK):
        block = W[lo : lo + _SCORE_CHUNK]
        pred = sign_pm(block @ vX.T)
        errs[lo : lo + _SCORE_CHUNK] = (pred != vy) @ counts
    return errs


def _block_lengths(T1: int, N: int):
    T = math.ceil(T1 / N)
    return [min(T, T1 - j * T) for j in range(N) if T1 - j * T > 0]


def _train(config: TrainConfig, data: Sample, mode: str, beta=None) -> TrainResult:
    need = config.T1 + config.T2
    if len(data) < need:
        raise ValueError(f"training needs {need} examples, got {len(data)}")
    X = np.ascontiguousarray(data.X, dtype=float)
    Y = np.ascontiguousarray(data.y, dtype=float)
    vX, vy, counts = _dedup_validation(
        X[config.T1 : config.T1 + config.T2], Y[config.T1 : config.T1 + config.T2]
    )
    total = counts.sum()

    if mode == "halfspace":
        if beta is None:
            if config.eta is None:
                raise ValueError("halfspace training needs eta (or use train_unknown_eta)")
            beta = 1.0 - 2.0 * config.eta
    else:
        if config.link is None:
            raise ValueError("glm training needs a link function")
        alpha = config.alpha
        if alpha is None:
            alpha = config.epsilon / (2.0 - config.epsilon)
        code = config.link.code
        p0, p1 = config.link.packed_params
        alpha_gamma = alpha * config.gamma

    best_w, best_err = None, None
    per_restart_best = []
    lo = 0
    for length in _block_lengths(config.T1, config.N):
        Xb, Yb = X[lo : lo + length], Y[lo : lo + length]
        lo += length
        if mode == "halfspace":
            W = _kernels.halfspace_iterates(
                Xb, Yb, beta, config.gamma, config.lam, config.project_each_step
            )
        else:
            W = _kernels.glm_iterates(
                Xb, Yb, code, p0, p1, alpha_gamma, config.lam, config.project_each_step
            )
        errs = _score_block(W, vX, vy, counts)
        j = int(np.argmin(errs))
        per_restart_best.append(float(errs[j] / total))
        if best_err is None or errs[j] < best_err:
            best_w, best_err = W[j].copy(), float(errs[j])

    return TrainResult(
        w_hat=Hypothesis(best_w),
        validation_error=best_err / total,
        pool_size=config.T1,
        samples_consumed=config.T1 + config.T2,
        per_restart_best=per_restart_best,
    )


def train_halfspace(config: TrainConfig, data: Sample) -> TrainResult:
    """Perspectron end to end: N restart blocks over the first T1 examples,
    streamed selection over all pooled iterates on the last T2 examples."""
    return _train(config, data, "halfspace")


def train_glm(config: TrainConfig, data: Sample) -> TrainResult:
    """GLMPerspectron: as train_halfspace with the link-based update and
    denominator |w.x| + alpha*gamma (alpha defaults to eps / (2 - eps))."""
    return _train(config, data, "glm")


def beta_grid(epsilon: float):
    """{0, eps, 2*eps, ..., 1}: spacing eps guarantees a grid point inside
    (1 - 2*eta - eps, 1 - 2*eta] for every eta."""
    ks = int(math.floor(1.0 / epsilon + 1e-12))
    grid = [k * epsilon for k in range(ks + 1)]
    if grid[-1] < 1.0 - 1e-12:
        grid.append(1.0)
    else:
        grid[-1] = 1.0
    return grid


def train_unknown_eta(config: TrainConfig, data: Sample) -> TrainResult:
    """Unknown noise rate: reuse the same T1 + T2 samples for every grid
    value of beta, pool the per-run winners, and select once more on the
    shared validation set."""
    if config.eta is not None:
        raise ValueError("train_unknown_eta: config.eta must be absent")
    winners = []
    for b in beta_grid(config.epsilon):
        winners.append(_train(config, data, "halfspace", beta=b))
    best = min(winners, key=lambda r: r.validation_error)  # ties: earliest
    return TrainResult(
        w_hat=best.w_hat,
        validation_error=best.validation_error,
        pool_size=config.T1 * len(winners),
        samples_consumed=config.T1 + config.T2,
        per_restart_best=[r.validation_error for r in winners],
    )


def baseline_perceptron(data: Sample, passes: int) -> Hypothesis:
    """Classical mistake-driven perceptron; comparison baseline only."""
    if len(data) == 0:
        raise ValueError("baseline_perceptron: empty data")
    if passes <= 0:
        return Hypothesis(np.zeros(data.X.shape[1]))
    w = _kernels.perceptron_train(
        np.ascontiguousarray(data.X, dtype=float),
        np.ascontiguousarray(data.y, dtype=float),
        passes,
    )
    return Hypothesis(w)
