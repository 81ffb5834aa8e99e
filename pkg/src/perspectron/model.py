"""Core primitives: sign convention, Leaky-ReLU surrogate, link functions,
ball projection and homogenization of biased halfspaces.

Everything here is a pure function of its inputs; the sign convention
sign(0) = +1 is applied uniformly through `sign_conv` / `sign_pm`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Grid sizes used to validate link functions at construction time.
_MONOTONE_GRID = 1000
_ASYMMETRY_GRID = 1000

# Numeric codes for the shipped link kinds, shared with the jitted kernels.
LINK_CODES = {
    "beta_sign": 0,
    "linear": 1,
    "ramp_clip": 2,
    "scaled_tanh": 3,
    "shifted_ramp": 4,
}


def sign_conv(t: float) -> int:
    """Sign with the tie convention sign(0) = +1."""
    return 1 if t >= 0 else -1


def sign_pm(t: np.ndarray) -> np.ndarray:
    """Vectorized sign_conv, returning float64 entries in {+1, -1}."""
    return np.where(np.asarray(t) >= 0.0, 1.0, -1.0)


def leaky_relu(lam: float, t: float) -> float:
    """(1 - lam) * max(0, t) - lam * max(0, -t)."""
    return (1.0 - lam) * t if t >= 0 else lam * t


def leaky_relu_coeff(lam: float, w: np.ndarray, x: np.ndarray, y: int) -> float:
    """Scalar c such that c * x is a subgradient of the Leaky-ReLU margin
    loss at w; equals (1/2)((1 - 2*lam) * sign(w.x) - y)."""
    return 0.5 * ((1.0 - 2.0 * lam) * sign_conv(float(np.dot(w, x))) - y)


def empirical_zero_one(w: np.ndarray, sample) -> float:
    """Fraction of examples with sign(w.x) != y."""
    X, y = _as_arrays(sample)
    if len(y) == 0:
        raise ValueError("empirical_zero_one: empty sample")
    pred = sign_pm(X @ np.asarray(w, dtype=float))
    return float(np.count_nonzero(pred != y)) / len(y)


def _as_arrays(sample):
    """Accept a Sample-like object (with .X, .y) or a list of examples."""
    if hasattr(sample, "X") and hasattr(sample, "y"):
        return sample.X, sample.y
    X = np.array([ex.x for ex in sample], dtype=float)
    y = np.array([ex.y for ex in sample], dtype=float)
    return X, y


def project_to_ball(w: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the unit ball: min(1, 1/||w||) * w."""
    w = np.asarray(w, dtype=float)
    n = float(np.linalg.norm(w))
    if n <= 1.0:
        return w.copy()
    return w / n


def homogenize_example(x: np.ndarray) -> np.ndarray:
    """Feature expansion x -> (x, 1) / sqrt(2); stays in the unit ball."""
    x = np.asarray(x, dtype=float)
    return np.append(x, 1.0) / np.sqrt(2.0)


def homogenize_halfspace(w: np.ndarray, b: float) -> np.ndarray:
    """Lift a biased halfspace sign(w.x + b) to the homogeneous direction
    (w, b) / sqrt(1 + b^2) in dimension d + 1.

    Together with homogenize_example this preserves labels and keeps a
    margin of at least gamma / 2.
    """
    w = np.asarray(w, dtype=float)
    if np.linalg.norm(w) == 0.0 and b == 0.0:
        raise ValueError("homogenize_halfspace: w = 0 and b = 0 give no direction")
    return np.append(w, b) / np.sqrt(1.0 + b * b)


@dataclass(frozen=True)
class Hypothesis:
    """A halfspace direction; the zero vector is the initialization state."""

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if not np.all(np.isfinite(w)):
            raise ValueError("Hypothesis: entries must be finite")
        object.__setattr__(self, "w", w)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return sign_pm(np.atleast_2d(X) @ self.w)


@dataclass(frozen=True)
class LinkFunction:
    """A non-decreasing map [-1, 1] -> [-1, 1].

    Monotonicity and range are validated on a fixed grid at construction;
    the measured asymmetry tau_hat = max_t |sigma(t) + sigma(-t)| over a
    grid of t in (0, 1] is recorded. t = 0 is excluded from the asymmetry
    grid: the sign(0) = +1 tie rule would otherwise charge beta_sign a
    spurious asymmetry on a measure-zero point.
    """

    kind: str
    params: tuple = ()
    tau_hat: float = field(init=False, default=0.0)

    def __post_init__(self):
        if self.kind not in LINK_CODES:
            raise ValueError(f"unknown link kind: {self.kind!r}")
        grid = np.linspace(-1.0, 1.0, _MONOTONE_GRID)
        vals = self(grid)
        if np.any(np.diff(vals) < -1e-12):
            raise ValueError(f"link {self.kind!r} is not non-decreasing on the grid")
        if np.any(np.abs(vals) > 1.0 + 1e-12):
            raise ValueError(f"link {self.kind!r} leaves the range [-1, 1]")
        t = np.linspace(1.0 / _ASYMMETRY_GRID, 1.0, _ASYMMETRY_GRID)
        tau = float(np.max(np.abs(self(t) + self(-t))))
        object.__setattr__(self, "tau_hat", tau)

    @property
    def code(self) -> int:
        return LINK_CODES[self.kind]

    @property
    def packed_params(self) -> tuple:
        """(p0, p1) as consumed by the jitted kernels."""
        if self.kind == "beta_sign":
            return (1.0 - 2.0 * self.params[0], 0.0)
        p = tuple(self.params) + (0.0, 0.0)
        return (float(p[0]), float(p[1]))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "beta_sign":
            out = (1.0 - 2.0 * self.params[0]) * sign_pm(t)
        elif self.kind == "linear":
            out = t.copy()
        elif self.kind == "ramp_clip":
            out = np.clip(self.params[0] * t, -1.0, 1.0)
        elif self.kind == "scaled_tanh":
            out = np.tanh(self.params[0] * t)
        else:  # shifted_ramp
            out = np.clip(self.params[0] * t + self.params[1], -1.0, 1.0)
        return out if out.ndim else float(out)


def beta_sign(eta: float) -> LinkFunction:
    """sigma(t) = (1 - 2*eta) * sign(t); specializes a GLM to a Massart
    halfspace with constant noise rate eta."""
    if not 0.0 <= eta <= 0.5:
        raise ValueError("beta_sign: eta must lie in [0, 1/2]")
    return LinkFunction("beta_sign", (float(eta),))


def linear_link() -> LinkFunction:
    return LinkFunction("linear")


def ramp_clip(slope: float) -> LinkFunction:
    if slope < 0:
        raise ValueError("ramp_clip: slope must be nonnegative")
    return LinkFunction("ramp_clip", (float(slope),))


def scaled_tanh(scale: float) -> LinkFunction:
    if scale < 0:
        raise ValueError("scaled_tanh: scale must be nonnegative")
    return LinkFunction("scaled_tanh", (float(scale),))


def shifted_ramp(slope: float, shift: float) -> LinkFunction:
    """clip(slope * t + shift, -1, 1); asymmetric when shift != 0."""
    if slope < 0:
        raise ValueError("shifted_ramp: slope must be nonnegative")
    return LinkFunction("shifted_ramp", (float(slope), float(shift)))


def link_from_name(name: str, params=()) -> LinkFunction:
    builders = {
        "beta_sign": beta_sign,
        "linear": linear_link,
        "ramp_clip": ramp_clip,
        "scaled_tanh": scaled_tanh,
        "shifted_ramp": shifted_ramp,
    }
    if name not in builders:
        raise ValueError(f"unknown link name: {name!r}")
    return builders[name](*params)
