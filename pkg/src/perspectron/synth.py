"""Synthetic Massart-halfspace / Massart-GLM instances, i.i.d. sampling and
exact enumeration on finite-support instances, plus the dataset text format.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .model import LinkFunction, sign_pm

MARGIN_TOL = 1e-12


def derive_rng(seed: int, *tags) -> np.random.Generator:
    """Independent, reproducible stream keyed by (seed, tags)."""
    ints = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for tag in tags:
        h = hashlib.sha256(repr(tag).encode()).digest()
        ints.append(int.from_bytes(h[:8], "little"))
    return np.random.default_rng(np.random.SeedSequence(ints))


@dataclass(frozen=True)
class LabeledExample:
    x: np.ndarray
    y: int


@dataclass(frozen=True)
class Sample:
    """Array-backed sequence of labeled examples (X rows in the unit ball,
    y entries in {+1, -1} stored as float64)."""

    X: np.ndarray
    y: np.ndarray

    def __len__(self):
        return len(self.y)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Sample(self.X[i], self.y[i])
        return LabeledExample(self.X[i], int(self.y[i]))

    def __iter__(self):
        for i in range(len(self.y)):
            yield LabeledExample(self.X[i], int(self.y[i]))


# ---------------------------------------------------------------------------
# Noise profiles


@dataclass(frozen=True)
class Constant:
    eta: float

    @property
    def cap(self):
        return self.eta

    def rates(self, X, idx=None):
        return np.full(len(X), self.eta)


@dataclass(frozen=True)
class PerAtom:
    rates_per_atom: np.ndarray

    @property
    def cap(self):
        return float(np.max(self.rates_per_atom))

    def rates(self, X, idx=None):
        if idx is None:
            raise ValueError("PerAtom noise needs atom indices (finite support only)")
        return np.asarray(self.rates_per_atom, dtype=float)[idx]


@dataclass(frozen=True)
class Regional:
    region: Callable[[np.ndarray], np.ndarray]
    eta_in: float
    eta_out: float

    @property
    def cap(self):
        return max(self.eta_in, self.eta_out)

    def rates(self, X, idx=None):
        inside = np.asarray(self.region(X), dtype=bool)
        return np.where(inside, self.eta_in, self.eta_out)


NoiseProfile = Union[Constant, PerAtom, Regional]


# ---------------------------------------------------------------------------
# Marginal specs


@dataclass(frozen=True)
class FiniteAtoms:
    atoms: np.ndarray  # (k, d)
    probs: np.ndarray  # (k,), sums to 1

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("FiniteAtoms: probabilities must sum to 1")
        if np.any(probs < 0):
            raise ValueError("FiniteAtoms: negative probability")


@dataclass(frozen=True)
class SphereWithBand:
    """Uniform on the unit sphere in R^d, rejecting until |w*.x| >= gamma."""

    d: int


@dataclass(frozen=True)
class MarginStress:
    """Half the mass exactly on the margin |w*.x| = gamma, half from the
    sphere-with-band marginal; stresses certificates at their tight case."""

    d: int


MarginalSpec = Union[FiniteAtoms, SphereWithBand, MarginStress]


# ---------------------------------------------------------------------------
# Instances


def _check_atoms(atoms, probs, w_star, gamma):
    norms = np.linalg.norm(atoms, axis=1)
    margins = np.abs(atoms @ w_star)
    for k in range(len(atoms)):
        if norms[k] > 1.0 + MARGIN_TOL:
            raise ValueError(f"atom {k} lies outside the unit ball (norm {norms[k]:.6g})")
        if margins[k] < gamma - MARGIN_TOL:
            raise ValueError(
                f"atom {k} violates the margin: |w*.x| = {margins[k]:.6g} < gamma = {gamma:.6g}"
            )


@dataclass(frozen=True)
class MassartInstance:
    w_star: np.ndarray
    gamma: float
    marginal: MarginalSpec
    noise: NoiseProfile

    def __post_init__(self):
        w = np.asarray(self.w_star, dtype=float)
        object.__setattr__(self, "w_star", w)
        if abs(np.linalg.norm(w) - 1.0) > 1e-12:
            raise ValueError("MassartInstance: ||w_star|| must equal 1")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("MassartInstance: gamma must lie in (0, 1)")
        if not 0.0 <= self.noise.cap < 0.5:
            raise ValueError("MassartInstance: noise cap must lie in [0, 1/2)")
        if isinstance(self.marginal, FiniteAtoms):
            _check_atoms(self.marginal.atoms, self.marginal.probs, w, self.gamma)
            if isinstance(self.noise, PerAtom) and len(self.noise.rates_per_atom) != len(
                self.marginal.atoms
            ):
                raise ValueError("PerAtom rates do not match the atom count")

    @property
    def finite_support(self) -> bool:
        return isinstance(self.marginal, FiniteAtoms)

    def atom_rates(self) -> np.ndarray:
        """Per-atom noise rates eta(x_k); finite support only."""
        _require_finite(self)
        atoms = self.marginal.atoms
        return self.noise.rates(atoms, idx=np.arange(len(atoms)))


@dataclass(frozen=True)
class GlmInstance:
    w_star: np.ndarray
    gamma: float
    marginal: MarginalSpec
    link: LinkFunction
    noise_fraction: Union[float, np.ndarray, Callable] = 1.0

    def __post_init__(self):
        w = np.asarray(self.w_star, dtype=float)
        object.__setattr__(self, "w_star", w)
        if abs(np.linalg.norm(w) - 1.0) > 1e-12:
            raise ValueError("GlmInstance: ||w_star|| must equal 1")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("GlmInstance: gamma must lie in (0, 1)")
        if isinstance(self.marginal, FiniteAtoms):
            _check_atoms(self.marginal.atoms, self.marginal.probs, w, self.gamma)
            fracs = self._fractions(self.marginal.atoms)
            if np.any(fracs < 0) or np.any(fracs > 1):
                raise ValueError("GlmInstance: noise_fraction must map into [0, 1]")
            caps = self.rate_caps(self.marginal.atoms)
            if np.any(fracs * caps > caps + 1e-15):
                raise ValueError("GlmInstance: noise rate exceeds its cap")

    @property
    def finite_support(self) -> bool:
        return isinstance(self.marginal, FiniteAtoms)

    def rate_caps(self, X) -> np.ndarray:
        """(1 - |sigma(w*.x)|) / 2 per row of X."""
        return (1.0 - np.abs(self.link(X @ self.w_star))) / 2.0

    def _fractions(self, X) -> np.ndarray:
        f = self.noise_fraction
        if callable(f):
            return np.asarray(f(X), dtype=float)
        if np.ndim(f) == 0:
            return np.full(len(X), float(f))
        return np.asarray(f, dtype=float)

    def rates(self, X) -> np.ndarray:
        return self._fractions(X) * self.rate_caps(X)

    def atom_rates(self) -> np.ndarray:
        _require_finite(self)
        return self.rates(self.marginal.atoms)


def _require_finite(inst):
    if not isinstance(inst.marginal, FiniteAtoms):
        raise ValueError("operation requires a finite-support (FiniteAtoms) instance")


# ---------------------------------------------------------------------------
# Construction helpers


def random_unit_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)


def make_instance(
    spec: MarginalSpec,
    gamma: float,
    noise: NoiseProfile,
    seed: int,
    w_star: Optional[np.ndarray] = None,
) -> MassartInstance:
    """Build a Massart halfspace instance; w_star is drawn uniformly on the
    sphere from the seed when not supplied."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("make_instance: gamma must lie in (0, 1)")
    if w_star is None:
        d = spec.atoms.shape[1] if isinstance(spec, FiniteAtoms) else spec.d
        w_star = random_unit_vector(d, derive_rng(seed, "w_star"))
    return MassartInstance(w_star=w_star, gamma=gamma, marginal=spec, noise=noise)


def make_glm_instance(
    spec: MarginalSpec,
    gamma: float,
    link: LinkFunction,
    seed: int,
    noise_fraction=1.0,
    w_star: Optional[np.ndarray] = None,
) -> GlmInstance:
    if not 0.0 < gamma < 1.0:
        raise ValueError("make_glm_instance: gamma must lie in (0, 1)")
    if w_star is None:
        d = spec.atoms.shape[1] if isinstance(spec, FiniteAtoms) else spec.d
        w_star = random_unit_vector(d, derive_rng(seed, "w_star"))
    return GlmInstance(
        w_star=w_star, gamma=gamma, marginal=spec, link=link, noise_fraction=noise_fraction
    )


def random_atoms_with_margin(
    w_star: np.ndarray, k: int, gamma: float, rng: np.random.Generator
) -> np.ndarray:
    """k points on the unit sphere with |w_star.x| >= gamma (rejection)."""
    d = len(w_star)
    out = np.empty((k, d))
    have = 0
    while have < k:
        batch = rng.standard_normal((max(4 * k, 64), d))
        batch /= np.linalg.norm(batch, axis=1, keepdims=True)
        keep = batch[np.abs(batch @ w_star) >= gamma]
        take = min(k - have, len(keep))
        out[have : have + take] = keep[:take]
        have += take
    return out


# ---------------------------------------------------------------------------
# Sampling


def _sample_marginal(inst, n: int, rng: np.random.Generator):
    m = inst.marginal
    w_star, gamma = inst.w_star, inst.gamma
    if isinstance(m, FiniteAtoms):
        idx = rng.choice(len(m.atoms), size=n, p=m.probs)
        return m.atoms[idx], idx
    if isinstance(m, SphereWithBand):
        return _sphere_band(w_star, gamma, m.d, n, rng), None
    if isinstance(m, MarginStress):
        X = np.empty((n, m.d))
        on_margin = rng.random(n) < 0.5
        n_margin = int(np.count_nonzero(on_margin))
        X[~on_margin] = _sphere_band(w_star, gamma, m.d, n - n_margin, rng)
        if n_margin:
            U = rng.standard_normal((n_margin, m.d))
            U -= np.outer(U @ w_star, w_star)
            U /= np.linalg.norm(U, axis=1, keepdims=True)
            s = np.where(rng.random(n_margin) < 0.5, 1.0, -1.0)
            X[on_margin] = np.outer(s * gamma, w_star) + np.sqrt(1.0 - gamma**2) * U
        return X, None
    raise ValueError(f"unknown marginal kind: {type(m).__name__}")


def _sphere_band(w_star, gamma, d, n, rng):
    out = np.empty((n, d))
    have = 0
    while have < n:
        batch = rng.standard_normal((max(2 * (n - have), 64), d))
        batch /= np.linalg.norm(batch, axis=1, keepdims=True)
        keep = batch[np.abs(batch @ w_star) >= gamma]
        take = min(n - have, len(keep))
        out[have : have + take] = keep[:take]
        have += take
    return out


def sample_massart(inst: MassartInstance, n: int, seed: int) -> Sample:
    """n i.i.d. draws: x from the marginal, then the clean label
    sign(w*.x) flipped independently with probability eta(x)."""
    if n < 1:
        raise ValueError("sample_massart: n must be >= 1")
    rng = derive_rng(seed, "massart_sample")
    X, idx = _sample_marginal(inst, n, rng)
    clean = sign_pm(X @ inst.w_star)
    rates = inst.noise.rates(X, idx=idx)
    flips = rng.random(n) < rates
    return Sample(X=X, y=np.where(flips, -clean, clean))


def sample_glm(inst: GlmInstance, n: int, seed: int) -> Sample:
    """As sample_massart with eta(x) = fraction(x) * (1 - |sigma(w*.x)|)/2."""
    if n < 1:
        raise ValueError("sample_glm: n must be >= 1")
    rng = derive_rng(seed, "glm_sample")
    X, _ = _sample_marginal(inst, n, rng)
    clean = sign_pm(X @ inst.w_star)
    rates = inst.rates(X)
    flips = rng.random(n) < rates
    return Sample(X=X, y=np.where(flips, -clean, clean))


# ---------------------------------------------------------------------------
# Exact (enumeration) evaluators for finite-support instances


def exact_zero_one(inst, w: np.ndarray) -> float:
    """Exact zero-one loss: sum_k p_k * (eta_k if h_w agrees with h_{w*}
    at atom k else 1 - eta_k)."""
    _require_finite(inst)
    atoms, probs = inst.marginal.atoms, inst.marginal.probs
    rates = inst.atom_rates()
    agree = sign_pm(atoms @ np.asarray(w, dtype=float)) == sign_pm(atoms @ inst.w_star)
    return float(np.sum(probs * np.where(agree, rates, 1.0 - rates)))


def exact_opt_rcn(inst: GlmInstance) -> float:
    """E[(1 - |sigma(w*.x)|) / 2] by enumeration."""
    _require_finite(inst)
    return float(np.sum(inst.marginal.probs * inst.rate_caps(inst.marginal.atoms)))


def disagreement_mass(inst, w: np.ndarray) -> float:
    """Probability mass of atoms where h_w and h_{w*} disagree."""
    _require_finite(inst)
    atoms, probs = inst.marginal.atoms, inst.marginal.probs
    disagree = sign_pm(atoms @ np.asarray(w, dtype=float)) != sign_pm(atoms @ inst.w_star)
    return float(np.sum(probs[disagree]))


# ---------------------------------------------------------------------------
# Dataset text format: header "d n gamma", then "y x_1 ... x_d" per line.


def write_dataset(path, sample: Sample, gamma: float) -> None:
    n, d = sample.X.shape
    with open(path, "w") as f:
        f.write(f"{d} {n} {gamma!r}\n")
        for i in range(n):
            label = "+1" if sample.y[i] > 0 else "-1"
            coords = " ".join(repr(float(v)) for v in sample.X[i])
            f.write(f"{label} {coords}\n")


def read_dataset(path):
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}: malformed dataset header")
        d, n, gamma = int(header[0]), int(header[1]), float(header[2])
        X = np.empty((n, d))
        y = np.empty(n)
        for i in range(n):
            parts = f.readline().split()
            if len(parts) != d + 1:
                raise ValueError(f"{path}: malformed row {i}")
            y[i] = float(parts[0])
            X[i] = [float(v) for v in parts[1:]]
    if not np.all(np.abs(y) == 1.0):
        raise ValueError(f"{path}: labels must be +1 or -1")
    return Sample(X=X, y=y), gamma
