"""Experiment orchestration: seeded trials against synthetic instances,
success-rate summaries with Wilson intervals, parameter sweeps and CSV /
plot-data persistence."""

from __future__ import annotations

import dataclasses
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import learn, synth
from .model import link_from_name
from .synth import (
    Constant,
    FiniteAtoms,
    MarginStress,
    PerAtom,
    SphereWithBand,
    derive_rng,
)

CSV_HEADER = (
    "cell_id,epsilon,gamma,eta,T1,T2,trials,success_rate,wilson_lo,wilson_hi,mean_loss"
)

# Fresh-holdout evaluation for continuous marginals: size and the 4-sigma
# Hoeffding half-width added to the target so estimation error cannot
# create false failures.
HOLDOUT_N = 10**6
HOLDOUT_SLACK = 2.0 / math.sqrt(HOLDOUT_N)

SWEEP_AXES = ("epsilon", "gamma", "eta", "t_multiplier")


@dataclass
class ExperimentSpec:
    mode: str  # halfspace | glm | unknown_eta | baseline
    d: int
    gamma: float
    epsilon: float
    delta: float
    trials: int
    seed: int
    marginal: str = "finite_atoms"  # finite_atoms | sphere_band | margin_stress
    n_atoms: int = 40
    eta: float = 0.2  # noise cap (halfspace modes)
    noise_kind: str = "per_atom"  # per_atom | constant
    link: Optional[str] = None
    link_params: tuple = ()
    noise_fraction: float = 1.0
    t_multiplier: float = 1.0
    baseline_passes: int = 1
    T1: Optional[int] = None
    T2: Optional[int] = None
    lam: Optional[float] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("ExperimentSpec: trials must be >= 1")
        if self.mode not in ("halfspace", "glm", "unknown_eta", "baseline"):
            raise ValueError(f"ExperimentSpec: unknown mode {self.mode!r}")
        if self.mode == "glm" and self.link is None:
            raise ValueError("ExperimentSpec: glm mode needs a link")
        if self.t_multiplier <= 0:
            raise ValueError("ExperimentSpec: t_multiplier must be positive")


@dataclass
class TrialRecord:
    seed: int
    achieved_loss: float
    target_loss: float
    success: bool
    samples_consumed: int
    wall_time: float
    loss_is_exact: bool = True
    holdout_n: Optional[int] = None


@dataclass
class SweepResult:
    axes: list
    rows: list = field(default_factory=list)


class ExperimentAborted(RuntimeError):
    """A trial failed; partial records are attached."""

    def __init__(self, message, records):
        super().__init__(message)
        self.records = records


def trial_seed(spec_seed: int, trial_index: int) -> int:
    return int(derive_rng(spec_seed, "trial", trial_index).integers(2**63))


def build_instance(spec: ExperimentSpec, seed: int):
    """Instance for one trial; everything derives from the trial seed."""
    w_star = synth.random_unit_vector(spec.d, derive_rng(seed, "w_star"))
    link = link_from_name(spec.link, spec.link_params) if spec.link else None

    if spec.marginal == "finite_atoms":
        atoms = synth.random_atoms_with_margin(
            w_star, spec.n_atoms, spec.gamma, derive_rng(seed, "atoms")
        )
        probs = np.full(spec.n_atoms, 1.0 / spec.n_atoms)
        marginal = FiniteAtoms(atoms=atoms, probs=probs)
    elif spec.marginal == "sphere_band":
        marginal = SphereWithBand(d=spec.d)
    elif spec.marginal == "margin_stress":
        marginal = MarginStress(d=spec.d)
    else:
        raise ValueError(f"unknown marginal kind {spec.marginal!r}")

    if spec.mode == "glm":
        return synth.GlmInstance(
            w_star=w_star,
            gamma=spec.gamma,
            marginal=marginal,
            link=link,
            noise_fraction=spec.noise_fraction,
        )

    if spec.noise_kind == "constant":
        noise = Constant(spec.eta)
    elif spec.noise_kind == "per_atom":
        if spec.marginal != "finite_atoms":
            noise = Constant(spec.eta)
        else:
            rates = derive_rng(seed, "rates").uniform(0.0, spec.eta, spec.n_atoms)
            noise = PerAtom(rates_per_atom=rates)
    else:
        raise ValueError(f"unknown noise kind {spec.noise_kind!r}")
    return synth.MassartInstance(
        w_star=w_star, gamma=spec.gamma, marginal=marginal, noise=noise
    )


def trial_config(spec: ExperimentSpec) -> learn.TrainConfig:
    """Theory parameters, with the sweep's T-multiplier applied to the
    per-restart length (the step size is re-derived from the scaled T)."""
    N = math.ceil(math.log2(2.0 / spec.delta))
    eps, gam = spec.epsilon, spec.gamma
    if spec.mode == "glm":
        T = math.ceil(32.0 / (eps**4 * gam**2) * spec.t_multiplier)
        lam = gam * eps / ((2.0 - eps) * math.sqrt(2.0 * T))
        alpha = eps / (2.0 - eps)
        link = link_from_name(spec.link, spec.link_params)
        eta = None
    else:
        T = math.ceil(16.0 / (eps**2 * gam**2) * spec.t_multiplier)
        lam = gam / (2.0 * math.sqrt(T))
        alpha = None
        link = None
        eta = None if spec.mode == "unknown_eta" else spec.eta
    T1 = N * T
    T2 = math.ceil((8.0 / eps**2) * math.log(4.0 * T1 / spec.delta))
    return learn.TrainConfig(
        epsilon=eps,
        delta=spec.delta,
        gamma=gam,
        T1=spec.T1 if spec.T1 is not None else T1,
        T2=spec.T2 if spec.T2 is not None else T2,
        lam=spec.lam if spec.lam is not None else lam,
        N=N,
        eta=eta,
        alpha=alpha,
        link=link,
    )


def _target_loss(spec: ExperimentSpec, inst) -> float:
    if spec.mode == "glm":
        base = synth.exact_opt_rcn(inst) if inst.finite_support else _holdout_opt_rcn(inst)
        target = base + inst.link.tau_hat / 2.0 + spec.epsilon
    else:
        target = spec.eta + spec.epsilon
    return min(target, 1.0)


def _holdout_opt_rcn(inst) -> float:
    rng = derive_rng(0, "opt_rcn_probe")
    X, _ = synth._sample_marginal(inst, 10**5, rng)
    return float(np.mean(inst.rate_caps(X)))


def run_trial(spec: ExperimentSpec, trial_index: int) -> TrialRecord:
    seed = trial_seed(spec.seed, trial_index)
    inst = build_instance(spec, seed)
    config = trial_config(spec)
    n = config.T1 + config.T2
    t0 = time.perf_counter()
    if spec.mode == "glm":
        data = synth.sample_glm(inst, n, seed)
        result = learn.train_glm(config, data)
    else:
        data = synth.sample_massart(inst, n, seed)
        if spec.mode == "halfspace":
            result = learn.train_halfspace(config, data)
        elif spec.mode == "unknown_eta":
            result = learn.train_unknown_eta(config, data)
        else:  # baseline
            hyp = learn.baseline_perceptron(data[: config.T1], spec.baseline_passes)
            result = learn.TrainResult(
                w_hat=hyp,
                validation_error=float("nan"),
                pool_size=1,
                samples_consumed=n,
            )
    wall = time.perf_counter() - t0

    target = _target_loss(spec, inst)
    if inst.finite_support:
        achieved = synth.exact_zero_one(inst, result.w_hat.w)
        exact, holdout_n = True, None
    else:
        if spec.mode == "glm":
            holdout = synth.sample_glm(inst, HOLDOUT_N, seed ^ 0x5EED)
        else:
            holdout = synth.sample_massart(inst, HOLDOUT_N, seed ^ 0x5EED)
        from .model import empirical_zero_one

        achieved = empirical_zero_one(result.w_hat.w, holdout)
        target = min(target + HOLDOUT_SLACK, 1.0)
        exact, holdout_n = False, HOLDOUT_N
    return TrialRecord(
        seed=seed,
        achieved_loss=achieved,
        target_loss=target,
        success=achieved <= target,
        samples_consumed=result.samples_consumed,
        wall_time=wall,
        loss_is_exact=exact,
        holdout_n=holdout_n,
    )


def wilson_interval(successes: int, n: int, z: float = 1.96):
    """95% Wilson score interval for a Bernoulli rate."""
    if n < 1:
        raise ValueError("wilson_interval: n must be >= 1")
    p = successes / n
    z2 = z * z
    den = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / den
    half = z * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / den
    return max(0.0, center - half), min(1.0, center + half)


def run_experiment(spec: ExperimentSpec):
    """All trials with independent derived seeds; returns (records, summary)."""
    records = []
    for i in range(spec.trials):
        try:
            records.append(run_trial(spec, i))
        except Exception as exc:  # flush partial results with the failure
            raise ExperimentAborted(f"trial {i} failed: {exc}", records) from exc
    succ = sum(r.success for r in records)
    lo, hi = wilson_interval(succ, len(records))
    summary = {
        "trials": len(records),
        "success_rate": succ / len(records),
        "wilson_lo": lo,
        "wilson_hi": hi,
        "mean_loss": float(np.mean([r.achieved_loss for r in records])),
    }
    return records, summary


def run_sweep(spec: ExperimentSpec, grid: dict) -> SweepResult:
    """Cross-product sweep over grid axes (epsilon, gamma, eta,
    t_multiplier); each cell is a full run_experiment."""
    axes = [k for k in grid if grid[k]]
    if not axes:
        raise ValueError("run_sweep: empty grid")
    for k in axes:
        if k not in SWEEP_AXES:
            raise ValueError(f"run_sweep: unknown axis {k!r} (allowed: {SWEEP_AXES})")
    result = SweepResult(axes=axes)
    for cell_id, values in enumerate(itertools.product(*(grid[k] for k in axes))):
        cell_spec = dataclasses.replace(spec, **dict(zip(axes, values)))
        config = trial_config(cell_spec)
        _, summary = run_experiment(cell_spec)
        row = {
            "cell_id": cell_id,
            "epsilon": cell_spec.epsilon,
            "gamma": cell_spec.gamma,
            "eta": cell_spec.eta,
            "T1": config.T1,
            "T2": config.T2,
            "trials": summary["trials"],
            "success_rate": summary["success_rate"],
            "wilson_lo": summary["wilson_lo"],
            "wilson_hi": summary["wilson_hi"],
            "mean_loss": summary["mean_loss"],
        }
        for k, v in zip(axes, values):
            row[f"axis_{k}"] = v
        result.rows.append(row)
    return result


def emit_csv(result: SweepResult, path) -> None:
    cols = CSV_HEADER.split(",")
    with open(path, "w") as f:
        f.write(CSV_HEADER + "\n")
        for row in result.rows:
            f.write(
                ",".join(
                    str(row[c]) if isinstance(row[c], int) else repr(float(row[c]))
                    for c in cols
                )
                + "\n"
            )


def parse_csv(path) -> SweepResult:
    cols = CSV_HEADER.split(",")
    int_cols = {"cell_id", "T1", "T2", "trials"}
    result = SweepResult(axes=[])
    with open(path) as f:
        header = f.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected CSV header")
        for line in f:
            parts = line.strip().split(",")
            if len(parts) != len(cols):
                raise ValueError(f"{path}: malformed CSV row")
            row = {
                c: (int(v) if c in int_cols else float(v)) for c, v in zip(cols, parts)
            }
            result.rows.append(row)
    return result


def emit_plotdata(result: SweepResult, outdir) -> list:
    """Two-column (x, y) series per metric, keyed by the first sweep axis
    (falling back to cell_id); returns the written paths."""
    import os

    os.makedirs(outdir, exist_ok=True)
    x_key = f"axis_{result.axes[0]}" if result.axes else "cell_id"
    x_name = result.axes[0] if result.axes else "cell_id"
    paths = []
    for metric in ("success_rate", "mean_loss"):
        path = os.path.join(outdir, f"{metric}_vs_{x_name}.dat")
        with open(path, "w") as f:
            for row in result.rows:
                x = float(row.get(x_key, row["cell_id"]))
                f.write(f"{x!r} {float(row[metric])!r}\n")
        paths.append(path)
    return paths
