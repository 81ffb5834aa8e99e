"""Command line interface.

Subcommands: gen, train, certify, sweep, report. Specs and grids are YAML
files; every flag has a config twin and flags win. All randomness flows
from an explicit seed (no wall-clock seeding).

Exit codes: 0 success, 1 validation error, 2 runtime / I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

import numpy as np
import yaml

from . import certify, harness, learn, synth
from .harness import ExperimentSpec
from .model import link_from_name


def _load_yaml(path) -> dict:
    with open(path) as f:
        doc = yaml.safe_load(f)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: spec must be a mapping")
    return doc


def _spec_from_file(path, overrides: dict) -> ExperimentSpec:
    doc = _load_yaml(path)
    doc.update({k: v for k, v in overrides.items() if v is not None})
    if "link_params" in doc and doc["link_params"] is not None:
        doc["link_params"] = tuple(doc["link_params"])
    fields = {f.name for f in dataclasses.fields(ExperimentSpec)}
    unknown = set(doc) - fields
    if unknown:
        raise ValueError(f"{path}: unknown spec keys {sorted(unknown)}")
    if "seed" not in doc or doc["seed"] is None:
        raise ValueError("a seed is required (spec key 'seed' or --seed)")
    return ExperimentSpec(**doc)


def _print_kv(pairs, indent=""):
    for k, v in pairs:
        print(f"{indent}{k}: {v}")


def cmd_gen(args) -> int:
    spec = _spec_from_file(args.spec, {"seed": args.seed, "trials": 1})
    seed = harness.trial_seed(spec.seed, 0)
    inst = harness.build_instance(spec, seed)
    config = harness.trial_config(spec)
    n = args.n if args.n is not None else config.T1 + config.T2
    if spec.mode == "glm":
        sample = synth.sample_glm(inst, n, seed)
    else:
        sample = synth.sample_massart(inst, n, seed)
    synth.write_dataset(args.out, sample, spec.gamma)
    _print_kv([("written", args.out), ("n", n), ("d", spec.d), ("gamma", spec.gamma)])
    return 0


def cmd_train(args) -> int:
    spec = _spec_from_file(args.spec, {"seed": args.seed, "trials": 1})
    config = harness.trial_config(spec)
    if args.data:
        data, _gamma = synth.read_dataset(args.data)
    else:
        seed = harness.trial_seed(spec.seed, 0)
        inst = harness.build_instance(spec, seed)
        n = config.T1 + config.T2
        if spec.mode == "glm":
            data = synth.sample_glm(inst, n, seed)
        else:
            data = synth.sample_massart(inst, n, seed)
    if spec.mode == "glm":
        result = learn.train_glm(config, data)
    elif spec.mode == "unknown_eta":
        result = learn.train_unknown_eta(config, data)
    elif spec.mode == "baseline":
        hyp = learn.baseline_perceptron(data[: config.T1], spec.baseline_passes)
        result = learn.TrainResult(
            w_hat=hyp, validation_error=float("nan"), pool_size=1,
            samples_consumed=len(data),
        )
    else:
        result = learn.train_halfspace(config, data)
    _print_kv(
        [
            ("mode", spec.mode),
            ("validation_error", result.validation_error),
            ("pool_size", result.pool_size),
            ("samples_consumed", result.samples_consumed),
            ("per_restart_best", " ".join(repr(v) for v in result.per_restart_best)),
            ("w_hat", " ".join(repr(float(v)) for v in result.w_hat.w)),
        ]
    )
    return 0


CERT_KINDS = ("halfspace_unbounded", "halfspace_bounded", "glm_unbounded", "glm_bounded")


def cmd_certify(args) -> int:
    spec = _spec_from_file(args.spec, {"seed": args.seed, "trials": 1})
    if args.kind not in CERT_KINDS:
        raise ValueError(f"--kind must be one of {CERT_KINDS}")
    w = np.loadtxt(args.w, ndmin=1)
    seed = harness.trial_seed(spec.seed, 0)
    inst = harness.build_instance(spec, seed)
    if args.kind == "halfspace_unbounded":
        rep = certify.cert_halfspace_unbounded(w, spec.eta, inst)
    elif args.kind == "halfspace_bounded":
        rep = certify.cert_halfspace_bounded(w, 1.0 - 2.0 * spec.eta, spec.gamma, inst)
    elif args.kind == "glm_unbounded":
        rep = certify.cert_glm_unbounded(w, link_from_name(spec.link, spec.link_params), inst)
    else:
        alpha = spec.epsilon / (2.0 - spec.epsilon)
        rep = certify.cert_glm_bounded(
            w, link_from_name(spec.link, spec.link_params), spec.gamma, alpha, inst
        )
    _print_kv(
        [
            ("kind", rep.kind),
            ("n_samples", rep.n_samples),
            ("separation", rep.separation),
            ("norm_bound", rep.norm_bound),
            ("g", " ".join(repr(float(v)) for v in rep.g)),
        ]
    )
    return 0


def cmd_sweep(args) -> int:
    spec = _spec_from_file(args.spec, {"seed": args.seed})
    grid = _load_yaml(args.grid)
    result = harness.run_sweep(spec, grid)
    harness.emit_csv(result, args.out)
    _print_kv([("cells", len(result.rows)), ("written", args.out)])
    return 0


def cmd_report(args) -> int:
    result = harness.parse_csv(args.input)
    paths = harness.emit_plotdata(result, args.plotdata)
    _print_kv([("series", len(paths))] + [("written", p) for p in paths])
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="perspectron",
        description="Margin halfspace / GLM learning under Massart noise: "
        "data generation, training, certificates, sweeps.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a dataset file")
    g.add_argument("--spec", required=True)
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--n", type=int, default=None, help="sample count (default T1+T2)")
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("train", help="run one training and print the result")
    t.add_argument("--spec", required=True)
    t.add_argument("--data", default=None, help="dataset file (default: in-process sampling)")
    t.add_argument("--seed", type=int, required=True)
    t.set_defaults(func=cmd_train)

    c = sub.add_parser("certify", help="print a certificate report for a vector")
    c.add_argument("--spec", required=True)
    c.add_argument("--w", required=True, help="text file with the vector entries")
    c.add_argument("--kind", required=True, choices=CERT_KINDS)
    c.add_argument("--seed", type=int, default=None)
    c.set_defaults(func=cmd_certify)

    s = sub.add_parser("sweep", help="run a parameter sweep and write CSV")
    s.add_argument("--spec", required=True)
    s.add_argument("--grid", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=None)
    s.set_defaults(func=cmd_sweep)

    r = sub.add_parser("report", help="emit plot-ready series from a sweep CSV")
    r.add_argument("--in", dest="input", required=True)
    r.add_argument("--plotdata", required=True)
    r.set_defaults(func=cmd_report)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, TypeError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failures
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
