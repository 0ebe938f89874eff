"""Command-line frontend for simulation, fitting, prediction, and comparison.

Every command is a pure function of its JSON config and the --seed flag:
given the same inputs it writes byte-identical outputs.  Wall-clock
metadata is confined to run_meta.json so the data files stay
reproducible.  Durations in configs accept an explicit unit suffix
("4 yr", "336 h"); bare numbers are hours.

Exit codes: 0 on success, 2 for validation or input errors, 3 for
numeric failures.
"""

import argparse
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .adm_reference import ADMPopulationParams, adm_failure_prob, illustrative_population
from .dataset import Dataset
from .errors import DolgammaError, MedianBeyondHorizon, NumericError, ValidationError
from .failure_dist import FailureTimeDistribution, failure_probabilities, save_curve
from .inference import PTConfig, PosteriorSamples, fit
from .load_profile import (
    LoadProfile,
    ResidentialConfig,
    generate_residential,
    ramp_profile,
    ramp_then_constant,
)
from .shape_model import REFERENCE_PARAMS, DegradationParams, ShapeEvaluator
from .simulate import DesignArm, ExperimentDesign, simulate_dataset, standard_experiment
from .units import parse_duration_hours

__all__ = ["main"]


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ValidationError(f"invalid JSON in {path}: {e}") from None


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_run_meta(out_dir, args):
    # the one file allowed to differ between reruns
    _write_json(
        os.path.join(out_dir, "run_meta.json"),
        {
            "command": args.command,
            "seed": args.seed,
            "threads": args.threads,
            "version": __version__,
            "timestamp_utc": datetime.now(timezone.utc).isoformat(),
        },
    )


def _resolve_profile(spec, seed):
    """Build a LoadProfile from a config entry.

    Accepts a path to a profile JSON, an inline segments dict, the
    string "residential", or a one-key dict naming a generator:
    residential, ramp, ramp_then_constant, or constant.
    """
    if spec is None or spec == "residential":
        return generate_residential(seed=seed)
    if isinstance(spec, str):
        return LoadProfile.from_json(spec)
    if not isinstance(spec, dict):
        raise ValidationError("profile must be a path, 'residential', or a dict")
    if "segments" in spec:
        return LoadProfile.from_dict(spec)
    if "residential" in spec:
        cfg = ResidentialConfig.from_dict(spec["residential"] or {})
        return generate_residential(cfg, seed=seed)
    if "ramp" in spec:
        d = spec["ramp"]
        return ramp_profile(float(d["rate"]), parse_duration_hours(d["duration"]))
    if "ramp_then_constant" in spec:
        d = spec["ramp_then_constant"]
        return ramp_then_constant(
            float(d["rate"]), float(d["level"]), parse_duration_hours(d["horizon"])
        )
    if "constant" in spec:
        d = spec["constant"]
        from .load_profile import LoadSegment

        return LoadProfile(
            [LoadSegment(0.0, parse_duration_hours(d["horizon"]), "constant", float(d["level"]))]
        )
    raise ValidationError(f"unrecognized profile spec with keys {sorted(spec)}")


def _resolve_params(cfg):
    if "params" in cfg:
        return DegradationParams.from_dict(cfg["params"])
    return REFERENCE_PARAMS


def _load_draws(cfg, cap):
    """Parameter draws for prediction: posterior rows or a single point.

    Returns (list of DegradationParams, label).  ``cap`` thins long
    posterior files evenly to keep prediction runtimes bounded.
    """
    if "posterior" in cfg:
        samples = PosteriorSamples.from_csv(cfg["posterior"])
        stride = max(1, int(np.ceil(len(samples) / cap)))
        return samples.params_list(thin=stride), "posterior"
    return [_resolve_params(cfg)], "point"


def _band(mat):
    return (
        np.mean(mat, axis=0),
        np.quantile(mat, 0.025, axis=0),
        np.quantile(mat, 0.975, axis=0),
    )


def _save_band_csv(path, t_name, times, mean, lo, hi):
    data = np.column_stack([times, mean, lo, hi])
    np.savetxt(
        path,
        data,
        delimiter=",",
        header=f"{t_name},mean,q025,q975",
        comments="",
        fmt="%.17g",
    )


def _central_interval(values):
    return [float(np.quantile(values, 0.025)), float(np.quantile(values, 0.975))]


def cmd_simulate(args, cfg):
    params = _resolve_params(cfg)
    design_spec = cfg.get("design", "standard")
    if design_spec == "standard":
        design = standard_experiment()
    elif isinstance(design_spec, dict) and "arms" in design_spec:
        arms = tuple(
            DesignArm(
                str(a["label"]),
                _resolve_profile(a.get("profile"), seed=args.seed),
                int(a["n"]),
            )
            for a in design_spec["arms"]
        )
        design = ExperimentDesign(arms)
    else:
        raise ValidationError("design must be 'standard' or a dict with an 'arms' list")
    dataset = simulate_dataset(design, params, seed=args.seed)
    dataset.save(os.path.join(args.out, "dataset"))
    _write_json(
        os.path.join(args.out, "truth.json"),
        {
            "params": params.to_dict(),
            "seed": args.seed,
            "arms": [{"label": a.label, "n": a.n} for a in design.arms],
            "n_records": len(dataset),
            "n_failures": dataset.n_failures,
        },
    )
    print(
        f"simulated {len(dataset)} records "
        f"({dataset.n_failures} failures, {dataset.n_censored} censored)"
    )
    return 0


def cmd_fit(args, cfg):
    if "dataset" not in cfg:
        raise ValidationError("fit config needs a 'dataset' directory")
    dataset = Dataset.load(cfg["dataset"])
    pt_kwargs = dict(cfg.get("pt", {}))
    config = PTConfig(**pt_kwargs) if pt_kwargs else PTConfig()
    start = DegradationParams.from_dict(cfg["start"]) if "start" in cfg else None
    samples, init = fit(dataset, config=config, seed=args.seed, start=start)
    samples.to_csv(os.path.join(args.out, "posterior.csv"))
    _write_json(
        os.path.join(args.out, "summary.json"),
        {
            "summary": samples.summary(),
            "n_draws": len(samples),
            "init": init.to_dict(),
            "pt": {k: getattr(config, k) for k in PTConfig.__dataclass_fields__},
            "meta": {
                k: v for k, v in samples.meta.items() if k != "init"
            },
        },
    )
    with open(os.path.join(args.out, "summary.txt"), "w") as fh:
        fh.write(samples.format_summary() + "\n")
    print(samples.format_summary())
    return 0


def cmd_summarize(args, cfg):
    if "posterior" not in cfg:
        raise ValidationError("summarize config needs a 'posterior' CSV path")
    samples = PosteriorSamples.from_csv(cfg["posterior"])
    _write_json(
        os.path.join(args.out, "summary.json"),
        {"summary": samples.summary(), "n_draws": len(samples)},
    )
    with open(os.path.join(args.out, "summary.txt"), "w") as fh:
        fh.write(samples.format_summary() + "\n")
    print(samples.format_summary())
    return 0


def cmd_reliability(args, cfg):
    profile = _resolve_profile(cfg.get("profile"), seed=args.seed)
    horizon = (
        parse_duration_hours(cfg["horizon"]) if "horizon" in cfg else profile.horizon
    )
    if not 0.0 < horizon <= profile.horizon * (1 + 1e-9):
        raise ValidationError("horizon must lie within the profile")
    draws, source = _load_draws(cfg, cap=int(cfg.get("max_draws", 2000)))
    probs = failure_probabilities(profile, draws, t=horizon)
    report = {
        "source": source,
        "n_draws": len(draws),
        "horizon_hours": float(horizon),
        "probability_mean": float(np.mean(probs)),
        "probability_interval_95": _central_interval(probs),
    }
    _write_json(os.path.join(args.out, "report.json"), report)

    n_pts = int(cfg.get("curve_points", 201))
    curve_cap = int(cfg.get("curve_draws", 400))
    curve_draws = draws[:: max(1, int(np.ceil(len(draws) / curve_cap)))]
    times = np.linspace(0.0, horizon, n_pts)
    bound = ShapeEvaluator(profile).bind(times)
    etas = np.array([bound.eta(p) for p in curve_draws])
    mean, lo, hi = _band(etas)
    _save_band_csv(os.path.join(args.out, "eta_curve.csv"), "time_hours", times, mean, lo, hi)
    print(
        f"failure probability {report['probability_mean']:.4g} "
        f"(95% interval {report['probability_interval_95'][0]:.4g} "
        f"to {report['probability_interval_95'][1]:.4g}) from {source}"
    )
    return 0


def cmd_residual_life(args, cfg):
    if "t0" not in cfg:
        raise ValidationError("residual-life config needs 't0'")
    profile = _resolve_profile(cfg.get("profile"), seed=args.seed)
    t0 = parse_duration_hours(cfg["t0"])
    if not 0.0 <= t0 < profile.horizon:
        raise ValidationError("t0 must lie inside the profile")
    draws, source = _load_draws(cfg, cap=int(cfg.get("max_draws", 500)))
    n_pts = int(cfg.get("curve_points", 101))
    t_r = np.linspace(0.0, profile.horizon - t0, n_pts)

    ev = ShapeEvaluator(profile)
    curves, medians = [], []
    null_conditioning = 0
    beyond_horizon = 0
    for p in draws:
        dist = FailureTimeDistribution(profile, p, evaluator=ev)
        try:
            curves.append(dist.residual_survivor(t0 + t_r, t0))
        except NumericError:
            null_conditioning += 1
            continue
        try:
            medians.append(dist.median_residual_life(t0))
        except MedianBeyondHorizon:
            beyond_horizon += 1
    if not curves:
        raise NumericError(
            "survival at t0 underflowed for every draw; nothing to condition on"
        )
    mean, lo, hi = _band(np.array(curves))
    _save_band_csv(
        os.path.join(args.out, "residual_curves.csv"), "t_r_hours", t_r, mean, lo, hi
    )
    report = {
        "source": source,
        "n_draws": len(draws),
        "t0_hours": float(t0),
        "excluded_null_conditioning": null_conditioning,
        "medians_beyond_horizon": beyond_horizon,
        "n_medians": len(medians),
    }
    if medians:
        report["median_hours_mean"] = float(np.mean(medians))
        report["median_hours_interval_95"] = _central_interval(medians)
    _write_json(os.path.join(args.out, "report.json"), report)
    if medians:
        print(
            f"median residual life {report['median_hours_mean']:.4g} h mean "
            f"over {len(medians)} draws "
            f"({beyond_horizon} beyond horizon, {null_conditioning} excluded)"
        )
    else:
        print(
            f"all finite medians lie beyond the horizon "
            f"({beyond_horizon} draws); survivor curves written"
        )
    return 0


def cmd_adm_compare(args, cfg):
    profile = _resolve_profile(cfg.get("profile"), seed=args.seed)
    pop_spec = cfg.get("population", "illustrative")
    if pop_spec == "illustrative":
        pop = illustrative_population()
    elif isinstance(pop_spec, str):
        pop = ADMPopulationParams.from_json(pop_spec)
    elif isinstance(pop_spec, dict):
        pop = ADMPopulationParams.from_dict(pop_spec)
    else:
        raise ValidationError("population must be 'illustrative', a path, or a dict")
    n_sim = int(cfg.get("n_sim", 2000))
    draws, source = _load_draws(cfg, cap=int(cfg.get("max_draws", 2000)))
    gamma_probs = failure_probabilities(profile, draws)
    adm_p, adm_se = adm_failure_prob(pop, profile, n_sim, seed=args.seed)
    report = {
        "horizon_hours": profile.horizon,
        "gamma": {
            "source": source,
            "n_draws": len(draws),
            "probability_mean": float(np.mean(gamma_probs)),
            "probability_interval_95": _central_interval(gamma_probs),
        },
        "adm": {
            "probability": adm_p,
            "standard_error": adm_se,
            "n_sim": n_sim,
        },
    }
    _write_json(os.path.join(args.out, "comparison.json"), report)
    print(
        f"gamma process {report['gamma']['probability_mean']:.4g} vs "
        f"damage model {adm_p:.4g} (se {adm_se:.2g}) over {profile.horizon:g} h"
    )
    return 0


def cmd_profile_gen(args, cfg):
    profile = _resolve_profile(cfg.get("profile"), seed=args.seed)
    profile.to_json(os.path.join(args.out, "profile.json"))
    _write_json(
        os.path.join(args.out, "profile_summary.json"),
        {
            "n_segments": len(profile.segments),
            "horizon_hours": profile.horizon,
            "max_load_psi": profile.max_load(),
        },
    )
    print(
        f"wrote profile: {len(profile.segments)} segments, "
        f"horizon {profile.horizon:g} h, max load {profile.max_load():g} psi"
    )
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "summarize": cmd_summarize,
    "reliability": cmd_reliability,
    "residual-life": cmd_residual_life,
    "adm-compare": cmd_adm_compare,
    "profile-gen": cmd_profile_gen,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="dolgamma",
        description="Gamma-process duration-of-load modeling for lumber.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "simulate an experiment into a dataset directory",
        "fit": "fit the degradation model to a dataset",
        "summarize": "summarize an existing posterior CSV",
        "reliability": "failure probability and shape curve under a profile",
        "residual-life": "residual-life curves and medians after survival to t0",
        "adm-compare": "compare against the accumulated damage reference model",
        "profile-gen": "generate and save a load profile",
    }
    for name, help_text in helps.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument(
            "--threads",
            type=int,
            default=1,
            help="worker cap; this build computes sequentially, so results "
            "are identical for every value",
        )
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        cfg = _read_json(args.config) if args.config else {}
        if not isinstance(cfg, dict):
            raise ValidationError("config root must be a JSON object")
        os.makedirs(args.out, exist_ok=True)
        code = _COMMANDS[args.command](args, cfg)
        _write_run_meta(args.out, args)
        return code
    except (ValidationError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (NumericError, MedianBeyondHorizon) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3
    except DolgammaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
