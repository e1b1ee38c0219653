"""Command-line front end.

Subcommands: ``analyze``, ``fit``, ``plan``, ``simulate``. Exit status is
0 on success, 2 on usage or input errors, 3 when an internal invariant
check fails.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import data_text, report
from .curvefit import FitError, fit_exponential, prediction_rows, read_points_csv
from .energy import evaluate, rtf_terms
from .placement import FRACTIONAL, WHOLE, normalize_mode
from .planner import curves_from_entries, plan_compression, sensitivity_report
from .spec_model import ConfigError, parse_model_spec, spec_to_dict
from .workload import UtteranceProfile, invocation_profile, simulate_decode

log = logging.getLogger("transducer_power")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INTERNAL = 3

BUILTIN_PREFIX = "builtin:"
BUILTINS = ("reference", "reference_plan")


class UsageError(Exception):
    pass


class InternalError(Exception):
    pass


def _check(cond: bool, msg: str):
    if not cond:
        raise InternalError(msg)


def _load_spec(args):
    if args.config.startswith(BUILTIN_PREFIX):
        name = args.config[len(BUILTIN_PREFIX):]
        if name not in BUILTINS:
            raise UsageError(f"unknown built-in config {name!r} (available: {', '.join(BUILTINS)})")
        text = data_text(f"{name}.yaml")
    else:
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        text = path.read_text(encoding="utf-8")
    spec = parse_model_spec(text)
    if getattr(args, "calibration", None) is not None:
        if args.calibration <= 0:
            raise UsageError("--calibration must be positive")
        spec = dataclasses.replace(spec, memory=dataclasses.replace(spec.memory, energy_calibration=args.calibration))
    return spec


def _emit(args, files: dict, text: str):
    """Print ``text``; with --out, also write the report and CSV files."""
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
            for name, content in files.items():
                (out / name).write_text(content, encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot write to {out}: {exc}") from exc


def _header(args, spec=None) -> dict:
    flags = {k: v for k, v in vars(args).items() if k not in ("func", "command", "out", "verbose") and v is not None}
    doc = {"command": args.command, "flags": flags}
    if spec is not None:
        doc["config"] = spec_to_dict(spec)
    return doc


def cmd_analyze(args) -> int:
    spec = _load_spec(args)
    mode = normalize_mode(args.placement)
    states = spec.initial_states()
    profile = invocation_profile(spec.streaming)
    placement, bd = evaluate(states, profile, spec.memory, mode)
    mem_rtf, comp_rtf = rtf_terms(states, profile, placement, spec.memory)

    _check(placement.local_total <= spec.memory.local_weight_capacity_bytes * (1 + 1e-12),
           "placement exceeds local capacity")
    _check(abs(bd.total_mw - sum(c.total_mw for c in bd.components)) < 1e-9, "totals do not add up")

    lines = [f"# placement: {mode}, calibration {spec.memory.energy_calibration:g}\n"]
    lines.append(f"{'component':<12}{'freq_hz':>10}{'live_M':>10}{'local_MB':>10}"
                 f"{'memory_mw':>11}{'compute_mw':>12}\n")
    for c in bd.components:
        lines.append(f"{c.name:<12}{report.hz(c.freq_hz):>10}{c.live_params / 1e6:>10.2f}"
                     f"{c.local_bytes / 1e6:>10.2f}{report.mw(c.memory_mw):>11}{report.mw(c.compute_mw):>12}\n")
    lines.append(f"total {report.mw(bd.total_mw)} mW (memory {report.mw(bd.memory_mw)}, "
                 f"compute {report.mw(bd.compute_mw)}); compute share {bd.compute_share:.2%}"
                 f"{' (below 1%)' if bd.compute_below_1pct else ''}\n")
    lines.append(f"RTF estimate {mem_rtf + comp_rtf:.4f} (memory {mem_rtf:.4f}, compute {comp_rtf:.6f})\n")

    doc = _header(args, spec)
    doc.update({
        "invocation_hz": dataclasses.asdict(profile),
        "power": report.breakdown_doc(bd),
        "placement": report.placement_doc(placement),
        "rtf": {"memory": mem_rtf, "compute": comp_rtf, "total": mem_rtf + comp_rtf},
    })
    _emit(args, {"report.json": report.to_json(doc), "power.csv": report.power_csv(bd)}, "".join(lines))
    return EXIT_OK


def _fit_groups(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"points file not found: {p}")
    groups = read_points_csv(p)
    return {key: fit_exponential(points) for key, points in sorted(groups.items())}


def cmd_fit(args) -> int:
    fits = _fit_groups(args.points)
    groups = read_points_csv(args.points)
    lines, curves_doc, pred_rows = [], [], []
    for (comp, dataset), curve in fits.items():
        sizes = [p.size for p in groups[(comp, dataset)]]
        grid = np.linspace(min(sizes), max(sizes), 50)
        for s, w, g in prediction_rows(curve, grid):
            pred_rows.append((comp, dataset, float(s), w, g))
        lines.append(f"{comp} [{dataset}]: a={curve.a:.6g} b={curve.b:.6g} c={curve.c:.6g} "
                     f"adj_r2={curve.adj_r2:.4f} n={curve.n_points}"
                     f"{'' if curve.converged else ' (NOT CONVERGED)'}\n")
        curves_doc.append({"component": comp, "dataset": dataset, **dataclasses.asdict(curve)})
    doc = _header(args)
    doc["curves"] = curves_doc
    _emit(args, {"report.json": report.to_json(doc), "predictions.csv": report.predictions_csv(pred_rows)},
          "".join(lines))
    return EXIT_OK


def cmd_plan(args) -> int:
    spec = _load_spec(args)
    mode = normalize_mode(args.placement)
    curves = curves_from_entries(spec.curves)
    if args.points:
        for (comp, dataset), curve in _fit_groups(args.points).items():
            curves.setdefault(comp, {})[dataset] = curve
    states = spec.initial_states()
    profile = invocation_profile(spec.streaming)
    missing = [s.name for s in states if s.live_params > s.spec.min_params and s.name not in curves]
    if missing:
        raise UsageError(f"missing accuracy curve for component(s): {', '.join(missing)}")

    plan = plan_compression(states, curves, profile, spec.memory, args.target_mw, args.step_m, mode=mode)
    powers = [plan.initial_mw] + [s.total_mw for s in plan.steps]
    _check(all(b < a for a, b in zip(powers, powers[1:])), "plan power is not strictly decreasing")
    _check(all(s.live_params >= s.spec.min_params for s in plan.final_states), "plan went below a floor")

    placement, _ = evaluate(states, profile, spec.memory, mode)
    initial = sensitivity_report(states, curves, profile, placement, spec.memory,
                                 names=[s.name for s in states if s.name in curves])
    lines = [f"# target {report.mw(args.target_mw)} mW, step {args.step_m:g} M params, placement {mode}\n",
             "initial ratios: " + ", ".join(f"{c.name}={report.num(c.ratio, 1)}" for c in initial.ranked()) + "\n",
             f"initial {report.mw(plan.initial_mw)} mW -> final {report.mw(plan.final_mw)} mW "
             f"(reduction {report.mw(plan.achieved_mw_reduction)} mW), {len(plan.steps)} steps\n",
             "order: " + " -> ".join(plan.first_touched) + "\n",
             f"termination: {plan.termination_reason}\n"]

    doc = _header(args, spec)
    doc.update({
        "initial_mw": plan.initial_mw,
        "final_mw": plan.final_mw,
        "target_mw_reduction": plan.target_mw_reduction,
        "achieved_mw_reduction": plan.achieved_mw_reduction,
        "termination_reason": plan.termination_reason,
        "first_touched": plan.first_touched,
        "initial_sensitivities": [dataclasses.asdict(c) for c in initial.ranked()],
        "final_live_params": {s.name: s.live_params for s in plan.final_states},
    })
    _emit(args, {"report.json": report.to_json(doc), "plan.csv": report.plan_csv(plan)}, "".join(lines))
    return EXIT_OK


def _read_utterance_csv(path, duration_s):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"utterance file not found: {p}")
    times = []
    for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#") or (lineno == 1 and not line[0].isdigit() and line[0] != "."):
            continue
        try:
            times.append(float(line.split(",")[0]))
        except ValueError:
            raise UsageError(f"{p}:{lineno}: not a timestamp: {line!r}") from None
    if duration_s is None:
        raise UsageError("--duration-s is required with --utterance")
    try:
        return UtteranceProfile(duration_s, times)
    except ValueError as exc:
        raise UsageError(f"{p}: {exc}") from exc


def cmd_simulate(args) -> int:
    spec = _load_spec(args)
    if args.utterance:
        utt = _read_utterance_csv(args.utterance, args.duration_s)
    elif spec.utterance is not None:
        u = spec.utterance
        if args.duration_s is not None:
            u = dataclasses.replace(u, duration_s=args.duration_s)
        utt = UtteranceProfile.from_spec(u, seed=args.seed)
    else:
        raise UsageError("no utterance: pass --utterance or add an utterance section to the config")
    if utt.duration_s < spec.streaming.chunk_ms / 1000.0:
        raise UsageError("utterance is shorter than one chunk")

    counts = simulate_decode(spec.streaming, utt, seed=args.seed, expansion=args.expansion)
    analytic = invocation_profile(spec.streaming)
    _check(min(counts.encoder, counts.predictor, counts.joiner) >= 0, "negative invocation count")

    rates = counts.rates()
    lines = [f"# {utt.duration_s:g} s, {len(utt.token_times)} tokens, seed {args.seed}\n",
             f"{'component':<12}{'count':>8}{'sim_hz':>10}{'analytic_hz':>13}{'rel_err':>10}\n"]
    for role in ("encoder", "predictor", "joiner"):
        ref = analytic.for_role(role)
        rel = (rates.for_role(role) - ref) / ref if ref else 0.0
        lines.append(f"{role:<12}{getattr(counts, role):>8}{report.hz(rates.for_role(role)):>10}"
                     f"{report.hz(ref):>13}{rel:>10.2%}\n")
    doc = _header(args, spec)
    doc.update({"counts": dataclasses.asdict(counts), "analytic_hz": dataclasses.asdict(analytic)})
    _emit(args, {"report.json": report.to_json(doc), "counts.csv": report.counts_csv(counts, analytic)},
          "".join(lines))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="transducer-power", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True,
                           help="YAML model config, or builtin:reference / builtin:reference_plan")
            p.add_argument("--calibration", type=float, help="override memory energy_calibration")
        p.add_argument("--out", help="directory for report.json and CSV outputs")

    p = sub.add_parser("analyze", help="power breakdown, placement and RTF")
    common(p)
    p.add_argument("--placement", choices=[FRACTIONAL, "whole", WHOLE], default="whole")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fit", help="fit the exponential accuracy curve to size/WER points")
    common(p, config=False)
    p.add_argument("--points", required=True, help="CSV: component,size_millions,wer_percent[,dataset]")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("plan", help="greedy power-to-accuracy compression plan")
    common(p)
    p.add_argument("--points", help="size/WER CSV to fit curves from (added to config curves)")
    p.add_argument("--target-mw", type=float, required=True)
    p.add_argument("--step-m", type=float, default=0.4, help="step size in millions of parameters")
    p.add_argument("--placement", choices=[FRACTIONAL, "whole", WHOLE], default="whole")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="event-level decode simulation vs analytic frequencies")
    common(p)
    p.add_argument("--utterance", help="CSV of token timestamps in seconds")
    p.add_argument("--duration-s", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--expansion", choices=["bernoulli", "geometric"], default="bernoulli")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "target_mw", None) is not None and args.target_mw <= 0:
        parser.error("--target-mw must be positive")
    if getattr(args, "step_m", None) is not None and args.step_m <= 0:
        parser.error("--step-m must be positive")
    try:
        return args.func(args)
    except (ConfigError, FitError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InternalError as exc:
        print(f"internal invariant failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
