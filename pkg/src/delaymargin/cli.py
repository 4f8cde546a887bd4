"""Command-line front end.

Subcommands: analyze, roots, margin, sweep, simulate.  All commands read a
JSON system spec (--input), write JSON/CSV into an output directory (--out)
and use the library defaults unless overridden by flags.  Exit codes:

    0  certified (stable / hyperbolic, or the command completed)
    1  malformed spec or analysis error
    2  inconclusive (no sufficient condition fired)
    3  certified-unstable (oracle cross-check found a root with Re > 0)

Identical inputs and flags produce byte-identical outputs.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import charroots, criteria, io, simulate, smalldelay
from .errors import DelayMarginError, EigenvalueOnLine, SpecFormatError
from .model import HistoryGrid, SystemSpec

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2
EXIT_UNSTABLE = 3

ABSCISSA_POSITIVE_TOL = 1e-9


def _parse_range(text, what):
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise SpecFormatError(f"{what} must look like a:b or a:b:step, got {text!r}")
    return tuple(float(p) for p in parts)


def _ensure_out(args):
    os.makedirs(args.out, exist_ok=True)


def _config_doc(args):
    doc = {k: v for k, v in vars(args).items() if k != "func"}
    return doc


def _oracle_cross_check(spec, N):
    """Characteristic-root oracle summary; falls back to the fast abscissa."""
    try:
        rs = charroots.spectral_abscissa(spec, N=N)
        rightmost = rs.rightmost
        return {
            "abscissa": rs.abscissa,
            "rightmost_root": [rightmost.lam.real, rightmost.lam.imag] if rightmost else None,
            "root_count": len(rs.roots),
            "certified_clear_right_of": rs.certified_clear_right_of,
            "certified": True,
        }
    except DelayMarginError:
        est = charroots.abscissa_only(spec, N=N)
        return {"abscissa": est, "rightmost_root": None, "root_count": None,
                "certified_clear_right_of": None, "certified": False}


def cmd_analyze(args):
    spec = io.load_system_spec(args.input)
    _ensure_out(args)
    alphas = args.alpha if args.alpha else [0.0]

    # An eigenvalue of B on the test line defeats the sufficient criteria,
    # but the oracle can still certify instability; only then is it decisive.
    line_error = None
    try:
        hyp = criteria.hyperbolicity_test(spec)
    except EigenvalueOnLine as exc:
        line_error = exc
        hyp = None
    stability = {}
    for alpha in alphas:
        try:
            stability[f"{alpha:g}"] = criteria.stability_test(spec, alpha).to_dict()
        except DelayMarginError as exc:
            stability[f"{alpha:g}"] = {"verdict": "skipped", "reason": str(exc)}

    oracle = _oracle_cross_check(spec, args.nodes)
    certified = (hyp is not None and hyp.verdict == "hyperbolic") or any(
        rep.get("verdict") == "stable" for rep in stability.values()
    )
    unstable = oracle["abscissa"] is not None and oracle["abscissa"] > ABSCISSA_POSITIVE_TOL
    if unstable:
        verdict, code = "unstable", EXIT_UNSTABLE
    elif line_error is not None:
        print(f"error: EigenvalueOnLine: {line_error}", file=sys.stderr)
        return EXIT_ERROR
    elif certified:
        verdict = "stable" if any(
            rep.get("verdict") == "stable" for rep in stability.values()
        ) else "hyperbolic"
        code = EXIT_OK
    else:
        verdict, code = "inconclusive", EXIT_INCONCLUSIVE

    report = {
        "verdict": verdict,
        "hyperbolicity": hyp.to_dict() if hyp is not None else {
            "verdict": "skipped", "reason": str(line_error)},
        "stability": stability,
        "oracle": oracle,
        "config": _config_doc(args),
    }
    io.dump_json(report, os.path.join(args.out, "report.json"))
    with open(os.path.join(args.out, "summary.txt"), "w") as fh:
        fh.write(f"verdict: {verdict}\n")
        if hyp is not None:
            fh.write(f"hyperbolicity test: {hyp.verdict} ({hyp.criterion})\n")
        else:
            fh.write(f"hyperbolicity test: skipped ({line_error})\n")
        for alpha, rep in stability.items():
            fh.write(f"stability at alpha={alpha}: {rep.get('verdict')}\n")
        fh.write(f"oracle abscissa: {oracle['abscissa']:.9g}"
                 f" (certified={oracle['certified']})\n")
    return code


def cmd_roots(args):
    spec = io.load_system_spec(args.input)
    _ensure_out(args)
    window = _parse_range(args.window, "--window") if args.window else None
    rs = charroots.spectral_abscissa(spec, window=window, N=args.nodes)
    io.rootset_csv(rs, os.path.join(args.out, "roots.csv"))
    rightmost = rs.rightmost
    io.dump_json(
        {
            "abscissa": rs.abscissa if np.isfinite(rs.abscissa) else None,
            "root_count": len(rs.roots),
            "window": list(rs.window),
            "certified_clear_right_of": rs.certified_clear_right_of,
            "contour_count": rs.contour_count,
            "rightmost_root": [rightmost.lam.real, rightmost.lam.imag] if rightmost else None,
            "config": _config_doc(args),
        },
        os.path.join(args.out, "roots.json"),
    )
    return EXIT_OK


def cmd_margin(args):
    spec = io.load_system_spec(args.input)
    if not spec.is_feedback:
        raise SpecFormatError("margin requires a feedback-mode spec "
                              "(fields: B plus feedback {C, tau})")
    _ensure_out(args)
    margin = smalldelay.robustness_margin(spec.B, spec.C, mode=args.mode)
    doc = margin.to_dict()
    doc["config"] = _config_doc(args)
    if args.cross_check and not margin.unconditional:
        if args.tau_range:
            lo, hi = _parse_range(args.tau_range, "--tau-range")[:2]
        else:
            lo, hi = margin.kappa * 1.001, max(10.0 * margin.kappa, 5.0)
        try:
            tau_star, crossing = charroots.critical_delay(spec.B, spec.C, (lo, hi), N=args.nodes)
            doc["critical_delay"] = tau_star
            doc["crossing_root"] = [crossing.lam.real, crossing.lam.imag] if crossing else None
            doc["conservatism_ratio"] = tau_star / margin.kappa if margin.kappa > 0 else None
        except DelayMarginError as exc:
            doc["critical_delay"] = None
            doc["cross_check_note"] = str(exc)
    io.dump_json(doc, os.path.join(args.out, "margin.json"))
    return EXIT_OK


def cmd_sweep(args):
    spec = io.load_system_spec(args.input)
    if not spec.is_feedback:
        raise SpecFormatError("sweep requires a feedback-mode spec")
    if not args.tau_range:
        raise SpecFormatError("sweep requires --tau-range a:b:step")
    lo, hi, step = _parse_range(args.tau_range, "--tau-range")
    if step <= 0 or hi < lo:
        raise SpecFormatError("--tau-range must be nonempty with positive step")
    taus = np.arange(lo, hi + step / 2, step)
    _ensure_out(args)

    try:
        kappa = smalldelay.robustness_margin(spec.B, spec.C, mode=args.mode).kappa
    except DelayMarginError:
        kappa = None

    rows = []
    for tau in taus:
        sp = SystemSpec.feedback(spec.B, spec.C, float(tau))
        absc = charroots.abscissa_only(sp, N=args.nodes)
        try:
            rep = criteria.hyperbolicity_test(sp)
            product_pass = rep.verdict == "hyperbolic" and rep.criterion in (
                "product_bound", "first_power_sup")
            series_pass = rep.verdict == "hyperbolic"
        except DelayMarginError:
            product_pass = series_pass = None
        rows.append((float(tau), absc, product_pass, series_pass))

    def flag(v):
        return "na" if v is None else ("1" if v else "0")

    with open(os.path.join(args.out, "sweep.csv"), "w") as fh:
        fh.write("tau,abscissa,product_bound_pass,series_pass\n")
        for tau, absc, pp, sp_ in rows:
            fh.write(f"{tau:.17g},{absc:.17g},{flag(pp)},{flag(sp_)}\n")
    io.dump_json(
        {"kappa": kappa, "tau_range": [lo, hi, step], "rows": len(rows),
         "config": _config_doc(args)},
        os.path.join(args.out, "sweep.json"),
    )
    return EXIT_OK


def cmd_simulate(args):
    spec = io.load_system_spec(args.input)
    _ensure_out(args)
    history = HistoryGrid.constant(np.ones(spec.n), spec.r)
    target_h = args.step if args.step else spec.r / 64.0
    h = simulate.aligned_step(spec, target_h)
    T = args.horizon if args.horizon else max(10.0, 10.0 * spec.r)
    traj = simulate.integrate(spec, history, T, h)
    io.trajectory_csv(traj, os.path.join(args.out, "trajectory.csv"))
    summary = {
        "h": traj.h,
        "T": float(traj.times[-1]),
        "diverged": traj.diverged,
        "final_norm": float(np.linalg.norm(traj.states[-1])),
        "config": _config_doc(args),
    }
    try:
        est = simulate.decay_rate(traj)
        summary["decay_rate"] = est.rate
        summary["r_squared"] = est.r_squared
    except DelayMarginError as exc:
        summary["decay_rate"] = None
        summary["decay_rate_note"] = str(exc)
    io.dump_json(summary, os.path.join(args.out, "simulate.json"))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="delaymargin",
        description="Stability, hyperbolicity and small-delay robustness "
                    "analysis of linear delay differential systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", required=True, help="JSON system spec")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--nodes", type=int, default=32,
                       help="discretization size N for the root oracle")
        p.add_argument("--seed", type=int, default=0,
                       help="seed recorded in reports (analyses are deterministic)")

    p = sub.add_parser("analyze", help="run the sufficient stability/hyperbolicity tests")
    common(p)
    p.add_argument("--alpha", type=float, action="append",
                   help="decay-rate line(s) to certify (repeatable, default 0)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("roots", help="characteristic roots in a window")
    common(p)
    p.add_argument("--window", help="re_lo:re_hi:im_max (default: automatic)")
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("margin", help="small-delay robustness margin kappa")
    common(p)
    p.add_argument("--mode", choices=["stable", "hyperbolic"], default="stable")
    p.add_argument("--cross-check", action="store_true",
                   help="also bisect the true critical delay and report the ratio")
    p.add_argument("--tau-range", help="a:b bracket for the critical-delay bisection")
    p.set_defaults(func=cmd_margin)

    p = sub.add_parser("sweep", help="abscissa and criterion verdicts over a tau range")
    common(p)
    p.add_argument("--mode", choices=["stable", "hyperbolic"], default="stable")
    p.add_argument("--tau-range", help="a:b:step")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="time-domain trajectory from constant history")
    common(p)
    p.add_argument("--horizon", type=float, help="integration horizon T")
    p.add_argument("--step", type=float, help="target step (auto-aligned to delays)")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecFormatError, json.JSONDecodeError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except DelayMarginError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
