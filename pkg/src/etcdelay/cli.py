"""Command-line interface.

Subcommands:
    design            run the design pipeline (no simulation), print report
    simulate          design + closed-loop simulation, emit CSVs + report
    report            design + simulation, print the combined summary
    scenario list     list built-in scenarios
    scenario dump     print a built-in scenario as JSON

Exit codes: 0 success (including reports marked invalid), 2 config error,
3 numeric failure.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import backend, pipeline
from .config import load_config
from .errors import (ConfigError, DimensionError, ExprSyntaxError,
                     NumericError, ParameterError)
from .scenarios import BUILTINS, get_scenario


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, np.ndarray):
        if v.ndim == 1:
            return "[" + ", ".join(f"{x:.6g}" for x in v) + "]"
        return "[" + ", ".join(_fmt(row) for row in v) + "]"
    return str(v)


def render_report(name, report):
    """Stable key:value text form of a DesignReport."""
    lines = ["[scenario]", f"name: {name}", f"mode: {report.mode}",
             f"backend: {backend.DEFAULT}", ""]

    lines.append("[controller]")
    if report.controller is not None:
        c = report.controller
        lines += [f"K: {_fmt(c.K)}", f"P: {_fmt(c.P)}", f"Q: {_fmt(c.Q)}",
                  f"R: {_fmt(c.R)}", f"lmi_max_eig: {_fmt(c.lmi_max_eig)}",
                  f"lmi_feasible_strict: {_fmt(bool(report.lmi_feasible))}"]
    else:
        lines.append("controller: none (synthesis failed)")
        if report.synthesis_best_eig is not None:
            lines.append(f"best_max_eig: {_fmt(report.synthesis_best_eig)}")
    lines.append("")

    lines.append("[checks]")
    for chk in report.parameter_checks:
        verdict = "pass" if chk.passed else "fail"
        if not chk.required:
            verdict += " (informational)"
        lines.append(f"{chk.name}: {verdict}")
    lines.append(f"overall: {'valid' if report.valid else 'invalid'}")
    lines.append("")

    lines.append("[rates]")
    if report.rate is not None:
        lines += [f"lambda: {_fmt(report.rate.lam)}", f"eta: {_fmt(report.rate.eta)}"]
    else:
        lines.append("rates: unavailable (no positive decay root)")
    lines.append("")

    lines.append("[dwell]")
    if report.dwell is not None:
        dw = report.dwell
        lines += [f"regime: {dw.regime}", f"delta1: {_fmt(dw.delta1)}",
                  f"delta2: {_fmt(dw.delta2)}"]
        lines.append(f"t_tilde: {_fmt(dw.t_tilde) if dw.t_tilde is not None else 'n/a'}")
        if dw.observed_min_gap is not None:
            lines.append(f"observed_min_gap: {_fmt(dw.observed_min_gap)}")
    else:
        lines.append("dwell: unavailable")
    lines.append("")

    if report.sim is not None:
        res = report.sim
        gaps = res.inter_event_gaps
        lines.append("[simulation]")
        lines += [f"samples: {len(res.times)}",
                  f"final_time: {_fmt(float(res.times[-1]))}",
                  f"events: {len(res.events)}"]
        if len(res.events) > 1:
            lines += [f"first_event_after_zero: {_fmt(float(res.events[1]))}",
                      f"min_gap: {_fmt(float(gaps.min()))}",
                      f"mean_gap: {_fmt(float(gaps.mean()))}"]
        rate_fit = _decay_rate_fit(res)
        if rate_fit is not None:
            lines.append(f"empirical_decay_rate: {_fmt(rate_fit)}")
        lines += [f"zeno_guard_hit: {_fmt(res.zeno_guard_hit)}",
                  f"aborted: {_fmt(res.aborted)}"]
        if res.aborted:
            lines.append(f"diagnostic: {res.diagnostic}")
        lines.append("")

    if report.bound_certification is not None:
        cert = report.bound_certification
        lines.append("[certification]")
        lines += [f"baseline: {_fmt(cert.baseline)}", f"eta: {_fmt(cert.eta)}",
                  f"max_ratio: {_fmt(cert.max_ratio)}",
                  f"max_ratio_time: {_fmt(cert.max_ratio_time)}",
                  f"passed: {_fmt(cert.passed)}", ""]

    if report.warnings:
        lines.append("[warnings]")
        lines += [f"- {w}" for w in report.warnings]
        lines.append("")

    return "\n".join(lines)


def _decay_rate_fit(res):
    """Least-squares slope of ln V(t): empirical exponential decay rate."""
    mask = res.V > 1e-300
    if mask.sum() < 2:
        return None
    t = res.times[mask]
    logv = np.log(res.V[mask])
    slope = np.polyfit(t, logv, 1)[0]
    return -float(slope)


def write_trajectory_csv(path, res):
    n = res.states.shape[1]
    m = res.u.shape[1]
    cols = ["t"] + [f"x{i + 1}" for i in range(n)] + ["V"] + [f"u{j + 1}" for j in range(m)]
    lines = [",".join(cols)]
    for i in range(len(res.times)):
        row = [res.times[i], *res.states[i], res.V[i], *res.u[i]]
        lines.append(",".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_events_csv(path, res):
    lines = ["k,t_k,gap_from_previous"]
    for k, t_k in enumerate(res.events):
        gap = "" if k == 0 else repr(float(res.events[k] - res.events[k - 1]))
        lines.append(f"{k},{repr(float(t_k))},{gap}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _load_scenario(args):
    if bool(args.scenario) == bool(args.config):
        raise ConfigError("<args>", "give exactly one of --scenario or --config")
    if args.scenario:
        try:
            cfg = get_scenario(args.scenario)
        except KeyError as err:
            raise ConfigError("--scenario", str(err)) from None
    else:
        cfg = load_config(args.config)
    overrides = {}
    if args.step is not None:
        overrides["step"] = args.step
    if args.horizon is not None:
        overrides["horizon"] = args.horizon
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


def _run_pipeline(cfg, with_sim):
    system, sp, trig_cfg, sim_cfg, mode, controller = cfg.build()
    return pipeline.design_controller(
        system, sp, trig_cfg, mode=mode, controller=controller,
        sim_cfg=sim_cfg if with_sim else None,
    )


def _emit(cfg, report, out_dir, write_csvs):
    text = render_report(cfg.name, report)
    print(text)
    out = Path(out_dir) if out_dir else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        report_name = cfg.report_path or f"{cfg.name}-report.txt"
        (out / report_name).write_text(text + "\n", encoding="utf-8")
    if write_csvs and report.sim is not None:
        base = out if out is not None else Path(".")
        base.mkdir(parents=True, exist_ok=True)
        traj = base / (cfg.trajectory_csv or f"{cfg.name}-trajectory.csv")
        ev = base / (cfg.events_csv or f"{cfg.name}-events.csv")
        write_trajectory_csv(traj, report.sim)
        write_events_csv(ev, report.sim)
        print(f"wrote {traj}", file=sys.stderr)
        print(f"wrote {ev}", file=sys.stderr)
    if report.sim is not None and report.sim.aborted:
        raise NumericError(report.sim.diagnostic)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="etcdelay",
        description="Event-triggered stabilization of linear time-delay systems.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--scenario", help="built-in scenario name")
        p.add_argument("--config", help="path to a scenario JSON file")
        p.add_argument("--out", help="output directory for report/CSV files")
        p.add_argument("--step", type=float, help="override integration step")
        p.add_argument("--horizon", type=float, help="override simulation horizon")

    add_common(sub.add_parser("design", help="synthesize/verify a controller and report"))
    add_common(sub.add_parser("simulate", help="design + simulate, emit trajectory/event CSVs"))
    add_common(sub.add_parser("report", help="design + simulate, print the combined summary"))

    sc = sub.add_parser("scenario", help="inspect built-in scenarios")
    sc_sub = sc.add_subparsers(dest="scenario_command", required=True)
    sc_sub.add_parser("list", help="list built-in scenario names")
    dump = sc_sub.add_parser("dump", help="print a built-in scenario as JSON")
    dump.add_argument("name")
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "scenario":
            if args.scenario_command == "list":
                for name in sorted(BUILTINS):
                    print(name)
            else:
                try:
                    print(get_scenario(args.name).to_json())
                except KeyError as err:
                    raise ConfigError("name", str(err)) from None
            return 0
        cfg = _load_scenario(args)
        if args.command == "design":
            report = _run_pipeline(cfg, with_sim=False)
            _emit(cfg, report, args.out, write_csvs=False)
        elif args.command == "simulate":
            report = _run_pipeline(cfg, with_sim=True)
            _emit(cfg, report, args.out, write_csvs=True)
        else:  # report
            report = _run_pipeline(cfg, with_sim=True)
            _emit(cfg, report, args.out, write_csvs=False)
        return 0
    except (ConfigError, ExprSyntaxError, ParameterError, DimensionError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (NumericError, ArithmeticError) as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
