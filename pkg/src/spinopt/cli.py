"""Batch command-line front-end.

Subcommands: ``optimize``, ``trials``, ``surrogate-demo``, ``magnetometry``,
``compare``.  Every command reads an optional JSON config (defaults carry the
reference values), writes CSV data files plus a ``*_meta.json`` sidecar to
the output directory, and returns exit code 0 on success, 1 on a runtime
failure, 2 on a usage or config error.  Data files depend only on the config
and seed; timestamps and wall times live in the sidecar, so repeated runs
are byte-identical.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    ConfigError,
    field_from_config,
    load_config,
    magnetometry_from,
    mhz_from_rad_s,
    opt_config_from,
)
from .dynamics import NoiseGrid, ensemble_objective, state_fidelity_many
from .kriging import fit, jittered_grid, surrogate_objective
from .magnetometry import (
    RECT,
    SHAPED,
    build_xy8,
    estimate_t2,
    fringe_window,
    simulate_ramsey,
)
from .optimize import run_single, run_to_record, run_trials, stats_to_record

OUT_ENV_VAR = "SPINOPT_OUT"

TRIAL_FIELDS = [
    "trial",
    "method",
    "n_sets",
    "seed",
    "f_search",
    "f_verified",
    "true_calls",
    "model_attempts",
    "nm_evals",
    "p_fit",
    "lambda_opt",
]


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_meta(out: Path, command: str, wall_s: float, extra=None):
    meta = {
        "command": command,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "wall_s": wall_s,
    }
    if extra:
        meta.update(extra)
    with open(out / f"{command}_meta.json", "w") as fh:
        json.dump(meta, fh, indent=2)


def read_trial_records(path) -> list[dict]:
    """Parse a trial results CSV back into typed records."""
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(
                {
                    "trial": int(row["trial"]),
                    "method": row["method"],
                    "n_sets": int(row["n_sets"]),
                    "seed": int(row["seed"]),
                    "f_search": float(row["f_search"]),
                    "f_verified": float(row["f_verified"]),
                    "true_calls": int(row["true_calls"]),
                    "model_attempts": int(row["model_attempts"]),
                    "nm_evals": int(row["nm_evals"]),
                    "p_fit": None if row["p_fit"] == "" else float(row["p_fit"]),
                    "lambda_opt": json.loads(row["lambda_opt"]),
                }
            )
    return records


def _trial_rows(runs, start_index=0):
    rows = []
    for i, run in enumerate(runs, start=start_index):
        rec = run_to_record(run)
        rows.append(
            [
                i,
                rec["method"],
                rec["n_sets"],
                rec["seed"],
                rec["f_search"],
                rec["f_verified"],
                rec["true_calls"],
                rec["model_attempts"],
                rec["nm_evals"],
                rec["p_fit"],
                json.dumps(rec["lambda_opt"]),
            ]
        )
    return rows


def _fidelity_map_rows(field, grid: NoiseGrid, n_steps: int):
    pts = grid.points()
    f = state_fidelity_many(field, pts[:, 0], pts[:, 1], n_steps)
    return [
        [float(mhz_from_rad_s(d)), k, v]
        for (d, k), v in zip(pts, f)
    ]


def cmd_optimize(cfg: dict, out: Path, seed, threads: int) -> int:
    start = time.perf_counter()
    oc = opt_config_from(cfg, seed=seed)
    run = run_single(oc)
    _write_csv(out / "results.csv", TRIAL_FIELDS, _trial_rows([run]))
    _write_csv(out / "timings.csv", ["trial", "wall_ms"], [[0, run.wall_ms]])
    grid = oc.noise_grid(oc.verify_grid)
    _write_csv(
        out / "field_map.csv",
        ["delta_mhz", "kappa", "fidelity"],
        _fidelity_map_rows(run.field, grid, oc.n_steps),
    )
    _write_meta(out, "optimize", time.perf_counter() - start)
    print(
        f"{oc.method} n_sets={oc.n_sets}: f_verified={run.f_verified:.4f} "
        f"true_calls={run.true_calls}"
    )
    return 0


def cmd_trials(cfg: dict, out: Path, seed, threads: int) -> int:
    start = time.perf_counter()
    oc = opt_config_from(cfg, seed=seed)
    n_trials = int(cfg["optimize"]["n_trials"])
    stats = run_trials(oc, n_trials, threads=threads)
    _write_csv(out / "results.csv", TRIAL_FIELDS, _trial_rows(stats.runs))
    _write_csv(
        out / "timings.csv",
        ["trial", "wall_ms"],
        [[i, r.wall_ms] for i, r in enumerate(stats.runs)],
    )
    summary = stats_to_record(oc, n_trials, stats)
    _write_csv(out / "summary.csv", list(summary.keys()), [list(summary.values())])
    _write_csv(
        out / "histogram.csv",
        ["bin_lo", "bin_hi", "count"],
        [
            [stats.hist_edges[i], stats.hist_edges[i + 1], int(c)]
            for i, c in enumerate(stats.hist_counts)
        ],
    )
    _write_meta(out, "trials", time.perf_counter() - start, {"failures": stats.failures})
    print(
        f"{oc.method} x{n_trials}: best={stats.f_best:.4f} mean={stats.f_mean:.4f} "
        f"mean_true_calls={stats.mean_true_calls:.0f}"
    )
    return 0


def cmd_compare(cfg: dict, out: Path, seed, threads: int) -> int:
    start = time.perf_counter()
    n_trials = int(cfg["compare"]["n_trials"])
    primary = opt_config_from(cfg, seed=seed)
    baseline = replace(
        primary,
        method=cfg["compare"]["baseline_method"],
        n_sets=int(cfg["compare"]["baseline_n_sets"]),
    )
    rows = []
    for oc in (primary, baseline):
        stats = run_trials(oc, n_trials, threads=threads)
        _write_csv(
            out / f"results_{oc.method}.csv", TRIAL_FIELDS, _trial_rows(stats.runs)
        )
        summary = stats_to_record(oc, n_trials, stats)
        rows.append(summary)
        print(
            f"{oc.method} x{n_trials}: mean={stats.f_mean:.4f} "
            f"mean_true_calls={stats.mean_true_calls:.0f}"
        )
    ratio = rows[0]["mean_true_calls"] / rows[1]["mean_true_calls"]
    header = list(rows[0].keys()) + ["call_ratio_vs_baseline"]
    _write_csv(
        out / "comparison.csv",
        header,
        [
            list(rows[0].values()) + [ratio],
            list(rows[1].values()) + [1.0],
        ],
    )
    _write_meta(out, "compare", time.perf_counter() - start)
    print(f"true-call ratio {rows[0]['method']}/{rows[1]['method']}: {ratio:.3f}")
    return 0


def cmd_surrogate_demo(cfg: dict, out: Path, seed, threads: int) -> int:
    start = time.perf_counter()
    oc = opt_config_from(cfg, seed=seed)
    sd = cfg["surrogate_demo"]
    rng = np.random.default_rng(oc.seed)
    demo_field = field_from_config(sd["field"], oc.duration, oc.amp_limit)
    truth_grid = oc.noise_grid(oc.verify_grid)
    region = truth_grid.bounds()

    def truth_values(fld, pts):
        return state_fidelity_many(fld, pts[:, 0], pts[:, 1], oc.n_steps)

    _write_csv(
        out / "truth_map.csv",
        ["delta_mhz", "kappa", "fidelity"],
        _fidelity_map_rows(demo_field, truth_grid, oc.n_steps),
    )
    for n in sd["sample_counts"]:
        pts = jittered_grid(region, int(n), rng)
        vals = truth_values(demo_field, pts)
        _write_csv(
            out / f"samples_{n}.csv",
            ["delta_mhz", "kappa", "fidelity"],
            [[float(mhz_from_rad_s(p[0])), p[1], v] for p, v in zip(pts, vals)],
        )
        model = fit(pts, vals, rng, bounds=region)
        pred = np.clip(model.predict_grid(truth_grid.deltas, truth_grid.kappas), 0, 1)
        rows = []
        for i, d in enumerate(truth_grid.deltas):
            for j, k in enumerate(truth_grid.kappas):
                rows.append([float(mhz_from_rad_s(d)), k, pred[i, j]])
        _write_csv(out / f"prediction_map_{n}.csv", ["delta_mhz", "kappa", "fidelity"], rows)

    # Timing and deviation versus the number of objective grid points, for
    # the true objective and for a 16-sample surrogate, averaged over random
    # fields.  The reference value is the dense true objective per field.
    mn_list = [int(v) for v in sd["grid_sizes_mn"]]
    reps = int(sd["timing_reps"])
    n_fields = int(sd["n_fields"])
    true_dev = np.zeros(len(mn_list))
    surr_dev = np.zeros(len(mn_list))
    true_time = np.zeros(len(mn_list))
    surr_time = np.zeros(len(mn_list))
    base_freq = 2 * np.pi / oc.duration
    for _ in range(n_fields):
        params = np.concatenate(
            [
                rng.uniform(0, oc.amp_limit, 1),
                rng.uniform(0, base_freq, 1),
                rng.uniform(0, base_freq, 1),
            ]
        )
        from .fields import enforce_amplitude_constraint, pm_field as _pm

        fld = enforce_amplitude_constraint(
            _pm(params[:1], params[1:2], params[2:3], oc.duration, oc.amp_limit)
        )
        reference, _ = ensemble_objective(fld, truth_grid, oc.n_steps)
        pts = jittered_grid(region, 16, rng)
        model = fit(pts, truth_values(fld, pts), rng, bounds=region)
        for i, mn in enumerate(mn_list):
            m = int(np.sqrt(mn))
            grid = oc.noise_grid((m, max(1, mn // m)))
            t0 = time.perf_counter()
            for _ in range(reps):
                value, _ = ensemble_objective(fld, grid, oc.n_steps)
            true_time[i] += (time.perf_counter() - t0) / reps
            true_dev[i] += abs(value - reference)
            t0 = time.perf_counter()
            for _ in range(reps):
                est = surrogate_objective(model, grid)
            surr_time[i] += (time.perf_counter() - t0) / reps
            surr_dev[i] += abs(est - reference)
    _write_csv(
        out / "objective_timing.csv",
        ["mn", "true_s", "surrogate_s"],
        [
            [mn, true_time[i] / n_fields, surr_time[i] / n_fields]
            for i, mn in enumerate(mn_list)
        ],
    )
    _write_csv(
        out / "objective_deviation.csv",
        ["mn", "true_dev", "surrogate_dev"],
        [
            [mn, true_dev[i] / n_fields, surr_dev[i] / n_fields]
            for i, mn in enumerate(mn_list)
        ],
    )
    _write_meta(out, "surrogate-demo", time.perf_counter() - start)
    print(f"surrogate demo written to {out}")
    return 0


def cmd_magnetometry(cfg: dict, out: Path, seed, threads: int) -> int:
    start = time.perf_counter()
    rect_cfg, shaped_cfg, signal, noise, run_cfg = magnetometry_from(cfg, seed=seed)
    t_max = run_cfg["t_max"]
    traces = []
    t2 = {}
    for kind, settings in ((RECT, rect_cfg), (SHAPED, shaped_cfg)):
        period = 8 * (settings["t_pulse"] + settings["tau_pulse"])
        n_periods = int(np.floor(t_max / period + 1e-9))
        seq = build_xy8(
            kind,
            settings["t_pulse"],
            settings["tau_pulse"],
            n_periods,
            x_field=settings.get("x_field"),
        )
        trace = simulate_ramsey(
            seq, signal, noise, t_max, n_steps_per_pulse=run_cfg["n_steps_per_pulse"]
        )
        traces.append(trace)
        window = fringe_window(signal, readout_dt=seq.period)
        floor = 2.0 / np.sqrt(noise.n_realizations) if noise.c > 0 else 1e-3
        t2[kind] = estimate_t2(
            trace.times, trace.p0_mean, envelope_window=window, min_envelope=floor
        )
    rows = []
    for trace in traces:
        for t, p, e in zip(trace.times, trace.p0_mean, trace.p0_stderr):
            rows.append([t / 1e-6, p, e, trace.pulse_kind])
    _write_csv(out / "trace.csv", ["time_us", "p0_mean", "p0_stderr", "pulse_kind"], rows)
    ratio = t2[SHAPED].t2 / t2[RECT].t2
    _write_csv(
        out / "t2_report.csv",
        [
            "rect_t2_us",
            "shaped_t2_us",
            "ratio",
            "rect_lower_bound",
            "shaped_lower_bound",
        ],
        [
            [
                t2[RECT].t2 / 1e-6,
                t2[SHAPED].t2 / 1e-6,
                ratio,
                t2[RECT].lower_bound,
                t2[SHAPED].lower_bound,
            ]
        ],
    )
    _write_meta(out, "magnetometry", time.perf_counter() - start)
    print(
        f"T2 rect = {t2[RECT].t2 / 1e-6:.1f} us, shaped = {t2[SHAPED].t2 / 1e-6:.1f} us "
        f"(ratio {ratio:.2f})"
    )
    return 0


COMMANDS = {
    "optimize": cmd_optimize,
    "trials": cmd_trials,
    "surrogate-demo": cmd_surrogate_demo,
    "magnetometry": cmd_magnetometry,
    "compare": cmd_compare,
}


def _apply_flag_overrides(cfg: dict, args) -> None:
    if getattr(args, "method", None):
        cfg["optimize"]["method"] = args.method
    if getattr(args, "nd", None):
        cfg["optimize"]["n_sets"] = args.nd


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinopt",
        description="Batch runner for ensemble pulse optimization and AC magnetometry",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (defaults built in)")
    common.add_argument("--seed", type=int, help="master seed override")
    common.add_argument("--threads", type=int, default=None, help="worker threads")
    common.add_argument(
        "--out",
        help=f"output directory (default ${OUT_ENV_VAR} or ./spinopt_out)",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name in ("optimize", "trials", "compare"):
            p.add_argument("--method", choices=["bpm", "pm", "bsfb", "sfb"])
            p.add_argument("--nd", type=int, help="number of parameter sets")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        _apply_flag_overrides(cfg, args)
        threads = args.threads if args.threads is not None else int(cfg["threads"])
        out = Path(
            args.out
            if args.out
            else os.environ.get(OUT_ENV_VAR, "spinopt_out")
        )
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args.seed, threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
