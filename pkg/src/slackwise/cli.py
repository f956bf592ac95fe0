"""Command-line interface: run, sweep, compare, and campaign experiments.

All outputs are deterministic CSV/JSON written atomically (temp file +
rename), so repeated invocations with the same configuration and seed
produce byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 numeric breakdown,
4 unrecoverable fault.  The ``SLACKWISE_THREADS`` environment variable
caps parallelism of sweeps and campaigns.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import tempfile

from .config import (ConfigError, MODES, SimConfig, config_from_document,
                     mode_from_flags)
from .linalg import TaskKind
from .simulator import (CampaignRow, IterationRecord, RunSummary, SweepPoint,
                        compare_modes, fault_campaign, simulate_run,
                        sweep_reclamation_ratio)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BREAKDOWN = 3
EXIT_UNRECOVERABLE = 4

TRACE_HEADER = ("iter,task,pred_time_s,actual_time_s,slack_pred_s,"
                "slack_actual_s,f_cpu_mhz,f_gpu_mhz,abft_mode,faults_0d,"
                "faults_1d,faults_2d,detected,corrected,e_cpu_dyn_j,"
                "e_cpu_stat_j,e_cpu_idle_j,e_gpu_dyn_j,e_gpu_stat_j,"
                "e_gpu_idle_j,skipped")

_TRACE_TASKS = ("pd", "pu", "tmu", "transfer", "idle")


def _fmt(x: float) -> str:
    return repr(float(x))


def trace_rows(records: list[IterationRecord]) -> list[str]:
    """Expand iteration records into CSV rows, one per task plus an idle
    row per iteration.

    Iteration-scoped quantities appear on exactly one row (slack on the
    ``pd`` row, fault counters on ``tmu``, idle energy on ``idle``) so
    that summing any numeric column over the file reproduces the run
    totals exactly.
    """
    from .abft import ErrorKind
    rows = []
    for rec in records:
        for task_name in _TRACE_TASKS:
            is_pd = task_name == "pd"
            is_tmu = task_name == "tmu"
            is_idle = task_name == "idle"
            if is_idle:
                pred = actual = 0.0
            else:
                task = TaskKind(task_name)
                pred = rec.pred_time_s.get(task, 0.0)
                actual = rec.actual_time_s.get(task, 0.0)
            cells = [
                str(rec.k),
                task_name,
                _fmt(pred),
                _fmt(actual),
                _fmt(rec.slack_pred_s if is_pd else 0.0),
                _fmt(rec.slack_actual_s if is_pd else 0.0),
                _fmt(rec.f_cpu_mhz),
                _fmt(rec.f_gpu_mhz),
                rec.abft_mode,
                str(rec.faults[ErrorKind.D0] if is_tmu else 0),
                str(rec.faults[ErrorKind.D1] if is_tmu else 0),
                str(rec.faults[ErrorKind.D2] if is_tmu else 0),
                str(rec.detected if is_tmu else 0),
                str(rec.corrected if is_tmu else 0),
                _fmt(rec.e_cpu_dyn_j if is_pd else 0.0),
                _fmt(rec.e_cpu_stat_j if is_pd else 0.0),
                _fmt(rec.e_cpu_idle_j if is_idle else 0.0),
                _fmt(rec.e_gpu_dyn_j if is_tmu else 0.0),
                _fmt(rec.e_gpu_stat_j if is_tmu else 0.0),
                _fmt(rec.e_gpu_idle_j if is_idle else 0.0),
                "1" if rec.skipped else "0",
            ]
            rows.append(",".join(cells))
    return rows


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".slackwise-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_trace(path: str, records: list[IterationRecord]) -> None:
    write_atomic(path, "\n".join([TRACE_HEADER] + trace_rows(records)) + "\n")


def summary_document(summary: RunSummary) -> dict:
    doc = dataclasses.asdict(summary)
    doc["faults_injected"] = {k.value: v
                              for k, v in summary.faults_injected.items()}
    return doc


def write_summary(path: str, summary: RunSummary) -> None:
    text = json.dumps(summary_document(summary), sort_keys=True, indent=2)
    write_atomic(path, text + "\n")


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------

def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON configuration file "
                                    "(flags below override its fields)")
    p.add_argument("--alg", choices=["cholesky", "lu", "qr"],
                   help="decomposition kind (default lu)")
    p.add_argument("--n", type=int, help="matrix order (default 1024)")
    p.add_argument("--b", type=int, help="block size (default 128)")
    p.add_argument("--mode", choices=list(MODES),
                   help="run mode (default original)")
    p.add_argument("--r", type=float,
                   help="reclamation ratio in [0,1] (default 0)")
    p.add_argument("--seed", type=int, help="RNG seed (default 0)")
    p.add_argument("--engine", choices=["analytic", "numeric"],
                   help="timing-only or real arithmetic (default analytic)")
    p.add_argument("--noise-sigma", type=float, dest="noise_sigma",
                   help="lognormal timing-noise sigma (default 0)")
    p.add_argument("--recovery", choices=["recompute", "abort", "continue"],
                   help="uncorrectable-fault policy (default recompute)")
    p.add_argument("--fc-desired", type=float, dest="fc_desired",
                   help="target fault coverage (default 0.999999)")
    p.add_argument("--dvfs-latency-s", type=float, dest="dvfs_latency_s",
                   help="clock-switch latency in seconds (default 0)")
    # behavior-flag aliases for the run modes
    p.add_argument("--reclaim-slack", dest="reclaim_slack",
                   action=argparse.BooleanOptionalAction,
                   help="alias flag: enable slack reclamation")
    p.add_argument("--overclock", action=argparse.BooleanOptionalAction,
                   help="alias flag: allow clocks beyond base")
    p.add_argument("--autoboost", action=argparse.BooleanOptionalAction,
                   help="alias flag: idle device drops to min clock")
    p.add_argument("--reclamation-ratio", type=float,
                   dest="reclamation_ratio",
                   help="alias for --r")


_OVERRIDE_KEYS = ("alg", "n", "b", "mode", "r", "seed", "engine",
                  "noise_sigma", "recovery", "fc_desired", "dvfs_latency_s",
                  "reclaim_slack", "overclock", "autoboost",
                  "reclamation_ratio")


def _load(args: argparse.Namespace) -> SimConfig:
    doc = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}")
        if not isinstance(doc, dict):
            raise ConfigError("config root must be a JSON object")
    for key in _OVERRIDE_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            doc[key] = value
    flag_keys = ("reclaim_slack", "overclock", "autoboost")
    if "mode" not in doc and any(k in doc for k in flag_keys):
        doc["mode"] = mode_from_flags(doc.pop("reclaim_slack", False),
                                      doc.pop("overclock", False),
                                      doc.pop("autoboost", False))
        for k in flag_keys:
            doc.pop(k, None)
    return config_from_document(doc)


def _parse_grid(spec: str) -> list[float]:
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError("grid must be start:step:stop or a comma list")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError("grid step must be positive")
        grid = []
        v = start
        while v <= stop + 1e-12:
            grid.append(round(v, 12))
            v += step
        return grid
    return [float(p) for p in spec.split(",") if p.strip()]


def _exit_code(summary: RunSummary) -> int:
    if summary.breakdown:
        return EXIT_BREAKDOWN
    if summary.unrecoverable:
        return EXIT_UNRECOVERABLE
    return EXIT_OK


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_run(args: argparse.Namespace) -> int:
    config = _load(args)
    summary, records = simulate_run(config)
    write_trace(args.trace, records)
    write_summary(args.summary, summary)
    return _exit_code(summary)


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load(args)
    grid = _parse_grid(args.r_grid)
    if not grid:
        raise ConfigError("empty reclamation-ratio grid")
    points = sweep_reclamation_ratio(config, grid)
    lines = ["r,time_s,energy_j,ed2p,pareto"]
    for p in points:
        lines.append(",".join([_fmt(p.r), _fmt(p.time_s), _fmt(p.energy_j),
                               _fmt(p.ed2p), "1" if p.pareto else "0"]))
    write_atomic(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    config = _load(args)
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    for m in modes:
        if m not in MODES:
            raise ConfigError(f"unknown mode {m!r}", "/modes")
    table = compare_modes(config, modes)
    doc = {}
    for mode, row in table.items():
        doc[mode] = {
            "energy_saving_pct": row["energy_saving_pct"],
            "ed2p_reduction_pct": row["ed2p_reduction_pct"],
            "speedup": row["speedup"],
            "energy_gap_fraction": row["energy_gap_fraction"],
            "total_time_s": row["summary"].total_time_s,
            "total_energy_j": row["summary"].total_energy_j,
            "ed2p": row["summary"].ed2p,
        }
    write_atomic(args.out, json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def cmd_campaign(args: argparse.Namespace) -> int:
    config = _load(args)
    rows: list[CampaignRow] = fault_campaign(config, args.trials)
    lines = ["scheme,correct_fraction,overhead_fraction"]
    for row in rows:
        lines.append(",".join([row.scheme, _fmt(row.correct_fraction),
                               _fmt(row.overhead_fraction)]))
    write_atomic(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slackwise",
        description="Energy/reliability simulator for blocked matrix "
                    "decompositions on a modeled CPU-GPU pair.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one decomposition run")
    _add_config_flags(p_run)
    p_run.add_argument("--trace", default="trace.csv",
                       help="output trace CSV path (default trace.csv)")
    p_run.add_argument("--summary", default="summary.json",
                       help="output summary JSON path (default summary.json)")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep",
                             help="sweep the reclamation ratio (bsr mode)")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--r-grid", default="0:0.05:1", dest="r_grid",
                         help="start:step:stop or comma list "
                              "(default 0:0.05:1)")
    p_sweep.add_argument("--out", default="pareto.csv",
                         help="output CSV path (default pareto.csv)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_cmp = sub.add_parser("compare", help="compare run modes vs original")
    _add_config_flags(p_cmp)
    p_cmp.add_argument("--modes", default="original,r2h,sr,bsr",
                       help="comma list of modes "
                            "(default original,r2h,sr,bsr)")
    p_cmp.add_argument("--out", default="comparison.json",
                       help="output JSON path (default comparison.json)")
    p_cmp.set_defaults(func=cmd_compare)

    p_camp = sub.add_parser("campaign",
                            help="fault-injection correctness campaign")
    _add_config_flags(p_camp)
    p_camp.add_argument("--trials", type=int, default=100,
                        help="numeric runs per checksum scheme (default 100)")
    p_camp.add_argument("--out", default="campaign.csv",
                        help="output CSV path (default campaign.csv)")
    p_camp.set_defaults(func=cmd_campaign)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
