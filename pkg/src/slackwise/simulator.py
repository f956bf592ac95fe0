"""Per-iteration simulation loop: predict, decide, execute, account.

Each decomposition iteration runs panel work on the modeled CPU, the
trailing/panel update on the modeled GPU, and a panel transfer over the
link.  Task durations come from the analytic flop model (throughput linear
in clock frequency, optional efficiency drift and lognormal noise); the
numeric engine additionally executes the real arithmetic with optional
fault injection and checksum verification so correctness can be validated
alongside the time/energy accounting.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .abft import (ChecksumScheme, CorrectionReport, ErrorKind, checksum_flops,
                   encode, maintain_gemm, sample_fault_plan, inject_faults,
                   transfer_checksum_elements, verify_correct)
from .config import SimConfig
from .linalg import (BlockLayout, DecompositionKind, Factorization,
                     NumericBreakdownError, TaskKind, compute_flops,
                     generate_test_matrix, residual, transfer_elements)
from .power import EnergyLedger, ed2p, task_energy, theoretical_min_energy
from .predictor import SlackPredictor
from .scheduler import (ScheduleDecision, decide_bsr, decide_original,
                        decide_r2h, decide_sr)
from .coverage import CoverageParams

CORRECTNESS_RESIDUAL = 1.0e-8
MAX_RECOVERY_RETRIES = 5

CPU_TASKS = (TaskKind.PD, TaskKind.PU)


@dataclass
class IterationRecord:
    k: int
    pred_time_s: dict = field(default_factory=dict)     # task -> seconds
    actual_time_s: dict = field(default_factory=dict)
    slack_pred_s: float = 0.0
    slack_actual_s: float = 0.0
    f_cpu_mhz: float = 0.0
    f_gpu_mhz: float = 0.0
    abft_mode: str = "none"
    faults: dict = field(default_factory=lambda: {k: 0 for k in ErrorKind})
    detected: int = 0
    corrected: int = 0
    e_cpu_dyn_j: float = 0.0
    e_cpu_stat_j: float = 0.0
    e_cpu_idle_j: float = 0.0
    e_gpu_dyn_j: float = 0.0
    e_gpu_stat_j: float = 0.0
    e_gpu_idle_j: float = 0.0
    skipped: bool = False
    retries: int = 0
    span_s: float = 0.0


@dataclass
class RunSummary:
    mode: str
    r: float
    total_time_s: float
    total_energy_j: float
    ledger: EnergyLedger
    ed2p: float
    ft_overhead_fraction: float
    energy_floor_j: float
    energy_gap_fraction: float
    mean_prediction_error: float
    mean_baseline_error: float
    correct: bool | None
    residual: float | None
    breakdown: bool
    unrecoverable: bool
    faults_injected: dict
    faults_detected: int
    faults_corrected: int
    iterations_completed: int


def _tmu_region(kind: DecompositionKind, n: int, b: int, k: int):
    """(r0, c0, rows, cols) of the block the trailing update writes."""
    p = k * b
    pe = min(p + b, n)
    if kind == DecompositionKind.CHOLESKY:
        return p, p, n - p, pe - p
    if kind == DecompositionKind.LU:
        return pe, pe, n - pe, n - pe
    return p, pe, n - p, n - pe


def run_numeric_iteration(factors: Factorization, k: int,
                          scheme: ChecksumScheme,
                          fault_counts: dict | None = None,
                          rng: np.random.Generator | None = None,
                          correct: bool = True) -> CorrectionReport:
    """One iteration of the numeric engine with the trailing update under
    checksum protection and optional fault injection into its output.

    Checksums are encoded before the update, carried through it from the
    operands, and verified afterwards; injected faults therefore land
    between maintenance and verification, exactly where silent corruption
    from an overclocked kernel would.
    """
    n, b, kind = factors.n, factors.b, factors.kind
    report = CorrectionReport()
    for task in factors.task_order():
        if task == TaskKind.PD:
            factors.task_pd(k)
        elif task == TaskKind.PU:
            factors.task_pu(k)
        else:
            report = _protected_tmu(factors, k, scheme, fault_counts, rng,
                                    correct)
    factors.k_done = k + 1
    return report


def _protected_tmu(factors, k, scheme, fault_counts, rng, correct):
    n, b, kind = factors.n, factors.b, factors.kind
    p = k * b
    pe = min(p + b, n)
    r0, c0, rows, cols = _tmu_region(kind, n, b, k)
    m = factors.m
    has_region = rows > 0 and cols > 0
    cs = None
    if scheme != ChecksumScheme.NONE and has_region:
        cs = encode(m, b, scheme, r0, c0, (rows, cols))

    if kind == DecompositionKind.CHOLESKY:
        if k > 0:
            left = m[p:n, 0:p]
            right = m[p:pe, 0:p].T
            if cs is not None:
                maintain_gemm(cs, left, right)
            m[p:n, p:pe] -= left @ right
    elif kind == DecompositionKind.LU:
        if pe < n:
            left = m[pe:n, p:pe]
            right = m[p:pe, pe:n]
            if cs is not None:
                maintain_gemm(cs, left, right)
            m[pe:n, pe:n] -= left @ right
    else:
        if pe < n and k < len(factors.qr_t):
            v = factors._qr_v(k)
            t = factors.qr_t[k]
            c = m[p:n, pe:n]
            mid = t.T @ (v.T @ c)
            if cs is not None:
                maintain_gemm(cs, v, mid)
            c -= v @ mid

    if has_region and fault_counts and any(fault_counts.values()):
        scale = float(np.abs(m[r0:r0 + rows, c0:c0 + cols]).max(initial=0.0))
        plan = sample_fault_plan(rng, fault_counts, r0, c0, rows, cols, b,
                                 scale, k)
        inject_faults(m, plan)

    if cs is not None:
        return verify_correct(m, cs, correct)
    return CorrectionReport()


def _scheme_from_decision(decision: ScheduleDecision) -> ChecksumScheme:
    if decision.full_check:
        return ChecksumScheme.FULL
    if decision.single_check:
        return ChecksumScheme.SINGLE
    return ChecksumScheme.NONE


def _analytic_base_time(config: SimConfig, task: TaskKind, k: int) -> float:
    """Model time at base clocks with no drift/noise (predictor fallback)."""
    if task == TaskKind.TRANSFER:
        return transfer_elements(config.kind, config.n, config.b, k) \
            / config.link.elements_per_second
    flops = compute_flops(config.kind, task, config.n, config.b, k)
    rate = (config.gpu.base_flops_per_second if task == TaskKind.TMU
            else config.cpu.base_flops_per_second)
    return flops / rate


def _checksum_cost(config: SimConfig, task: TaskKind, k: int,
                   scheme: ChecksumScheme) -> float:
    """Extra flops (or link elements for transfers) added by checksums."""
    if scheme == ChecksumScheme.NONE:
        return 0.0
    if task == TaskKind.TRANSFER:
        return transfer_checksum_elements(scheme, config.kind, config.n,
                                          config.b, k)
    return (checksum_flops(scheme, config.kind, task, config.n, config.b, k,
                           "update")
            + checksum_flops(scheme, config.kind, task, config.n, config.b, k,
                             "verify"))


class _Run:
    """Mutable state of a single simulation; drives the iteration loop."""

    def __init__(self, config: SimConfig,
                 forced_scheme: ChecksumScheme | None = None):
        self.config = config
        self.layout = BlockLayout(config.n, config.b)
        self.nb = self.layout.n_blocks
        self.flags = config.flags
        ss = np.random.SeedSequence(config.seed)
        noise_seed, fault_seed = ss.spawn(2)
        self.rng_noise = np.random.default_rng(noise_seed)
        self.rng_fault = np.random.default_rng(fault_seed)
        self.forced_scheme = forced_scheme
        self.predictor = SlackPredictor(
            kind=config.kind, n=config.n, b=config.b,
            cpu_rate=config.cpu.base_flops_per_second,
            gpu_rate=config.gpu.base_flops_per_second,
            transfer_rate=config.link.elements_per_second)
        self.coverage = CoverageParams.for_matrix(config.n, config.b,
                                                  config.fc_desired)
        self.numeric = config.engine == "numeric"
        if self.numeric:
            self.a0 = generate_test_matrix(config.kind, config.n, config.seed)
            self.factors = Factorization(config.kind, self.a0, config.b)
        self.records: list[IterationRecord] = []
        self.ledger = EnergyLedger()
        self.total_time = 0.0
        self.ft_time = 0.0
        self.w_cpu = 0.0
        self.w_gpu = 0.0
        self.pred_errors: list[float] = []
        self.base_errors: list[float] = []
        self.breakdown = False
        self.unrecoverable = False
        self.faults_injected = {kind: 0 for kind in ErrorKind}
        self.faults_detected = 0
        self.faults_corrected = 0
        self.decision: ScheduleDecision | None = None

    # -- prediction ---------------------------------------------------------

    def _predict_pure(self, task: TaskKind, k: int) -> float:
        p = self.predictor.predictors[task]
        if not p._times:
            return _analytic_base_time(self.config, task, k)
        return p.predict(k)

    def _baseline_pure(self, task: TaskKind, k: int) -> float:
        p = self.predictor.predictors[task]
        if not p._times:
            return _analytic_base_time(self.config, task, k)
        return p.baseline(k)

    def _predict_sides(self, k: int, scheme: ChecksumScheme):
        """(t_cpu, t_gpu, t_tr) at base clocks including checksum work."""
        cfg = self.config
        t_pd = self._predict_pure(TaskKind.PD, k)
        t_pu = self._predict_pure(TaskKind.PU, k)
        t_tmu = self._predict_pure(TaskKind.TMU, k)
        t_tr = self._predict_pure(TaskKind.TRANSFER, k) + cfg.link.latency_s
        cs_cpu = sum(_checksum_cost(cfg, t, k, scheme)
                     for t in CPU_TASKS) / cfg.cpu.base_flops_per_second
        cs_gpu = _checksum_cost(cfg, TaskKind.TMU, k, scheme) \
            / cfg.gpu.base_flops_per_second
        cs_tr = _checksum_cost(cfg, TaskKind.TRANSFER, k, scheme) \
            / cfg.link.elements_per_second
        return t_pd + t_pu + cs_cpu, t_tmu + cs_gpu, t_tr + cs_tr

    # -- decisions ----------------------------------------------------------

    def _decide(self, k: int) -> tuple[ScheduleDecision, ChecksumScheme]:
        cfg = self.config
        mode = cfg.mode
        if mode == "original":
            decision = decide_original(cfg.cpu, cfg.gpu)
        elif mode == "r2h":
            decision = decide_r2h(cfg.cpu, cfg.gpu)
        elif k == 0:
            # first iteration always at base clocks to seed the predictor
            alpha_cpu = cfg.cpu.alpha_default if mode == "bsr" else 1.0
            alpha_gpu = cfg.gpu.alpha_default if mode == "bsr" else 1.0
            decision = ScheduleDecision(cfg.cpu.f_base_mhz, cfg.gpu.f_base_mhz,
                                        alpha_cpu, alpha_gpu, False, False,
                                        False, idle_at_min=True)
        else:
            prev_scheme = (_scheme_from_decision(self.decision)
                           if self.decision else ChecksumScheme.NONE)
            t_cpu, t_gpu, t_tr = self._predict_sides(k, prev_scheme)
            if mode == "sr":
                decision = decide_sr(cfg.cpu, cfg.gpu, t_cpu, t_gpu, t_tr,
                                     self.decision, cfg.dvfs_latency_s)
            else:
                ft_on = self.flags["col_ft"] and self.forced_scheme is None
                decision = decide_bsr(
                    cfg.cpu, cfg.gpu, t_cpu, t_gpu, t_tr, cfg.r,
                    self.coverage if ft_on else None,
                    cfg.rates if ft_on else None,
                    self.decision, cfg.dvfs_latency_s)
        scheme = _scheme_from_decision(decision)
        if self.forced_scheme is not None:
            scheme = self.forced_scheme
        return decision, scheme

    # -- execution ----------------------------------------------------------

    def _noise(self) -> float:
        if self.config.noise_sigma <= 0.0:
            return 1.0
        return float(self.rng_noise.lognormal(0.0, self.config.noise_sigma))

    def _actual_times(self, k: int, decision: ScheduleDecision,
                      scheme: ChecksumScheme) -> dict:
        cfg = self.config
        drift_cpu = cfg.drift.factor(k, self.nb, "cpu")
        drift_gpu = cfg.drift.factor(k, self.nb, "gpu")
        out = {}
        for task in (TaskKind.PD, TaskKind.PU, TaskKind.TMU):
            flops = compute_flops(cfg.kind, task, cfg.n, cfg.b, k)
            extra = _checksum_cost(cfg, task, k, scheme)
            if flops + extra == 0.0:
                out[task] = 0.0
                continue
            if task == TaskKind.TMU:
                thr = cfg.gpu.throughput(decision.f_gpu_mhz) * drift_gpu
            else:
                thr = cfg.cpu.throughput(decision.f_cpu_mhz) * drift_cpu
            out[task] = (flops + extra) / thr * self._noise()
        elems = transfer_elements(cfg.kind, cfg.n, cfg.b, k)
        elems_cs = _checksum_cost(cfg, TaskKind.TRANSFER, k, scheme)
        out[TaskKind.TRANSFER] = cfg.link.transfer_time(elems + elems_cs) \
            * self._noise()
        return out

    def _ft_share(self, k: int, actual: dict, scheme: ChecksumScheme) -> float:
        """Seconds of this iteration attributable to checksum work."""
        if scheme == ChecksumScheme.NONE:
            return 0.0
        cfg = self.config
        total = 0.0
        for task in (TaskKind.PD, TaskKind.PU, TaskKind.TMU):
            flops = compute_flops(cfg.kind, task, cfg.n, cfg.b, k)
            extra = _checksum_cost(cfg, task, k, scheme)
            if flops + extra > 0.0:
                total += actual[task] * extra / (flops + extra)
        elems = transfer_elements(cfg.kind, cfg.n, cfg.b, k)
        extra = _checksum_cost(cfg, TaskKind.TRANSFER, k, scheme)
        body = actual[TaskKind.TRANSFER] - cfg.link.latency_s
        if elems + extra > 0.0 and body > 0.0:
            total += body * extra / (elems + extra)
        return total

    def _observe(self, k: int, decision: ScheduleDecision,
                 scheme: ChecksumScheme, actual: dict) -> None:
        cfg = self.config
        for task in (TaskKind.PD, TaskKind.PU, TaskKind.TMU):
            flops = compute_flops(cfg.kind, task, cfg.n, cfg.b, k)
            if flops <= 0.0 or actual[task] <= 0.0:
                continue
            extra = _checksum_cost(cfg, task, k, scheme)
            pure = actual[task] * flops / (flops + extra)
            if task == TaskKind.TMU:
                f_used, f_base = decision.f_gpu_mhz, cfg.gpu.f_base_mhz
            else:
                f_used, f_base = decision.f_cpu_mhz, cfg.cpu.f_base_mhz
            self.predictor.observe(task, k, pure, f_used, f_base)
        elems = transfer_elements(cfg.kind, cfg.n, cfg.b, k)
        extra = _checksum_cost(cfg, TaskKind.TRANSFER, k, scheme)
        body = actual[TaskKind.TRANSFER] - cfg.link.latency_s
        if elems > 0.0 and body > 0.0:
            pure = body * elems / (elems + extra)
            self.predictor.observe(TaskKind.TRANSFER, k, pure, 1.0, 1.0)

    def _track_errors(self, k: int, decision: ScheduleDecision,
                      scheme: ChecksumScheme, actual: dict,
                      preds: dict) -> None:
        if k == 0:
            return
        cfg = self.config
        for task in TaskKind:
            if actual[task] <= 0.0:
                continue
            if task == TaskKind.TRANSFER:
                scale = 1.0
                base_pure = self._baseline_pure(task, k)
                pred_pure = preds[task]
                extra_t = cfg.link.latency_s
                cs_t = _checksum_cost(cfg, task, k, scheme) \
                    / cfg.link.elements_per_second
            else:
                if task == TaskKind.TMU:
                    scale = cfg.gpu.f_base_mhz / decision.f_gpu_mhz
                    rate = cfg.gpu.base_flops_per_second
                else:
                    scale = cfg.cpu.f_base_mhz / decision.f_cpu_mhz
                    rate = cfg.cpu.base_flops_per_second
                base_pure = self._baseline_pure(task, k)
                pred_pure = preds[task]
                extra_t = 0.0
                cs_t = _checksum_cost(cfg, task, k, scheme) / rate
            pred = (pred_pure + cs_t) * scale + extra_t
            base = (base_pure + cs_t) * scale + extra_t
            self.pred_errors.append(abs(pred - actual[task]) / actual[task])
            self.base_errors.append(abs(base - actual[task]) / actual[task])

    def _numeric_step(self, k: int, decision: ScheduleDecision,
                      scheme: ChecksumScheme,
                      t_tmu: float) -> tuple[CorrectionReport, dict]:
        lam = self.config.rates.rates(decision.f_gpu_mhz)
        counts = {kind: int(self.rng_fault.poisson(l * t_tmu))
                  for kind, l in zip(ErrorKind, lam)}
        if not self.numeric:
            return CorrectionReport(), counts
        report = run_numeric_iteration(self.factors, k, scheme, counts,
                                       self.rng_fault)
        return report, counts

    def _snapshot(self):
        if not self.numeric:
            return None
        f = self.factors
        return (f.m.copy(), len(f.qr_t),
                set(getattr(f, "_qr_vs", {}).keys()), f.k_done)

    def _restore(self, snap) -> None:
        f = self.factors
        m, n_t, v_keys, k_done = snap
        f.m[:, :] = m
        del f.qr_t[n_t:]
        if hasattr(f, "_qr_vs"):
            for key in list(f._qr_vs.keys()):
                if key not in v_keys:
                    del f._qr_vs[key]
        f.k_done = k_done

    # -- the loop -----------------------------------------------------------

    def run(self) -> tuple[RunSummary, list[IterationRecord]]:
        cfg = self.config
        for k in range(self.nb):
            decision, scheme = self._decide(k)
            self.decision = decision
            preds = {task: self._predict_pure(task, k) for task in TaskKind}
            t_cpu_p, t_gpu_p, t_tr_p = self._predict_sides(k, scheme)
            record = IterationRecord(k=k, f_cpu_mhz=decision.f_cpu_mhz,
                                     f_gpu_mhz=decision.f_gpu_mhz,
                                     abft_mode=scheme.value,
                                     skipped=decision.skipped,
                                     slack_pred_s=t_gpu_p - t_cpu_p - t_tr_p)
            self._fill_predictions(k, decision, scheme, preds, record)

            attempts = 0
            stop = False
            while True:
                attempts += 1
                snap = self._snapshot()
                actual = self._actual_times(k, decision, scheme)
                report, counts = self._numeric_step(k, decision, scheme,
                                                    actual[TaskKind.TMU])
                self._account(k, decision, scheme, actual, record)
                for kind in ErrorKind:
                    self.faults_injected[kind] += counts[kind]
                    record.faults[kind] += counts[kind]
                record.detected += report.total_detected
                self.faults_detected += report.total_detected
                record.corrected += report.total_corrected
                self.faults_corrected += report.total_corrected
                if not (self.numeric and report.uncorrectable):
                    break
                if cfg.recovery == "continue":
                    break
                if cfg.recovery == "abort" or attempts > MAX_RECOVERY_RETRIES:
                    self.unrecoverable = True
                    stop = True
                    break
                # recompute policy: roll the iteration back and try again,
                # keeping the wasted time and energy on the books
                self._restore(snap)
                record.retries += 1

            record.slack_actual_s = (actual[TaskKind.TMU]
                                     - actual[TaskKind.PD]
                                     - actual[TaskKind.PU]
                                     - actual[TaskKind.TRANSFER])
            self._track_errors(k, decision, scheme, actual, preds)
            self._observe(k, decision, scheme, actual)
            self.records.append(record)
            if stop:
                break
        return self._summarize()

    def _fill_predictions(self, k, decision, scheme, preds, record):
        """Store per-task predicted wall times at the decided clocks."""
        cfg = self.config
        for task in TaskKind:
            if task == TaskKind.TRANSFER:
                cs_t = _checksum_cost(cfg, task, k, scheme) \
                    / cfg.link.elements_per_second
                record.pred_time_s[task] = preds[task] + cs_t \
                    + cfg.link.latency_s
            elif task == TaskKind.TMU:
                cs_t = _checksum_cost(cfg, task, k, scheme) \
                    / cfg.gpu.base_flops_per_second
                record.pred_time_s[task] = (preds[task] + cs_t) \
                    * cfg.gpu.f_base_mhz / decision.f_gpu_mhz
            else:
                cs_t = _checksum_cost(cfg, task, k, scheme) \
                    / cfg.cpu.base_flops_per_second
                record.pred_time_s[task] = (preds[task] + cs_t) \
                    * cfg.cpu.f_base_mhz / decision.f_cpu_mhz

    def _account(self, k, decision, scheme, actual, record):
        cfg = self.config
        t_cpu_busy = (actual[TaskKind.PD] + actual[TaskKind.PU]
                      + decision.cpu_latency_s)
        t_gpu_busy = actual[TaskKind.TMU] + decision.gpu_latency_s
        t_tr = actual[TaskKind.TRANSFER]
        span = max(t_gpu_busy, t_cpu_busy + t_tr)
        self.total_time += span
        record.span_s += span
        for task in TaskKind:
            record.actual_time_s[task] = record.actual_time_s.get(task, 0.0) \
                + actual[task]

        e_cpu = task_energy(cfg.cpu, t_cpu_busy, decision.f_cpu_mhz,
                            decision.alpha_cpu)
        e_gpu = task_energy(cfg.gpu, t_gpu_busy, decision.f_gpu_mhz,
                            decision.alpha_gpu)
        f_cpu_idle = cfg.cpu.f_min_mhz if decision.idle_at_min \
            else decision.f_cpu_mhz
        f_gpu_idle = cfg.gpu.f_min_mhz if decision.idle_at_min \
            else decision.f_gpu_mhz
        e_cpu_idle = cfg.cpu.idle_power(f_cpu_idle, decision.alpha_cpu) \
            * (span - t_cpu_busy)
        e_gpu_idle = cfg.gpu.idle_power(f_gpu_idle, decision.alpha_gpu) \
            * (span - t_gpu_busy)

        record.e_cpu_dyn_j += e_cpu.dynamic_j
        record.e_cpu_stat_j += e_cpu.static_j
        record.e_cpu_idle_j += e_cpu_idle
        record.e_gpu_dyn_j += e_gpu.dynamic_j
        record.e_gpu_stat_j += e_gpu.static_j
        record.e_gpu_idle_j += e_gpu_idle
        self.ledger.add_task("cpu", e_cpu)
        self.ledger.add_task("gpu", e_gpu)
        self.ledger.add_idle("cpu", e_cpu_idle)
        self.ledger.add_idle("gpu", e_gpu_idle)

        self.ft_time += self._ft_share(k, actual, scheme)
        for task in CPU_TASKS:
            self.w_cpu += compute_flops(cfg.kind, task, cfg.n, cfg.b, k)
        self.w_gpu += compute_flops(cfg.kind, TaskKind.TMU, cfg.n, cfg.b, k)

    def _summarize(self) -> tuple[RunSummary, list[IterationRecord]]:
        cfg = self.config
        total_e = self.ledger.total_j
        floor = theoretical_min_energy(cfg.cpu, cfg.gpu, self.w_cpu,
                                       self.w_gpu)
        res = None
        correct = None
        if self.numeric:
            if self.breakdown or self.unrecoverable \
                    or not self.factors.complete:
                correct = False
            else:
                res = residual(self.a0, self.factors)
                correct = res <= CORRECTNESS_RESIDUAL
        summary = RunSummary(
            mode=cfg.mode, r=cfg.r, total_time_s=self.total_time,
            total_energy_j=total_e, ledger=self.ledger,
            ed2p=ed2p(total_e, self.total_time),
            ft_overhead_fraction=(self.ft_time / self.total_time
                                  if self.total_time > 0 else 0.0),
            energy_floor_j=floor,
            energy_gap_fraction=((total_e - floor) / floor
                                 if floor > 0 else 0.0),
            mean_prediction_error=(float(np.mean(self.pred_errors))
                                   if self.pred_errors else 0.0),
            mean_baseline_error=(float(np.mean(self.base_errors))
                                 if self.base_errors else 0.0),
            correct=correct, residual=res, breakdown=self.breakdown,
            unrecoverable=self.unrecoverable,
            faults_injected=dict(self.faults_injected),
            faults_detected=self.faults_detected,
            faults_corrected=self.faults_corrected,
            iterations_completed=len(self.records))
        return summary, self.records


def simulate_run(config: SimConfig,
                 forced_scheme: ChecksumScheme | None = None
                 ) -> tuple[RunSummary, list[IterationRecord]]:
    """Simulate one full decomposition; deterministic in ``config.seed``."""
    run = _Run(config, forced_scheme=forced_scheme)
    try:
        return run.run()
    except NumericBreakdownError:
        run.breakdown = True
        return run._summarize()


def _max_workers() -> int:
    value = os.environ.get("SLACKWISE_THREADS", "")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _run_many(configs, fn):
    workers = _max_workers()
    if workers == 1:
        return [fn(c) for c in configs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, configs))


@dataclass(frozen=True)
class SweepPoint:
    r: float
    time_s: float
    energy_j: float
    ed2p: float
    pareto: bool


def sweep_reclamation_ratio(config: SimConfig,
                            r_grid: list[float]) -> list[SweepPoint]:
    """Run the bi-directional mode across reclamation ratios and flag the
    Pareto-efficient (time, energy) points."""
    if not r_grid:
        raise ValueError("empty reclamation-ratio grid")
    configs = [config.with_overrides(mode="bsr", r=float(r)) for r in r_grid]
    summaries = _run_many(configs, lambda c: simulate_run(c)[0])
    points = []
    for r, s in zip(r_grid, summaries):
        dominated = any(
            (o.total_time_s <= s.total_time_s
             and o.total_energy_j <= s.total_energy_j
             and (o.total_time_s < s.total_time_s
                  or o.total_energy_j < s.total_energy_j))
            for o in summaries)
        points.append(SweepPoint(float(r), s.total_time_s, s.total_energy_j,
                                 s.ed2p, not dominated))
    return points


def compare_modes(config: SimConfig, modes: list[str]) -> dict:
    """RunSummary per mode plus savings/speedup relative to 'original'."""
    if not modes:
        raise ValueError("need at least one mode")
    base_summary, _ = simulate_run(config.with_overrides(mode="original",
                                                         r=0.0))
    out = {}
    for mode in modes:
        r = config.r if mode == "bsr" else 0.0
        summary, _ = simulate_run(config.with_overrides(mode=mode, r=r))
        out[mode] = {
            "summary": summary,
            "energy_saving_pct": 100.0 * (1.0 - summary.total_energy_j
                                          / base_summary.total_energy_j),
            "ed2p_reduction_pct": 100.0 * (1.0 - summary.ed2p
                                           / base_summary.ed2p),
            "speedup": base_summary.total_time_s / summary.total_time_s,
            "energy_gap_fraction": summary.energy_gap_fraction,
        }
    return out


CAMPAIGN_SCHEMES = ("none", "single", "full", "adaptive")


@dataclass(frozen=True)
class CampaignRow:
    scheme: str
    trials: int
    correct_fraction: float
    overhead_fraction: float


def fault_campaign(config: SimConfig, trials: int,
                   schemes=CAMPAIGN_SCHEMES) -> list[CampaignRow]:
    """Repeat the numeric decomposition under each protection scheme and
    report the fraction of runs whose final residual passes.

    Forced schemes (none/single/full) run at the frequency schedule the
    bi-directional policy picks without protection-aware clamping, so every
    scheme faces the same fault pressure; 'adaptive' lets the governor
    trade clock speed against protection.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    base = config.with_overrides(mode="bsr", engine="numeric",
                                 recovery="continue")
    rows = []
    for scheme in schemes:
        forced = {"none": ChecksumScheme.NONE,
                  "single": ChecksumScheme.SINGLE,
                  "full": ChecksumScheme.FULL,
                  "adaptive": None}[scheme]
        configs = [base.with_overrides(seed=base.seed + t)
                   for t in range(trials)]
        summaries = _run_many(
            configs, lambda c, f=forced: simulate_run(c, forced_scheme=f)[0])
        n_correct = sum(1 for s in summaries if s.correct)
        overhead = float(np.mean([s.ft_overhead_fraction for s in summaries]))
        rows.append(CampaignRow(scheme, trials, n_correct / trials, overhead))
    return rows
