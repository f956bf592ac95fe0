"""Per-iteration frequency and protection decisions for each run mode.

Four modes are supported:

* ``original`` — both devices at base clocks, idle at full base power.
* ``r2h`` — base clocks during tasks, but the idle device drops to its
  minimum clock (race-to-halt).
* ``sr`` — classic one-directional slack reclamation: the device off the
  critical path is slowed just enough to absorb the predicted slack.
* ``bsr`` — bi-directional reclamation: a fraction ``r`` of the slack
  speeds up the critical side (overclocking under checksum protection),
  the remaining ``1 - r`` slows the non-critical side.  Guardband power
  scaling applies and the checksum strength adapts to the error rate at
  the chosen clock.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .coverage import CoverageParams, ErrorRateTable, adaptive_abft
from .power import ProcessorModel


@dataclass(frozen=True)
class ScheduleDecision:
    """Outcome of one scheduling step, applied for the next iteration."""
    f_cpu_mhz: float
    f_gpu_mhz: float
    alpha_cpu: float
    alpha_gpu: float
    single_check: bool
    full_check: bool
    skipped: bool
    idle_at_min: bool            # does the waiting device downclock?
    cpu_latency_s: float = 0.0   # DVFS switch cost charged this iteration
    gpu_latency_s: float = 0.0

    @property
    def protected(self) -> bool:
        return self.single_check or self.full_check


def decide_original(cpu: ProcessorModel, gpu: ProcessorModel) -> ScheduleDecision:
    return ScheduleDecision(cpu.f_base_mhz, gpu.f_base_mhz, 1.0, 1.0,
                            False, False, False, idle_at_min=False)


def decide_r2h(cpu: ProcessorModel, gpu: ProcessorModel) -> ScheduleDecision:
    return ScheduleDecision(cpu.f_base_mhz, gpu.f_base_mhz, 1.0, 1.0,
                            False, False, False, idle_at_min=True)


def _charge_latency(decision: ScheduleDecision, previous: ScheduleDecision | None,
                    dvfs_latency_s: float) -> ScheduleDecision:
    prev_cpu = previous.f_cpu_mhz if previous else None
    prev_gpu = previous.f_gpu_mhz if previous else None
    return replace(
        decision,
        cpu_latency_s=dvfs_latency_s if decision.f_cpu_mhz != prev_cpu else 0.0,
        gpu_latency_s=dvfs_latency_s if decision.f_gpu_mhz != prev_gpu else 0.0)


def decide_sr(cpu: ProcessorModel, gpu: ProcessorModel, t_cpu: float,
              t_gpu: float, t_tr: float, previous: ScheduleDecision | None = None,
              dvfs_latency_s: float = 0.0) -> ScheduleDecision:
    """Slow the non-critical device to finish just as the critical one does.

    Never overclocks: frequencies stay in [f_min, f_base].
    """
    slack = t_gpu - t_cpu - t_tr
    f_cpu, f_gpu = cpu.f_base_mhz, gpu.f_base_mhz
    if slack > 0.0:
        f_cpu = max(cpu.f_min_mhz,
                    cpu.round_up_to_grid(cpu.f_base_mhz * t_cpu / (t_cpu + slack)))
    elif slack < 0.0 and t_gpu > 0.0:
        f_gpu = max(gpu.f_min_mhz,
                    gpu.round_up_to_grid(gpu.f_base_mhz * t_gpu / (t_gpu - slack)))
    decision = ScheduleDecision(f_cpu, f_gpu, 1.0, 1.0, False, False, False,
                                idle_at_min=True)
    return _charge_latency(decision, previous, dvfs_latency_s)


def decide_bsr(cpu: ProcessorModel, gpu: ProcessorModel, t_cpu: float,
               t_gpu: float, t_tr: float, r: float,
               coverage: CoverageParams | None,
               rate_table: ErrorRateTable | None,
               previous: ScheduleDecision | None = None,
               dvfs_latency_s: float = 0.0,
               use_guardband: bool = True) -> ScheduleDecision:
    """Bi-directional reclamation with adaptive checksum protection.

    With positive slack (GPU-bound iteration) the GPU target time shrinks
    by ``r`` times the slack while the CPU stretches to meet it; negative
    slack mirrors the roles.  Desired clocks are rounded up to the 100 MHz
    grid and clamped to each device's range; if the projected iteration
    time at those clocks would exceed the unadjusted iteration time, the
    switch is skipped and last iteration's clocks stay in force.
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError("reclamation ratio must be in [0, 1]")
    l_cpu = l_gpu = dvfs_latency_s
    slack = t_gpu - t_cpu - t_tr
    if slack > 0.0:
        t_gpu_des = t_gpu - slack * r - l_gpu
        t_cpu_des = t_gpu_des - l_cpu - t_tr
    else:
        t_cpu_des = t_cpu - abs(slack) * r - l_cpu
        t_gpu_des = t_cpu_des - l_gpu + t_tr

    if t_gpu <= 0.0:
        f_gpu = gpu.f_base_mhz
    elif t_gpu_des > 0.0:
        f_gpu = gpu.round_up_to_grid(gpu.f_base_mhz * t_gpu / t_gpu_des)
    else:
        f_gpu = gpu.f_max_mhz
    if t_cpu <= 0.0:
        f_cpu = cpu.f_base_mhz
    elif t_cpu_des > 0.0:
        f_cpu = cpu.round_up_to_grid(cpu.f_base_mhz * t_cpu / t_cpu_des)
    else:
        f_cpu = cpu.f_max_mhz

    t_gpu_proj = t_gpu * gpu.f_base_mhz / f_gpu
    t_cpu_proj = t_cpu * cpu.f_base_mhz / f_cpu
    t_limit = max(t_gpu, t_cpu + t_tr)
    skip_gpu = t_gpu_proj > t_limit
    skip_cpu = t_cpu_proj > t_limit
    if skip_gpu:
        f_gpu = previous.f_gpu_mhz if previous else gpu.f_base_mhz
    if skip_cpu:
        f_cpu = previous.f_cpu_mhz if previous else cpu.f_base_mhz
    skipped = skip_cpu or skip_gpu

    single = full = False
    if coverage is not None and rate_table is not None:
        choice = adaptive_abft(coverage, rate_table, f_gpu, gpu.f_base_mhz,
                               t_gpu, gpu.f_min_mhz)
        f_gpu = gpu.clamp(choice.frequency)
        single, full = choice.single_check, choice.full_check

    alpha_cpu = cpu.alpha_default if use_guardband else 1.0
    alpha_gpu = gpu.alpha_default if use_guardband else 1.0
    decision = ScheduleDecision(f_cpu, f_gpu, alpha_cpu, alpha_gpu,
                                single, full, skipped, idle_at_min=True)
    return _charge_latency(decision, previous, dvfs_latency_s)
