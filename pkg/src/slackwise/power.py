"""Processor power model, task energy accounting, and energy-trade analysis.

Dynamic power scales superlinearly with clock frequency (exponent 2.4,
fitting measured DVFS sweeps on recent CPUs/GPUs); static power is
frequency-independent.  A guardband factor alpha <= 1 scales total power to
model an undervolted operating point.  Throughput is linear in frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DYNAMIC_POWER_EXPONENT = 2.4
FREQUENCY_STEP_MHZ = 100.0


@dataclass(frozen=True)
class ProcessorModel:
    """Frequency-dependent power/throughput model for one processor.

    ``base_flops_per_second`` is the sustained kernel throughput at
    ``f_base_mhz``; throughput at other frequencies scales linearly.
    ``alpha_default`` is the guardband power factor applicable across the
    whole frequency range when undervolting is enabled (1.0 = stock).
    """
    name: str
    f_base_mhz: float
    f_min_mhz: float
    f_max_mhz: float
    p_total_w: float
    dynamic_fraction: float
    base_flops_per_second: float
    alpha_default: float = 1.0
    f_step_mhz: float = FREQUENCY_STEP_MHZ

    def __post_init__(self):
        if not (0.0 < self.f_min_mhz <= self.f_base_mhz <= self.f_max_mhz):
            raise ValueError("need f_min <= f_base <= f_max, all positive")
        if not 0.0 <= self.dynamic_fraction <= 1.0:
            raise ValueError("dynamic_fraction must be in [0, 1]")
        if not 0.0 < self.alpha_default <= 1.0:
            raise ValueError("alpha_default must be in (0, 1]")
        if self.p_total_w <= 0 or self.base_flops_per_second <= 0:
            raise ValueError("power and throughput must be positive")

    # -- frequency handling -------------------------------------------------

    def clamp(self, f_mhz: float) -> float:
        return min(self.f_max_mhz, max(self.f_min_mhz, f_mhz))

    def round_up_to_grid(self, f_mhz: float) -> float:
        return self.clamp(math.ceil(f_mhz / self.f_step_mhz - 1e-9) * self.f_step_mhz)

    def grid(self) -> list[float]:
        start = math.ceil(self.f_min_mhz / self.f_step_mhz) * self.f_step_mhz
        return [float(f) for f in
                np.arange(start, self.f_max_mhz + self.f_step_mhz / 2, self.f_step_mhz)]

    # -- throughput & power -------------------------------------------------

    def throughput(self, f_mhz: float) -> float:
        return self.base_flops_per_second * f_mhz / self.f_base_mhz

    def task_time_at(self, flops: float, f_mhz: float) -> float:
        if flops < 0:
            raise ValueError("flops must be non-negative")
        return flops / self.throughput(f_mhz)

    def dynamic_power(self, f_mhz: float, alpha: float = 1.0) -> float:
        return (alpha * self.dynamic_fraction * self.p_total_w
                * (f_mhz / self.f_base_mhz) ** DYNAMIC_POWER_EXPONENT)

    def static_power(self, alpha: float = 1.0) -> float:
        return alpha * (1.0 - self.dynamic_fraction) * self.p_total_w

    def power(self, f_mhz: float, alpha: float = 1.0) -> float:
        return self.dynamic_power(f_mhz, alpha) + self.static_power(alpha)

    def idle_power(self, f_mhz: float, alpha: float = 1.0) -> float:
        """Power burned while waiting at frequency f (clocks keep running)."""
        return self.power(f_mhz, alpha)


@dataclass(frozen=True)
class TaskEnergy:
    dynamic_j: float
    static_j: float

    @property
    def total_j(self) -> float:
        return self.dynamic_j + self.static_j


def task_energy(model: ProcessorModel, duration_s: float, f_mhz: float,
                alpha: float = 1.0) -> TaskEnergy:
    if duration_s < 0:
        raise ValueError("duration must be non-negative")
    return TaskEnergy(model.dynamic_power(f_mhz, alpha) * duration_s,
                      model.static_power(alpha) * duration_s)


def delta_e(model: ProcessorModel, t_base: float, f_target_mhz: float,
            alpha: float = 1.0) -> float:
    """Energy change from running a task at f_target instead of f_base.

    The task takes t_base seconds at the base clock; at the target clock it
    takes t_base * f_base / f_target.  Positive means the retargeted run
    costs more energy.
    """
    if t_base < 0:
        raise ValueError("t_base must be non-negative")
    ratio = f_target_mhz / model.f_base_mhz
    d, p = model.dynamic_fraction, model.p_total_w
    return alpha * p * t_base * (d * (ratio ** (DYNAMIC_POWER_EXPONENT - 1.0) - 1.0)
                                 + (1.0 - d) * (1.0 / ratio - 1.0))


def solve_break_even_r(cpu: ProcessorModel, gpu: ProcessorModel,
                       t_cpu: float, t_gpu: float, slack: float,
                       alpha_cpu: float = 1.0, alpha_gpu: float = 1.0,
                       tol: float = 1e-10) -> float:
    """Reclamation ratio r in [0, 1] at which slowing the non-critical side
    saves exactly what boosting the critical side costs.

    Positive slack: the CPU side finishes early by ``slack`` seconds; a
    fraction r of the slack slows the CPU (saving energy) and the remainder
    boosts the GPU (spending energy).  Negative slack mirrors the roles.
    The net energy change is decreasing in r, so the root is where the
    boost cost equals the slow-down saving.  Returns 0.0 when even a full
    boost is already net-saving, 1.0 when no amount of reclamation reaches
    break-even.
    """
    if slack == 0.0:
        return 0.0
    mag = abs(slack)
    if slack > 0:
        slow, fast = (cpu, t_cpu, alpha_cpu), (gpu, t_gpu, alpha_gpu)
    else:
        slow, fast = (gpu, t_gpu, alpha_gpu), (cpu, t_cpu, alpha_cpu)

    def net(r: float) -> float:
        sm, st, sa = slow
        fm, ft, fa = fast
        f_slow = sm.clamp(sm.f_base_mhz * st / (st + r * mag))
        f_fast = fm.clamp(fm.f_base_mhz * ft / max(ft - (1.0 - r) * mag, 1e-12))
        return delta_e(sm, st, f_slow, sa) + delta_e(fm, ft, f_fast, fa)

    lo, hi = 0.0, 1.0
    if net(0.0) <= 0.0:
        return 0.0
    if net(1.0) >= 0.0:
        return 1.0
    # net is continuous and crosses zero in (0, 1): bisection with a Newton
    # polish once bracketed tightly.
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        v = net(mid)
        if abs(v) < tol or hi - lo < tol:
            return mid
        if v > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def max_energy_efficiency(model: ProcessorModel,
                          alpha_by_f=None) -> tuple[float, float]:
    """(best flops/joule over the frequency grid, argmax frequency)."""
    best, best_f = -math.inf, model.f_base_mhz
    for f in model.grid():
        alpha = alpha_by_f(f) if alpha_by_f else model.alpha_default
        eff = model.throughput(f) / model.power(f, alpha)
        if eff > best:
            best, best_f = eff, f
    return best, best_f


def theoretical_min_energy(cpu: ProcessorModel, gpu: ProcessorModel,
                           w_cpu_flops: float, w_gpu_flops: float) -> float:
    """Lower bound: all work done at each side's most efficient point, with
    no idle burn on overlap."""
    k_cpu, _ = max_energy_efficiency(cpu)
    k_gpu, _ = max_energy_efficiency(gpu)
    return w_cpu_flops / k_cpu + w_gpu_flops / k_gpu


def ed2p(energy_j: float, time_s: float) -> float:
    """Energy-delay-squared product, lower is better."""
    return energy_j * time_s * time_s


@dataclass
class EnergyLedger:
    """Running per-device energy totals, split by where the joules went."""
    cpu_dynamic_j: float = 0.0
    cpu_static_j: float = 0.0
    cpu_idle_j: float = 0.0
    gpu_dynamic_j: float = 0.0
    gpu_static_j: float = 0.0
    gpu_idle_j: float = 0.0

    def add_task(self, device: str, e: TaskEnergy) -> None:
        if device == "cpu":
            self.cpu_dynamic_j += e.dynamic_j
            self.cpu_static_j += e.static_j
        elif device == "gpu":
            self.gpu_dynamic_j += e.dynamic_j
            self.gpu_static_j += e.static_j
        else:
            raise ValueError(f"unknown device {device!r}")

    def add_idle(self, device: str, joules: float) -> None:
        if device == "cpu":
            self.cpu_idle_j += joules
        elif device == "gpu":
            self.gpu_idle_j += joules
        else:
            raise ValueError(f"unknown device {device!r}")

    @property
    def total_j(self) -> float:
        return (self.cpu_dynamic_j + self.cpu_static_j + self.cpu_idle_j
                + self.gpu_dynamic_j + self.gpu_static_j + self.gpu_idle_j)


def default_cpu_model() -> ProcessorModel:
    return ProcessorModel(name="cpu", f_base_mhz=3500.0, f_min_mhz=800.0,
                          f_max_mhz=4500.0, p_total_w=95.0,
                          dynamic_fraction=0.7,
                          base_flops_per_second=5.0e9, alpha_default=0.92)


def default_gpu_model() -> ProcessorModel:
    return ProcessorModel(name="gpu", f_base_mhz=1300.0, f_min_mhz=300.0,
                          f_max_mhz=2200.0, p_total_w=250.0,
                          dynamic_fraction=0.75,
                          base_flops_per_second=5.0e10, alpha_default=0.90)
