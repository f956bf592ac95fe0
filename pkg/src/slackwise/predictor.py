"""Per-task execution-time prediction across decomposition iterations.

Blocked one-sided factorizations shrink deterministically, so the runtime
of iteration k relates to iteration j by the ratio of their analytic
operation counts.  The predictor rescales each of the last few observed
times to the upcoming iteration via that ratio and blends them with
exponentially decaying weights; measurements are stored normalized to the
base clock so frequency changes between iterations don't pollute history.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .abft import ChecksumScheme, checksum_flops, transfer_checksum_elements
from .linalg import DecompositionKind, TaskKind, compute_flops, transfer_elements

HISTORY_DEPTH = 4
HISTORY_WEIGHTS = (0.5, 0.25, 0.125, 0.125)


def complexity(kind: DecompositionKind, task: TaskKind, n: int, b: int,
               k: int) -> float:
    """Analytic cost of one task at iteration k (flops, or elements moved
    for transfers).  Used only for ratios, so units cancel."""
    if task == TaskKind.TRANSFER:
        return float(transfer_elements(kind, n, b, k))
    return float(compute_flops(kind, task, n, b, k))


def cost_ratio(kind: DecompositionKind, task: TaskKind, n: int, b: int,
               j: int, k: int) -> float:
    """complexity(k) / complexity(j); 0 when iteration j had no such task."""
    cj = complexity(kind, task, n, b, j)
    if cj == 0.0:
        return 0.0
    return complexity(kind, task, n, b, k) / cj


@dataclass
class TaskPredictor:
    """Weighted ratio-rescaled history predictor for one task stream."""
    kind: DecompositionKind
    task: TaskKind
    n: int
    b: int
    _times: list = field(default_factory=list)      # base-clock-normalized
    _iterations: list = field(default_factory=list)

    def observe(self, iteration: int, duration_s: float,
                f_used_mhz: float, f_base_mhz: float) -> None:
        """Record a measured duration, normalized to the base clock."""
        if duration_s < 0:
            raise ValueError("duration must be non-negative")
        self._times.append(duration_s * f_used_mhz / f_base_mhz)
        self._iterations.append(iteration)

    def predict(self, k: int) -> float:
        """Predicted base-clock duration of this task at iteration k."""
        if complexity(self.kind, self.task, self.n, self.b, k) == 0.0:
            return 0.0
        if not self._times:
            raise ValueError("cannot predict with no observations")
        depth = min(HISTORY_DEPTH, len(self._times))
        weights = HISTORY_WEIGHTS[:depth]
        scale = sum(weights)
        total = 0.0
        for i in range(depth):
            j = self._iterations[-1 - i]
            t = self._times[-1 - i]
            total += (weights[i] / scale) * cost_ratio(
                self.kind, self.task, self.n, self.b, j, k) * t
        return total

    def baseline(self, k: int) -> float:
        """First observation rescaled to iteration k (no blending)."""
        if not self._times:
            raise ValueError("cannot predict with no observations")
        return cost_ratio(self.kind, self.task, self.n, self.b,
                          self._iterations[0], k) * self._times[0]


@dataclass
class SlackPredictor:
    """Predicts the CPU-vs-GPU slack for the look-ahead pipeline.

    Positive slack means the GPU-side critical path (trailing update) is
    predicted to outlast the CPU-side work (panel plus transfer), leaving
    the CPU idle time to reclaim.
    """
    kind: DecompositionKind
    n: int
    b: int
    cpu_rate: float                      # flops/s at base clock
    gpu_rate: float
    transfer_rate: float                 # elements/s
    scheme: ChecksumScheme = ChecksumScheme.NONE
    predictors: dict = field(default_factory=dict)

    def __post_init__(self):
        for task in TaskKind:
            self.predictors[task] = TaskPredictor(self.kind, task, self.n, self.b)

    def observe(self, task: TaskKind, iteration: int, duration_s: float,
                f_used_mhz: float, f_base_mhz: float) -> None:
        self.predictors[task].observe(iteration, duration_s, f_used_mhz,
                                      f_base_mhz)

    def _checksum_time(self, task: TaskKind, k: int) -> float:
        if self.scheme == ChecksumScheme.NONE:
            return 0.0
        if task == TaskKind.TRANSFER:
            extra = transfer_checksum_elements(self.scheme, self.kind,
                                               self.n, self.b, k)
            return extra / self.transfer_rate
        extra = (checksum_flops(self.scheme, self.kind, task, self.n, self.b,
                                k, "update")
                 + checksum_flops(self.scheme, self.kind, task, self.n, self.b,
                                  k, "verify"))
        rate = self.gpu_rate if task == TaskKind.TMU else self.cpu_rate
        return extra / rate

    def predict_task(self, task: TaskKind, k: int) -> float:
        return self.predictors[task].predict(k)

    def predict_slack(self, k: int) -> float:
        """Predicted GPU-side time minus CPU-side time at base clocks,
        including checksum overhead for the active scheme."""
        t_gpu = (self.predict_task(TaskKind.TMU, k)
                 + self._checksum_time(TaskKind.TMU, k))
        t_cpu = (self.predict_task(TaskKind.PD, k)
                 + self.predict_task(TaskKind.PU, k)
                 + self._checksum_time(TaskKind.PD, k)
                 + self._checksum_time(TaskKind.PU, k))
        t_tr = (self.predict_task(TaskKind.TRANSFER, k)
                + self._checksum_time(TaskKind.TRANSFER, k))
        return t_gpu - t_cpu - t_tr
