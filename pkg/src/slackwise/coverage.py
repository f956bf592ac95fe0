"""Error-rate model, fault-coverage estimation, and the adaptive governor.

Soft-error arrivals at a given clock frequency are modeled as independent
Poisson processes per propagation class (0D single element, 1D row/column,
2D beyond).  Fault coverage is the probability that a checksum scheme can
detect and correct everything that arrives in one detection interval:
the single-side scheme survives any number of 0D errors as long as no two
strike the same block (and no 1D/2D error occurs at all); the full scheme
extends the no-collision survival to 1D errors as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .abft import ChecksumScheme, ErrorKind

FREQUENCY_GRID_MHZ = 100


@dataclass
class ErrorRateTable:
    """Piecewise-linear error rate (errors/second) versus frequency (MHz).

    Breakpoints are (frequency, rate) pairs per error kind, sorted by
    frequency.  Below the first breakpoint the rate is 0 (fault-free band);
    above the last it clamps to the last value.
    """
    breakpoints: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for kind in ErrorKind:
            pts = sorted((float(f), float(r)) for f, r in self.breakpoints.get(kind, []))
            for f, r in pts:
                if r < 0:
                    raise ValueError("negative error rate")
            if any(pts[i + 1][1] < pts[i][1] for i in range(len(pts) - 1)):
                raise ValueError("error rate must be non-decreasing in frequency")
            clean[kind] = pts
        self.breakpoints = clean

    def rate(self, f: float, kind: ErrorKind) -> float:
        pts = self.breakpoints.get(kind, [])
        if not pts:
            return 0.0
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        if f <= xs[0]:
            return 0.0 if ys[0] == 0.0 or f < xs[0] else ys[0]
        return float(np.interp(f, xs, ys))

    def rates(self, f: float) -> tuple[float, float, float]:
        return (self.rate(f, ErrorKind.D0), self.rate(f, ErrorKind.D1),
                self.rate(f, ErrorKind.D2))

    def fault_free(self, f: float) -> bool:
        return all(r == 0.0 for r in self.rates(f))

    def max_fault_free_frequency(self) -> float:
        """Highest frequency at which every kind still has zero rate."""
        candidates = []
        for pts in self.breakpoints.values():
            if not pts:
                continue
            zero_f = None
            for f, r in pts:
                if r == 0.0:
                    zero_f = f
                else:
                    break
            candidates.append(zero_f if zero_f is not None else -math.inf)
        return min(candidates) if candidates else math.inf


def default_gpu_rate_table() -> ErrorRateTable:
    """Synthetic rates shaped like measured overclocking SDC curves: zero up
    to 1900 MHz, then 0D ramping fastest, 2D only at the extreme top."""
    return ErrorRateTable({
        ErrorKind.D0: [(1900.0, 0.0), (2200.0, 2.0)],
        ErrorKind.D1: [(1900.0, 0.0), (2200.0, 0.5)],
        ErrorKind.D2: [(2100.0, 0.0), (2200.0, 0.05)],
    })


def default_cpu_rate_table() -> ErrorRateTable:
    return ErrorRateTable({k: [] for k in ErrorKind})


@dataclass(frozen=True)
class CoverageParams:
    s_slots: int
    fc_desired: float = 0.999999
    full_coverage_threshold: float = 0.999999

    def __post_init__(self):
        if self.s_slots < 1:
            raise ValueError("need at least one tolerable-fault slot")
        if not 0.0 < self.fc_desired <= 1.0:
            raise ValueError("fc_desired must be in (0, 1]")

    @staticmethod
    def for_matrix(n: int, b: int, fc_desired: float = 0.999999) -> "CoverageParams":
        nb = math.ceil(n / b)
        return CoverageParams(s_slots=nb * nb, fc_desired=fc_desired)


def poisson_pmf_series(mean: float, k_max: int) -> np.ndarray:
    """pmf values 0..k_max computed by the stable multiplicative recurrence."""
    out = np.empty(k_max + 1)
    out[0] = math.exp(-mean)
    for k in range(1, k_max + 1):
        out[k] = out[k - 1] * mean / k
    return out


def poisson_cdf(k: int, mean: float) -> float:
    if mean < 0:
        raise ValueError("mean must be non-negative")
    if k < 0:
        return 0.0
    return float(min(1.0, poisson_pmf_series(mean, k).sum()))


def _slot_products(s: int) -> np.ndarray:
    """prob that m sequential strikes land in m distinct slots, m = 0..s."""
    probs = np.empty(s + 1)
    probs[0] = 1.0
    for m in range(1, s + 1):
        probs[m] = probs[m - 1] * (s - (m - 1)) / s
    return probs


def fc_single(table: ErrorRateTable, params: CoverageParams, f: float,
              t: float) -> float:
    """Coverage of the single-side scheme over a detection interval of t
    seconds: up to S 0D errors in distinct blocks, zero 1D and 2D errors."""
    if t <= 0:
        raise ValueError("interval must be positive")
    l0, l1, l2 = table.rates(f)
    s = params.s_slots
    pmf0 = poisson_pmf_series(l0 * t, s)
    fc = float(pmf0 @ _slot_products(s)) * math.exp(-l1 * t) * math.exp(-l2 * t)
    return min(1.0, fc)


def fc_full(table: ErrorRateTable, params: CoverageParams, f: float,
            t: float) -> float:
    """Coverage of the full scheme: up to S combined 0D+1D errors in
    distinct blocks, zero 2D errors."""
    if t <= 0:
        raise ValueError("interval must be positive")
    l0, l1, l2 = table.rates(f)
    s = params.s_slots
    pmf0 = poisson_pmf_series(l0 * t, s)
    pmf1 = poisson_pmf_series(l1 * t, s)
    combined = np.convolve(pmf0, pmf1)[:s + 1]
    fc = float(combined @ _slot_products(s)) * math.exp(-l2 * t)
    return min(1.0, fc)


def frequency_grid(f_min: float, f_max: float,
                   step: float = FREQUENCY_GRID_MHZ) -> list[float]:
    start = math.ceil(f_min / step) * step
    return [float(f) for f in np.arange(start, f_max + step / 2, step)]


@dataclass(frozen=True)
class FmaxResult:
    frequency: float
    feasible: bool


def f_max(scheme: ChecksumScheme, params: CoverageParams,
          table: ErrorRateTable, t_op: float, p0: float, p1: float, p2: float,
          f_min: float, f_max_grid: float) -> FmaxResult:
    """Largest grid frequency whose per-kind Poisson tail bounds all hold.

    Single-side tolerates up to S 0D errors (probability >= p0) but zero 1D
    (>= p1) and zero 2D (>= p2); the full scheme relaxes the 1D bound to S.
    """
    for p in (p0, p1, p2):
        if not 0.0 < p <= 1.0:
            raise ValueError("probabilities must be in (0, 1]")
    k1 = params.s_slots if scheme == ChecksumScheme.FULL else 0
    for f in reversed(frequency_grid(f_min, f_max_grid)):
        l0, l1, l2 = table.rates(f)
        ok = (poisson_cdf(params.s_slots, l0 * t_op) >= p0
              and poisson_cdf(k1, l1 * t_op) >= p1
              and poisson_cdf(0, l2 * t_op) >= p2)
        if ok:
            return FmaxResult(f, True)
    return FmaxResult(float(math.ceil(f_min / FREQUENCY_GRID_MHZ) * FREQUENCY_GRID_MHZ),
                      False)


@dataclass(frozen=True)
class AdaptiveDecision:
    frequency: float
    single_check: bool
    full_check: bool


def adaptive_abft(params: CoverageParams, table: ErrorRateTable,
                  f_desired: float, f_base: float, t_predicted: float,
                  f_floor: float = 0.0) -> AdaptiveDecision:
    """Pick the cheapest protection for a desired frequency, lowering the
    frequency in 100 MHz steps whenever no scheme can certify coverage.

    Frequencies where every error rate is zero run unprotected.  The
    projected interval scales inversely with frequency relative to the base
    clock.  Never returns a protected configuration whose coverage is below
    ``params.fc_desired``.
    """
    f = f_desired
    while not table.fault_free(f):
        t_proj = t_predicted * f_base / f
        if fc_single(table, params, f, t_proj) >= params.fc_desired:
            return AdaptiveDecision(f, True, False)
        if fc_full(table, params, f, t_proj) >= params.fc_desired:
            return AdaptiveDecision(f, False, True)
        if f - FREQUENCY_GRID_MHZ < f_floor:
            # Hardware floor reached with residual risk: keep the strongest
            # protection rather than run exposed.
            return AdaptiveDecision(f, False, True)
        f -= FREQUENCY_GRID_MHZ
    return AdaptiveDecision(f, False, False)
