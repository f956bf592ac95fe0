"""Block checksums for detecting and correcting silent data corruption.

Checksums are kept per b-by-b block of a protected region.  Each protected
dimension carries a plain sum and an index-weighted sum, which together
locate and repair a single corrupted element per block (the weighted sum
recovers the offending index as a ratio).  The single-side scheme protects
columns only; the full scheme protects both dimensions and can additionally
repair a corrupted row or column segment inside a block.

Checksums are encoded before a protected update, carried through the update
by applying the same linear operation to the sums (never recomputed from
the possibly-faulty result), and verified against freshly recomputed sums
afterwards.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .linalg import (DecompositionKind, TaskKind, compute_flops,
                     touched_elements)

# Multiplier on b * max|block| * machine-epsilon used as the detection
# threshold; large enough that maintained checksums never false-positive on
# fault-free runs, small enough that 1e-3-relative corruptions always trip.
CHECK_TOLERANCE_FACTOR = 50.0

# How close the recovered row/column index must be to an integer before a
# single-element repair is trusted.
INDEX_SNAP_TOLERANCE = 1e-2


class ChecksumScheme(str, enum.Enum):
    NONE = "none"
    SINGLE = "single"
    FULL = "full"


class ErrorKind(str, enum.Enum):
    D0 = "0d"
    D1 = "1d"
    D2 = "2d"


@dataclass(frozen=True)
class InjectedFault:
    kind: ErrorKind
    row: int
    col: int
    magnitude: float
    iteration: int = 0
    task: TaskKind = TaskKind.TMU
    orientation: str = "col"  # propagation direction for 1d faults
    extent: int = 1           # affected elements for 1d/2d faults


@dataclass
class CorrectionReport:
    detected: dict = field(default_factory=lambda: {k: 0 for k in ErrorKind})
    corrected: dict = field(default_factory=lambda: {k: 0 for k in ErrorKind})
    uncorrectable: bool = False
    locations: list = field(default_factory=list)

    @property
    def total_detected(self) -> int:
        return sum(self.detected.values())

    @property
    def total_corrected(self) -> int:
        return sum(self.corrected.values())

    @property
    def clean(self) -> bool:
        return self.total_detected == 0 and not self.uncorrectable

    def merge(self, other: "CorrectionReport") -> None:
        for k in ErrorKind:
            self.detected[k] += other.detected[k]
            self.corrected[k] += other.corrected[k]
        self.uncorrectable = self.uncorrectable or other.uncorrectable
        self.locations.extend(other.locations)


class RegionChecksums:
    """Checksums for an aligned rectangular region of a larger matrix.

    ``r0``/``c0`` are global offsets of the region's top-left corner; blocks
    are cut on the region-local b grid.  ``col_*`` sums run over rows within
    a block (one entry per column), ``row_*`` sums over columns.
    """

    def __init__(self, r0: int, c0: int, shape: tuple[int, int], b: int,
                 scheme: ChecksumScheme):
        if scheme == ChecksumScheme.NONE:
            raise ValueError("cannot encode with scheme 'none'")
        self.r0, self.c0 = r0, c0
        self.rows, self.cols = shape
        self.b = b
        self.scheme = scheme
        self.col_plain: dict = {}
        self.col_weighted: dict = {}
        self.row_plain: dict = {}
        self.row_weighted: dict = {}

    def row_blocks(self) -> list[slice]:
        return [slice(i, min(i + self.b, self.rows)) for i in range(0, self.rows, self.b)]

    def col_blocks(self) -> list[slice]:
        return [slice(j, min(j + self.b, self.cols)) for j in range(0, self.cols, self.b)]

    def view(self, m: np.ndarray) -> np.ndarray:
        return m[self.r0:self.r0 + self.rows, self.c0:self.c0 + self.cols]


def encode(m: np.ndarray, b: int, scheme: ChecksumScheme,
           r0: int = 0, c0: int = 0, shape: tuple[int, int] | None = None) -> RegionChecksums:
    """Encode block checksums of ``m[r0:r0+rows, c0:c0+cols]``."""
    if shape is None:
        shape = (m.shape[0] - r0, m.shape[1] - c0)
    cs = RegionChecksums(r0, c0, shape, b, scheme)
    region = cs.view(m)
    for bi, rs in enumerate(cs.row_blocks()):
        w_r = np.arange(rs.stop - rs.start, dtype=np.float64)
        for bj, csl in enumerate(cs.col_blocks()):
            blk = region[rs, csl]
            cs.col_plain[bi, bj] = blk.sum(axis=0)
            cs.col_weighted[bi, bj] = w_r @ blk
            if scheme == ChecksumScheme.FULL:
                w_c = np.arange(csl.stop - csl.start, dtype=np.float64)
                cs.row_plain[bi, bj] = blk.sum(axis=1)
                cs.row_weighted[bi, bj] = blk @ w_c
    return cs


def maintain_gemm(cs: RegionChecksums, left: np.ndarray, right: np.ndarray) -> None:
    """Carry checksums through ``region -= left @ right``.

    ``left`` has the region's row count, ``right`` its column count; the sums
    are updated from the operands so they keep describing the fault-free
    result even when the data update itself is later corrupted.
    """
    row_blocks = cs.row_blocks()
    col_blocks = cs.col_blocks()
    for bi, rs in enumerate(row_blocks):
        l_i = left[rs, :]
        e_l = l_i.sum(axis=0)
        w_l = np.arange(rs.stop - rs.start, dtype=np.float64) @ l_i
        for bj, csl in enumerate(col_blocks):
            r_j = right[:, csl]
            cs.col_plain[bi, bj] = cs.col_plain[bi, bj] - e_l @ r_j
            cs.col_weighted[bi, bj] = cs.col_weighted[bi, bj] - w_l @ r_j
            if cs.scheme == ChecksumScheme.FULL:
                w_c = np.arange(csl.stop - csl.start, dtype=np.float64)
                cs.row_plain[bi, bj] = cs.row_plain[bi, bj] - l_i @ r_j.sum(axis=1)
                cs.row_weighted[bi, bj] = cs.row_weighted[bi, bj] - l_i @ (r_j @ w_c)


def _block_threshold(blk: np.ndarray, b: int) -> float:
    scale = max(np.abs(blk).max(initial=0.0), 1.0)
    return CHECK_TOLERANCE_FACTOR * b * scale * np.finfo(np.float64).eps


def _classify(n_rows: int, n_cols: int) -> ErrorKind:
    if n_rows <= 1 and n_cols <= 1:
        return ErrorKind.D0
    if n_rows <= 1 or n_cols <= 1:
        return ErrorKind.D1
    return ErrorKind.D2


def verify_correct(m: np.ndarray, cs: RegionChecksums,
                   correct: bool = True) -> CorrectionReport:
    """Compare maintained checksums against the data and repair in place.

    Single-side: repairs isolated single-element errors (one per affected
    column) when the weighted sum pins the row index.  Full: additionally
    repairs one corrupted row or column segment per block.  Anything else is
    flagged uncorrectable.
    """
    report = CorrectionReport()
    region = cs.view(m)
    for bi, rs in enumerate(cs.row_blocks()):
        for bj, csl in enumerate(cs.col_blocks()):
            blk = region[rs, csl]
            tau = _block_threshold(blk, cs.b)
            d_col = blk.sum(axis=0) - cs.col_plain[bi, bj]
            bad_cols = np.flatnonzero(np.abs(d_col) > tau)
            if cs.scheme == ChecksumScheme.FULL:
                d_row = blk.sum(axis=1) - cs.row_plain[bi, bj]
                bad_rows = np.flatnonzero(np.abs(d_row) > tau)
            else:
                d_row = None
                bad_rows = None
            if bad_cols.size == 0 and (bad_rows is None or bad_rows.size == 0):
                continue
            if cs.scheme == ChecksumScheme.SINGLE:
                _handle_single(blk, cs, bi, bj, rs, csl, d_col, bad_cols, tau,
                               report, correct)
            else:
                _handle_full(blk, cs, bi, bj, rs, csl, d_col, bad_cols,
                             d_row, bad_rows, tau, report, correct)
    return report


def _recovered_index(weighted_delta: float, plain_delta: float, limit: int) -> int | None:
    ratio = weighted_delta / plain_delta
    idx = round(ratio)
    if abs(ratio - idx) <= INDEX_SNAP_TOLERANCE and 0 <= idx < limit:
        return int(idx)
    return None


def _handle_single(blk, cs, bi, bj, rs, csl, d_col, bad_cols, tau, report, correct):
    w_r = np.arange(rs.stop - rs.start, dtype=np.float64)
    d_w = w_r @ blk - cs.col_weighted[bi, bj]
    repairs = []
    for j in bad_cols:
        idx = _recovered_index(d_w[j], d_col[j], rs.stop - rs.start)
        if idx is None:
            repairs = None
            break
        repairs.append((idx, int(j), d_col[j]))
    if repairs is None:
        kind = ErrorKind.D1 if bad_cols.size == 1 else ErrorKind.D2
        report.detected[kind] += 1
        report.uncorrectable = True
        report.locations.append((cs.r0 + rs.start, cs.c0 + csl.start, kind, False))
        return
    for idx, j, delta in repairs:
        report.detected[ErrorKind.D0] += 1
        if correct:
            blk[idx, j] -= delta
            report.corrected[ErrorKind.D0] += 1
        report.locations.append((cs.r0 + rs.start + idx, cs.c0 + csl.start + j,
                                 ErrorKind.D0, correct))


def _handle_full(blk, cs, bi, bj, rs, csl, d_col, bad_cols, d_row, bad_rows,
                 tau, report, correct):
    kind = _classify(bad_rows.size, bad_cols.size)
    loc = (cs.r0 + rs.start, cs.c0 + csl.start, kind, False)
    if kind == ErrorKind.D0:
        if bad_rows.size == 0 or bad_cols.size == 0:
            # one-sided disagreement only: treat as detected, not locatable
            report.detected[ErrorKind.D0] += 1
            report.uncorrectable = True
            report.locations.append(loc)
            return
        i, j = int(bad_rows[0]), int(bad_cols[0])
        report.detected[ErrorKind.D0] += 1
        if correct:
            blk[i, j] -= d_col[j]
            report.corrected[ErrorKind.D0] += 1
        report.locations.append((cs.r0 + rs.start + i, cs.c0 + csl.start + j,
                                 ErrorKind.D0, correct))
    elif kind == ErrorKind.D1:
        report.detected[ErrorKind.D1] += 1
        if bad_cols.size == 1:
            j = int(bad_cols[0])
            if correct:
                blk[bad_rows, j] -= d_row[bad_rows]
                report.corrected[ErrorKind.D1] += 1
        else:
            i = int(bad_rows[0])
            if correct:
                blk[i, bad_cols] -= d_col[bad_cols]
                report.corrected[ErrorKind.D1] += 1
        report.locations.append((cs.r0 + rs.start, cs.c0 + csl.start,
                                 ErrorKind.D1, correct))
    else:
        report.detected[ErrorKind.D2] += 1
        report.uncorrectable = True
        report.locations.append(loc)


# ---------------------------------------------------------------------------
# Fault injection
# ---------------------------------------------------------------------------

def inject_faults(m: np.ndarray, plan: list[InjectedFault]) -> None:
    """Apply the planned perturbations in place; coordinates are global."""
    n_rows, n_cols = m.shape
    for fault in plan:
        if not (0 <= fault.row < n_rows and 0 <= fault.col < n_cols):
            raise IndexError(f"fault at ({fault.row}, {fault.col}) outside matrix")
        if fault.kind == ErrorKind.D0:
            m[fault.row, fault.col] += fault.magnitude
        elif fault.kind == ErrorKind.D1:
            ext = max(2, fault.extent)
            if fault.orientation == "col":
                stop = min(fault.row + ext, n_rows)
                ramp = 1.0 + 0.1 * np.arange(stop - fault.row)
                m[fault.row:stop, fault.col] += fault.magnitude * ramp
            else:
                stop = min(fault.col + ext, n_cols)
                ramp = 1.0 + 0.1 * np.arange(stop - fault.col)
                m[fault.row, fault.col:stop] += fault.magnitude * ramp
        else:
            ext = max(2, fault.extent)
            rstop = min(fault.row + ext, n_rows)
            cstop = min(fault.col + ext, n_cols)
            ramp = np.add.outer(np.arange(rstop - fault.row) * 0.1,
                                np.arange(cstop - fault.col) * 0.07) + 1.0
            m[fault.row:rstop, fault.col:cstop] += fault.magnitude * ramp


def sample_fault_plan(rng: np.random.Generator, counts: dict[ErrorKind, int],
                      r0: int, c0: int, rows: int, cols: int, b: int,
                      scale: float, iteration: int) -> list[InjectedFault]:
    """Random fault locations inside a region, magnitudes ~1e-3 of scale."""
    plan = []
    for kind in ErrorKind:
        for _ in range(counts.get(kind, 0)):
            r = r0 + int(rng.integers(rows))
            c = c0 + int(rng.integers(cols))
            mag = float(rng.uniform(0.5, 2.0)) * 1e-3 * max(scale, 1.0)
            if rng.random() < 0.5:
                mag = -mag
            extent = min(b, 4, rows, cols) if kind != ErrorKind.D0 else 1
            extent = max(extent, 1)
            if kind == ErrorKind.D1:
                # keep the streak inside one block so extent stays meaningful
                r = r0 + (r - r0) - (r - r0) % b
            # clamp so the perturbed patch stays inside the region
            r = min(r, r0 + rows - extent)
            c = min(c, c0 + cols - extent)
            plan.append(InjectedFault(kind=kind, row=r, col=c, magnitude=mag,
                                      iteration=iteration, orientation="col",
                                      extent=extent))
    return plan


# ---------------------------------------------------------------------------
# Checksum cost model
# ---------------------------------------------------------------------------

def checksum_flops(scheme: ChecksumScheme, kind: DecompositionKind,
                   task: TaskKind, n: int, b: int, k: int,
                   component: str = "update") -> float:
    """Flop cost of carrying (update) or checking (verify) checksums.

    Updates scale with the task's own arithmetic divided by the block size
    (one extra row/column of sums per block); verification scales with the
    elements the task wrote.  The full scheme doubles both.
    """
    if scheme == ChecksumScheme.NONE:
        return 0.0
    flops = compute_flops(kind, task, n, b, k)
    if flops == 0.0:
        # not a scheduled task for this decomposition/iteration
        return 0.0
    sides = 2.0 if scheme == ChecksumScheme.FULL else 1.0
    if component == "update":
        return sides * 2.0 * flops / b
    if component == "verify":
        return sides * 2.0 * touched_elements(kind, task, n, b, k)
    raise ValueError(f"unknown checksum component {component!r}")


def transfer_checksum_elements(scheme: ChecksumScheme, kind: DecompositionKind,
                               n: int, b: int, k: int) -> float:
    from .linalg import transfer_elements
    if scheme == ChecksumScheme.NONE:
        return 0.0
    sides = 2.0 if scheme == ChecksumScheme.FULL else 1.0
    return sides * 2.0 * transfer_elements(kind, n, b, k) / b
