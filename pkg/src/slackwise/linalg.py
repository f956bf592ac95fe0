"""Blocked one-sided decompositions split into per-iteration tasks.

Each iteration of a blocked Cholesky, LU, or QR factorization is decomposed
into a panel decomposition (PD, CPU-assigned), an optional panel update (PU)
and a trailing/panel matrix update (TMU, GPU-assigned), plus a host-device
transfer of the panel.  The same task taxonomy drives both the numeric
engine in this module and the analytic flop-count model used for time
prediction and scheduling.

LU runs without pivoting and therefore requires diagonally dominant inputs.
Cholesky is implemented left-looking (the TMU is the accumulated update of
the current panel), LU and QR right-looking.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class DecompositionKind(str, enum.Enum):
    CHOLESKY = "cholesky"
    LU = "lu"
    QR = "qr"


class TaskKind(str, enum.Enum):
    PD = "pd"
    PU = "pu"
    TMU = "tmu"
    TRANSFER = "transfer"


class InvalidDimensionError(ValueError):
    pass


class NumericBreakdownError(ArithmeticError):
    """Raised when a pivot is non-positive / negligible (e.g. Cholesky on a
    matrix that lost positive definiteness after an uncorrected fault)."""


@dataclass(frozen=True)
class BlockLayout:
    n: int
    b: int

    def __post_init__(self):
        if not (1 <= self.b <= self.n):
            raise InvalidDimensionError(f"block size {self.b} outside [1, {self.n}]")

    @property
    def n_blocks(self) -> int:
        return math.ceil(self.n / self.b)

    def block_slice(self, i: int) -> slice:
        return slice(i * self.b, min((i + 1) * self.b, self.n))


def generate_test_matrix(kind: DecompositionKind, n: int, seed: int) -> np.ndarray:
    """Deterministic dense test input suited to `kind`.

    Cholesky gets a symmetric positive definite matrix, LU a strictly
    diagonally dominant one (safe without pivoting), QR a general dense
    matrix.
    """
    if n < 1:
        raise InvalidDimensionError("matrix order must be >= 1")
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1.0, 1.0, size=(n, n))
    if kind == DecompositionKind.CHOLESKY:
        a = a @ a.T + n * np.eye(n)
    elif kind == DecompositionKind.LU:
        a[np.diag_indices(n)] = np.abs(a).sum(axis=1) + 1.0
    return np.asfortranarray(a)


# ---------------------------------------------------------------------------
# Flop / transfer / footprint models
# ---------------------------------------------------------------------------

def compute_flops(kind: DecompositionKind, task: TaskKind, n: int, b: int, k: int) -> float:
    """Closed-form flop count of one task at iteration k (0-based).

    PU is only a distinct scheduled task for LU; for Cholesky and QR it does
    not contribute to the slack and is counted as zero here (the numeric
    engine still performs the corresponding arithmetic).
    """
    layout = BlockLayout(n, b)
    if not 0 <= k < layout.n_blocks:
        raise InvalidDimensionError(f"iteration {k} out of range for {layout.n_blocks} blocks")
    nk = n - k * b  # remaining order at iteration k
    if kind == DecompositionKind.CHOLESKY:
        if task == TaskKind.PD:
            return b ** 3 / 3.0
        if task == TaskKind.PU:
            return 0.0
        if task == TaskKind.TMU:
            # left-looking panel update: (nk x k*b) @ (k*b x b) GEMM
            return 2.0 * k * b * b * nk
    elif kind == DecompositionKind.LU:
        if task == TaskKind.PD:
            return b * b * nk - b ** 3 / 3.0
        if task == TaskKind.PU:
            return b * b * max(nk - b, 0)
        if task == TaskKind.TMU:
            return 2.0 * b * max(nk - b, 0) ** 2
    elif kind == DecompositionKind.QR:
        if task == TaskKind.PD:
            return 2.0 * b * b * (nk - b / 3.0)
        if task == TaskKind.PU:
            return 0.0
        if task == TaskKind.TMU:
            return 4.0 * b * max(nk - b, 0) * (nk + b) if nk > b else 0.0
    raise ValueError(f"no flop model for {kind}/{task}")


def transfer_elements(kind: DecompositionKind, n: int, b: int, k: int) -> float:
    """Matrix elements crossing the host-device link at iteration k."""
    layout = BlockLayout(n, b)
    if not 0 <= k < layout.n_blocks:
        raise InvalidDimensionError(f"iteration {k} out of range")
    nk = n - k * b
    if kind == DecompositionKind.CHOLESKY:
        return 2.0 * b * b  # diagonal block down and back
    if kind == DecompositionKind.LU:
        return 2.0 * nk * b  # panel down and factored panel back
    return 2.0 * max(nk - b, 0) * b + 2.0 * b * b  # QR: reflector part of the panel


def touched_elements(kind: DecompositionKind, task: TaskKind, n: int, b: int, k: int) -> float:
    """Elements written by a task; drives checksum-verification cost."""
    nk = n - k * b
    if kind == DecompositionKind.CHOLESKY:
        return {TaskKind.PD: float(b * b),
                TaskKind.PU: float(max(nk - b, 0) * b),
                TaskKind.TMU: float(nk * b)}[task]
    if kind == DecompositionKind.LU:
        return {TaskKind.PD: float(nk * b),
                TaskKind.PU: float(max(nk - b, 0) * b),
                TaskKind.TMU: float(max(nk - b, 0) ** 2)}[task]
    return {TaskKind.PD: float(nk * b),
            TaskKind.PU: 0.0,
            TaskKind.TMU: float(max(nk - b, 0) * (nk + b)) if nk > b else 0.0}[task]


def task_flops(kind: DecompositionKind, task: TaskKind, n: int, b: int, k: int) -> float:
    """Alias kept close to the scheduling vocabulary."""
    return compute_flops(kind, task, n, b, k)


# ---------------------------------------------------------------------------
# Numeric engine
# ---------------------------------------------------------------------------

@dataclass
class Factorization:
    """In-progress blocked factorization over an owned working matrix.

    ``m`` carries the factors in packed form (LU: L strictly below the
    diagonal with unit diagonal implied, U on and above; Cholesky: L in the
    lower triangle; QR: R in the upper triangle with the Householder vectors
    packed below, plus per-panel T factors in ``qr_t``).
    """
    kind: DecompositionKind
    a0: np.ndarray
    b: int
    m: np.ndarray = field(init=False)
    qr_t: list = field(default_factory=list)
    k_done: int = field(default=0)

    def __post_init__(self):
        n = self.a0.shape[0]
        if self.a0.shape != (n, n):
            raise InvalidDimensionError("square input required")
        self.layout = BlockLayout(n, self.b)
        self.m = np.array(self.a0, dtype=np.float64, order="F", copy=True)

    @property
    def n(self) -> int:
        return self.a0.shape[0]

    @property
    def complete(self) -> bool:
        return self.k_done >= self.layout.n_blocks

    # -- individual tasks ---------------------------------------------------

    def task_tmu(self, k: int) -> None:
        n, b = self.n, self.b
        p = k * b
        pe = min(p + b, n)
        if self.kind == DecompositionKind.CHOLESKY:
            if k == 0:
                return
            panel = self.m[p:n, p:pe]
            panel -= self.m[p:n, 0:p] @ self.m[p:pe, 0:p].T
        elif self.kind == DecompositionKind.LU:
            if pe >= n:
                return
            l21 = self.m[pe:n, p:pe]
            u12 = self.m[p:pe, pe:n]
            self.m[pe:n, pe:n] -= l21 @ u12
        else:  # QR trailing update: C <- (I - V T V^T)^T C
            if pe >= n or k >= len(self.qr_t):
                return
            v = self._qr_v(k)
            t = self.qr_t[k]
            c = self.m[p:n, pe:n]
            c -= v @ (t.T @ (v.T @ c))

    def task_pd(self, k: int) -> None:
        n, b = self.n, self.b
        p = k * b
        pe = min(p + b, n)
        if self.kind == DecompositionKind.CHOLESKY:
            d = self.m[p:pe, p:pe]
            for j in range(pe - p):
                pivot = d[j, j] - d[j, :j] @ d[j, :j]
                if pivot <= 0.0 or not np.isfinite(pivot):
                    raise NumericBreakdownError(f"non-positive pivot at column {p + j}")
                d[j, j] = math.sqrt(pivot)
                if j + 1 < pe - p:
                    d[j + 1:, j] = (d[j + 1:, j] - d[j + 1:, :j] @ d[j, :j]) / d[j, j]
            for j in range(pe - p):
                d[j, j + 1:] = 0.0
        elif self.kind == DecompositionKind.LU:
            panel = self.m[p:n, p:pe]
            for j in range(pe - p):
                pivot = panel[j, j]
                if pivot == 0.0 or not np.isfinite(pivot):
                    raise NumericBreakdownError(f"zero pivot at column {p + j}")
                panel[j + 1:, j] /= pivot
                if j + 1 < pe - p:
                    panel[j + 1:, j + 1:pe - p] -= np.outer(panel[j + 1:, j], panel[j, j + 1:pe - p])
        else:
            self._qr_panel(k)

    def task_pu(self, k: int) -> None:
        n, b = self.n, self.b
        p = k * b
        pe = min(p + b, n)
        if self.kind == DecompositionKind.CHOLESKY:
            if pe >= n:
                return
            l11 = self.m[p:pe, p:pe]
            # forward solve against L11^T from the right: L21 <- A21 L11^{-T}
            self.m[pe:n, p:pe] = np.linalg.solve(l11, self.m[pe:n, p:pe].T).T
            self.m[p:pe, pe:n] = 0.0
        elif self.kind == DecompositionKind.LU:
            if pe >= n:
                return
            l11 = np.tril(self.m[p:pe, p:pe], -1) + np.eye(pe - p)
            self.m[p:pe, pe:n] = np.linalg.solve(l11, self.m[p:pe, pe:n])
        # QR has no separate panel update

    def _qr_panel(self, k: int) -> None:
        n, b = self.n, self.b
        p = k * b
        pe = min(p + b, n)
        w = pe - p
        panel = self.m[p:n, p:pe]
        mrows = panel.shape[0]
        v = np.zeros((mrows, w))
        betas = np.zeros(w)
        for j in range(w):
            x = panel[j:, j].copy()
            normx = np.linalg.norm(x)
            if normx == 0.0:
                betas[j] = 0.0
                v[j, j] = 1.0
                continue
            alpha = -math.copysign(normx, x[0] if x[0] != 0 else 1.0)
            v_j = x.copy()
            v_j[0] -= alpha
            vn2 = v_j @ v_j
            if vn2 == 0.0:
                betas[j] = 0.0
                v[j, j] = 1.0
                panel[j, j] = alpha
                continue
            beta = 2.0 / vn2
            # apply reflector to the rest of the panel
            rest = panel[j:, j + 1:]
            rest -= beta * np.outer(v_j, v_j @ rest)
            panel[j, j] = alpha
            panel[j + 1:, j] = 0.0
            scale = v_j[0]
            v[j:, j] = v_j / scale
            betas[j] = beta * scale * scale
        t = np.zeros((w, w))
        for j in range(w):
            t[j, j] = betas[j]
            if j > 0:
                t[:j, j] = -betas[j] * (t[:j, :j] @ (v[:, :j].T @ v[:, j]))
        self.qr_t.append(t)
        self._qr_store_v(k, v)

    def _qr_store_v(self, k: int, v: np.ndarray) -> None:
        if not hasattr(self, "_qr_vs"):
            self._qr_vs = {}
        self._qr_vs[k] = v

    def _qr_v(self, k: int) -> np.ndarray:
        return self._qr_vs[k]

    # -- iteration driver ---------------------------------------------------

    def run_iteration(self, k: int) -> None:
        if k != self.k_done:
            raise InvalidDimensionError(f"expected iteration {self.k_done}, got {k}")
        if k >= self.layout.n_blocks:
            raise InvalidDimensionError("factorization already complete")
        for task in self.task_order():
            if task == TaskKind.TMU:
                self.task_tmu(k)
            elif task == TaskKind.PD:
                self.task_pd(k)
            elif task == TaskKind.PU:
                self.task_pu(k)
        self.k_done += 1

    def task_order(self) -> tuple[TaskKind, ...]:
        if self.kind == DecompositionKind.CHOLESKY:
            return (TaskKind.TMU, TaskKind.PD, TaskKind.PU)
        if self.kind == DecompositionKind.LU:
            return (TaskKind.PD, TaskKind.PU, TaskKind.TMU)
        return (TaskKind.PD, TaskKind.TMU)

    def run_all(self) -> "Factorization":
        while not self.complete:
            self.run_iteration(self.k_done)
        return self

    # -- reconstruction and residual ---------------------------------------

    def reconstruct(self) -> np.ndarray:
        if not self.complete:
            raise NumericBreakdownError("factorization incomplete")
        n = self.n
        if self.kind == DecompositionKind.CHOLESKY:
            l = np.tril(self.m)
            return l @ l.T
        if self.kind == DecompositionKind.LU:
            l = np.tril(self.m, -1) + np.eye(n)
            u = np.triu(self.m)
            return l @ u
        r = np.triu(self.m)
        out = r.copy()
        for k in range(len(self.qr_t) - 1, -1, -1):
            p = k * self.b
            v = self._qr_v(k)
            t = self.qr_t[k]
            blk = out[p:n, :]
            blk -= v @ (t @ (v.T @ blk))
        return out


def residual(a: np.ndarray, factors: Factorization) -> float:
    """Relative Frobenius-norm reconstruction error."""
    rec = factors.reconstruct()
    denom = np.linalg.norm(a)
    if denom == 0.0:
        return float(np.linalg.norm(a - rec))
    return float(np.linalg.norm(a - rec) / denom)
