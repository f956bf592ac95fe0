import numpy as np
import pytest

from slackwise.linalg import (BlockLayout, DecompositionKind, Factorization,
                              InvalidDimensionError, NumericBreakdownError,
                              TaskKind, compute_flops, generate_test_matrix,
                              residual, transfer_elements)

KINDS = list(DecompositionKind)


def test_block_layout_counts():
    layout = BlockLayout(100, 32)
    assert layout.n_blocks == 4
    assert layout.block_slice(3) == slice(96, 100)
    with pytest.raises(InvalidDimensionError):
        BlockLayout(10, 11)


@pytest.mark.parametrize("kind", KINDS)
def test_generate_matrix_deterministic(kind):
    a = generate_test_matrix(kind, 64, 7)
    b = generate_test_matrix(kind, 64, 7)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, generate_test_matrix(kind, 64, 8))


def test_generated_matrices_are_factorable():
    a = generate_test_matrix(DecompositionKind.CHOLESKY, 48, 0)
    assert np.array_equal(a, a.T)
    assert np.all(np.linalg.eigvalsh(a) > 0)
    a = generate_test_matrix(DecompositionKind.LU, 48, 0)
    off = np.abs(a).sum(axis=1) - np.abs(np.diag(a))
    assert np.all(np.abs(np.diag(a)) > off)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("n,b", [(64, 16), (96, 32), (100, 32), (128, 128)])
def test_blocked_matches_reference(kind, n, b):
    a = generate_test_matrix(kind, n, 1)
    factors = Factorization(kind, a, b).run_all()
    assert residual(a, factors) < 1e-12
    if kind == DecompositionKind.CHOLESKY:
        ref = np.linalg.cholesky(a)
        assert np.allclose(np.tril(factors.m), ref, atol=1e-9)
    elif kind == DecompositionKind.QR:
        # R is unique up to column signs; compare |diag|
        _, r_ref = np.linalg.qr(a)
        assert np.allclose(np.abs(np.diag(factors.m)),
                           np.abs(np.diag(r_ref)), rtol=1e-8)


def test_cholesky_breakdown_raises():
    a = generate_test_matrix(DecompositionKind.CHOLESKY, 32, 0)
    a[0, 0] = -1.0
    with pytest.raises(NumericBreakdownError):
        Factorization(DecompositionKind.CHOLESKY, a, 8).run_all()


def test_lu_zero_pivot_raises():
    a = generate_test_matrix(DecompositionKind.LU, 32, 0)
    a[0, 0] = 0.0
    with pytest.raises(NumericBreakdownError):
        Factorization(DecompositionKind.LU, a, 8).run_all()


def test_iteration_order_enforced():
    a = generate_test_matrix(DecompositionKind.LU, 32, 0)
    f = Factorization(DecompositionKind.LU, a, 8)
    with pytest.raises(InvalidDimensionError):
        f.run_iteration(1)


@pytest.mark.parametrize("kind", KINDS)
def test_total_flops_match_closed_forms(kind):
    n, b = 512, 64
    nb = n // b
    total = sum(compute_flops(kind, task, n, b, k)
                for k in range(nb)
                for task in (TaskKind.PD, TaskKind.PU, TaskKind.TMU))
    if kind == DecompositionKind.CHOLESKY:
        expected = n ** 3 / 3.0
    elif kind == DecompositionKind.LU:
        expected = 2.0 * n ** 3 / 3.0
    else:
        expected = 4.0 * n ** 3 / 3.0
    assert total == pytest.approx(expected, rel=3.0 * b / n)


@pytest.mark.parametrize("kind", KINDS)
def test_flops_and_transfers_nonnegative_and_shrinking(kind):
    n, b = 1024, 64
    for task in TaskKind:
        values = []
        for k in range(n // b):
            v = (transfer_elements(kind, n, b, k) if task == TaskKind.TRANSFER
                 else compute_flops(kind, task, n, b, k))
            assert v >= 0.0
            values.append(v)
        if kind != DecompositionKind.CHOLESKY:
            # right-looking workloads shrink monotonically
            assert all(x >= y for x, y in zip(values, values[1:]))
