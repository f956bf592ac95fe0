import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slackwise.abft import (ChecksumScheme, ErrorKind, InjectedFault,
                            encode, inject_faults, maintain_gemm,
                            sample_fault_plan, verify_correct)


def random_matrix(n, seed=0):
    return np.random.default_rng(seed).uniform(-1.0, 1.0, size=(n, n))


def test_encode_verify_clean():
    m = random_matrix(64, 1)
    for scheme in (ChecksumScheme.SINGLE, ChecksumScheme.FULL):
        cs = encode(m, 16, scheme)
        report = verify_correct(m, cs)
        assert report.clean


def test_maintain_through_gemm_matches_reencode():
    rng = np.random.default_rng(2)
    m = rng.uniform(-1, 1, size=(48, 48))
    left = rng.uniform(-1, 1, size=(48, 12))
    right = rng.uniform(-1, 1, size=(12, 48))
    cs = encode(m, 16, ChecksumScheme.FULL)
    maintain_gemm(cs, left, right)
    m -= left @ right
    assert verify_correct(m, cs).clean


def test_single_corrects_0d():
    m = random_matrix(64, 3)
    cs = encode(m, 16, ChecksumScheme.SINGLE)
    original = m.copy()
    inject_faults(m, [InjectedFault(ErrorKind.D0, 10, 37, 0.5)])
    report = verify_correct(m, cs)
    assert report.corrected[ErrorKind.D0] == 1
    assert not report.uncorrectable
    assert np.allclose(m, original, atol=1e-12)


def test_single_flags_1d_uncorrectable():
    m = random_matrix(64, 4)
    cs = encode(m, 16, ChecksumScheme.SINGLE)
    inject_faults(m, [InjectedFault(ErrorKind.D1, 16, 5, 0.3, extent=4)])
    report = verify_correct(m, cs)
    assert report.uncorrectable
    assert report.corrected[ErrorKind.D0] == 0


def test_full_corrects_1d_column_segment():
    m = random_matrix(64, 5)
    cs = encode(m, 16, ChecksumScheme.FULL)
    original = m.copy()
    inject_faults(m, [InjectedFault(ErrorKind.D1, 16, 5, 0.3, extent=4)])
    report = verify_correct(m, cs)
    assert report.corrected[ErrorKind.D1] == 1
    assert not report.uncorrectable
    assert np.allclose(m, original, atol=1e-12)


def test_full_corrects_1d_row_segment():
    m = random_matrix(64, 6)
    cs = encode(m, 16, ChecksumScheme.FULL)
    original = m.copy()
    inject_faults(m, [InjectedFault(ErrorKind.D1, 20, 16, 0.4,
                                    orientation="row", extent=4)])
    report = verify_correct(m, cs)
    assert report.corrected[ErrorKind.D1] == 1
    assert np.allclose(m, original, atol=1e-12)


def test_full_flags_2d_uncorrectable():
    m = random_matrix(64, 7)
    cs = encode(m, 16, ChecksumScheme.FULL)
    inject_faults(m, [InjectedFault(ErrorKind.D2, 17, 18, 0.4, extent=3)])
    report = verify_correct(m, cs)
    assert report.uncorrectable
    assert report.detected[ErrorKind.D2] == 1


def test_multiple_0d_in_distinct_blocks_all_corrected():
    m = random_matrix(64, 8)
    cs = encode(m, 16, ChecksumScheme.SINGLE)
    original = m.copy()
    plan = [InjectedFault(ErrorKind.D0, 16 * i + 3, 16 * i + 7, 0.2 + i)
            for i in range(4)]
    inject_faults(m, plan)
    report = verify_correct(m, cs)
    assert report.corrected[ErrorKind.D0] == 4
    assert np.allclose(m, original, atol=1e-12)


def test_region_offsets_respected():
    m = random_matrix(64, 9)
    cs = encode(m, 16, ChecksumScheme.FULL, r0=16, c0=32, shape=(48, 32))
    original = m.copy()
    inject_faults(m, [InjectedFault(ErrorKind.D0, 40, 50, 0.9)])
    report = verify_correct(m, cs)
    assert report.corrected[ErrorKind.D0] == 1
    assert np.allclose(m, original, atol=1e-12)
    # fault outside the region is invisible to its checksums
    inject_faults(m, [InjectedFault(ErrorKind.D0, 0, 0, 0.9)])
    assert verify_correct(m, cs).clean


@settings(max_examples=50, deadline=None)
@given(row=st.integers(0, 63), col=st.integers(0, 63),
       mag=st.floats(1e-3, 1e3, allow_nan=False),
       sign=st.sampled_from([-1.0, 1.0]))
def test_single_repairs_any_isolated_element(row, col, mag, sign):
    m = random_matrix(64, 10)
    cs = encode(m, 16, ChecksumScheme.SINGLE)
    original = m.copy()
    inject_faults(m, [InjectedFault(ErrorKind.D0, row, col, sign * mag)])
    verify_correct(m, cs)
    assert np.allclose(m, original, atol=1e-9)


def test_fault_plan_stays_inside_region():
    rng = np.random.default_rng(11)
    for _ in range(200):
        plan = sample_fault_plan(rng, {ErrorKind.D0: 1, ErrorKind.D1: 1,
                                       ErrorKind.D2: 1},
                                 r0=8, c0=8, rows=24, cols=24, b=8,
                                 scale=1.0, iteration=0)
        for fault in plan:
            assert 8 <= fault.row < 32 and 8 <= fault.col < 32
            assert fault.row + (fault.extent if fault.kind != ErrorKind.D0
                                else 1) <= 32
            assert fault.col + (fault.extent if fault.kind == ErrorKind.D2
                                else 1) <= 32


def test_no_false_positives_after_many_maintained_updates():
    rng = np.random.default_rng(12)
    m = rng.uniform(-1, 1, size=(96, 96))
    cs = encode(m, 16, ChecksumScheme.FULL)
    for _ in range(20):
        left = rng.uniform(-1, 1, size=(96, 8))
        right = rng.uniform(-1, 1, size=(8, 96))
        maintain_gemm(cs, left, right)
        m -= left @ right
    assert verify_correct(m, cs).clean
