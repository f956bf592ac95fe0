import numpy as np
import pytest

from slackwise.abft import ChecksumScheme
from slackwise.linalg import DecompositionKind, TaskKind, compute_flops
from slackwise.predictor import (SlackPredictor, TaskPredictor, complexity,
                                 cost_ratio)

N, B = 1024, 128


def test_cost_ratio_basics():
    r = cost_ratio(DecompositionKind.LU, TaskKind.TMU, N, B, 1, 2)
    expected = compute_flops(DecompositionKind.LU, TaskKind.TMU, N, B, 2) \
        / compute_flops(DecompositionKind.LU, TaskKind.TMU, N, B, 1)
    assert r == pytest.approx(expected)
    # a task absent at iteration j cannot be rescaled from it
    assert cost_ratio(DecompositionKind.CHOLESKY, TaskKind.TMU, N, B, 0, 3) == 0.0


def test_predict_exact_when_throughput_constant():
    """If observed times follow the flop model exactly, prediction is exact."""
    rate = 5e9
    p = TaskPredictor(DecompositionKind.LU, TaskKind.TMU, N, B)
    for k in range(4):
        p.observe(k, compute_flops(DecompositionKind.LU, TaskKind.TMU,
                                   N, B, k) / rate, 3500.0, 3500.0)
    t_pred = p.predict(4)
    truth = compute_flops(DecompositionKind.LU, TaskKind.TMU, N, B, 4) / rate
    assert t_pred == pytest.approx(truth, rel=1e-12)


def test_frequency_normalization():
    rate = 5e9
    p = TaskPredictor(DecompositionKind.LU, TaskKind.TMU, N, B)
    flops0 = compute_flops(DecompositionKind.LU, TaskKind.TMU, N, B, 0)
    # ran twice as fast at double frequency: normalized history identical
    p.observe(0, flops0 / (2 * rate), 7000.0, 3500.0)
    truth = compute_flops(DecompositionKind.LU, TaskKind.TMU, N, B, 1) / rate
    assert p.predict(1) == pytest.approx(truth, rel=1e-12)


def test_weights_renormalized_on_short_history():
    p = TaskPredictor(DecompositionKind.CHOLESKY, TaskKind.PD, N, B)
    p.observe(0, 2.0, 1.0, 1.0)
    # PD-Cholesky cost is constant, so the prediction is the observation
    assert p.predict(5) == pytest.approx(2.0)


def test_recent_history_dominates():
    """Under drifting efficiency the blend tracks recent iterations more
    closely than a first-iteration-only rescale."""
    rate = 5e9
    kind, task = DecompositionKind.LU, TaskKind.TMU
    p = TaskPredictor(kind, task, N, B)
    drift = lambda k: 1.0 + 0.02 * k  # slowdown factor per iteration
    for k in range(6):
        p.observe(k, drift(k) * compute_flops(kind, task, N, B, k) / rate,
                  1.0, 1.0)
    truth = drift(6) * compute_flops(kind, task, N, B, 6) / rate
    err_blend = abs(p.predict(6) - truth) / truth
    err_first = abs(p.baseline(6) - truth) / truth
    assert err_blend < err_first


def test_predict_requires_history():
    p = TaskPredictor(DecompositionKind.LU, TaskKind.PD, N, B)
    with pytest.raises(ValueError):
        p.predict(1)


def test_slack_predictor_sign_and_composition():
    sp = SlackPredictor(kind=DecompositionKind.CHOLESKY, n=N, b=B,
                        cpu_rate=5e9, gpu_rate=5e10, transfer_rate=1.25e9)
    for k in range(3):
        for task in TaskKind:
            if task == TaskKind.TRANSFER:
                t = 2.0 * B * B / 1.25e9
            else:
                t = compute_flops(DecompositionKind.CHOLESKY, task, N, B, k) / \
                    (5e10 if task == TaskKind.TMU else 5e9)
            if t > 0:
                sp.observe(task, k, t, 1.0, 1.0)
    slack = sp.predict_slack(4)
    t_gpu = compute_flops(DecompositionKind.CHOLESKY, TaskKind.TMU, N, B, 4) / 5e10
    t_cpu = compute_flops(DecompositionKind.CHOLESKY, TaskKind.PD, N, B, 4) / 5e9
    t_tr = 2.0 * B * B / 1.25e9
    assert slack == pytest.approx(t_gpu - t_cpu - t_tr, rel=1e-9)


def test_slack_predictor_checksum_overhead_shifts_slack():
    kwargs = dict(kind=DecompositionKind.CHOLESKY, n=N, b=B,
                  cpu_rate=5e9, gpu_rate=5e10, transfer_rate=1.25e9)
    plain = SlackPredictor(**kwargs)
    guarded = SlackPredictor(scheme=ChecksumScheme.FULL, **kwargs)
    for sp in (plain, guarded):
        for k in range(3):
            sp.observe(TaskKind.TMU, k,
                       compute_flops(DecompositionKind.CHOLESKY, TaskKind.TMU,
                                     N, B, k) / 5e10, 1.0, 1.0)
            sp.observe(TaskKind.PD, k, 1e-5, 1.0, 1.0)
            sp.observe(TaskKind.TRANSFER, k, 1e-5, 1.0, 1.0)
    # GPU-side checksum work grows the GPU span faster than the CPU side
    assert guarded.predict_slack(4) > plain.predict_slack(4)
