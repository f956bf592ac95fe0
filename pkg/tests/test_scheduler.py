import pytest

from slackwise.coverage import CoverageParams, default_gpu_rate_table
from slackwise.power import default_cpu_model, default_gpu_model
from slackwise.scheduler import (decide_bsr, decide_original, decide_r2h,
                                 decide_sr)

CPU = default_cpu_model()
GPU = default_gpu_model()


def test_original_and_r2h_run_at_base():
    for decide in (decide_original, decide_r2h):
        d = decide(CPU, GPU)
        assert d.f_cpu_mhz == CPU.f_base_mhz
        assert d.f_gpu_mhz == GPU.f_base_mhz
        assert not d.protected and not d.skipped
    assert not decide_original(CPU, GPU).idle_at_min
    assert decide_r2h(CPU, GPU).idle_at_min


def test_sr_slows_noncritical_cpu():
    # GPU-bound iteration: CPU has slack to absorb
    d = decide_sr(CPU, GPU, t_cpu=0.4, t_gpu=1.0, t_tr=0.1)
    assert d.f_cpu_mhz < CPU.f_base_mhz
    assert d.f_cpu_mhz >= CPU.f_min_mhz
    assert d.f_gpu_mhz == GPU.f_base_mhz
    # slowed CPU still finishes within the GPU span (grid round-up)
    assert 0.4 * CPU.f_base_mhz / d.f_cpu_mhz + 0.1 <= 1.0 + 1e-9


def test_sr_slows_noncritical_gpu():
    d = decide_sr(CPU, GPU, t_cpu=1.0, t_gpu=0.5, t_tr=0.1)
    assert d.f_gpu_mhz < GPU.f_base_mhz
    assert d.f_cpu_mhz == CPU.f_base_mhz
    assert 0.5 * GPU.f_base_mhz / d.f_gpu_mhz <= 1.1 + 1e-9


def test_sr_never_overclocks():
    for t_cpu, t_gpu in [(0.1, 1.0), (1.0, 0.1), (0.5, 0.5)]:
        d = decide_sr(CPU, GPU, t_cpu, t_gpu, 0.05)
        assert d.f_cpu_mhz <= CPU.f_base_mhz
        assert d.f_gpu_mhz <= GPU.f_base_mhz


def test_bsr_r1_boosts_critical_side():
    d = decide_bsr(CPU, GPU, t_cpu=0.2, t_gpu=1.0, t_tr=0.05, r=1.0,
                   coverage=None, rate_table=None)
    assert d.f_gpu_mhz > GPU.f_base_mhz          # critical GPU overclocked
    d2 = decide_bsr(CPU, GPU, t_cpu=1.0, t_gpu=0.3, t_tr=0.05, r=1.0,
                    coverage=None, rate_table=None)
    assert d2.f_cpu_mhz > CPU.f_base_mhz         # critical CPU overclocked
    assert d2.f_gpu_mhz <= GPU.f_base_mhz


def test_bsr_r0_matches_sr_frequencies():
    for t_cpu, t_gpu, t_tr in [(0.3, 1.0, 0.1), (1.0, 0.4, 0.1)]:
        sr = decide_sr(CPU, GPU, t_cpu, t_gpu, t_tr)
        bsr = decide_bsr(CPU, GPU, t_cpu, t_gpu, t_tr, r=0.0,
                         coverage=None, rate_table=None, use_guardband=False)
        assert bsr.f_cpu_mhz == sr.f_cpu_mhz
        assert bsr.f_gpu_mhz == sr.f_gpu_mhz


def test_bsr_projected_time_never_exceeds_unadjusted():
    for r in (0.0, 0.25, 0.5, 0.75, 1.0):
        for t_cpu, t_gpu, t_tr in [(0.2, 1.0, 0.05), (1.0, 0.3, 0.05),
                                   (0.6, 0.7, 0.05)]:
            d = decide_bsr(CPU, GPU, t_cpu, t_gpu, t_tr, r,
                           coverage=None, rate_table=None)
            t_limit = max(t_gpu, t_cpu + t_tr)
            if not d.skipped:
                proj = max(t_gpu * GPU.f_base_mhz / d.f_gpu_mhz,
                           t_cpu * CPU.f_base_mhz / d.f_cpu_mhz + t_tr)
                assert proj <= t_limit + 1e-9


def test_bsr_skip_retains_previous_frequencies():
    prev = decide_bsr(CPU, GPU, 0.2, 1.0, 0.05, 1.0,
                      coverage=None, rate_table=None)
    d = decide_bsr(CPU, GPU, 0.2, 1.0, 0.05, 1.0,
                   coverage=None, rate_table=None, previous=prev)
    if d.skipped:
        assert d.f_cpu_mhz == prev.f_cpu_mhz
        assert d.f_gpu_mhz == prev.f_gpu_mhz


def test_bsr_adaptive_protection_engages_on_overclock():
    coverage = CoverageParams(s_slots=64)
    table = default_gpu_rate_table()
    # big positive slack at a long interval: desired 2200 is beyond the
    # certifiable band, so the governor downclocks or protects
    d = decide_bsr(CPU, GPU, t_cpu=1.0, t_gpu=100.0, t_tr=0.5, r=1.0,
                   coverage=coverage, rate_table=table)
    assert d.f_gpu_mhz <= GPU.f_max_mhz
    if d.f_gpu_mhz > 1900.0:
        assert d.protected
    else:
        assert not d.protected


def test_bsr_guardband_alpha_applied():
    d = decide_bsr(CPU, GPU, 0.3, 1.0, 0.05, 0.5,
                   coverage=None, rate_table=None)
    assert d.alpha_cpu == CPU.alpha_default
    assert d.alpha_gpu == GPU.alpha_default


def test_dvfs_latency_charged_only_on_change():
    d1 = decide_sr(CPU, GPU, 0.3, 1.0, 0.05, previous=None,
                   dvfs_latency_s=1e-3)
    assert d1.cpu_latency_s == 1e-3  # first change from unknown state
    d2 = decide_sr(CPU, GPU, 0.3, 1.0, 0.05, previous=d1,
                   dvfs_latency_s=1e-3)
    assert d2.cpu_latency_s == 0.0   # same target frequency, no switch
    assert d2.gpu_latency_s == 0.0


def test_bsr_rejects_bad_ratio():
    with pytest.raises(ValueError):
        decide_bsr(CPU, GPU, 0.3, 1.0, 0.05, 1.5,
                   coverage=None, rate_table=None)
