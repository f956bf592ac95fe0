import math

import pytest
from hypothesis import given, settings, strategies as st

from slackwise.power import (DYNAMIC_POWER_EXPONENT, EnergyLedger,
                             ProcessorModel, default_cpu_model,
                             default_gpu_model, delta_e, ed2p,
                             max_energy_efficiency, solve_break_even_r,
                             task_energy, theoretical_min_energy)


def desk(p=100.0, d=0.6, alpha=0.9):
    return ProcessorModel(name="x", f_base_mhz=2000.0, f_min_mhz=1000.0,
                          f_max_mhz=3000.0, p_total_w=p, dynamic_fraction=d,
                          base_flops_per_second=1e9, alpha_default=alpha)


def test_power_at_base_is_total():
    m = desk()
    assert m.power(2000.0) == pytest.approx(100.0)
    assert m.power(2000.0, alpha=0.9) == pytest.approx(90.0)


def test_dynamic_power_exponent():
    m = desk()
    ratio = m.dynamic_power(3000.0) / m.dynamic_power(2000.0)
    assert ratio == pytest.approx(1.5 ** DYNAMIC_POWER_EXPONENT)


def test_task_time_scales_inversely_with_frequency():
    m = desk()
    assert m.task_time_at(1e9, 2000.0) == pytest.approx(1.0)
    assert m.task_time_at(1e9, 1000.0) == pytest.approx(2.0)


def test_task_energy_components():
    m = desk()
    e = task_energy(m, 2.0, 2000.0)
    assert e.dynamic_j == pytest.approx(120.0)
    assert e.static_j == pytest.approx(80.0)
    assert e.total_j == pytest.approx(200.0)


def test_delta_e_matches_two_energy_evaluations():
    """The closed form equals (energy at retarget) - (energy at base)."""
    m = desk()
    t_base = 1.0
    for f in (1000.0, 1700.0, 2300.0, 3000.0):
        t_new = t_base * m.f_base_mhz / f
        direct = task_energy(m, t_new, f).total_j \
            - task_energy(m, t_base, m.f_base_mhz).total_j
        assert delta_e(m, t_base, f) == pytest.approx(direct, rel=1e-12)


def test_delta_e_signs():
    m = desk()
    assert delta_e(m, 1.0, 3000.0) > 0.0     # boosting costs energy
    assert delta_e(m, 1.0, 2000.0) == pytest.approx(0.0)
    # mostly-dynamic processor saves when slowed
    hot = desk(d=0.9)
    assert delta_e(hot, 1.0, 1500.0) < 0.0


@settings(max_examples=60, deadline=None)
@given(d=st.floats(0.3, 0.95), p=st.floats(50.0, 400.0),
       slack=st.floats(0.05, 0.5))
def test_break_even_r_is_energy_neutral(d, p, slack):
    cpu = desk(p=p, d=d)
    gpu = default_gpu_model()
    t_cpu, t_gpu = 0.6, 1.0
    r = solve_break_even_r(cpu, gpu, t_cpu, t_gpu, slack)
    assert 0.0 <= r <= 1.0
    if 0.0 < r < 1.0:
        f_cpu = cpu.clamp(cpu.f_base_mhz * t_cpu / (t_cpu + r * slack))
        f_gpu = gpu.clamp(gpu.f_base_mhz * t_gpu / (t_gpu - (1 - r) * slack))
        net = delta_e(cpu, t_cpu, f_cpu) + delta_e(gpu, t_gpu, f_gpu)
        assert abs(net) < 1e-6 * p


def test_break_even_zero_slack():
    assert solve_break_even_r(desk(), default_gpu_model(), 1.0, 1.0, 0.0) == 0.0


def test_max_efficiency_on_grid():
    m = desk(d=0.9)
    best, f_best = max_energy_efficiency(m)
    grid = m.grid()
    assert f_best in grid
    for f in grid:
        eff = m.throughput(f) / m.power(f, m.alpha_default)
        assert best >= eff - 1e-12


def test_theoretical_min_is_a_lower_bound_per_device():
    cpu, gpu = default_cpu_model(), default_gpu_model()
    w_cpu, w_gpu = 1e12, 5e13
    floor = theoretical_min_energy(cpu, gpu, w_cpu, w_gpu)
    # running everything at base clocks with stock guardband can't beat it
    e_base = (w_cpu / cpu.base_flops_per_second * cpu.p_total_w
              + w_gpu / gpu.base_flops_per_second * gpu.p_total_w)
    assert floor <= e_base


def test_ed2p():
    assert ed2p(10.0, 2.0) == 40.0


def test_ledger_totals():
    led = EnergyLedger()
    led.add_task("cpu", task_energy(desk(), 1.0, 2000.0))
    led.add_idle("gpu", 5.0)
    assert led.total_j == pytest.approx(105.0)
    with pytest.raises(ValueError):
        led.add_idle("tpu", 1.0)


def test_break_even_finds_interior_root():
    cpu, gpu = desk(p=95.0, d=0.7), default_gpu_model()
    t_cpu, t_gpu, slack = 0.6, 1.0, 0.2
    r = solve_break_even_r(cpu, gpu, t_cpu, t_gpu, slack)
    assert 0.0 < r < 1.0
    f_cpu = cpu.clamp(cpu.f_base_mhz * t_cpu / (t_cpu + r * slack))
    f_gpu = gpu.clamp(gpu.f_base_mhz * t_gpu / (t_gpu - (1 - r) * slack))
    net = delta_e(cpu, t_cpu, f_cpu) + delta_e(gpu, t_gpu, f_gpu)
    assert abs(net) < 1e-6 * cpu.p_total_w
