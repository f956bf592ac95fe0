"""Energy comparison of the four frequency-scheduling modes.

  original  both devices at base clocks, idle waits burn base power
  r2h       idle device drops to its minimum clock (race-to-halt idling)
  sr        the non-critical device is slowed so it finishes just in time
  bsr       slack is split: a fraction r slows the non-critical device,
            the rest overclocks the critical one under checksum cover

The script compares the modes on one workload, sweeps the reclamation
ratio r, and computes the analytic break-even r at which the overclock
cost cancels the slow-down saving.
"""

from slackwise import (DecompositionKind, SimConfig, compare_modes,
                       default_cpu_model, default_gpu_model, simulate_run,
                       solve_break_even_r, sweep_reclamation_ratio)


def main():
    cfg = SimConfig(kind=DecompositionKind.LU, n=512, b=64, seed=4,
                    mode="original", noise_sigma=0.0)
    report = compare_modes(cfg, ["original", "r2h", "sr", "bsr"])
    print(f"{'mode':10s} {'time s':>9s} {'energy J':>9s} {'saving':>7s} "
          f"{'ED2P cut':>8s}")
    for mode, row in report.items():
        s = row["summary"]
        print(f"{mode:10s} {s.total_time_s:9.4f} {s.total_energy_j:9.3f} "
              f"{row['energy_saving_pct']:6.1f}% "
              f"{row['ed2p_reduction_pct']:7.1f}%")

    print("\nreclamation-ratio sweep (bsr):")
    for pt in sweep_reclamation_ratio(cfg, [0.0, 0.25, 0.5, 0.75, 1.0]):
        tag = "  <- pareto" if pt.pareto else ""
        print(f"  r={pt.r:4.2f}  time {pt.time_s:.4f} s  "
              f"energy {pt.energy_j:.3f} J{tag}")

    r_star = solve_break_even_r(default_cpu_model(), default_gpu_model(),
                                t_cpu=0.8, t_gpu=1.0, slack=0.2)
    print(f"\nanalytic break-even ratio for a 0.2 s slack iteration: "
          f"r* = {r_star:.3f}")
    print("below r* the overclock costs more energy than the slow-down "
          "saves;\nabove it the trade is net-positive.")


if __name__ == "__main__":
    main()
