"""slackwise: energy/reliability simulator for blocked matrix decompositions
on a modeled CPU-GPU system, with checksum-protected numeric kernels.
"""

from .abft import (CHECK_TOLERANCE_FACTOR, ChecksumScheme, CorrectionReport,
                   ErrorKind, InjectedFault, RegionChecksums, checksum_flops,
                   encode, inject_faults, maintain_gemm, sample_fault_plan,
                   transfer_checksum_elements, verify_correct)
from .config import (ConfigError, DriftProfile, LinkModel, SimConfig,
                     config_from_document, load_config)
from .coverage import (AdaptiveDecision, CoverageParams, ErrorRateTable,
                       adaptive_abft, default_cpu_rate_table,
                       default_gpu_rate_table, f_max, fc_full, fc_single)
from .linalg import (BlockLayout, DecompositionKind, Factorization,
                     InvalidDimensionError, NumericBreakdownError, TaskKind,
                     compute_flops, generate_test_matrix, residual,
                     transfer_elements)
from .power import (DYNAMIC_POWER_EXPONENT, EnergyLedger, ProcessorModel,
                    TaskEnergy, default_cpu_model, default_gpu_model, delta_e,
                    ed2p, max_energy_efficiency, solve_break_even_r,
                    task_energy, theoretical_min_energy)
from .predictor import SlackPredictor, TaskPredictor, complexity, cost_ratio
from .scheduler import (ScheduleDecision, decide_bsr, decide_original,
                        decide_r2h, decide_sr)
from .simulator import (CampaignRow, IterationRecord, RunSummary, SweepPoint,
                        compare_modes, fault_campaign, run_numeric_iteration,
                        simulate_run, sweep_reclamation_ratio)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
