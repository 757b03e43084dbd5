from .timing import Timer, TimingStats, MemorySampler, time_one, time_funcs
from .harness import (BenchConfig, BenchResult, BenchSetting, PHASES,
                      run_bench, correctness_gate, fit_linear, linearity,
                      scaling_ratio, is_monotone, end_to_end_cost, select)
from .report import (emit_report, read_report, summary_table, COLUMNS,
                     RATIO_COLUMNS, REFERENCE_SECONDS)
