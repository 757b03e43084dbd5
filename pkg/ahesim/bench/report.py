""" CSV and table output of benchmark results.

    ``emit_report(results, "out.csv")`` writes three files:

    ``out.csv``
        one row per (setting, dimension) with the per-query evaluation time as the headline.
    ``out_ratios.csv``
        the same rows plus ``ratio_vs_plain128``, the median over the plaintext median at ``d = 128``. The
        column is blank when no plaintext run at ``d = 128`` was measured.
    ``out_phases.csv``
        one row per (setting, dimension, phase), including the whole-corpus scan.

    Every number is written with a fixed format, so the same results always produce the same bytes.
"""
import csv
import logging
import os
from typing import Dict, List, Optional, Sequence, Tuple

import tabulate

from ahesim.bench.harness import PHASES, BenchResult, BenchSetting
from ahesim.bench.timing import TimingStats

log = logging.getLogger(__name__)

COLUMNS = ("setting", "dimension", "N", "phase", "median_ms", "min_ms",
           "max_ms", "ct_bytes", "reps", "seed")
RATIO_COLUMNS = COLUMNS + ("ratio_vs_plain128", )
BASELINE_DIMENSION = 128

#: published wall-clock times, in seconds, for scanning 1,000 vectors at each dimension; printed for context only
REFERENCE_SECONDS = {
    "fhe": {
        128: 638,
        256: 1279,
        512: 2571,
        1024: 5115
    },
    "encrypted_db": {
        128: 57,
        256: 116,
        512: 227,
        1024: 452
    },
    "encrypted_query": {
        128: 10,
        256: 21,
        512: 42,
        1024: 84
    },
}

_SETTING_ORDER = [s for s in BenchSetting]


def _ms(value: float) -> str:
    return f"{value:.6f}"


def _row(result: BenchResult, phase: str, stats: TimingStats) -> List[str]:
    return [
        result.setting.value,
        str(result.dimension),
        str(result.n), phase,
        _ms(stats.median_ms),
        _ms(stats.min_ms),
        _ms(stats.max_ms),
        str(result.ct_bytes),
        str(stats.reps),
        str(result.seed)
    ]


def _ordered(results: Sequence[BenchResult]) -> List[BenchResult]:
    return sorted(results,
                  key=lambda r:
                  (_SETTING_ORDER.index(r.setting), r.dimension))


def _baseline(results: Sequence[BenchResult]) -> Optional[float]:
    for r in results:
        if (r.setting is BenchSetting.plaintext
                and r.dimension == BASELINE_DIMENSION):
            return r.evaluation.median_ms
    return None


def _paths(path: str) -> Tuple[str, str, str]:
    stem, ext = os.path.splitext(path)
    ext = ext or ".csv"
    return stem + ext, stem + "_ratios" + ext, stem + "_phases" + ext


def _write(path: str, header: Sequence[str], rows: List[List[str]]):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def emit_report(results: Sequence[BenchResult], path: str) -> Tuple[str, str, str]:
    """ Write the headline, ratio and phase CSV files (see the module docstring).

        :return: the three paths written.
    """
    main_path, ratio_path, phase_path = _paths(path)
    ordered = _ordered(results)
    baseline = _baseline(ordered)

    main_rows, ratio_rows, phase_rows = [], [], []
    for r in ordered:
        row = _row(r, "evaluation", r.evaluation)
        main_rows.append(row)
        if baseline:
            ratio = f"{r.evaluation.median_ms / baseline:.6f}"
        else:
            ratio = ""
        ratio_rows.append(row + [ratio])
        for phase in PHASES:
            phase_rows.append(_row(r, phase, r.phases[phase]))
        phase_rows.append(_row(r, "scan", r.scan))

    _write(main_path, COLUMNS, main_rows)
    _write(ratio_path, RATIO_COLUMNS, ratio_rows)
    _write(phase_path, COLUMNS, phase_rows)
    log.info(f"Wrote {len(main_rows)} benchmark rows to '{main_path}'")
    return main_path, ratio_path, phase_path


def read_report(path: str) -> List[Dict[str, str]]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def summary_table(results: Sequence[BenchResult]) -> str:
    """ Median per-query and whole-scan times, next to the published per-scan times for the same setting. """
    headers = [
        "Setting", "d", "N", "Evaluation [ms]", "Scan [ms]", "Total [ms]",
        "Ciphertext bytes", "Published scan [s]"
    ]
    rows = []
    for r in _ordered(results):
        published = REFERENCE_SECONDS.get(r.setting.value, {}).get(r.dimension)
        rows.append([
            r.setting.value, r.dimension, r.n, r.evaluation.median_ms,
            r.scan.median_ms, r.total_ms, r.ct_bytes,
            "" if published is None else published
        ])
    return tabulate.tabulate(rows,
                             headers=headers,
                             floatfmt='.4f',
                             tablefmt='github')
