""" Package-wide defaults. Each can be overridden with an environment variable of the same name prefixed by
    ``AHESIM_``.
"""
import logging
import os

log = logging.getLogger(__name__)


def _env_int(name: str, default: int) -> int:
    key = "AHESIM_" + name
    if key not in os.environ:
        return default
    try:
        return int(os.environ[key])
    except ValueError:
        log.warning(f"Ignoring non-integer value for {key}: "
                    f"'{os.environ[key]}'")
        return default


def _env_float(name: str, default: float) -> float:
    key = "AHESIM_" + name
    if key not in os.environ:
        return default
    try:
        return float(os.environ[key])
    except ValueError:
        log.warning(f"Ignoring non-numeric value for {key}: "
                    f"'{os.environ[key]}'")
        return default


#: modulus sizes accepted by key generation
ALLOWED_KEY_BITS = (512, 1024, 2048, 3072)

#: modulus sizes that require an explicit opt-in
INSECURE_KEY_BITS = (512, )

KEY_BITS = _env_int("KEY_BITS", 2048)
FRAC_BITS = _env_int("FRAC_BITS", 16)
WEIGHT_FRAC_BITS = _env_int("WEIGHT_FRAC_BITS", 8)
MAX_ABS = _env_float("MAX_ABS", 4.0)

BENCH_REPS = _env_int("BENCH_REPS", 11)
BENCH_WARMUP = _env_int("BENCH_WARMUP", 2)

#: Miller-Rabin rounds; 40 rounds bound the error by 4^-40 = 2^-80
PRIMALITY_ROUNDS = 40

#: embedding lengths evaluated by the benchmark
BENCH_DIMS = (128, 256, 512, 1024)

#: block labels of the default four-block schema
DEFAULT_BLOCK_LABELS = ("rhythm", "melody", "harmony", "timbre")
