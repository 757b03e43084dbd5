""" Desk-scale timing of encrypted dot products across vector lengths and deployment settings.

    For every dimension ``d`` the harness generates a seeded corpus of ``N`` vectors and one query, checks the
    encrypted paths against the integer oracle, and then times, per setting:

    ``keygen``
        generating a key pair (encrypted settings only).
    ``encryption``
        encrypting what the setting encrypts: the ``d`` query cells, or all ``N * d`` database cells.
    ``scan``
        scoring the query against all ``N`` vectors.
    ``evaluation``
        the per-query cost, one inner product: ``scan / N``.
    ``decryption``
        opening the ``N`` scores.
"""
import dataclasses
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import aenum
import numpy as np

from ahesim import config
from ahesim.bench.timing import TimingStats, MemorySampler, time_funcs
from ahesim.crypto import (KeyPair, SeededRandomSource, keygen, decrypt,
                           check_key_bits)
from ahesim.encoding import ScaleConfig, require_budget
from ahesim.errors import CorrectnessError, ValidationError
from ahesim.similarity import encdb_inner, encquery_inner, quantized_inner
from ahesim.store import (collection_nbytes, default_schema,
                          encrypt_collection, encrypt_vector, synth_corpus)
from ahesim.util import parallel_map

log = logging.getLogger(__name__)

PHASES = ("keygen", "encryption", "evaluation", "decryption")


class BenchSetting(aenum.Enum):
    encrypted_query = "encrypted_query"
    encrypted_db = "encrypted_db"
    plaintext = "plaintext"


@dataclasses.dataclass(frozen=True)
class BenchConfig:
    """ What to measure and how often.

        :param dims: the vector lengths.
        :param n: the corpus size ``N``.
        :param reps: timed repetitions of the scan and decryption phases.
        :param warmup: discarded iterations before timing.
        :param setup_reps: timed repetitions of key generation and encryption.
        :param key_bits: the modulus size.
        :param seed: seeds corpora, keys and encryption randomness.
        :param gate_pairs: random pairs checked against the oracle per dimension before timing.
        :param workers: evaluation threads for the scan.
    """
    dims: Tuple[int, ...] = config.BENCH_DIMS
    n: int = 100
    reps: int = config.BENCH_REPS
    warmup: int = config.BENCH_WARMUP
    setup_reps: int = 5
    key_bits: int = config.KEY_BITS
    seed: int = 0
    gate_pairs: int = 10
    workers: int = 1
    scale: ScaleConfig = dataclasses.field(default_factory=ScaleConfig)

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.n < 1:
            raise ValidationError(f"Corpus size must be at least 1, got {self.n}")
        if self.reps < 5:
            raise ValidationError(
                f"At least 5 repetitions are needed, got {self.reps}")
        if self.warmup < 0 or self.setup_reps < 1:
            raise ValidationError("warmup must be >= 0 and setup_reps >= 1")
        if len(self.dims) == 0 or min(self.dims) < 1:
            raise ValidationError("dims must be a non-empty list of positive "
                                  "lengths")
        check_key_bits(self.key_bits)


_NOT_APPLICABLE = TimingStats(min_ms=0.0, median_ms=0.0, max_ms=0.0, reps=0)


@dataclasses.dataclass(frozen=True)
class BenchResult:
    """ Timings of one setting at one dimension. All times are in ms. """
    setting: BenchSetting
    dimension: int
    n: int
    phases: Dict[str, TimingStats]  #: keygen, encryption, evaluation and decryption
    scan: TimingStats  #: the query against all ``n`` vectors
    ct_bytes: int  #: serialized ciphertext bytes resident for this setting
    reps: int
    peak_rss_bytes: int
    seed: int

    @property
    def total_ms(self) -> float:
        return sum(self.phases[p].median_ms for p in PHASES)

    @property
    def evaluation(self) -> TimingStats:
        return self.phases["evaluation"]


def correctness_gate(keypair: KeyPair, d: int, scale: ScaleConfig, pairs: int,
                     seed: int):
    """ Check both encrypted settings against the integer oracle on ``pairs`` random pairs.

        :raises CorrectnessError: on the first disagreement.
    """
    pk, sk = keypair.public, keypair.private
    schema = default_schema(d)
    corpus = synth_corpus(seed, 2 * pairs, schema)
    rng = SeededRandomSource(seed)
    for i in range(pairs):
        x, y = corpus[2 * i], corpus[2 * i + 1]
        expected = quantized_inner(x, y, scale)
        enc_x = encrypt_vector(x, pk, scale, rng.spawn(2 * i))
        enc_y = encrypt_vector(y, pk, scale, rng.spawn(2 * i + 1))
        got_query = decrypt(sk, pk, encquery_inner(pk, enc_x, y, scale))
        got_db = decrypt(sk, pk, encdb_inner(pk, x, enc_y, scale))
        if not got_query == got_db == expected:
            raise CorrectnessError(
                f"Encrypted inner product disagrees with the oracle at d={d}, "
                f"pair {i}: expected {expected}, encrypted query gave "
                f"{got_query}, encrypted database gave {got_db}")
    log.debug(f"Correctness gate passed for d={d} ({pairs} pairs)")


def _time_keygen(bench: BenchConfig) -> Tuple[TimingStats, KeyPair]:
    keypairs = []
    rng = SeededRandomSource(bench.seed)

    def gen():
        keypairs.append(keygen(bench.key_bits, rng.spawn(len(keypairs))))

    times = time_funcs([gen], num_iters=bench.setup_reps, warmups=0)[0]
    return TimingStats.of(times), keypairs[0]


def _bench_dimension(bench: BenchConfig, d: int, keypair: KeyPair,
                     keygen_stats: TimingStats,
                     settings: Sequence[BenchSetting],
                     memory: MemorySampler) -> List[BenchResult]:
    pk, sk = keypair.public, keypair.private
    scale = bench.scale
    schema = default_schema(d)
    corpus = synth_corpus(bench.seed, bench.n, schema)
    query = synth_corpus(bench.seed + 1, 1, schema)[0]
    rng = SeededRandomSource(bench.seed)
    results = []

    for setting in settings:
        memory.sample()
        if setting is BenchSetting.plaintext:
            x = query.values
            targets = [v.values for v in corpus]
            scan = time_funcs(
                [lambda: parallel_map(lambda y: float(np.dot(x, y)), targets,
                                      bench.workers)],
                num_iters=bench.reps,
                warmups=bench.warmup)[0]
            scan_stats = TimingStats.of(scan)
            phases = {
                "keygen": _NOT_APPLICABLE,
                "encryption": _NOT_APPLICABLE,
                "evaluation": scan_stats.scaled(1 / bench.n),
                "decryption": _NOT_APPLICABLE,
            }
            ct_bytes = 0
        else:
            if setting is BenchSetting.encrypted_query:
                encrypted = []
                enc_times = time_funcs([
                    lambda: encrypted.append(
                        encrypt_vector(query, pk, scale, rng.spawn(len(
                            encrypted))))
                ],
                                       num_iters=bench.setup_reps,
                                       warmups=0)[0]
                enc_query = encrypted[0]

                def score_all():
                    return parallel_map(
                        lambda y: encquery_inner(pk, enc_query, y, scale),
                        corpus.vectors, bench.workers)

                ct_bytes = enc_query.nbytes(pk)
            else:
                collections = []

                def encrypt_db():
                    enc = encrypt_collection(corpus.vectors, pk, scale,
                                             rng.spawn(len(collections)),
                                             bench.workers)
                    # only the first copy stays resident
                    collections.append(enc if not collections else None)

                enc_times = time_funcs([encrypt_db],
                                       num_iters=bench.setup_reps,
                                       warmups=0)[0]
                enc_db = collections[0]

                def score_all():
                    return parallel_map(
                        lambda enc_y: encdb_inner(pk, query, enc_y, scale),
                        enc_db, bench.workers)

                ct_bytes = collection_nbytes(enc_db, pk)

            memory.sample()
            scan_stats = TimingStats.of(
                time_funcs([score_all],
                           num_iters=bench.reps,
                           warmups=bench.warmup)[0])
            scores = score_all()
            dec_times = time_funcs(
                [lambda: [decrypt(sk, pk, c) for c in scores]],
                num_iters=bench.reps,
                warmups=bench.warmup)[0]
            phases = {
                "keygen": keygen_stats,
                "encryption": TimingStats.of(enc_times),
                "evaluation": scan_stats.scaled(1 / bench.n),
                "decryption": TimingStats.of(dec_times),
            }

        memory.sample()
        result = BenchResult(setting=setting,
                             dimension=d,
                             n=bench.n,
                             phases=phases,
                             scan=scan_stats,
                             ct_bytes=ct_bytes,
                             reps=bench.reps,
                             peak_rss_bytes=memory.peak_bytes,
                             seed=bench.seed)
        log.info(f"{setting.value} d={d}: evaluation median "
                 f"{result.evaluation.median_ms:.4f} ms, scan median "
                 f"{scan_stats.median_ms:.2f} ms")
        results.append(result)
    return results


def run_bench(bench: Optional[BenchConfig] = None,
              settings: Optional[Sequence[BenchSetting]] = None,
              keypair: Optional[KeyPair] = None) -> List[BenchResult]:
    """ Run the benchmark.

        :param bench: what to measure; defaults to :class:`BenchConfig`.
        :param settings: the settings to measure; defaults to all three.
        :param keypair: reuse this key pair; key generation is then reported as not measured.
        :return: one result per dimension and setting, ordered by dimension, then by setting.
        :raises BudgetError: if the overflow budget fails for the largest dimension; checked before any timing.
        :raises CorrectnessError: if an encrypted path disagrees with the oracle.
    """
    bench = bench or BenchConfig()
    settings = list(settings or BenchSetting)

    if keypair is None:
        keygen_stats, keypair = _time_keygen(bench)
    else:
        keygen_stats = _NOT_APPLICABLE
    require_budget(bench.scale, max(bench.dims), keypair.public.n)

    memory = MemorySampler()
    results = []
    for d in sorted(bench.dims):
        correctness_gate(keypair, d, bench.scale, bench.gate_pairs,
                         bench.seed + d)
        results += _bench_dimension(bench, d, keypair, keygen_stats, settings,
                                    memory)
    return results


def select(results: Sequence[BenchResult],
           setting: BenchSetting) -> List[BenchResult]:
    return sorted((r for r in results if r.setting is setting),
                  key=lambda r: r.dimension)


def fit_linear(dims: Sequence[float],
               times: Sequence[float]) -> Tuple[float, float, float]:
    """ Least-squares line through ``(dims, times)``.

        :return: slope, intercept and coefficient of determination.
    """
    x = np.asarray(dims, dtype=np.float64)
    y = np.asarray(times, dtype=np.float64)
    if len(x) < 2:
        raise ValidationError("A line needs at least two points")
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sum((y - (slope * x + intercept))**2))
    total = float(np.sum((y - y.mean())**2))
    r2 = 1.0 - residual / total if total > 0 else 1.0
    return float(slope), float(intercept), r2


def linearity(results: Sequence[BenchResult],
              setting: BenchSetting) -> Tuple[float, float, float]:
    """ :func:`fit_linear` of median evaluation time against dimension. """
    rows = select(results, setting)
    return fit_linear([r.dimension for r in rows],
                      [r.evaluation.median_ms for r in rows])


def scaling_ratio(results: Sequence[BenchResult],
                  setting: BenchSetting) -> float:
    """ Median evaluation time at the largest dimension over that at the smallest. """
    rows = select(results, setting)
    return rows[-1].evaluation.median_ms / rows[0].evaluation.median_ms


def is_monotone(results: Sequence[BenchResult],
                setting: BenchSetting) -> bool:
    medians = [r.evaluation.median_ms for r in select(results, setting)]
    return all(a <= b for a, b in zip(medians, medians[1:]))


def end_to_end_cost(result: BenchResult) -> float:
    """ Setup encryption plus one scan of the corpus, in ms. """
    return result.phases["encryption"].median_ms + result.scan.median_ms
