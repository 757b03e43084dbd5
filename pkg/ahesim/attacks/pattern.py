""" Pattern inference: scan an encrypted library for tracks that contain a known musical component.

    The attacker crafts a query that carries the pattern in one block and nothing (or neutral noise) elsewhere,
    scores it against every stored vector, and flags the tracks whose opened score is high. Ground truth is only
    attached afterwards, by :func:`pattern_inference_attack`, to measure the attack.
"""
import abc
import dataclasses
import logging
from typing import Dict, FrozenSet, Optional, Tuple

import numpy as np

from ahesim.attacks.report import AttackKind, AttackReport, detection_metrics
from ahesim.attacks.scan import scan_scores, scan_setting
from ahesim.encoding import ScaleConfig
from ahesim.errors import ValidationError
from ahesim.similarity import Opener
from ahesim.store import BlockSchema, Database, EmbeddingVector

log = logging.getLogger(__name__)


def craft_pattern_query(pattern,
                        block_label: str,
                        schema: BlockSchema,
                        noise: float = 0.0,
                        seed: Optional[int] = None,
                        query_id: str = "crafted") -> EmbeddingVector:
    """ Place ``pattern`` in the block ``block_label`` and zeros elsewhere.

        :param pattern: the sub-vector to search for; its length must equal the block length.
        :param block_label: the block that receives the pattern.
        :param schema: the block layout of the library.
        :param noise: standard deviation of Gaussian noise filling the other blocks; 0 leaves them zero.
        :param seed: seed of the noise.
        :param query_id: the id of the crafted query.
        :raises ValidationError: on an unknown label or a length mismatch.
    """
    block = schema.block(block_label)
    pattern = np.asarray(pattern, dtype=np.float64)
    if pattern.ndim != 1 or len(pattern) != block.length:
        raise ValidationError(
            f"Pattern has {pattern.size} coordinates, block '{block_label}' "
            f"has {block.length}")
    if noise < 0:
        raise ValidationError(f"noise must be non-negative, got {noise}")

    values = np.zeros(schema.total_dim)
    if noise > 0:
        values = np.random.default_rng(seed).normal(scale=noise,
                                                    size=schema.total_dim)
    values[block.slice] = pattern
    return EmbeddingVector(id=query_id,
                           values=values,
                           schema_ref=schema.schema_id)


class ThresholdPolicy(abc.ABC):
    """ Turns the attacker's opened scores into a decision threshold; scores above it are flagged. """
    @abc.abstractmethod
    def fit(self, scores: Dict[str, float]) -> float:
        ...


@dataclasses.dataclass(frozen=True)
class FixedThreshold(ThresholdPolicy):
    value: float

    def fit(self, scores: Dict[str, float]) -> float:
        return self.value


def two_means_midpoint(values) -> float:
    """ Split sorted values into the two groups with least within-group squared error and return the midpoint of
        their means.
    """
    s = np.sort(np.asarray(values, dtype=np.float64))
    if len(s) == 0:
        raise ValidationError("Cannot fit a threshold to no scores")
    if len(s) == 1 or s[0] == s[-1]:
        return float(s[0])
    n = len(s)
    csum, csq = np.cumsum(s), np.cumsum(s * s)
    sizes = np.arange(1, n)
    left_sum, left_sq = csum[:-1], csq[:-1]
    right_sum, right_sq = csum[-1] - left_sum, csq[-1] - left_sq
    sse = (left_sq - left_sum**2 / sizes) + (right_sq - right_sum**2 /
                                             (n - sizes))
    i = int(np.argmin(sse))
    left_mean = left_sum[i] / sizes[i]
    right_mean = right_sum[i] / (n - sizes[i])
    return float((left_mean + right_mean) / 2)


@dataclasses.dataclass(frozen=True)
class MidpointThreshold(ThresholdPolicy):
    """ Fit two class means on a random calibration split of the scores; the threshold is their midpoint.

        The split only subsamples the fit. It is not held out: :func:`flag_targets` still decides every target,
        the calibration ones included.

        :param calibration_fraction: share of the scores used for fitting.
        :param seed: seed of the split.
    """
    calibration_fraction: float = 0.5
    seed: int = 0

    def fit(self, scores: Dict[str, float]) -> float:
        if not 0 < self.calibration_fraction <= 1:
            raise ValidationError("calibration_fraction must be in (0, 1]")
        ids = sorted(scores)
        size = max(2, int(round(self.calibration_fraction * len(ids))))
        rng = np.random.default_rng(self.seed)
        chosen = rng.permutation(len(ids))[:size]
        return two_means_midpoint([scores[ids[i]] for i in chosen])


def flag_targets(scores: Dict[str, float],
                 policy: ThresholdPolicy) -> Tuple[float, FrozenSet[str]]:
    """ The attacker's decision: the fitted threshold and the targets scoring above it. """
    threshold = policy.fit(scores)
    return threshold, frozenset(t for t, v in scores.items() if v > threshold)


def pattern_inference_attack(pattern,
                             block_label: str,
                             database: Database,
                             opener: Optional[Opener] = None,
                             policy: Optional[ThresholdPolicy] = None,
                             positives: Optional[FrozenSet[str]] = None,
                             cfg: Optional[ScaleConfig] = None,
                             noise: float = 0.0,
                             seed: Optional[int] = None,
                             profile: Optional[dict] = None,
                             workers: int = 1) -> AttackReport:
    """ Run the scan against ``database`` and measure it against ``positives``.

        :param pattern: the component to search for.
        :param block_label: the block the component lives in.
        :param database: the library; encrypted for the real attack, plaintext for the oracle run.
        :param opener: the key holder that opens scores; required for an encrypted library.
        :param policy: the threshold policy; defaults to :class:`MidpointThreshold`.
        :param positives: ids that truly carry the pattern; only used for metrics.
        :param cfg: the scale configuration; defaults to the database's.
        :param noise: standard deviation of neutral noise in the crafted query.
        :param seed: seeds the noise and the calibration split.
        :param profile: corpus profile recorded in the report.
        :param workers: the number of evaluation threads.
    """
    policy = policy or MidpointThreshold(seed=seed or 0)
    query = craft_pattern_query(pattern,
                                block_label,
                                database.schema,
                                noise=noise,
                                seed=seed)
    scores = scan_scores(query, database, opener, cfg, workers)
    threshold, flagged = flag_targets(scores, policy)
    log.info(f"Pattern scan flagged {len(flagged)} of {len(scores)} tracks "
             f"(threshold {threshold:.6f})")

    metrics = {}
    if positives is not None:
        metrics = detection_metrics(scores, flagged, frozenset(positives))
    return AttackReport(attack=AttackKind.pattern_inference,
                        setting=scan_setting(database),
                        scores=scores,
                        metrics=metrics,
                        seed=seed,
                        profile=profile,
                        block_label=block_label,
                        threshold=threshold,
                        flagged=flagged,
                        positives=None if positives is None else
                        frozenset(positives))
