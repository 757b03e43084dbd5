""" Creator attribution: decide which creator's catalogue a disputed track was most likely derived from.

    The attacker scores the disputed track against every encrypted vector, averages the opened scores per creator
    and attributes the track to the creator with the highest mean. The grouping of vectors by creator is visible to
    the attacker.
"""
import logging
from typing import Dict, Optional, Sequence

from ahesim.attacks.report import AttackKind, AttackReport, creator_summary
from ahesim.attacks.scan import scan_scores, scan_setting
from ahesim.encoding import ScaleConfig
from ahesim.errors import ValidationError
from ahesim.similarity import Opener
from ahesim.store import Database, EmbeddingVector

log = logging.getLogger(__name__)

#: attributions whose margin is below this many standard errors are inconclusive
INCONCLUSIVE_Z = 3.0


def creator_attribution_attack(disputed: EmbeddingVector,
                               database: Database,
                               opener: Optional[Opener] = None,
                               cfg: Optional[ScaleConfig] = None,
                               min_z: float = INCONCLUSIVE_Z,
                               seed: Optional[int] = None,
                               profile: Optional[dict] = None,
                               workers: int = 1) -> AttackReport:
    """ Attribute ``disputed`` to one of the creators in ``database``.

        :param disputed: the plaintext track under dispute.
        :param database: the library; vectors without a creator are ignored.
        :param opener: the key holder that opens scores; required for an encrypted library.
        :param cfg: the scale configuration; defaults to the database's.
        :param min_z: the smallest margin, in standard errors, that counts as conclusive.
        :param seed: recorded in the report.
        :param profile: corpus profile recorded in the report.
        :param workers: the number of evaluation threads.
        :raises ValidationError: if the database holds fewer than two creators.
    """
    grouped = database.by_creator()
    if len(grouped) < 2:
        raise ValidationError(
            f"Creator attribution needs at least 2 creators, found "
            f"{len(grouped)}")
    groups = {c: tuple(v.id for v in vs) for c, vs in grouped.items()}

    scores = scan_scores(disputed, database, opener, cfg, workers)
    summary = creator_summary(scores, groups)
    inconclusive = summary.z < min_z
    if inconclusive:
        log.warning(f"Attribution of '{disputed.id}' is inconclusive: margin "
                    f"{summary.margin:.6f} is {summary.z:.2f} standard errors")

    return AttackReport(attack=AttackKind.creator_attribution,
                        setting=scan_setting(database),
                        scores=scores,
                        metrics={
                            "means": summary.means,
                            "margin": summary.margin,
                            "z": summary.z,
                            "attribution": summary.attribution,
                        },
                        seed=seed,
                        profile=profile,
                        groups=groups,
                        attribution=summary.attribution,
                        margin=summary.margin,
                        inconclusive=inconclusive)


def attribution_accuracy(reports: Sequence[AttackReport],
                         truths: Sequence[str]) -> float:
    """ Share of reports whose attribution equals the true creator. """
    if len(reports) != len(truths) or len(reports) == 0:
        raise ValidationError(
            "Need one true creator per report and at least one report")
    hits = sum(1 for r, t in zip(reports, truths) if r.attribution == t)
    return hits / len(reports)


def run_attribution_trials(corpus, database: Database,
                           opener: Optional[Opener], trials: int,
                           seed: int, workers: int = 1) -> Dict[str, object]:
    """ Draw ``trials`` disputed tracks near each creator of a clustered corpus in turn and attribute each.

        :param corpus: the :class:`~ahesim.store.SyntheticCorpus` behind ``database``; supplies the ground truth.
        :return: the reports, the true creators and the accuracy.
    """
    creators = corpus.creators
    if len(creators) < 2:
        raise ValidationError(
            f"Creator attribution needs at least 2 creators, found "
            f"{len(creators)}")
    reports, truths = [], []
    for trial in range(trials):
        truth = creators[trial % len(creators)]
        disputed = corpus.sample_near(truth,
                                      seed=seed * 100003 + trial,
                                      vector_id=f"disputed_{trial:03d}")
        reports.append(
            creator_attribution_attack(disputed,
                                       database,
                                       opener,
                                       seed=seed,
                                       profile=corpus.profile.to_json(),
                                       workers=workers))
        truths.append(truth)
    return {
        "reports": reports,
        "truths": truths,
        "accuracy": attribution_accuracy(reports, truths)
    }
