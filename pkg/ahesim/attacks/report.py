""" Attack reports: the attacker's raw observations plus the metrics derived from them. """
import dataclasses
import json
import logging
import math
from typing import Dict, FrozenSet, Optional, Tuple

import aenum
import numpy as np
import tabulate
from sklearn.metrics import roc_auc_score

from ahesim.similarity import Setting

log = logging.getLogger(__name__)


class AttackKind(aenum.Enum):
    pattern_inference = "pattern_inference"
    creator_attribution = "creator_attribution"


def detection_metrics(scores: Dict[str, float], flagged: FrozenSet[str],
                      positives: FrozenSet[str]) -> dict:
    """ Confusion counts and ROC AUC of a detection decision against ground truth.

        :param scores: the opened score of every scanned target.
        :param flagged: the targets the attacker flagged.
        :param positives: the targets that truly carry the pattern.
        :return: ``tp``, ``fp``, ``tn``, ``fn`` and ``auc``; ``auc`` is ``None`` when only one class is present.
    """
    ids = sorted(scores)
    truth = [t in positives for t in ids]
    decided = [t in flagged for t in ids]
    tp = sum(1 for t, d in zip(truth, decided) if t and d)
    fp = sum(1 for t, d in zip(truth, decided) if not t and d)
    fn = sum(1 for t, d in zip(truth, decided) if t and not d)
    tn = len(ids) - tp - fp - fn
    auc = None
    if 0 < sum(truth) < len(ids):
        auc = float(roc_auc_score(truth, [scores[t] for t in ids]))
    return {"tp": tp, "fp": fp, "tn": tn, "fn": fn, "auc": auc}


@dataclasses.dataclass(frozen=True)
class CreatorSummary:
    """ Mean opened score per creator, and how clearly the best creator stands out. """
    means: Dict[str, float]
    standard_errors: Dict[str, float]
    attribution: str  #: the creator with the highest mean; ties go to the smallest name
    runner_up: str
    margin: float  #: top-1 mean minus top-2 mean
    z: float  #: the margin in units of its standard error


def creator_summary(scores: Dict[str, float],
                    groups: Dict[str, Tuple[str, ...]]) -> CreatorSummary:
    means, errors = {}, {}
    for creator in sorted(groups):
        values = np.array([scores[t] for t in groups[creator]],
                          dtype=np.float64)
        means[creator] = float(values.mean())
        if len(values) > 1:
            errors[creator] = float(values.std(ddof=1) / math.sqrt(len(values)))
        else:
            errors[creator] = 0.0
    ordered = sorted(means, key=lambda c: (-means[c], c))
    top, second = ordered[0], ordered[1]
    margin = means[top] - means[second]
    spread = math.sqrt(errors[top]**2 + errors[second]**2)
    z = margin / spread if spread > 0 else (math.inf if margin > 0 else 0.0)
    return CreatorSummary(means=means,
                          standard_errors=errors,
                          attribution=top,
                          runner_up=second,
                          margin=margin,
                          z=z)


@dataclasses.dataclass(frozen=True)
class AttackReport:
    """ What an attack observed, what it decided, and how well it did.

        ``scores`` holds everything the attacker saw; all metrics can be recomputed from it with
        :meth:`recompute_metrics`.
    """
    attack: AttackKind
    setting: Setting
    scores: Dict[str, float]  #: opened score per target id
    metrics: dict
    seed: Optional[int] = None
    profile: Optional[dict] = None
    # pattern inference
    block_label: Optional[str] = None
    threshold: Optional[float] = None
    flagged: FrozenSet[str] = frozenset()
    positives: Optional[FrozenSet[str]] = None  #: ground truth, attached by the harness after the scan
    # creator attribution
    groups: Optional[Dict[str, Tuple[str, ...]]] = None
    attribution: Optional[str] = None
    margin: Optional[float] = None
    inconclusive: bool = False

    def recompute_metrics(self) -> dict:
        if self.attack is AttackKind.pattern_inference:
            if self.positives is None:
                return {}
            return detection_metrics(self.scores, self.flagged,
                                     self.positives)
        summary = creator_summary(self.scores, self.groups)
        return {
            "means": summary.means,
            "margin": summary.margin,
            "z": summary.z,
            "attribution": summary.attribution,
        }

    def to_json(self) -> dict:
        obj = {
            "attack": self.attack.value,
            "setting": self.setting.value,
            "seed": self.seed,
            "profile": self.profile,
            "scores": {t: self.scores[t]
                       for t in sorted(self.scores)},
            "metrics": self.metrics,
        }
        if self.attack is AttackKind.pattern_inference:
            obj.update(block_label=self.block_label,
                       threshold=self.threshold,
                       flagged=sorted(self.flagged),
                       positives=None if self.positives is None else sorted(
                           self.positives))
        else:
            obj.update(groups={c: list(ids)
                               for c, ids in self.groups.items()},
                       attribution=self.attribution,
                       margin=self.margin,
                       inconclusive=self.inconclusive)
        return obj

    def dumps(self) -> str:
        # z can be infinite for noiseless corpora
        return json.dumps(self.to_json(), indent=2, sort_keys=True,
                          default=str)

    def summary(self) -> str:
        """ A human readable table of the headline metrics. """
        if self.attack is AttackKind.pattern_inference:
            m = self.metrics
            rows = [["scanned", len(self.scores)],
                    ["threshold", self.threshold],
                    ["flagged", len(self.flagged)]]
            rows += [[k, m.get(k)] for k in ("tp", "fp", "tn", "fn", "auc")
                     if k in m]
        else:
            rows = [[f"mean[{c}]", v]
                    for c, v in self.metrics.get("means", {}).items()]
            rows += [["attribution", self.attribution],
                     ["margin", self.margin],
                     ["z", self.metrics.get("z")],
                     ["inconclusive", self.inconclusive]]
        title = f"{self.attack.value} ({self.setting.value})"
        return title + "\n" + tabulate.tabulate(
            rows, headers=["Metric", "Value"], tablefmt="github")
