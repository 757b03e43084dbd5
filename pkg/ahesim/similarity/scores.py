""" Released similarity scores and ranked results. """
import dataclasses
import logging
from typing import Iterable, List, Optional, Tuple

import aenum
import tabulate

from ahesim.errors import ValidationError

log = logging.getLogger(__name__)


class ScoreKind(aenum.Enum):
    """ Which inner product a score holds. """
    plain = "plain"  #: ``x . y``
    blocked = "blocked"  #: sum of per-block inner products
    weighted = "weighted"  #: weighted sum of per-block inner products

    @property
    def weighted_scale(self) -> bool:
        return self is ScoreKind.weighted


class Setting(aenum.Enum):
    """ Which side of the computation was encrypted. """
    encrypted_query = "encrypted_query"
    encrypted_db = "encrypted_db"
    plaintext_oracle = "plaintext_oracle"


def parse_kind(kind) -> ScoreKind:
    if isinstance(kind, ScoreKind):
        return kind
    try:
        return ScoreKind(kind)
    except ValueError:
        raise ValidationError(
            f"Unknown similarity kind '{kind}'; expected one of "
            f"{[k.value for k in ScoreKind]}")


@dataclasses.dataclass(frozen=True)
class SimilarityScore:
    """ A decrypted, decoded similarity score with its provenance. """
    query_id: str
    target_id: str
    value: float  #: the decoded score
    kind: ScoreKind
    setting: Setting
    raw: Optional[int] = None  #: the decrypted accumulator; ``None`` for plaintext scores
    per_block: Optional[Tuple[float, ...]] = None  #: decoded per-block scores, when requested

    def to_json(self) -> dict:
        obj = {
            "query_id": self.query_id,
            "target_id": self.target_id,
            "value": self.value,
            "kind": self.kind.value,
            "setting": self.setting.value,
            "raw": None if self.raw is None else str(self.raw),
        }
        if self.per_block is not None:
            obj["per_block"] = list(self.per_block)
        return obj


def ranking_key(score: SimilarityScore):
    # descending by value, ties by ascending target id
    return (-score.value, score.target_id)


@dataclasses.dataclass(frozen=True)
class RetrievalResult:
    """ Scores ranked descending by value; ties broken by ascending target id. """
    query_id: str
    entries: Tuple[SimilarityScore, ...]

    @classmethod
    def rank(cls, query_id: str, scores: Iterable[SimilarityScore],
             k_top: int) -> "RetrievalResult":
        ordered = sorted(scores, key=ranking_key)
        return cls(query_id=query_id, entries=tuple(ordered[:k_top]))

    @property
    def ids(self) -> List[str]:
        return [s.target_id for s in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def to_json(self) -> dict:
        return {
            "query_id": self.query_id,
            "results": [
                dict(rank=i + 1, **s.to_json())
                for i, s in enumerate(self.entries)
            ]
        }

    def to_table(self) -> str:
        headers = ["Rank", "Target", "Score", "Kind", "Setting"]
        rows = [[i + 1, s.target_id, s.value, s.kind.value, s.setting.value]
                for i, s in enumerate(self.entries)]
        return tabulate.tabulate(rows,
                                 headers=headers,
                                 floatfmt=".6f",
                                 tablefmt="github")
