""" Synthetic, seeded corpora standing in for a real embedding collection.

    Three profiles are supported:

    ``Uniform``
        i.i.d. coordinates, uniform in ``[-noise_scale, noise_scale]``.
    ``PlantedPattern``
        uniform noise, plus a fixed unit-norm sub-vector scaled by ``strength`` added to one block of a designated
        subset of vectors.
    ``ArtistClusters``
        vectors drawn around one unit-norm centroid per artist, with the artist recorded as the creator.

    Ground truth (planted ids, the pattern, centroids) is returned next to the vectors so that evaluation code can
    score attacks after the fact.
"""
import dataclasses
import logging
from typing import Dict, FrozenSet, Iterator, List, Optional, Union

import numpy as np

from ahesim import config
from ahesim.errors import ValidationError
from ahesim.store.schema import BlockSchema
from ahesim.store.vectors import EmbeddingVector

log = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class Uniform:
    name = "uniform"

    def to_json(self) -> dict:
        return {"profile": self.name}


@dataclasses.dataclass(frozen=True)
class PlantedPattern:
    block_label: str  #: block that receives the pattern
    pattern_seed: int  #: seed of the pattern direction
    strength: float  #: norm of the planted component
    planted_fraction: float = 0.2  #: share of vectors that carry the pattern
    name = "planted_pattern"

    def to_json(self) -> dict:
        return dict(profile=self.name, **dataclasses.asdict(self))


@dataclasses.dataclass(frozen=True)
class ArtistClusters:
    num_artists: int
    spread: float  #: per-coordinate standard deviation around the centroid
    name = "artist_clusters"

    def to_json(self) -> dict:
        return dict(profile=self.name, **dataclasses.asdict(self))


Profile = Union[Uniform, PlantedPattern, ArtistClusters]


@dataclasses.dataclass(frozen=True, eq=False)
class SyntheticCorpus:
    """ A generated corpus with its ground truth. Iterating yields the vectors. """
    vectors: List[EmbeddingVector]
    schema: BlockSchema
    profile: Profile
    seed: int
    planted_ids: FrozenSet[str] = frozenset()
    pattern: Optional[np.ndarray] = None
    centroids: Dict[str, np.ndarray] = dataclasses.field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self) -> Iterator[EmbeddingVector]:
        return iter(self.vectors)

    def __getitem__(self, idx) -> EmbeddingVector:
        return self.vectors[idx]

    @property
    def creators(self) -> List[str]:
        return sorted(self.centroids)

    def sample_near(self,
                    creator: str,
                    seed: int,
                    vector_id: str = "disputed") -> EmbeddingVector:
        """ Draw a new vector around ``creator``'s centroid with the corpus spread. """
        if creator not in self.centroids:
            raise ValidationError(f"Unknown creator '{creator}'")
        rng = np.random.default_rng(seed)
        values = self.centroids[creator] + self.profile.spread * rng.normal(
            size=self.schema.total_dim)
        return EmbeddingVector(id=vector_id,
                               values=values,
                               schema_ref=self.schema.schema_id)


def pattern_direction(pattern_seed: int, length: int) -> np.ndarray:
    """ The unit-norm pattern planted by :class:`PlantedPattern`. """
    rng = np.random.default_rng(pattern_seed)
    p = rng.normal(size=length)
    return p / np.linalg.norm(p)


def synth_corpus(seed: int,
                 count: int,
                 schema: BlockSchema,
                 profile: Optional[Profile] = None,
                 noise_scale: float = 0.5,
                 max_abs: float = config.MAX_ABS,
                 normalize: bool = False) -> SyntheticCorpus:
    """ Generate a deterministic corpus.

        :param seed: the corpus seed; equal seeds give identical corpora.
        :param count: the number of vectors.
        :param schema: the block layout.
        :param profile: one of :class:`Uniform`, :class:`PlantedPattern` or :class:`ArtistClusters`.
        :param noise_scale: half-width of the uniform noise of the first two profiles.
        :param max_abs: coordinates are clipped to ``[-max_abs, max_abs]``.
        :param normalize: L2-normalize every vector.
        :return: the corpus and its ground truth.
    """
    profile = profile or Uniform()
    if count < 0:
        raise ValidationError(f"count must be non-negative, got {count}")
    rng = np.random.default_rng(seed)
    d = schema.total_dim
    planted_ids = frozenset()
    pattern = None
    centroids = {}
    creators = [None] * count

    if isinstance(profile, ArtistClusters):
        if profile.num_artists < 1:
            raise ValidationError("num_artists must be at least 1")
        if count < profile.num_artists:
            raise ValidationError(
                f"count ({count}) must be at least num_artists "
                f"({profile.num_artists})")
        raw = rng.normal(size=(profile.num_artists, d))
        raw /= np.linalg.norm(raw, axis=1, keepdims=True)
        names = [f"artist_{i:02d}" for i in range(profile.num_artists)]
        centroids = {name: raw[i] for i, name in enumerate(names)}
        # round robin keeps the artists balanced
        creators = [names[i % profile.num_artists] for i in range(count)]
        values = np.stack([centroids[c] for c in creators]) if count else \
            np.zeros((0, d))
        values = values + profile.spread * rng.normal(size=(count, d))
    elif isinstance(profile, (Uniform, PlantedPattern)):
        values = rng.uniform(-noise_scale, noise_scale, size=(count, d))
        if isinstance(profile, PlantedPattern):
            block = schema.block(profile.block_label)
            pattern = pattern_direction(profile.pattern_seed, block.length)
            num_planted = int(round(profile.planted_fraction * count))
            chosen = sorted(rng.permutation(count)[:num_planted].tolist())
            for i in chosen:
                values[i, block.slice] += profile.strength * pattern
            planted_ids = frozenset(f"track_{i:05d}" for i in chosen)
    else:
        raise ValidationError(f"Unknown corpus profile {profile!r}")

    values = np.clip(values, -max_abs, max_abs)
    vectors = [
        EmbeddingVector(id=f"track_{i:05d}",
                        values=values[i],
                        schema_ref=schema.schema_id,
                        creator=creators[i]) for i in range(count)
    ]
    if normalize:
        vectors = [v.normalized() for v in vectors]

    log.debug(f"Generated {count} vectors with profile {profile.name} "
              f"(seed={seed})")
    return SyntheticCorpus(vectors=vectors,
                           schema=schema,
                           profile=profile,
                           seed=seed,
                           planted_ids=planted_ids,
                           pattern=pattern,
                           centroids=centroids)
