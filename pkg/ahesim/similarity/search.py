""" Top-k retrieval: evaluate every score, open them at the key holder, rank. """
import logging
from typing import Optional, Union

from ahesim.encoding import ScaleConfig
from ahesim.errors import ValidationError, MissingKeyError
from ahesim.similarity.evaluator import (Evaluator, AnyVector, plain_inner,
                                         plain_block_inners, plain_weighted)
from ahesim.similarity.opener import Opener
from ahesim.similarity.scores import (ScoreKind, Setting, SimilarityScore,
                                      RetrievalResult, parse_kind)
from ahesim.store import (Database, BlockSchema, EmbeddingVector,
                          EncryptedVector, WeightVector)
from ahesim.util import parallel_map

log = logging.getLogger(__name__)


def oracle_score(query: EmbeddingVector,
                 target: EmbeddingVector,
                 kind: ScoreKind,
                 schema: BlockSchema,
                 weights: Optional[WeightVector] = None,
                 explain: bool = False) -> SimilarityScore:
    """ The plaintext score of one pair, for any kind. """
    per_block = None
    if kind is ScoreKind.plain and not explain:
        return plain_inner(query, target)
    blocks = plain_block_inners(query, target, schema)
    if explain:
        per_block = tuple(blocks)
    if kind is ScoreKind.weighted:
        if weights is None:
            raise ValidationError("Weighted scores need weights")
        value = plain_weighted(query, target, schema, weights)
    else:
        value = float(sum(blocks))
    return SimilarityScore(query_id=query.id,
                           target_id=target.id,
                           value=value,
                           kind=kind,
                           setting=Setting.plaintext_oracle,
                           per_block=per_block)


def topk_search(query: AnyVector,
                database: Database,
                k_top: int,
                kind: Union[ScoreKind, str] = ScoreKind.plain,
                opener: Optional[Opener] = None,
                weights: Optional[WeightVector] = None,
                cfg: Optional[ScaleConfig] = None,
                workers: int = 1,
                explain: bool = False,
                common_scale: bool = False) -> RetrievalResult:
    """ Score ``query`` against every vector of ``database`` and return the best ``k_top``.

        The setting follows from the inputs: an encrypted query against a plaintext database is the encrypted-query
        setting, a plaintext query against an encrypted database the encrypted-database setting, and two plaintext
        sides give the plaintext oracle ranking.

        :param query: the query vector.
        :param database: the collection to search.
        :param k_top: the number of results, at least 1.
        :param kind: the similarity kind.
        :param opener: the key holder; required in both encrypted settings.
        :param weights: block weights for weighted scores.
        :param cfg: the scale configuration; defaults to the database's.
        :param workers: the number of evaluation threads.
        :param explain: also open and report per-block scores.
        :param common_scale: release every score at the weighted scale.
        :return: the ranked result, at most ``k_top`` entries.
        :raises ValidationError: on an empty database, ``k_top < 1``, or two encrypted sides.
        :raises MissingKeyError: if an encrypted setting has no opener.
    """
    kind = parse_kind(kind)
    cfg = cfg or database.scale
    schema = database.schema
    if k_top < 1:
        raise ValidationError(f"k_top must be at least 1, got {k_top}")
    if len(database) == 0:
        raise ValidationError("Cannot search an empty database")
    if kind is ScoreKind.weighted:
        if weights is None:
            raise ValidationError("Weighted scores need weights")
        weights.validate(schema, cfg)

    query_encrypted = isinstance(query, EncryptedVector)
    if query_encrypted and database.encrypted:
        raise ValidationError(
            "Query and database are both encrypted; one side must be plaintext")

    if not query_encrypted and not database.encrypted:
        query.validate(schema, cfg)
        scores = parallel_map(
            lambda target: oracle_score(query, target, kind, schema, weights,
                                        explain), database.vectors, workers)
        return RetrievalResult.rank(query.id, scores, k_top)

    if opener is None:
        raise MissingKeyError(
            "Searching in an encrypted setting needs the private key holder")
    if query_encrypted:
        query.validate(schema)
    else:
        query.validate(schema, cfg)

    evaluator = Evaluator(opener.public_key,
                          schema,
                          cfg,
                          common_scale=common_scale)
    log.debug(f"Scoring {len(database)} vectors ({kind.value}) with "
              f"{workers} worker(s)")
    encrypted = parallel_map(
        lambda target: evaluator.evaluate(
            query, target, kind, weights, per_block=explain),
        database.vectors, workers)
    # opening happens after every score is evaluated; the evaluator never sees a private key
    scores = [opener.open(e) for e in encrypted]
    return RetrievalResult.rank(query.id, scores, k_top)
