""" Homomorphic inner products, evaluated without any private key.

    Exactly one side of every encrypted computation is a ciphertext vector:

    * encrypted query: the client's query is encrypted, the database vector ``y`` is plaintext, and each encrypted
      query cell is multiplied by the encoded ``y_i``;
    * encrypted database: the stored vector is encrypted, the query ``x`` is plaintext, and each encrypted database
      cell is multiplied by the encoded ``x_i``.

    Either way the result is an encryption of ``sum_i encode(x_i) * encode(y_i)``, the dot product at scale ``2^(2f)``.
    The plaintext oracles at the bottom of this module compute the same integers (and the float dot products they
    approximate) in the clear.
"""
import dataclasses
import logging
from typing import List, Optional, Sequence, Tuple, Union

import gmpy2
import numpy as np

from ahesim.crypto import (PublicKey, Ciphertext, add_ct, sum_ct, scalar_mul)
from ahesim.encoding import (ScaleConfig, encode_vector, encode_weight,
                             require_budget)
from ahesim.errors import ValidationError, KeyMismatchError
from ahesim.similarity.scores import (ScoreKind, Setting, SimilarityScore,
                                      parse_kind)
from ahesim.store import (BlockSchema, EmbeddingVector, EncryptedVector,
                          WeightVector, check_same_layout)

log = logging.getLogger(__name__)

AnyVector = Union[EmbeddingVector, EncryptedVector]


@dataclasses.dataclass(frozen=True)
class BlockedCiphertexts:
    """ Per-block encrypted inner products and their homomorphic sum. """
    per_block: Tuple[Ciphertext, ...]
    total: Ciphertext


def _identity(public_key: PublicKey) -> Ciphertext:
    # the trivial encryption of zero
    return Ciphertext(value=gmpy2.mpz(1), key_id=public_key.key_id)


def _encrypted_dot(public_key: PublicKey, cells: Sequence[Ciphertext],
                   scalars: Sequence[int]) -> Ciphertext:
    acc = _identity(public_key)
    for cell, s in zip(cells, scalars):
        if s == 0:
            # cell^0 is the identity
            continue
        acc = add_ct(public_key, acc, scalar_mul(public_key, cell, s))
    return acc


def _check_encrypted(public_key: PublicKey, vector: EncryptedVector):
    if vector.key_id != public_key.key_id:
        raise KeyMismatchError(
            f"Vector '{vector.id}' was encrypted under {vector.key_id}, "
            f"evaluating under {public_key.key_id}")


def orient(query: AnyVector,
           target: AnyVector) -> Tuple[EncryptedVector, EmbeddingVector, Setting]:
    """ Identify which side is encrypted.

        :return: the encrypted vector, the plaintext vector and the setting.
        :raises ValidationError: unless exactly one side is encrypted.
    """
    if isinstance(query, EncryptedVector) and isinstance(
            target, EmbeddingVector):
        return query, target, Setting.encrypted_query
    if isinstance(query, EmbeddingVector) and isinstance(
            target, EncryptedVector):
        return target, query, Setting.encrypted_db
    raise ValidationError(
        "Exactly one of query and target must be encrypted; got "
        f"{type(query).__name__} and {type(target).__name__}")


def _prepare(public_key: PublicKey, encrypted: EncryptedVector,
             plain: EmbeddingVector, cfg: ScaleConfig) -> List[int]:
    check_same_layout(encrypted, plain)
    _check_encrypted(public_key, encrypted)
    require_budget(cfg, plain.dim, public_key.n)
    return encode_vector(plain.values, cfg)


def encquery_inner(public_key: PublicKey, enc_x: EncryptedVector,
                   y: EmbeddingVector, cfg: ScaleConfig) -> Ciphertext:
    """ Encrypted-query inner product: ``sum_i scalar_mul(Enc(x_i), encode(y_i))``.

        :raises KeyMismatchError: if ``enc_x`` was not encrypted under ``public_key``.
        :raises BudgetError: if the dimension exceeds the overflow budget; checked before any work.
    """
    scalars = _prepare(public_key, enc_x, y, cfg)
    return _encrypted_dot(public_key, enc_x.cells, scalars)


def encdb_inner(public_key: PublicKey, x: EmbeddingVector,
                enc_y: EncryptedVector, cfg: ScaleConfig) -> Ciphertext:
    """ Encrypted-database inner product: ``sum_i scalar_mul(Enc(y_i), encode(x_i))``. """
    scalars = _prepare(public_key, enc_y, x, cfg)
    return _encrypted_dot(public_key, enc_y.cells, scalars)


def _check_schema(schema: BlockSchema, *vectors: AnyVector):
    for v in vectors:
        if v.schema_ref != schema.schema_id:
            raise ValidationError(
                f"Vector '{v.id}' uses schema {v.schema_ref}, expected "
                f"{schema.schema_id}")


def blocked_similarity(public_key: PublicKey, query: AnyVector,
                       target: AnyVector, schema: BlockSchema,
                       cfg: ScaleConfig) -> BlockedCiphertexts:
    """ Blocked inner product: one encrypted inner product per block, then their homomorphic sum.

        Works in both settings; exactly one of ``query`` and ``target`` must be encrypted. The total decrypts to
        exactly the same integer as the unblocked inner product.

        :raises ValidationError: if either vector does not follow ``schema``.
    """
    _check_schema(schema, query, target)
    encrypted, plain, _ = orient(query, target)
    scalars = _prepare(public_key, encrypted, plain, cfg)
    per_block = tuple(
        _encrypted_dot(public_key, encrypted.cells[b.slice], scalars[b.slice])
        for b in schema.blocks)
    return BlockedCiphertexts(per_block=per_block,
                              total=sum_ct(public_key, per_block))


def weighted_similarity(public_key: PublicKey,
                        query: AnyVector,
                        target: AnyVector,
                        schema: BlockSchema,
                        weights: WeightVector,
                        cfg: ScaleConfig,
                        blocked: Optional[BlockedCiphertexts] = None
                        ) -> Ciphertext:
    """ Weighted hierarchical inner product: ``sum_i scalar_mul(block_i, encode_weight(w_i))``.

        The result carries the scale ``2^(2f + f_w)``.

        :param blocked: per-block ciphertexts already computed for this pair, if any.
        :raises ValidationError: if the weights do not match the schema.
    """
    weights.validate(schema, cfg)
    if blocked is None:
        blocked = blocked_similarity(public_key, query, target, schema, cfg)
    encoded = [encode_weight(w, cfg) for w in weights.weights]
    return _encrypted_dot(public_key, blocked.per_block, encoded)


def promote_to_weighted(public_key: PublicKey, c: Ciphertext,
                        cfg: ScaleConfig) -> Ciphertext:
    """ Bring an unweighted score to the weighted scale by multiplying with ``encode_weight(1.0)``. """
    return scalar_mul(public_key, c, encode_weight(1.0, cfg))


@dataclasses.dataclass(frozen=True)
class EncryptedScore:
    """ An evaluated, still encrypted score, ready to be sent to the key holder. """
    query_id: str
    target_id: str
    kind: ScoreKind
    setting: Setting
    ciphertext: Ciphertext
    weighted_scale: bool  #: whether the ciphertext carries the weight scale
    per_block: Optional[Tuple[Ciphertext, ...]] = None


class Evaluator:
    """ The keyless side of the protocol: computes encrypted scores, never decrypts.

        :param public_key: the key the encrypted side was produced under.
        :param schema: the block layout shared by queries and targets.
        :param cfg: the scale configuration.
        :param common_scale: release every score at the weighted scale, so that scores of different kinds compare.
    """
    def __init__(self,
                 public_key: PublicKey,
                 schema: BlockSchema,
                 cfg: ScaleConfig,
                 common_scale: bool = False):
        self.public_key = public_key
        self.schema = schema
        self.cfg = cfg
        self.common_scale = common_scale
        require_budget(cfg, schema.total_dim, public_key.n)

    def evaluate(self,
                 query: AnyVector,
                 target: AnyVector,
                 kind: Union[ScoreKind, str] = ScoreKind.plain,
                 weights: Optional[WeightVector] = None,
                 per_block: bool = False) -> EncryptedScore:
        """ Evaluate one encrypted score.

            :param query: the query; encrypted in the encrypted-query setting.
            :param target: the database vector; encrypted in the encrypted-database setting.
            :param kind: the similarity kind.
            :param weights: required for weighted scores.
            :param per_block: also return the per-block ciphertexts (forces the blocked computation).
        """
        kind = parse_kind(kind)
        pk = self.public_key
        _, _, setting = orient(query, target)
        blocks = None

        if kind is ScoreKind.plain and not per_block:
            if setting is Setting.encrypted_query:
                total = encquery_inner(pk, query, target, self.cfg)
            else:
                total = encdb_inner(pk, query, target, self.cfg)
        else:
            blocked = blocked_similarity(pk, query, target, self.schema,
                                         self.cfg)
            blocks = blocked.per_block if per_block else None
            if kind is ScoreKind.weighted:
                if weights is None:
                    raise ValidationError("Weighted scores need weights")
                total = weighted_similarity(pk,
                                            query,
                                            target,
                                            self.schema,
                                            weights,
                                            self.cfg,
                                            blocked=blocked)
            else:
                total = blocked.total

        weighted_scale = kind is ScoreKind.weighted
        if self.common_scale and not weighted_scale:
            total = promote_to_weighted(pk, total, self.cfg)
            weighted_scale = True

        return EncryptedScore(query_id=query.id,
                              target_id=target.id,
                              kind=kind,
                              setting=setting,
                              ciphertext=total,
                              weighted_scale=weighted_scale,
                              per_block=blocks)


# plaintext oracles


def plain_inner(x: EmbeddingVector, y: EmbeddingVector) -> SimilarityScore:
    """ The float dot product ``x . y``; the reference for every encrypted path.

        :raises ValidationError: if the vectors use different schemas.
    """
    check_same_layout(x, y)
    return SimilarityScore(query_id=x.id,
                           target_id=y.id,
                           value=float(np.dot(x.values, y.values)),
                           kind=ScoreKind.plain,
                           setting=Setting.plaintext_oracle)


def plain_block_inners(x: EmbeddingVector, y: EmbeddingVector,
                       schema: BlockSchema) -> List[float]:
    _check_schema(schema, x, y)
    return [
        float(np.dot(x.values[b.slice], y.values[b.slice]))
        for b in schema.blocks
    ]


def plain_weighted(x: EmbeddingVector, y: EmbeddingVector,
                   schema: BlockSchema, weights: WeightVector) -> float:
    weights.validate(schema)
    return float(
        np.dot(weights.weights, plain_block_inners(x, y, schema)))


def quantized_inner(x: EmbeddingVector, y: EmbeddingVector,
                    cfg: ScaleConfig) -> int:
    """ ``sum_i encode(x_i) * encode(y_i)`` in exact integer arithmetic. """
    check_same_layout(x, y)
    return sum(a * b for a, b in zip(encode_vector(x.values, cfg),
                                     encode_vector(y.values, cfg)))


def quantized_block_inners(x: EmbeddingVector, y: EmbeddingVector,
                           schema: BlockSchema, cfg: ScaleConfig) -> List[int]:
    _check_schema(schema, x, y)
    ex, ey = encode_vector(x.values, cfg), encode_vector(y.values, cfg)
    return [
        sum(a * b for a, b in zip(ex[blk.slice], ey[blk.slice]))
        for blk in schema.blocks
    ]


def quantized_weighted(x: EmbeddingVector, y: EmbeddingVector,
                       schema: BlockSchema, weights: WeightVector,
                       cfg: ScaleConfig) -> int:
    weights.validate(schema, cfg)
    return sum(
        encode_weight(w, cfg) * s for w, s in zip(
            weights.weights, quantized_block_inners(x, y, schema, cfg)))
