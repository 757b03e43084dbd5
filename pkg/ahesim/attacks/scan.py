""" The attacker's only view of the library: opened scores of a plaintext probe against every stored vector.

    Against an encrypted database the attacker holds :class:`~ahesim.store.EncryptedVector` handles and a key
    holder that opens scores; it never receives plaintext database vectors. Against a plaintext database the same
    scan computes the exact integer the encrypted path would decrypt, which makes it the oracle for comparing
    decisions.
"""
import logging
from typing import Dict, Optional

from ahesim.encoding import ScaleConfig, decode_product
from ahesim.errors import MissingKeyError, ValidationError
from ahesim.similarity import (Evaluator, Opener, ScoreKind, Setting,
                               quantized_inner)
from ahesim.store import Database, EmbeddingVector
from ahesim.util import parallel_map

log = logging.getLogger(__name__)


def scan_scores(probe: EmbeddingVector,
                database: Database,
                opener: Optional[Opener] = None,
                cfg: Optional[ScaleConfig] = None,
                workers: int = 1) -> Dict[str, float]:
    """ Score ``probe`` against every vector of ``database``.

        :return: the decoded score per target id.
        :raises MissingKeyError: if the database is encrypted and no opener is given.
    """
    cfg = cfg or database.scale
    probe.validate(database.schema, cfg)
    if len(database) == 0:
        raise ValidationError("Cannot scan an empty database")

    if not database.encrypted:
        values = parallel_map(
            lambda t: decode_product(quantized_inner(probe, t, cfg), cfg),
            database.vectors, workers)
        return dict(zip(database.ids, values))

    if opener is None:
        raise MissingKeyError("Scanning an encrypted library needs scores "
                              "opened by the key holder")
    evaluator = Evaluator(opener.public_key, database.schema, cfg)
    encrypted = parallel_map(
        lambda t: evaluator.evaluate(probe, t, ScoreKind.plain),
        database.vectors, workers)
    return {e.target_id: opener.open(e).value for e in encrypted}


def scan_setting(database: Database) -> Setting:
    return Setting.encrypted_db if database.encrypted else Setting.plaintext_oracle
