""" JSONL ingestion of precomputed embeddings.

    Each line holds one object ``{"id": ..., "creator": ... (optional), "values": [...]}``. Blank lines are skipped but
    still counted, so error messages always name the physical line.
"""
import json
import logging
import math
from typing import Iterable, List, Optional

from ahesim.encoding import ScaleConfig
from ahesim.errors import ValidationError, CodecRangeError
from ahesim.store.schema import BlockSchema
from ahesim.store.vectors import EmbeddingVector

log = logging.getLogger(__name__)


def parse_embedding_line(line: str, lineno: int, schema: BlockSchema,
                         cfg: Optional[ScaleConfig]) -> EmbeddingVector:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise ValidationError(f"Line {lineno}: invalid JSON ({e.msg})") from e
    if not isinstance(obj, dict):
        raise ValidationError(f"Line {lineno}: expected a JSON object")
    if "id" not in obj or "values" not in obj:
        raise ValidationError(f"Line {lineno}: 'id' and 'values' are required")
    values = obj["values"]
    if not isinstance(values, list):
        raise ValidationError(f"Line {lineno}: 'values' must be a list")
    if len(values) != schema.total_dim:
        raise ValidationError(
            f"Line {lineno}: expected {schema.total_dim} values, got "
            f"{len(values)}")
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"Line {lineno}: values must be numbers")
        try:
            v = float(v)
        except OverflowError:
            raise ValidationError(
                f"Line {lineno}: value too large for a float") from None
        if not math.isfinite(v):
            raise ValidationError(f"Line {lineno}: non-finite value {v}")
        if cfg is not None and abs(v) > cfg.max_abs:
            raise CodecRangeError(
                f"Line {lineno}: |value| = {abs(v)} exceeds max_abs = "
                f"{cfg.max_abs}")
    creator = obj.get("creator")
    return EmbeddingVector(id=str(obj["id"]),
                           values=values,
                           schema_ref=schema.schema_id,
                           creator=None if creator is None else str(creator))


def ingest_jsonl(path: str,
                 schema: BlockSchema,
                 cfg: Optional[ScaleConfig] = None,
                 normalize: bool = False) -> List[EmbeddingVector]:
    """ Read and validate embeddings from a JSONL file.

        :param path: the file to read.
        :param schema: the block layout every vector must follow.
        :param cfg: if given, coordinates are checked against ``cfg.max_abs``.
        :param normalize: L2-normalize every vector, turning inner products into cosine similarities.
        :return: the vectors in file order.
        :raises ValidationError: on malformed lines, dimension mismatch, non-finite values or duplicate ids.
    """
    vectors = []
    seen = {}
    with open(path, "r") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            vector = parse_embedding_line(line, lineno, schema,
                                          None if normalize else cfg)
            if vector.id in seen:
                raise ValidationError(
                    f"Line {lineno}: duplicate id '{vector.id}' (first seen "
                    f"on line {seen[vector.id]})")
            seen[vector.id] = lineno
            if normalize:
                vector = vector.normalized()
                if cfg is not None:
                    vector.validate(schema, cfg)
            vectors.append(vector)

    if len(vectors) == 0:
        log.warning(f"No embeddings found in '{path}'")
    log.debug(f"Ingested {len(vectors)} embeddings from '{path}'")
    return vectors


def write_jsonl(vectors: Iterable[EmbeddingVector], path: str):
    """ Write embeddings in the format read by :func:`ingest_jsonl`. """
    with open(path, "w") as f:
        for vector in vectors:
            f.write(json.dumps(vector.to_json()) + "\n")
