""" HTTP service for the encrypted-query setting.

    The service holds a plaintext database and nothing else: clients send their public key with an encrypted query,
    and get back one encrypted score per database vector. Decryption and ranking happen at the client. There is no
    private key anywhere in this module.

    Endpoints::

        GET  /v1/manifest   schema, dimension, scale configuration and vector count
        POST /v1/search     encrypted query in, encrypted scores out
"""
import logging
import time
from typing import List, Optional

import fastapi
from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ahesim.crypto import PublicKey, Ciphertext, check_key_bits, rerandomize
from ahesim.crypto.randomness import default_source
from ahesim.encoding import ScaleConfig, require_budget
from ahesim.errors import AHESimException, ValidationError, KeyMismatchError
from ahesim.similarity import Evaluator, parse_kind, ScoreKind
from ahesim.store import Database, EncryptedVector, WeightVector
from ahesim import __version__

log = logging.getLogger(__name__)

QUERY_ID = "query"


class PublicKeyModel(BaseModel):
    n: str
    g: str
    bits: int
    key_id: str


class SearchRequest(BaseModel):
    public_key: PublicKeyModel
    cells: List[str]  #: hex ciphertext residues, one per coordinate
    kind: str = "plain"
    weights: Optional[List[float]] = None
    rerandomize: bool = True
    common_scale: bool = False
    target_ids: Optional[List[str]] = None  #: restrict scoring to these vectors


class EncryptedScoreModel(BaseModel):
    target_id: str
    c: str


class SearchResponse(BaseModel):
    key_id: str
    kind: str
    weighted_scale: bool
    dimension: int
    results: List[EncryptedScoreModel]
    elapsed_ms: float


def model_fields(model: BaseModel) -> dict:
    """ The fields of ``model`` as a dict, under pydantic 2 or 1. """
    dump = getattr(model, "model_dump", None)
    return dump() if dump is not None else model.dict()


def _bad_request(detail: str) -> fastapi.HTTPException:
    return fastapi.HTTPException(status_code=400, detail=detail)


def _unprocessable(detail: str) -> fastapi.HTTPException:
    return fastapi.HTTPException(status_code=422, detail=detail)


def create_app(database: Database,
               cfg: Optional[ScaleConfig] = None,
               allow_insecure_keys: bool = False) -> FastAPI:
    """ Build the service around an immutable plaintext database.

        :param database: the plaintext collection to search.
        :param cfg: the scale configuration; defaults to the database's.
        :param allow_insecure_keys: accept test-only key sizes from clients.
        :raises ValidationError: if ``database`` is encrypted or empty.
    """
    if database.encrypted:
        raise ValidationError(
            "The search service serves plaintext databases only")
    if len(database) == 0:
        raise ValidationError("Cannot serve an empty database")
    cfg = cfg or database.scale
    schema = database.schema
    vectors = {v.id: v for v in database.vectors}
    manifest = database.manifest()

    app = FastAPI(title="ahesim", version=__version__)

    @app.exception_handler(RequestValidationError)
    def malformed_body(request, exc):
        return JSONResponse(status_code=400,
                            content={"detail": "Malformed request body"})

    @app.get("/v1/manifest")
    def get_manifest():
        return manifest

    def parse_key(model: PublicKeyModel) -> PublicKey:
        try:
            pk = PublicKey.from_json(model_fields(model))
        except AHESimException as e:
            raise _bad_request(f"Invalid public key: {e}")
        try:
            check_key_bits(pk.bits, allow_insecure=allow_insecure_keys)
        except ValidationError as e:
            raise _unprocessable(str(e))
        return pk

    def parse_query(request: SearchRequest, pk: PublicKey) -> EncryptedVector:
        if len(request.cells) != schema.total_dim:
            raise _unprocessable(
                f"Query has {len(request.cells)} cells; this database expects "
                f"d = {schema.total_dim}")
        try:
            cells = [Ciphertext.from_hex(c, pk) for c in request.cells]
        except ValidationError as e:
            raise _bad_request(str(e))
        return EncryptedVector(id=QUERY_ID,
                               cells=cells,
                               schema_ref=schema.schema_id,
                               key_id=pk.key_id)

    @app.post("/v1/search", response_model=SearchResponse)
    def search(request: SearchRequest):
        # a plain def runs on the threadpool; requests share nothing but the read-only database
        start = time.perf_counter()
        pk = parse_key(request.public_key)
        query = parse_query(request, pk)
        try:
            kind = parse_kind(request.kind)
            weights = None
            if kind is ScoreKind.weighted:
                if request.weights is None:
                    raise ValidationError("Weighted scores need weights")
                weights = WeightVector(weights=tuple(request.weights))
                weights.validate(schema, cfg)
            require_budget(cfg, schema.total_dim, pk.n)
        except ValidationError as e:
            raise _unprocessable(str(e))

        if request.target_ids is None:
            targets = list(database.vectors)
        else:
            unknown = [t for t in request.target_ids if t not in vectors]
            if unknown:
                raise _unprocessable(f"Unknown target ids: {unknown}")
            targets = [vectors[t] for t in request.target_ids]

        evaluator = Evaluator(pk, schema, cfg, common_scale=request.common_scale)
        source = default_source()
        results = []
        weighted_scale = kind is ScoreKind.weighted or request.common_scale
        try:
            for target in targets:
                score = evaluator.evaluate(query, target, kind, weights)
                c = score.ciphertext
                if request.rerandomize:
                    c = rerandomize(pk, c, source)
                results.append(
                    EncryptedScoreModel(target_id=target.id, c=c.to_hex()))
        except (ValidationError, KeyMismatchError) as e:
            raise _unprocessable(str(e))

        elapsed = (time.perf_counter() - start) * 1e3
        log.info(f"Scored d={schema.total_dim} {kind.value} query against "
                 f"{len(results)} vectors in {elapsed:.1f} ms")
        return SearchResponse(key_id=pk.key_id,
                              kind=kind.value,
                              weighted_scale=weighted_scale,
                              dimension=schema.total_dim,
                              results=results,
                              elapsed_ms=elapsed)

    log.info(f"Serving {len(database)} vectors, d={schema.total_dim}")
    return app
