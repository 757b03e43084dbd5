""" Client side of the encrypted-query protocol: encrypt, post, open, rank. """
import logging
from typing import List, Optional, Sequence, Union

import requests

from ahesim.crypto import KeyPair, Ciphertext, RandomSource
from ahesim.encoding import ScaleConfig
from ahesim.errors import ServiceError
from ahesim.similarity import (EncryptedScore, Opener, RetrievalResult,
                               ScoreKind, Setting, parse_kind)
from ahesim.store import (BlockSchema, EmbeddingVector, WeightVector,
                          encrypt_vector)

log = logging.getLogger(__name__)


class SearchClient:
    """ Talks to a running search service.

        :param keypair: the client's key pair; only the public half is sent.
        :param base_url: the service root, for example ``http://127.0.0.1:8000``.
        :param session: the HTTP session; any object with ``get`` and ``post`` in the style of
                        :class:`requests.Session`, such as the FastAPI test client.
        :param timeout: request timeout in seconds.
    """
    def __init__(self,
                 keypair: KeyPair,
                 base_url: str = "",
                 session=None,
                 timeout: float = 600.0):
        self.keypair = keypair
        self.base_url = base_url.rstrip("/")
        self.session = session if session is not None else requests.Session()
        self.timeout = timeout
        self._manifest = None

    def _url(self, path: str) -> str:
        return self.base_url + path

    @staticmethod
    def _check(response):
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail")
            except ValueError:
                detail = response.text
            raise ServiceError(f"Service answered {response.status_code}: "
                               f"{detail}",
                               status_code=response.status_code)
        return response.json()

    def manifest(self) -> dict:
        if self._manifest is None:
            self._manifest = self._check(
                self.session.get(self._url("/v1/manifest"),
                                 timeout=self.timeout))
        return self._manifest

    @property
    def schema(self) -> BlockSchema:
        return BlockSchema.from_json(self.manifest()["schema"])

    @property
    def scale(self) -> ScaleConfig:
        return ScaleConfig.from_json(self.manifest()["scale"])

    def search_encrypted(self,
                         query: EmbeddingVector,
                         kind: Union[ScoreKind, str] = ScoreKind.plain,
                         weights: Optional[WeightVector] = None,
                         rerandomize: bool = True,
                         target_ids: Optional[Sequence[str]] = None,
                         rng: Optional[RandomSource] = None,
                         common_scale: bool = False) -> List[EncryptedScore]:
        """ Encrypt ``query``, send it, and return the still encrypted scores.

            :raises ServiceError: if the service rejects the request.
        """
        kind = parse_kind(kind)
        pk = self.keypair.public
        cfg = self.scale
        query.validate(self.schema, cfg)
        enc_query = encrypt_vector(query, pk, cfg, rng)
        body = {
            "public_key": {
                "n": pk.to_json()["n"],
                "g": pk.to_json()["g"],
                "bits": pk.bits,
                "key_id": pk.key_id
            },
            "cells": [c.to_hex() for c in enc_query.cells],
            "kind": kind.value,
            "weights": None if weights is None else list(weights.weights),
            "rerandomize": rerandomize,
            "common_scale": common_scale,
            "target_ids": None if target_ids is None else list(target_ids),
        }
        log.debug(f"Posting a d={query.dim} {kind.value} query")
        reply = self._check(
            self.session.post(self._url("/v1/search"),
                              json=body,
                              timeout=self.timeout))
        return [
            EncryptedScore(query_id=query.id,
                           target_id=r["target_id"],
                           kind=kind,
                           setting=Setting.encrypted_query,
                           ciphertext=Ciphertext.from_hex(r["c"], pk),
                           weighted_scale=reply["weighted_scale"])
            for r in reply["results"]
        ]

    def search(self,
               query: EmbeddingVector,
               k_top: int,
               kind: Union[ScoreKind, str] = ScoreKind.plain,
               weights: Optional[WeightVector] = None,
               rerandomize: bool = True,
               rng: Optional[RandomSource] = None) -> RetrievalResult:
        """ The full round trip: the scores are opened and ranked locally. """
        encrypted = self.search_encrypted(query,
                                          kind,
                                          weights,
                                          rerandomize=rerandomize,
                                          rng=rng)
        opener = Opener(self.keypair, self.scale)
        return RetrievalResult.rank(query.id,
                                    [opener.open(e) for e in encrypted], k_top)
