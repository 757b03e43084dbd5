""" Encrypted collections and the on-disk database format.

    A database is a directory with two files::

        manifest.json       schema, scale configuration, mode, key id, counts and payload digest
        vectors.jsonl       one plaintext vector per line (mode "plaintext"), or
        cells.hex.jsonl     one encrypted vector per line, cells as hex residues (mode "encrypted")
"""
import dataclasses
import json
import logging
import os
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ahesim.crypto import (PublicKey, PrivateKey, RandomSource, encrypt,
                           decrypt)
from ahesim.crypto.randomness import default_source
from ahesim.encoding import ScaleConfig, encode_vector, decode, require_budget
from ahesim.errors import ValidationError, IntegrityError, KeyMismatchError
from ahesim.store.ingest import parse_embedding_line
from ahesim.store.schema import BlockSchema
from ahesim.store.vectors import EmbeddingVector, EncryptedVector
from ahesim.util import parallel_map, sha256_hex

log = logging.getLogger(__name__)

FORMAT_NAME = "ahesim-db"
FORMAT_VERSION = 1
MANIFEST_FILE = "manifest.json"
PLAINTEXT_PAYLOAD = "vectors.jsonl"
ENCRYPTED_PAYLOAD = "cells.hex.jsonl"

PLAINTEXT = "plaintext"
ENCRYPTED = "encrypted"


def encrypt_vector(vector: EmbeddingVector,
                   public_key: PublicKey,
                   cfg: ScaleConfig,
                   rng: Optional[RandomSource] = None) -> EncryptedVector:
    """ Encode and encrypt every coordinate of one vector. """
    rng = rng or default_source()
    cells = tuple(
        encrypt(public_key, m, rng) for m in encode_vector(vector.values, cfg))
    return EncryptedVector(id=vector.id,
                           cells=cells,
                           schema_ref=vector.schema_ref,
                           key_id=public_key.key_id,
                           creator=vector.creator)


def encrypt_collection(vectors: Sequence[EmbeddingVector],
                       public_key: PublicKey,
                       cfg: ScaleConfig,
                       rng: Optional[RandomSource] = None,
                       workers: int = 1) -> List[EncryptedVector]:
    """ Encrypt a collection: ``cell[i] = encrypt(encode(values[i]))``.

        Vector ``i`` draws its randomness from ``rng.spawn(i)``, so a seeded source gives the same ciphertexts for any
        number of workers.

        :param vectors: the plaintext vectors; all of one dimension.
        :param public_key: the key to encrypt under.
        :param cfg: the scale configuration.
        :param rng: the randomness source; defaults to system entropy.
        :param workers: the number of encryption threads.
        :return: the encrypted vectors, in input order.
        :raises BudgetError: if the overflow budget fails for the dimension.
    """
    vectors = list(vectors)
    if len(vectors) == 0:
        log.warning("Encrypting an empty collection")
        return []
    dims = {v.dim for v in vectors}
    if len(dims) != 1:
        raise ValidationError(
            f"All vectors must share one dimension, got {sorted(dims)}")
    require_budget(cfg, dims.pop(), public_key.n)

    rng = rng or default_source()
    log.debug(f"Encrypting {len(vectors)} vectors under key "
              f"{public_key.key_id}")
    return parallel_map(
        lambda item: encrypt_vector(item[1], public_key, cfg, rng.spawn(item[
            0])), list(enumerate(vectors)), workers)


def decrypt_vector(encrypted: EncryptedVector, private_key: PrivateKey,
                   public_key: PublicKey, cfg: ScaleConfig) -> EmbeddingVector:
    """ Decrypt and decode every cell; the inverse of :func:`encrypt_vector` up to codec rounding. """
    values = [
        decode(decrypt(private_key, public_key, c), cfg)
        for c in encrypted.cells
    ]
    return EmbeddingVector(id=encrypted.id,
                           values=values,
                           schema_ref=encrypted.schema_ref,
                           creator=encrypted.creator)


def collection_nbytes(vectors: Sequence[EncryptedVector],
                      public_key: PublicKey) -> int:
    """ Exact size of all ciphertext residues in fixed-width binary form. """
    return sum(v.nbytes(public_key) for v in vectors)


@dataclasses.dataclass(frozen=True, eq=False)
class Database:
    """ A loaded (or about to be saved) collection with its manifest data. """
    mode: str  #: ``"plaintext"`` or ``"encrypted"``
    schema: BlockSchema
    scale: ScaleConfig
    vectors: Tuple[Union[EmbeddingVector, EncryptedVector], ...]
    key_id: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "vectors", tuple(self.vectors))
        if self.mode not in (PLAINTEXT, ENCRYPTED):
            raise ValidationError(f"Unknown database mode '{self.mode}'")
        expected = EmbeddingVector if self.mode == PLAINTEXT else EncryptedVector
        for v in self.vectors:
            if not isinstance(v, expected):
                raise ValidationError(
                    f"A {self.mode} database cannot hold {type(v).__name__}")
        if self.mode == ENCRYPTED and self.key_id is None:
            raise ValidationError("An encrypted database needs a key_id")

    @property
    def encrypted(self) -> bool:
        return self.mode == ENCRYPTED

    @property
    def dimension(self) -> int:
        return self.schema.total_dim

    @property
    def ids(self) -> List[str]:
        return [v.id for v in self.vectors]

    def __len__(self) -> int:
        return len(self.vectors)

    def by_creator(self) -> Dict[str, list]:
        """ Group vectors by creator; vectors without a creator are left out. Keys are sorted. """
        groups = {}
        for v in self.vectors:
            if v.creator is not None:
                groups.setdefault(v.creator, []).append(v)
        return {k: groups[k] for k in sorted(groups)}

    def manifest(self, payload_digest: Optional[str] = None) -> dict:
        obj = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "mode": self.mode,
            "schema": self.schema.to_json(),
            "scale": self.scale.to_json(),
            "key_id": self.key_id,
            "count": len(self.vectors),
            "dimension": self.dimension,
            "payload": ENCRYPTED_PAYLOAD if self.encrypted else
            PLAINTEXT_PAYLOAD,
        }
        if payload_digest is not None:
            obj["payload_sha256"] = payload_digest
        return obj


def plaintext_database(vectors: Sequence[EmbeddingVector], schema: BlockSchema,
                       cfg: ScaleConfig) -> Database:
    for v in vectors:
        v.validate(schema, cfg)
    return Database(mode=PLAINTEXT, schema=schema, scale=cfg, vectors=vectors)


def encrypted_database(vectors: Sequence[EncryptedVector], schema: BlockSchema,
                       cfg: ScaleConfig, public_key: PublicKey) -> Database:
    for v in vectors:
        v.validate(schema)
        if v.key_id != public_key.key_id:
            raise KeyMismatchError(
                f"Vector '{v.id}' was encrypted under {v.key_id}, expected "
                f"{public_key.key_id}")
    return Database(mode=ENCRYPTED,
                    schema=schema,
                    scale=cfg,
                    vectors=vectors,
                    key_id=public_key.key_id)


def save_db(database: Database, path: str):
    """ Write a database directory (see the module docstring). Existing files are replaced. """
    os.makedirs(path, exist_ok=True)
    lines = [json.dumps(v.to_json()) + "\n" for v in database.vectors]
    payload = "".join(lines).encode()
    manifest = database.manifest(payload_digest=sha256_hex(payload))

    with open(os.path.join(path, manifest["payload"]), "wb") as f:
        f.write(payload)
    with open(os.path.join(path, MANIFEST_FILE), "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
    log.info(f"Saved {database.mode} database with {len(database)} vectors "
             f"to '{path}'")


def load_db(path: str, public_key: Optional[PublicKey] = None) -> Database:
    """ Load and validate a database directory.

        :param path: the directory written by :func:`save_db`.
        :param public_key: required for encrypted databases; cells are parsed under it.
        :return: the database.
        :raises IntegrityError: if the payload does not match the manifest.
        :raises ValidationError: if a vector violates the manifest's schema.
        :raises KeyMismatchError: if ``public_key`` is not the key the database was encrypted under.
    """
    manifest_path = os.path.join(path, MANIFEST_FILE)
    with open(manifest_path, "r") as f:
        try:
            manifest = json.load(f)
        except json.JSONDecodeError as e:
            raise IntegrityError(f"Manifest is not valid JSON: {e}") from e

    if manifest.get("format") != FORMAT_NAME:
        raise IntegrityError(f"'{path}' is not an {FORMAT_NAME} directory")
    if manifest.get("version") != FORMAT_VERSION:
        raise IntegrityError(
            f"Unsupported database version {manifest.get('version')}")
    try:
        mode = manifest["mode"]
        schema = BlockSchema.from_json(manifest["schema"])
        cfg = ScaleConfig.from_json(manifest["scale"])
        count = int(manifest["count"])
        dimension = int(manifest["dimension"])
        payload_name = manifest["payload"]
        key_id = manifest.get("key_id")
    except (KeyError, TypeError, ValueError) as e:
        raise IntegrityError(f"Malformed manifest: {e}") from e
    if dimension != schema.total_dim:
        raise IntegrityError(
            f"Manifest dimension {dimension} disagrees with its schema "
            f"({schema.total_dim})")
    if mode not in (PLAINTEXT, ENCRYPTED):
        raise IntegrityError(f"Unknown database mode '{mode}'")
    expected_payload = (ENCRYPTED_PAYLOAD
                        if mode == ENCRYPTED else PLAINTEXT_PAYLOAD)
    if payload_name != expected_payload:
        raise IntegrityError(
            f"A {mode} database keeps its vectors in '{expected_payload}', "
            f"the manifest names '{payload_name}'")
    if mode == ENCRYPTED:
        if public_key is None:
            raise ValidationError(
                "Loading an encrypted database requires its public key")
        if key_id != public_key.key_id:
            raise KeyMismatchError(
                f"Database was encrypted under {key_id}, got public key "
                f"{public_key.key_id}")

    with open(os.path.join(path, payload_name), "rb") as f:
        payload = f.read()

    vectors = []
    for lineno, raw in enumerate(payload.decode().splitlines(), start=1):
        if not raw.strip():
            continue
        if mode == ENCRYPTED:
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as e:
                raise IntegrityError(
                    f"Payload line {lineno} is not valid JSON; the file may be "
                    f"truncated") from e
            vector = EncryptedVector.from_json(obj, public_key,
                                               schema.schema_id)
            vector.validate(schema)
        else:
            try:
                vector = parse_embedding_line(raw, lineno, schema, cfg)
            except ValidationError as e:
                if isinstance(e.__cause__, json.JSONDecodeError):
                    raise IntegrityError(
                        f"Payload line {lineno} is not valid JSON; the file "
                        f"may be truncated") from e
                raise
        vectors.append(vector)

    if len(vectors) != count:
        raise IntegrityError(
            f"Manifest declares {count} vectors, payload holds {len(vectors)}")
    digest = manifest.get("payload_sha256")
    if digest is not None and digest != sha256_hex(payload):
        raise IntegrityError("Payload digest does not match the manifest")

    log.debug(f"Loaded {mode} database with {count} vectors from '{path}'")
    return Database(mode=mode,
                    schema=schema,
                    scale=cfg,
                    vectors=vectors,
                    key_id=key_id)
