import json
import os

import numpy as np
import pytest

from ahesim.crypto import SeededRandomSource
from ahesim.store import (default_schema, synth_corpus, encrypt_collection,
                          encrypt_vector, decrypt_vector, collection_nbytes,
                          plaintext_database, encrypted_database, save_db,
                          load_db, ArtistClusters, PLAINTEXT, ENCRYPTED)
from ahesim.errors import ValidationError, IntegrityError, KeyMismatchError

D = 8


@pytest.fixture
def corpus():
    return synth_corpus(5, 6, default_schema(D),
                        ArtistClusters(num_artists=2, spread=0.1))


@pytest.fixture
def encrypted(corpus, keypair, cfg):
    cells = encrypt_collection(corpus, keypair.public, cfg,
                               SeededRandomSource(1))
    return encrypted_database(cells, corpus.schema, cfg, keypair.public)


def test_encrypt_decrypt_vector(corpus, keypair, cfg, rng):
    v = corpus[0]
    ev = encrypt_vector(v, keypair.public, cfg, rng)
    assert ev.dim == D
    assert ev.creator == v.creator
    back = decrypt_vector(ev, keypair.private, keypair.public, cfg)
    assert np.allclose(back.values, v.values, atol=0.5 / cfg.scale)


def test_encrypt_collection_is_worker_independent(corpus, keypair, cfg):
    one = encrypt_collection(corpus, keypair.public, cfg,
                             SeededRandomSource(3))
    four = encrypt_collection(corpus, keypair.public, cfg,
                              SeededRandomSource(3), workers=4)
    assert one == four
    assert collection_nbytes(one, keypair.public) == \
        len(corpus) * D * keypair.public.ciphertext_bytes


def test_encrypt_collection_edge_cases(keypair, cfg):
    assert encrypt_collection([], keypair.public, cfg) == []
    a = synth_corpus(0, 1, default_schema(8))[0]
    b = synth_corpus(0, 1, default_schema(12))[0]
    with pytest.raises(ValidationError):
        encrypt_collection([a, b], keypair.public, cfg)


def test_database_grouping(corpus, cfg):
    db = plaintext_database(corpus.vectors, corpus.schema, cfg)
    assert db.mode == PLAINTEXT and not db.encrypted
    assert list(db.by_creator()) == ["artist_00", "artist_01"]
    assert len(db.by_creator()["artist_00"]) == 3
    assert db.manifest()["format"] == "ahesim-db"


def test_database_rejects_mixed(corpus, encrypted, cfg, keypair,
                                other_keypair):
    with pytest.raises(ValidationError):
        plaintext_database([corpus[0]], default_schema(16), cfg)
    with pytest.raises(KeyMismatchError):
        encrypted_database(encrypted.vectors, corpus.schema, cfg,
                           other_keypair.public)


def test_save_load_plaintext(tmp_path, corpus, cfg):
    db = plaintext_database(corpus.vectors, corpus.schema, cfg)
    save_db(db, str(tmp_path))
    loaded = load_db(str(tmp_path))
    assert loaded.mode == PLAINTEXT
    assert list(loaded.vectors) == corpus.vectors
    assert loaded.schema == corpus.schema
    assert loaded.scale == cfg


def test_save_load_encrypted(tmp_path, encrypted, keypair, other_keypair):
    save_db(encrypted, str(tmp_path))
    with open(tmp_path / "manifest.json") as f:
        manifest = json.load(f)
    assert manifest["mode"] == ENCRYPTED
    assert manifest["key_id"] == keypair.key_id
    assert manifest["count"] == 6 and manifest["dimension"] == D

    loaded = load_db(str(tmp_path), keypair.public)
    assert loaded.vectors == encrypted.vectors
    with pytest.raises(ValidationError):
        load_db(str(tmp_path))
    with pytest.raises(KeyMismatchError):
        load_db(str(tmp_path), other_keypair.public)


def test_truncated_payload(tmp_path, encrypted, keypair):
    save_db(encrypted, str(tmp_path))
    payload = tmp_path / "cells.hex.jsonl"
    data = payload.read_bytes()
    payload.write_bytes(data[:len(data) // 2])
    with pytest.raises(IntegrityError):
        load_db(str(tmp_path), keypair.public)


def test_tampered_payload(tmp_path, corpus, cfg):
    save_db(plaintext_database(corpus.vectors, corpus.schema, cfg),
            str(tmp_path))
    payload = tmp_path / "vectors.jsonl"
    lines = payload.read_text().splitlines()
    payload.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(IntegrityError, match="declares 6 vectors"):
        load_db(str(tmp_path))


def test_manifest_checks(tmp_path, corpus, cfg):
    save_db(plaintext_database(corpus.vectors, corpus.schema, cfg),
            str(tmp_path))
    path = os.path.join(str(tmp_path), "manifest.json")
    with open(path) as f:
        manifest = json.load(f)
    manifest["format"] = "other"
    with open(path, "w") as f:
        json.dump(manifest, f)
    with pytest.raises(IntegrityError):
        load_db(str(tmp_path))


def _rewrite_manifest(directory, **changes):
    path = os.path.join(directory, "manifest.json")
    with open(path) as f:
        manifest = json.load(f)
    manifest.update(changes)
    with open(path, "w") as f:
        json.dump(manifest, f)


def test_payload_must_stay_inside(tmp_path, corpus, cfg):
    db = tmp_path / "db"
    save_db(plaintext_database(corpus.vectors, corpus.schema, cfg), str(db))
    os.replace(str(db / "vectors.jsonl"), str(tmp_path / "outside.jsonl"))
    _rewrite_manifest(str(db), payload="../outside.jsonl")
    with pytest.raises(IntegrityError, match="outside.jsonl"):
        load_db(str(db))


def test_payload_must_match_mode(tmp_path, corpus, cfg):
    save_db(plaintext_database(corpus.vectors, corpus.schema, cfg),
            str(tmp_path))
    _rewrite_manifest(str(tmp_path), payload="cells.hex.jsonl")
    with pytest.raises(IntegrityError, match="vectors.jsonl"):
        load_db(str(tmp_path))
    _rewrite_manifest(str(tmp_path), payload="vectors.jsonl", mode="other")
    with pytest.raises(IntegrityError, match="Unknown database mode"):
        load_db(str(tmp_path))
