import numpy as np
import pytest

from ahesim.crypto import SeededRandomSource, decrypt, PublicKey
from ahesim.encoding import ScaleConfig, decode_product, encode
from ahesim.errors import ValidationError, KeyMismatchError, BudgetError
from ahesim.similarity import (Evaluator, Opener, ScoreKind, Setting, orient,
                               encquery_inner, encdb_inner,
                               blocked_similarity, weighted_similarity,
                               plain_inner, plain_block_inners,
                               quantized_inner, quantized_block_inners,
                               quantized_weighted)
from ahesim.store import (BlockSchema, EmbeddingVector, WeightVector,
                          default_schema, encrypt_vector)
from ahesim.testing import kahan_dot, random_pairs, random_vector, grid_vector


def _vec(values, schema, vid):
    return EmbeddingVector(id=vid, values=values, schema_ref=schema.schema_id)


def _open(keypair, c):
    return decrypt(keypair.private, keypair.public, c)


def test_plain_inner_examples():
    schema = BlockSchema.equal_partition(3, k=1)
    x = _vec([1, 2, 3], schema, "x")
    assert plain_inner(x, _vec([4, 5, 6], schema, "y")).value == 32.0
    assert plain_inner(x, _vec([0, 0, 0], schema, "z")).value == 0.0
    other = _vec([1, 2, 3], BlockSchema.from_lengths([3], ["a"]), "o")
    with pytest.raises(ValidationError):
        plain_inner(x, other)


def test_plain_inner_matches_compensated_sum(schema):
    for x, y in random_pairs(0, schema, 10):
        expected = kahan_dot(x.values, y.values)
        assert plain_inner(x, y).value == pytest.approx(expected, rel=1e-9)


def test_hand_example_integers(keypair, rng):
    schema = BlockSchema.equal_partition(3, k=1)
    cfg = ScaleConfig(16, 8, 8.0)
    x, y = _vec([1, 2, 3], schema, "x"), _vec([4, 5, 6], schema, "y")
    enc_x = encrypt_vector(x, keypair.public, cfg, rng)
    c = encquery_inner(keypair.public, enc_x, y, cfg)
    assert _open(keypair, c) == 32 << 32
    assert decode_product(_open(keypair, c), cfg) == 32.0


def _check_pairs(keypair, cfg, schema, count, seed):
    pk = keypair.public
    rng = SeededRandomSource(seed)
    for x, y in random_pairs(seed, schema, count):
        enc_x = encrypt_vector(x, pk, cfg, rng)
        enc_y = encrypt_vector(y, pk, cfg, rng)
        expected = quantized_inner(x, y, cfg)
        assert _open(keypair, encquery_inner(pk, enc_x, y, cfg)) == expected
        assert _open(keypair, encdb_inner(pk, x, enc_y, cfg)) == expected
        # codec bound: every coordinate is off by at most half a tick
        bound = (np.sum(np.abs(x.values)) + np.sum(np.abs(y.values)) +
                 x.dim * 0.5 / cfg.scale) * 0.5 / cfg.scale
        assert abs(decode_product(expected, cfg) -
                   plain_inner(x, y).value) <= bound


def test_oracle_equivalence(keypair, cfg, schema):
    _check_pairs(keypair, cfg, schema, 5, 1)


@pytest.mark.slow
@pytest.mark.parametrize("d", [128, 256, 512, 1024])
def test_oracle_equivalence_full(keypair, cfg, d):
    _check_pairs(keypair, cfg, default_schema(d), 100, d)


def test_zero_and_selector(keypair, cfg, schema, rng):
    pk = keypair.public
    x = random_vector(np.random.default_rng(3), schema, "x")
    enc_x = encrypt_vector(x, pk, cfg, rng)
    zero = _vec(np.zeros(128), schema, "zero")
    assert _open(keypair, encquery_inner(pk, enc_x, zero, cfg)) == 0
    assert _open(keypair, encdb_inner(pk, zero, enc_x, cfg)) == 0
    for j in [0, 63, 127]:
        e_j = np.zeros(128)
        e_j[j] = 1.0
        raw = _open(keypair, encquery_inner(pk, enc_x, _vec(e_j, schema,
                                                            "e"), cfg))
        assert raw == encode(x.values[j], cfg) * cfg.scale
        assert decode_product(raw, cfg) == pytest.approx(x.values[j],
                                                         abs=1e-4)


def test_key_mismatch(keypair, other_keypair, cfg, schema, rng):
    x, y = random_pairs(2, schema, 1)[0]
    enc_x = encrypt_vector(x, other_keypair.public, cfg, rng)
    with pytest.raises(KeyMismatchError):
        encquery_inner(keypair.public, enc_x, y, cfg)


def test_budget_refused_before_work(rng):
    # (2^31 - 1) * (2^32 - 5): a 63-bit modulus of two primes
    small = PublicKey.from_modulus((2**31 - 1) * (2**32 - 5))
    cfg = ScaleConfig(16, 8, 64.0)
    schema = default_schema(16)
    x, y = random_pairs(4, schema, 1)[0]
    enc_x = encrypt_vector(x, small, cfg, rng)
    with pytest.raises(BudgetError) as info:
        encquery_inner(small, enc_x, y, cfg)
    assert info.value.max_safe_dimension == 15
    with pytest.raises(BudgetError):
        Evaluator(small, schema, cfg)
    Evaluator(small, default_schema(12), cfg)


def test_orient(keypair, cfg, schema, rng):
    x, y = random_pairs(5, schema, 1)[0]
    enc_x = encrypt_vector(x, keypair.public, cfg, rng)
    assert orient(enc_x, y)[2] is Setting.encrypted_query
    assert orient(y, enc_x)[2] is Setting.encrypted_db
    with pytest.raises(ValidationError):
        orient(x, y)
    with pytest.raises(ValidationError):
        orient(enc_x, enc_x)


def test_blocked_hand_example(keypair, rng):
    schema = BlockSchema.equal_partition(6, k=2)
    cfg = ScaleConfig()
    x = _vec([1, 1, 1, 2, 2, 2], schema, "x")
    y = _vec([1, 2, 3, 1, 1, 1], schema, "y")
    enc_y = encrypt_vector(y, keypair.public, cfg, rng)
    blocked = blocked_similarity(keypair.public, x, enc_y, schema, cfg)
    opener = Opener(keypair, cfg)
    assert opener.open_blocks(blocked.per_block) == [6.0, 6.0]
    assert decode_product(_open(keypair, blocked.total), cfg) == 12.0
    assert plain_block_inners(x, y, schema) == [6.0, 6.0]


def test_partition_invariance(keypair, cfg, full_scale):
    pk = keypair.public
    r = np.random.default_rng(6)
    dims = [128, 256, 512, 1024] if full_scale else [32]
    schemas_per_dim = 20 if full_scale else 3
    rng = SeededRandomSource(6)
    for d in dims:
        for k in [1, 2, 4, 8]:
            for _ in range(schemas_per_dim):
                cuts = sorted(r.choice(np.arange(1, d), k - 1, replace=False))
                lengths = np.diff([0] + list(cuts) + [d]).tolist()
                schema = BlockSchema.from_lengths(lengths,
                                                  [f"b{i}" for i in range(k)])
                x = random_vector(r, schema, "x")
                y = random_vector(r, schema, "y")
                enc_y = encrypt_vector(y, pk, cfg, rng)
                blocked = blocked_similarity(pk, x, enc_y, schema, cfg)
                unblocked = encdb_inner(pk, x, enc_y, cfg)
                assert _open(keypair, blocked.total) == _open(
                    keypair, unblocked)
                assert [_open(keypair, c) for c in blocked.per_block
                        ] == quantized_block_inners(x, y, schema, cfg)
                if k == 1:
                    assert _open(keypair, blocked.per_block[0]) == _open(
                        keypair, blocked.total)


def test_weighted_hand_example(keypair, rng):
    schema = BlockSchema.equal_partition(2, k=2)
    cfg = ScaleConfig(16, 8, 8.0)
    x = _vec([1, 1], schema, "x")
    y = _vec([2, 3], schema, "y")
    enc_y = encrypt_vector(y, keypair.public, cfg, rng)
    c = weighted_similarity(keypair.public, x, enc_y, schema,
                            WeightVector((2.0, 5.0)), cfg)
    assert decode_product(_open(keypair, c), cfg, weighted=True) == 19.0


def test_weighted_degenerate_and_selector(keypair, cfg, schema, rng):
    pk = keypair.public
    x, y = random_pairs(8, schema, 1)[0]
    enc_y = encrypt_vector(y, pk, cfg, rng)
    blocked = blocked_similarity(pk, x, enc_y, schema, cfg)

    unit = weighted_similarity(pk, x, enc_y, schema,
                               WeightVector.uniform(schema), cfg, blocked)
    assert _open(keypair, unit) == _open(keypair,
                                         blocked.total) * cfg.weight_scale

    for i, label in enumerate(schema.labels):
        one_hot = weighted_similarity(pk, x, enc_y, schema,
                                      WeightVector.one_hot(schema, label), cfg)
        assert _open(keypair, one_hot) == _open(
            keypair, blocked.per_block[i]) * cfg.weight_scale


def test_zero_weight_ignores_block(keypair, cfg, schema, rng):
    pk = keypair.public
    x, y = random_pairs(9, schema, 1)[0]
    enc_x = encrypt_vector(x, pk, cfg, rng)
    weights = WeightVector.from_mapping(schema, {
        "rhythm": 1.5,
        "melody": 0.0,
        "harmony": 0.25,
        "timbre": 2.0
    })
    mutated = y.values.copy()
    mutated[schema.block("melody").slice] = 3.0
    y2 = _vec(mutated, schema, "y2")
    a = weighted_similarity(pk, enc_x, y, schema, weights, cfg)
    b = weighted_similarity(pk, enc_x, y2, schema, weights, cfg)
    assert _open(keypair, a) == _open(keypair, b)
    assert _open(keypair, a) == quantized_weighted(x, y, schema, weights, cfg)


def test_weight_length_mismatch(keypair, cfg, schema, rng):
    x, y = random_pairs(10, schema, 1)[0]
    enc_y = encrypt_vector(y, keypair.public, cfg, rng)
    with pytest.raises(ValidationError):
        weighted_similarity(keypair.public, x, enc_y, schema,
                            WeightVector((1.0, 1.0)), cfg)


def test_linearity(keypair, cfg, schema, rng):
    pk = keypair.public
    r = np.random.default_rng(11)
    x = grid_vector(r, schema, "x")
    y = grid_vector(r, schema, "y", scale=1.0)
    z = grid_vector(r, schema, "z", scale=1.0)
    yz = _vec(y.values + z.values, schema, "yz")

    def score(v):
        return _open(keypair,
                     encdb_inner(pk, x, encrypt_vector(v, pk, cfg, rng), cfg))

    assert score(yz) == score(y) + score(z)


def test_evaluator_kinds(keypair, cfg, schema, rng):
    pk = keypair.public
    x, y = random_pairs(12, schema, 1)[0]
    enc_x = encrypt_vector(x, pk, cfg, rng)
    evaluator = Evaluator(pk, schema, cfg)
    opener = Opener(keypair, cfg)

    plain = opener.open(evaluator.evaluate(enc_x, y))
    blocked = opener.open(evaluator.evaluate(enc_x, y, "blocked"))
    weights = WeightVector.preset("groove", schema)
    weighted = opener.open(evaluator.evaluate(enc_x, y, "weighted", weights))
    assert plain.raw == blocked.raw == quantized_inner(x, y, cfg)
    assert plain.setting is Setting.encrypted_query
    assert blocked.kind is ScoreKind.blocked
    assert weighted.raw == quantized_weighted(x, y, schema, weights, cfg)

    explained = opener.open(
        evaluator.evaluate(enc_x, y, "plain", per_block=True))
    assert explained.raw == plain.raw
    assert sum(explained.per_block) == pytest.approx(plain.value, abs=1e-9)

    with pytest.raises(ValidationError):
        evaluator.evaluate(enc_x, y, "weighted")
    with pytest.raises(ValidationError):
        evaluator.evaluate(enc_x, y, "cosine")


def test_common_scale(keypair, cfg, schema, rng):
    pk = keypair.public
    x, y = random_pairs(13, schema, 1)[0]
    enc_y = encrypt_vector(y, pk, cfg, rng)
    opener = Opener(keypair, cfg)
    plain = opener.open(Evaluator(pk, schema, cfg).evaluate(x, enc_y))
    promoted = Evaluator(pk, schema, cfg,
                         common_scale=True).evaluate(x, enc_y)
    assert promoted.weighted_scale
    opened = opener.open(promoted)
    assert opened.raw == plain.raw * cfg.weight_scale
    assert opened.value == plain.value
