import random

import gmpy2
import pytest

from ahesim.crypto import (Ciphertext, SeededRandomSource, SystemRandomSource,
                           encrypt, decrypt, add_ct, sum_ct, scalar_mul,
                           fold_scalar_mul, rerandomize, to_residue,
                           from_residue)
from ahesim.crypto.paillier import FOLD_LIMIT
from ahesim.errors import (ValidationError, KeyMismatchError,
                           DegenerateCiphertextError)


def _cases(full_scale: bool) -> int:
    return 1000 if full_scale else 100


def _plaintexts(keypair, count, seed, bits=200):
    r = random.Random(seed)
    return [r.randrange(-(1 << bits), 1 << bits) for _ in range(count)]


def test_round_trip_edges(keypair, rng):
    pk, sk = keypair.public, keypair.private
    for m in [0, 1, -1, 12345, -12345, pk.max_plaintext, -pk.max_plaintext]:
        assert decrypt(sk, pk, encrypt(pk, m, rng)) == m


def test_round_trip(keypair, full_scale):
    pk, sk = keypair.public, keypair.private
    rng = SeededRandomSource(1)
    for m in _plaintexts(keypair, _cases(full_scale), 1):
        assert decrypt(sk, pk, encrypt(pk, m, rng)) == m


def test_additive_homomorphism(keypair, full_scale):
    pk, sk = keypair.public, keypair.private
    rng = SeededRandomSource(2)
    ms = _plaintexts(keypair, 2 * _cases(full_scale), 2)
    for a, b in zip(ms[::2], ms[1::2]):
        c = add_ct(pk, encrypt(pk, a, rng), encrypt(pk, b, rng))
        assert decrypt(sk, pk, c) == a + b


def test_scalar_homomorphism(keypair, full_scale):
    pk, sk = keypair.public, keypair.private
    rng = SeededRandomSource(3)
    r = random.Random(3)
    for _ in range(_cases(full_scale)):
        m = r.randrange(-(1 << 100), 1 << 100)
        s = r.randrange(-(1 << 100), 1 << 100)
        assert decrypt(sk, pk, scalar_mul(pk, encrypt(pk, m, rng), s)) == m * s


def test_scalar_mul_matches_repeated_addition(keypair, full_scale):
    pk, sk = keypair.public, keypair.private
    rng = SeededRandomSource(4)
    r = random.Random(4)
    rounds = 16 if full_scale else 1
    for _ in range(rounds):
        c = encrypt(pk, r.randrange(-1000, 1000), rng)
        for s in range(0, 65):
            fast = scalar_mul(pk, c, s)
            slow = fold_scalar_mul(pk, c, s)
            # same residue, not just the same plaintext
            assert fast.value == slow.value
            assert decrypt(sk, pk, fast) == decrypt(sk, pk, slow)


def test_fold_negative_and_limit(keypair, rng):
    pk, sk = keypair.public, keypair.private
    c = encrypt(pk, 7, rng)
    assert decrypt(sk, pk, fold_scalar_mul(pk, c, -5)) == -35
    with pytest.raises(ValidationError):
        fold_scalar_mul(pk, c, FOLD_LIMIT + 1)


def test_scalar_zero_is_trivial_encryption(keypair, rng):
    pk, sk = keypair.public, keypair.private
    c = scalar_mul(pk, encrypt(pk, 99, rng), 0)
    assert c.value == 1
    assert decrypt(sk, pk, c) == 0


def test_negative_scalar(keypair, rng):
    pk, sk = keypair.public, keypair.private
    c = encrypt(pk, 21, rng)
    assert decrypt(sk, pk, scalar_mul(pk, c, -2)) == -42
    assert decrypt(sk, pk, scalar_mul(pk, c, -1)) == -21


def test_degenerate_ciphertext(keypair):
    pk = keypair.public
    # a multiple of n shares a factor with n², so it has no inverse
    degenerate = Ciphertext(value=pk.n, key_id=pk.key_id)
    with pytest.raises(DegenerateCiphertextError):
        scalar_mul(pk, degenerate, -3)
    # non-negative scalars never need the inverse
    scalar_mul(pk, degenerate, 3)


def test_plaintext_range(keypair, rng):
    pk = keypair.public
    with pytest.raises(ValidationError):
        encrypt(pk, pk.max_plaintext + 1, rng)
    with pytest.raises(ValidationError):
        to_residue(-(pk.max_plaintext + 1), pk)
    assert from_residue(to_residue(-5, pk), pk) == -5
    assert from_residue(pk.max_plaintext + 1, pk) < 0


def test_sum_ct(keypair, rng):
    pk, sk = keypair.public, keypair.private
    values = [3, -8, 100, 0, 41]
    total = sum_ct(pk, [encrypt(pk, v, rng) for v in values])
    assert decrypt(sk, pk, total) == sum(values)
    with pytest.raises(ValidationError):
        sum_ct(pk, [])


def test_key_mismatch(keypair, other_keypair, rng):
    pk, sk = keypair.public, keypair.private
    foreign = encrypt(other_keypair.public, 5, rng)
    mine = encrypt(pk, 5, rng)
    with pytest.raises(KeyMismatchError):
        add_ct(pk, mine, foreign)
    with pytest.raises(KeyMismatchError):
        scalar_mul(pk, foreign, 3)
    with pytest.raises(KeyMismatchError):
        decrypt(sk, pk, foreign)
    with pytest.raises(KeyMismatchError):
        decrypt(other_keypair.private, pk, mine)


def test_encryption_is_probabilistic(keypair):
    pk, sk = keypair.public, keypair.private
    source = SystemRandomSource()
    a, b = encrypt(pk, 77, source), encrypt(pk, 77, source)
    assert a.value != b.value
    assert decrypt(sk, pk, a) == decrypt(sk, pk, b) == 77


def test_seeded_encryption_is_reproducible(keypair):
    pk = keypair.public
    a = encrypt(pk, 1234, SeededRandomSource(99))
    b = encrypt(pk, 1234, SeededRandomSource(99))
    c = encrypt(pk, 1234, SeededRandomSource(100))
    assert a == b
    assert a != c


def test_rerandomize(keypair, rng):
    pk, sk = keypair.public, keypair.private
    c = encrypt(pk, -600, rng)
    fresh = rerandomize(pk, c, rng)
    assert fresh.value != c.value
    assert decrypt(sk, pk, fresh) == -600


def test_ciphertext_serialization(keypair, other_keypair, rng):
    pk = keypair.public
    c = encrypt(pk, 31337, rng)
    assert Ciphertext.from_hex(c.to_hex(), pk) == c
    assert Ciphertext.from_json(c.to_json(), pk) == c
    assert len(c.to_bytes(pk.ciphertext_bytes)) == pk.ciphertext_bytes
    with pytest.raises(ValidationError):
        Ciphertext.from_hex("0x1234", pk)
    with pytest.raises(ValidationError):
        Ciphertext.from_hex(format(int(pk.n_squared), "x"), pk)
    with pytest.raises(KeyMismatchError):
        Ciphertext.from_json(c.to_json(), other_keypair.public)


def test_decrypt_rejects_zero(keypair):
    pk, sk = keypair.public, keypair.private
    with pytest.raises(ValidationError):
        decrypt(sk, pk, Ciphertext(value=gmpy2.mpz(0), key_id=pk.key_id))
